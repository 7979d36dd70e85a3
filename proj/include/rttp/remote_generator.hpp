#pragma once

// HTTP-backed generator. POSTs {post_id, title, body, max_queries} and
// expects {queries: [{text, rank}], location: {country, state}}; texts are
// normalized and deduplicated locally before use.
//
// Failure contract: transport errors and 5xx retry with exponential backoff
// and end in GeneratorUnavailable; malformed bodies and 4xx raise
// ProtocolViolation carrying the raw payload for logs. Either way the
// pipeline skips the post, it never crashes.

#include <chrono>
#include <cstdint>
#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rttp/querygen.hpp"

namespace rttp::gen {

struct GeneratorUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProtocolViolation : std::runtime_error {
    ProtocolViolation(const std::string& msg, std::string payload)
        : std::runtime_error(msg), raw_payload(std::move(payload)) {}
    std::string raw_payload;
};

struct RemoteEndpointConfig {
    std::string url;  // http://host:port/path
    double timeout_sec = 10.0;
    unsigned retries = 2;
    unsigned backoff_base_ms = 500;
    unsigned max_in_flight = 8;
    std::string bearer_token;  // optional; sent as Authorization: Bearer ...
};

class RemoteGenerator final : public QueryGenerator {
  public:
    explicit RemoteGenerator(RemoteEndpointConfig cfg)
        : cfg_(std::move(cfg)), in_flight_(cfg_.max_in_flight > 0 ? cfg_.max_in_flight : 1) {
        parse_url();
    }

    GeneratorResponse generate(const GeneratorRequest& req) override {
        req.validate();
        in_flight_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{in_flight_};

        const nlohmann::json body{{"post_id", req.post_id},
                                  {"title", req.title},
                                  {"body", req.body},
                                  {"max_queries", req.max_queries}};
        const std::string payload = body.dump();

        std::string response_body;
        bool got_response = false;
        for (unsigned attempt = 0; attempt <= cfg_.retries; ++attempt) {
            if (attempt > 0) {
                const auto delay =
                    std::chrono::milliseconds(cfg_.backoff_base_ms) * (1u << (attempt - 1));
                std::this_thread::sleep_for(delay);
            }
            httplib::Client client(host_, port_);
            client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_sec));
            client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_sec));
            httplib::Headers headers;
            if (!cfg_.bearer_token.empty())
                headers.emplace("Authorization", "Bearer " + cfg_.bearer_token);
            auto res = client.Post(path_, headers, payload, "application/json");
            if (!res || res->status >= 500) continue;  // transport error or server-side failure
            if (res->status != 200) {
                throw ProtocolViolation(
                    "protocol violation: status " + std::to_string(res->status), res->body);
            }
            response_body = res->body;
            got_response = true;
            break;
        }
        if (!got_response) throw GeneratorUnavailable("generator unavailable");
        return parse_response(req, response_body);
    }

    std::string id() const override { return "remote"; }

  private:
    void parse_url() {
        std::string rest = cfg_.url;
        const std::string scheme = "http://";
        if (rest.rfind(scheme, 0) != 0)
            throw std::invalid_argument("remote url must start with http://: " + cfg_.url);
        rest = rest.substr(scheme.size());
        const auto slash = rest.find('/');
        std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
        path_ = slash == std::string::npos ? "/" : rest.substr(slash);
        const auto colon = hostport.find(':');
        if (colon == std::string::npos) {
            host_ = hostport;
            port_ = 80;
        } else {
            host_ = hostport.substr(0, colon);
            port_ = std::stoi(hostport.substr(colon + 1));
        }
        if (host_.empty()) throw std::invalid_argument("remote url has no host: " + cfg_.url);
    }

    GeneratorResponse parse_response(const GeneratorRequest& req, const std::string& body) const {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const std::exception&) {
            throw ProtocolViolation("protocol violation: response is not JSON", body);
        }
        if (!j.is_object() || !j.contains("queries") || !j["queries"].is_array()) {
            throw ProtocolViolation("protocol violation: missing queries array", body);
        }

        struct Entry {
            std::string text;
            std::int64_t rank;
        };
        std::vector<Entry> entries;
        for (const auto& q : j["queries"]) {
            if (!q.is_object() || !q.contains("text") || !q.contains("rank") ||
                !q["text"].is_string() || !q["rank"].is_number_integer()) {
                throw ProtocolViolation("protocol violation: malformed query entry", body);
            }
            entries.push_back(Entry{q["text"].get<std::string>(), q["rank"].get<std::int64_t>()});
        }
        std::stable_sort(entries.begin(), entries.end(),
                         [](const Entry& a, const Entry& b) { return a.rank < b.rank; });

        std::vector<std::string> texts;
        texts.reserve(entries.size());
        for (auto& e : entries) texts.push_back(normalize_query(e.text));
        GeneratorResponse resp = detail::finalize(req, std::move(texts), "remote");

        if (j.contains("location") && j["location"].is_object()) {
            const auto& loc = j["location"];
            if (loc.contains("country") && loc["country"].is_string()) {
                Location l;
                l.country = loc["country"].get<std::string>();
                if (loc.contains("state") && loc["state"].is_string())
                    l.state = loc["state"].get<std::string>();
                resp.location = l;
                for (auto& q : resp.queries) q.location = l;
            }
        }
        return resp;
    }

    RemoteEndpointConfig cfg_;
    std::string host_;
    std::string path_;
    int port_ = 80;
    std::counting_semaphore<> in_flight_;
};

}  // namespace rttp::gen
