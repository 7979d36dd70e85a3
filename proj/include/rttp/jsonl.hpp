#pragma once

// JSONL ingestion format: one UTF-8 JSON object per line, field names as in
// the record schemas below, timestamps as integers, enums as lowercase
// strings. Optional fields are omitted when absent.

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rttp/domain.hpp"

namespace rttp {

using json = nlohmann::json;

inline void to_json(json& j, const AuthoritySignal& s) {
    j = json{{"signal_name", s.signal_name}, {"value", s.value}};
}
inline void from_json(const json& j, AuthoritySignal& s) {
    j.at("signal_name").get_to(s.signal_name);
    j.at("value").get_to(s.value);
}

inline void to_json(json& j, const Creator& c) {
    j = json{{"creator_id", c.creator_id},
             {"follower_count", c.follower_count},
             {"authority_signals", c.authority_signals}};
}
inline void from_json(const json& j, Creator& c) {
    j.at("creator_id").get_to(c.creator_id);
    j.at("follower_count").get_to(c.follower_count);
    c.authority_signals = j.value("authority_signals", std::vector<AuthoritySignal>{});
}

inline void to_json(json& j, const Post& p) {
    j = json{{"post_id", p.post_id},
             {"creator_id", p.creator_id},
             {"title", p.title},
             {"body", p.body},
             {"created_at", p.created_at},
             {"ground_truth_queries", p.ground_truth_queries}};
}
inline void from_json(const json& j, Post& p) {
    j.at("post_id").get_to(p.post_id);
    j.at("creator_id").get_to(p.creator_id);
    p.title = j.value("title", std::string{});
    p.body = j.value("body", std::string{});
    j.at("created_at").get_to(p.created_at);
    p.ground_truth_queries.clear();
    if (j.contains("ground_truth_queries"))
        j.at("ground_truth_queries").get_to(p.ground_truth_queries);
}

inline void to_json(json& j, const EngagementEvent& e) {
    j = json{{"post_id", e.post_id},
             {"kind", to_string(e.kind)},
             {"occurred_at", e.occurred_at},
             {"actor_id", e.actor_id}};
}
inline void from_json(const json& j, EngagementEvent& e) {
    j.at("post_id").get_to(e.post_id);
    e.kind = engagement_kind_from_string(j.at("kind").get<std::string>());
    j.at("occurred_at").get_to(e.occurred_at);
    e.actor_id = j.value("actor_id", std::string{});
}

inline void to_json(json& j, const Location& loc) {
    j = json{{"country", loc.country}};
    if (loc.state) j["state"] = *loc.state;
}
inline void from_json(const json& j, Location& loc) {
    j.at("country").get_to(loc.country);
    if (j.contains("state") && !j.at("state").is_null())
        loc.state = j.at("state").get<std::string>();
    else
        loc.state.reset();
}

inline void to_json(json& j, const GeneratedQuery& q) {
    j = json{{"post_id", q.post_id},
             {"text", q.text},
             {"rank", q.rank},
             {"generator_id", q.generator_id}};
    if (q.location) j["location"] = *q.location;
}
inline void from_json(const json& j, GeneratedQuery& q) {
    j.at("post_id").get_to(q.post_id);
    j.at("text").get_to(q.text);
    j.at("rank").get_to(q.rank);
    q.generator_id = j.value("generator_id", std::string{});
    if (j.contains("location") && !j.at("location").is_null())
        q.location = j.at("location").get<Location>();
    else
        q.location.reset();
}

inline void to_json(json& j, const SearchLogEntry& s) {
    j = json{{"query", s.query}, {"occurred_at", s.occurred_at}};
    if (s.engaged_post_id) j["engaged_post_id"] = *s.engaged_post_id;
}
inline void from_json(const json& j, SearchLogEntry& s) {
    j.at("query").get_to(s.query);
    j.at("occurred_at").get_to(s.occurred_at);
    if (j.contains("engaged_post_id") && !j.at("engaged_post_id").is_null())
        s.engaged_post_id = j.at("engaged_post_id").get<std::string>();
    else
        s.engaged_post_id.reset();
}

inline void to_json(json& j, const TrendCandidate& c) {
    j = json{{"query", c.query},
             {"window_start", c.window_start},
             {"window_length", c.window_length},
             {"score", c.score},
             {"search_volume", c.search_volume},
             {"supporting_posts", c.supporting_posts},
             {"source", to_string(c.source)}};
}
inline void from_json(const json& j, TrendCandidate& c) {
    j.at("query").get_to(c.query);
    j.at("window_start").get_to(c.window_start);
    j.at("window_length").get_to(c.window_length);
    j.at("score").get_to(c.score);
    j.at("search_volume").get_to(c.search_volume);
    c.supporting_posts = j.value("supporting_posts", std::vector<std::string>{});
    c.source = candidate_source_from_string(j.at("source").get<std::string>());
}

namespace jsonl {

template <typename T>
void write_file(const std::string& path, const std::vector<T>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& r : records) {
        out << json(r).dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

template <typename T>
std::vector<T> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::vector<T> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(json::parse(line).get<T>());
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

// Streaming variant for large event files.
template <typename T>
void for_each(const std::string& path, const std::function<void(T&&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            fn(json::parse(line).get<T>());
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

}  // namespace jsonl
}  // namespace rttp
