#pragma once

// Pluggable query generation. The trend pipeline and the preference trainer
// only see this interface, so any backend (including a remote LLM, see
// remote_generator.hpp) can slot in. The two local generators are pure
// functions of their input: byte-identical output for identical calls.
//
//  - ExtractiveGenerator surfaces word n-grams from the title and the first
//    body sentence, favoring longer spans and title hits.
//  - TemplateGenerator layers knowledge-table expansions on top, so a post
//    titled "mounts of mayhem" can still yield "minecraft".

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rttp/domain.hpp"

namespace rttp::gen {

struct GeneratorRequest {
    std::string post_id;
    std::string title;
    std::string body;
    std::size_t max_queries = 3;

    void validate() const {
        if (max_queries < 1) throw std::invalid_argument("max_queries must be >= 1");
        if (title.empty() && body.empty())
            throw std::invalid_argument("generator request needs a title or body");
    }
};

struct GeneratorResponse {
    std::vector<GeneratedQuery> queries;  // ordered by rank, texts normalized, no duplicates
    std::optional<Location> location;
};

class QueryGenerator {
  public:
    virtual ~QueryGenerator() = default;
    // Must be safe for concurrent calls from multiple pipeline workers.
    virtual GeneratorResponse generate(const GeneratorRequest& req) = 0;
    virtual std::string id() const = 0;
};

namespace detail {

inline std::vector<std::string> split_words(const std::string& normalized) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : normalized) {
        if (c == ' ') {
            if (!cur.empty()) words.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

// First sentence = text up to the first '.', '!' or '?' that is followed by
// whitespace (or ends the text).
inline std::string first_sentence(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.' || c == '!' || c == '?') {
            if (i + 1 == text.size() ||
                std::isspace(static_cast<unsigned char>(text[i + 1]))) {
                return text.substr(0, i + 1);
            }
        }
    }
    return text;
}

struct Candidate {
    std::string text;
    int ngram_len = 0;
    bool in_title = false;
    std::size_t position = 0;  // discovery order: title n-grams first, then body
};

inline std::string join_words(const std::vector<std::string>& words, std::size_t start,
                              std::size_t n) {
    std::string out = words[start];
    for (std::size_t i = 1; i < n; ++i) {
        out += ' ';
        out += words[start + i];
    }
    return out;
}

// All 1..4-word n-grams of the normalized title plus the first body
// sentence, scored by length with a title bonus.
inline std::vector<Candidate> extractive_candidates(const GeneratorRequest& req) {
    const std::vector<std::string> title_words = split_words(normalize_query(req.title));
    const std::vector<std::string> body_words =
        split_words(normalize_query(first_sentence(req.body)));

    std::unordered_set<std::string> title_ngrams;
    for (std::size_t start = 0; start < title_words.size(); ++start) {
        for (std::size_t n = 1; n <= 4 && start + n <= title_words.size(); ++n) {
            title_ngrams.insert(join_words(title_words, start, n));
        }
    }

    std::vector<Candidate> candidates;
    std::unordered_map<std::string, std::size_t> index;
    std::size_t position = 0;
    auto scan = [&](const std::vector<std::string>& words) {
        for (std::size_t start = 0; start < words.size(); ++start) {
            for (std::size_t n = 1; n <= 4 && start + n <= words.size(); ++n) {
                std::string text = join_words(words, start, n);
                const bool in_title = title_ngrams.count(text) > 0;
                auto it = index.find(text);
                if (it == index.end()) {
                    index.emplace(text, candidates.size());
                    candidates.push_back(
                        Candidate{std::move(text), static_cast<int>(n), in_title, position});
                } else {
                    candidates[it->second].in_title |= in_title;
                }
                ++position;
            }
        }
    };
    scan(title_words);
    scan(body_words);
    return candidates;
}

inline void rank_candidates(std::vector<Candidate>& candidates) {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        const int sa = a.ngram_len + (a.in_title ? 2 : 0);
        const int sb = b.ngram_len + (b.in_title ? 2 : 0);
        if (sa != sb) return sa > sb;
        if (a.position != b.position) return a.position < b.position;
        return a.text < b.text;
    });
}

inline GeneratorResponse finalize(const GeneratorRequest& req, std::vector<std::string> texts,
                                  const std::string& generator_id) {
    GeneratorResponse resp;
    std::unordered_set<std::string> seen;
    for (auto& t : texts) {
        if (t.empty()) continue;
        if (!seen.insert(t).second) continue;
        GeneratedQuery q;
        q.post_id = req.post_id;
        q.text = std::move(t);
        q.rank = static_cast<std::uint32_t>(resp.queries.size() + 1);
        q.generator_id = generator_id;
        resp.queries.push_back(std::move(q));
        if (resp.queries.size() == req.max_queries) break;
    }
    return resp;
}

}  // namespace detail

class ExtractiveGenerator final : public QueryGenerator {
  public:
    GeneratorResponse generate(const GeneratorRequest& req) override {
        req.validate();
        auto candidates = detail::extractive_candidates(req);
        detail::rank_candidates(candidates);
        std::vector<std::string> texts;
        texts.reserve(candidates.size());
        for (auto& c : candidates) texts.push_back(std::move(c.text));
        return detail::finalize(req, std::move(texts), id());
    }

    std::string id() const override { return "extractive"; }
};

// normalized term -> associated queries, loaded from a JSONL sidecar of
// {"term": ..., "queries": [...]} records.
using KnowledgeTable = std::map<std::string, std::vector<std::string>>;

inline KnowledgeTable load_knowledge(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("knowledge file not found: " + path);
    KnowledgeTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const std::string term = normalize_query(j.at("term").get<std::string>());
        if (term.empty()) continue;
        auto& queries = table[term];
        for (const auto& q : j.at("queries")) {
            std::string nq = normalize_query(q.get<std::string>());
            if (nq.empty()) continue;
            if (std::find(queries.begin(), queries.end(), nq) == queries.end())
                queries.push_back(std::move(nq));
        }
    }
    return table;
}

// Extractive candidates merged with knowledge-table expansions of matched
// terms; expansions rank first. The seed is part of the determinism
// contract, not a entropy source: identical (input, seed, table) calls are
// byte-identical.
class TemplateGenerator final : public QueryGenerator {
  public:
    explicit TemplateGenerator(KnowledgeTable knowledge, std::uint64_t seed = 0)
        : knowledge_(std::move(knowledge)), seed_(seed) {}

    GeneratorResponse generate(const GeneratorRequest& req) override {
        req.validate();
        const std::vector<std::string> title_words =
            detail::split_words(normalize_query(req.title));
        const std::vector<std::string> body_words =
            detail::split_words(normalize_query(detail::first_sentence(req.body)));

        // Matched terms ordered by first occurrence (title before body).
        struct Match {
            std::size_t position;
            const std::string* term;
        };
        std::vector<Match> matches;
        for (const auto& [term, queries] : knowledge_) {
            (void)queries;
            const auto term_words = detail::split_words(term);
            if (term_words.empty()) continue;
            auto find_in = [&](const std::vector<std::string>& words) -> std::optional<std::size_t> {
                if (term_words.size() > words.size()) return std::nullopt;
                for (std::size_t s = 0; s + term_words.size() <= words.size(); ++s) {
                    if (std::equal(term_words.begin(), term_words.end(), words.begin() + s))
                        return s;
                }
                return std::nullopt;
            };
            if (auto pos = find_in(title_words)) {
                matches.push_back(Match{*pos, &term});
            } else if (auto pos = find_in(body_words)) {
                matches.push_back(Match{title_words.size() + 1 + *pos, &term});
            }
        }
        std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
            if (a.position != b.position) return a.position < b.position;
            return *a.term < *b.term;
        });

        std::vector<std::string> texts;
        for (const auto& m : matches) {
            for (const auto& q : knowledge_.at(*m.term)) texts.push_back(q);
        }
        auto candidates = detail::extractive_candidates(req);
        detail::rank_candidates(candidates);
        for (auto& c : candidates) texts.push_back(std::move(c.text));
        return detail::finalize(req, std::move(texts), id());
    }

    std::string id() const override { return "template"; }

  private:
    KnowledgeTable knowledge_;
    std::uint64_t seed_;
};

}  // namespace rttp::gen
