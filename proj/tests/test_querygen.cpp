#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rttp/querygen.hpp"
#include "rttp/rand_util.hpp"

using namespace rttp;
using namespace rttp::gen;

namespace {

// Exhaustive-enumeration oracle for the extractive rule, written against the
// contract rather than the implementation: candidates are all 1..4-word
// n-grams of the normalized title and first body sentence; score is length
// plus 2 when the text is an n-gram of the title; order by score desc,
// discovery position asc, text asc; dedup keeps the earliest discovery.
std::vector<std::string> oracle_extractive(const std::string& title, const std::string& body,
                                           std::size_t k) {
    auto words_of = [](const std::string& text) {
        std::istringstream in(normalize_query(text));
        std::vector<std::string> words;
        std::string w;
        while (in >> w) words.push_back(w);
        return words;
    };
    auto first_sentence = [](const std::string& text) {
        for (std::size_t i = 0; i < text.size(); ++i) {
            if ((text[i] == '.' || text[i] == '!' || text[i] == '?') &&
                (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))))
                return text.substr(0, i + 1);
        }
        return text;
    };

    const auto title_words = words_of(title);
    const auto body_words = words_of(first_sentence(body));

    std::set<std::string> title_set;
    for (std::size_t s = 0; s < title_words.size(); ++s) {
        for (std::size_t n = 1; n <= 4 && s + n <= title_words.size(); ++n) {
            std::string t = title_words[s];
            for (std::size_t i = 1; i < n; ++i) t += " " + title_words[s + i];
            title_set.insert(t);
        }
    }

    struct Cand {
        std::string text;
        int score;
        std::size_t pos;
    };
    std::vector<Cand> cands;
    std::set<std::string> seen;
    std::size_t pos = 0;
    for (const auto* words : {&title_words, &body_words}) {
        for (std::size_t s = 0; s < words->size(); ++s) {
            for (std::size_t n = 1; n <= 4 && s + n <= words->size(); ++n) {
                std::string t = (*words)[s];
                for (std::size_t i = 1; i < n; ++i) t += " " + (*words)[s + i];
                if (seen.insert(t).second) {
                    const int score = static_cast<int>(n) + (title_set.count(t) ? 2 : 0);
                    cands.push_back({t, score, pos});
                }
                ++pos;
            }
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.pos != b.pos) return a.pos < b.pos;
        return a.text < b.text;
    });
    std::vector<std::string> out;
    for (const auto& c : cands) {
        out.push_back(c.text);
        if (out.size() == k) break;
    }
    return out;
}

std::vector<std::string> texts_of(const GeneratorResponse& resp) {
    std::vector<std::string> out;
    for (const auto& q : resp.queries) out.push_back(q.text);
    return out;
}

}  // namespace

TEST_CASE("extractive examples") {
    ExtractiveGenerator gen;

    auto resp = gen.generate({"p1", "mounts of mayhem", "", 3});
    CHECK(texts_of(resp) ==
          std::vector<std::string>{"mounts of mayhem", "mounts of", "of mayhem"});
    CHECK(resp.queries[0].rank == 1);
    CHECK(resp.queries[2].rank == 3);
    CHECK(resp.queries[0].generator_id == "extractive");

    CHECK(texts_of(gen.generate({"p2", "minecraft", "", 3})) ==
          std::vector<std::string>{"minecraft"});

    CHECK(texts_of(gen.generate({"p3", "x", "", 1})) == std::vector<std::string>{"x"});

    // full title dominates, then longest n-grams by earlier position
    auto taylor = gen.generate({"p4", "Taylor Swift announces tour", "", 3});
    CHECK(texts_of(taylor) == oracle_extractive("Taylor Swift announces tour", "", 3));
    CHECK(taylor.queries[0].text == "taylor swift announces tour");

    CHECK_THROWS_AS(gen.generate({"p5", "", "", 3}), std::invalid_argument);
    CHECK_THROWS_AS(gen.generate({"p6", "x", "", 0}), std::invalid_argument);
}

TEST_CASE("extractive matches enumeration oracle on random inputs") {
    static const char* kWords[] = {"alpha", "beta", "gamma", "delta", "echo",
                                   "fox",   "golf", "hotel", "india"};
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        auto make_text = [&](std::size_t max_words) {
            std::string out;
            const std::size_t n = rnd::uniform_index(rng, max_words + 1);
            for (std::size_t i = 0; i < n; ++i) {
                if (!out.empty()) out += ' ';
                out += kWords[rnd::uniform_index(rng, 9)];
            }
            return out;
        };
        const std::string title = make_text(5);
        std::string body = make_text(6);
        if (!body.empty() && rnd::bernoulli(rng, 0.5)) body += ". trailing sentence ignored";
        if (title.empty() && body.empty()) continue;
        const std::size_t k = 1 + rnd::uniform_index(rng, 6);

        ExtractiveGenerator gen;
        CAPTURE(title);
        CAPTURE(body);
        CAPTURE(k);
        CHECK(texts_of(gen.generate({"p", title, body, k})) == oracle_extractive(title, body, k));
    }
}

TEST_CASE("extractive first-sentence boundary") {
    ExtractiveGenerator gen;
    // only "first part" feeds candidates; "second part" is beyond the sentence split
    auto resp = gen.generate({"p", "zzz", "first part. second part", 10});
    for (const auto& q : resp.queries) {
        CHECK(q.text.find("second") == std::string::npos);
    }
    // identical title and first body sentence add nothing new
    auto same = gen.generate({"p", "alpha beta", "alpha beta", 10});
    auto title_only = gen.generate({"p", "alpha beta", "", 10});
    CHECK(texts_of(same) == texts_of(title_only));
}

TEST_CASE("template generator expansion ordering") {
    KnowledgeTable table{{"mounts of mayhem", {"minecraft"}}};
    TemplateGenerator gen(table);

    auto resp = gen.generate({"p1", "mounts of mayhem", "", 3});
    CHECK(texts_of(resp) ==
          std::vector<std::string>{"minecraft", "mounts of mayhem", "mounts of"});
    CHECK(resp.queries[0].rank == 1);
}

TEST_CASE("template generator reduces to extractive without knowledge") {
    TemplateGenerator gen(KnowledgeTable{});
    ExtractiveGenerator plain;
    for (const auto* title : {"mounts of mayhem", "taylor swift announces tour", "minecraft"}) {
        CHECK(texts_of(gen.generate({"p", title, "", 3})) ==
              texts_of(plain.generate({"p", title, "", 3})));
    }
}

TEST_CASE("template generator dedups a term matched in title and body") {
    KnowledgeTable table{{"mounts of mayhem", {"minecraft"}}};
    TemplateGenerator gen(table);
    auto resp = gen.generate({"p", "mounts of mayhem", "mounts of mayhem again", 5});
    int count = 0;
    for (const auto& q : resp.queries) count += q.text == "minecraft";
    CHECK(count == 1);
}

TEST_CASE("template expansion does not fire on partial term") {
    KnowledgeTable table{{"mounts of mayhem", {"minecraft"}}};
    TemplateGenerator gen(table);
    auto resp = gen.generate({"p", "mounts of chaos", "", 3});
    for (const auto& q : resp.queries) CHECK(q.text != "minecraft");
}

TEST_CASE("generator contract properties") {
    std::mt19937_64 rng(47);
    KnowledgeTable table{{"alpha beta", {"expansion one", "expansion two"}}};
    ExtractiveGenerator extractive;
    TemplateGenerator templ(table);
    static const char* kWords[] = {"alpha", "beta", "gamma", "delta", "echo"};

    for (int trial = 0; trial < 300; ++trial) {
        std::string title;
        const std::size_t n = 1 + rnd::uniform_index(rng, 5);
        for (std::size_t i = 0; i < n; ++i) {
            if (!title.empty()) title += ' ';
            title += kWords[rnd::uniform_index(rng, 5)];
        }
        const std::size_t k = 1 + rnd::uniform_index(rng, 5);
        GeneratorRequest req{"p", title, "", k};

        for (QueryGenerator* gen : {static_cast<QueryGenerator*>(&extractive),
                                    static_cast<QueryGenerator*>(&templ)}) {
            const auto resp = gen->generate(req);
            CHECK(resp.queries.size() <= k);
            std::set<std::string> seen;
            for (std::size_t i = 0; i < resp.queries.size(); ++i) {
                const auto& q = resp.queries[i];
                CHECK(q.rank == i + 1);
                CHECK(normalize_query(q.text) == q.text);
                CHECK(seen.insert(q.text).second);
            }
            // purity: identical calls are byte-identical
            const auto again = gen->generate(req);
            CHECK(texts_of(again) == texts_of(resp));
        }
    }
}

TEST_CASE("knowledge table loading") {
    const std::string path = "test_knowledge.jsonl";
    {
        std::ofstream out(path);
        out << R"({"term": "Mounts of Mayhem", "queries": ["Minecraft", "minecraft", ""]})" << "\n";
        out << R"({"term": "alpha", "queries": ["beta gamma"]})" << "\n";
    }
    const auto table = load_knowledge(path);
    REQUIRE(table.count("mounts of mayhem") == 1);
    CHECK(table.at("mounts of mayhem") == std::vector<std::string>{"minecraft"});
    CHECK(table.at("alpha") == std::vector<std::string>{"beta gamma"});
    std::remove(path.c_str());

    CHECK_THROWS_WITH(load_knowledge("does_not_exist.jsonl"),
                      "knowledge file not found: does_not_exist.jsonl");
}
