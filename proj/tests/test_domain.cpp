#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "rttp/domain.hpp"
#include "rttp/jsonl.hpp"
#include "rttp/rand_util.hpp"

using namespace rttp;

namespace {

// Independent ASCII-only reference for the normalization rules, applied
// character by character: lowercase, keep alnum, map whitespace to ' ',
// keep '/' and '-' only between alnum neighbors (checked on the filtered
// sequence), collapse runs, trim, empty unless a letter/digit survives.
std::string ascii_reference_normalize(const std::string& raw) {
    std::string filtered;
    for (unsigned char c : raw) {
        if (std::isalnum(c)) filtered += static_cast<char>(std::tolower(c));
        else if (std::isspace(c)) filtered += ' ';
        else if (c == '\'' || c == '-') filtered += static_cast<char>(c);
    }
    auto alnum_at = [&](std::size_t i) {
        return std::isalnum(static_cast<unsigned char>(filtered[i])) != 0;
    };
    std::string kept;
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        const char c = filtered[i];
        if (c == '\'' || c == '-') {
            if (i == 0 || i + 1 == filtered.size() || !alnum_at(i - 1) || !alnum_at(i + 1))
                continue;
        }
        kept += c;
    }
    std::string out;
    bool prev_space = true;
    bool has_alnum = false;
    for (char c : kept) {
        if (c == ' ') {
            if (!prev_space) out += ' ';
            prev_space = true;
            continue;
        }
        if (std::isalnum(static_cast<unsigned char>(c))) has_alnum = true;
        out += c;
        prev_space = false;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return has_alnum ? out : std::string{};
}

std::string encode_utf8(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

}  // namespace

TEST_CASE("normalize_query canonical examples") {
    CHECK(normalize_query("  Taylor   SWIFT  ") == "taylor swift");
    CHECK(normalize_query("minecraft") == "minecraft");
    CHECK(normalize_query("Mounts of Mayhem!!!") == "mounts of mayhem");
}

TEST_CASE("normalize_query keeps intra-word apostrophes and hyphens") {
    CHECK(normalize_query("O'Brien") == "o'brien");
    CHECK(normalize_query("Spider-Man: No Way Home") == "spider-man no way home");
    CHECK(normalize_query("'quoted'") == "quoted");
    CHECK(normalize_query("a - b") == "a b");
    CHECK(normalize_query("rock 'n' roll") == "rock n roll");
    CHECK(normalize_query("--") == "");
}

TEST_CASE("normalize_query empty results") {
    CHECK(normalize_query("") == "");
    CHECK(normalize_query("   ") == "");
    CHECK(normalize_query("!!! ??? ...") == "");
}

TEST_CASE("normalize_query matches ASCII reference on random printable strings") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string s;
        const std::size_t len = rnd::uniform_index(rng, 24);
        for (std::size_t i = 0; i < len; ++i) {
            s += static_cast<char>(32 + rnd::uniform_index(rng, 95));
        }
        CAPTURE(s);
        CHECK(normalize_query(s) == ascii_reference_normalize(s));
    }
}

TEST_CASE("normalize_query is idempotent on random unicode strings") {
    // codepoint pools: ascii, punctuation, combining marks, fullwidth forms,
    // ligatures, CJK, hangul jamo, spaces, emoji
    const std::vector<std::pair<char32_t, char32_t>> ranges = {
        {0x20, 0x7E},     {0xA0, 0xFF},     {0x300, 0x36F},   {0x1100, 0x1112},
        {0x1161, 0x1175}, {0x2000, 0x200A}, {0x3040, 0x309F}, {0x4E00, 0x4E2F},
        {0xFB00, 0xFB06}, {0xFF01, 0xFF5E}, {0x1F300, 0x1F320}};
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 3000; ++trial) {
        std::string s;
        const std::size_t len = rnd::uniform_index(rng, 16);
        for (std::size_t i = 0; i < len; ++i) {
            const auto& r = ranges[rnd::uniform_index(rng, ranges.size())];
            const char32_t cp =
                r.first + static_cast<char32_t>(rnd::uniform_index(rng, r.second - r.first + 1));
            s += encode_utf8(cp);
        }
        const std::string once = normalize_query(s);
        CAPTURE(s);
        CHECK(normalize_query(once) == once);
    }
}

#ifdef RTTP_HAVE_ICU
TEST_CASE("normalize_query folds compatibility forms") {
    CHECK(normalize_query("ＭＩＮＥＣＲＡＦＴ") == "minecraft");  // fullwidth
    CHECK(normalize_query("ﬁre") == "fire");                       // ligature
    CHECK(normalize_query("café") == normalize_query("café"));  // NFC vs NFD
}
#endif

TEST_CASE("engagement kind round trip") {
    for (EngagementKind k : kAllEngagementKinds) {
        CHECK(engagement_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(engagement_kind_from_string("like"), std::invalid_argument);
}

TEST_CASE("type invariants") {
    Creator c;
    c.creator_id = "";
    CHECK_THROWS_WITH(c.validate(), "creator_id must be non-empty");
    c.creator_id = "c1";
    c.authority_signals.push_back({"verified", -1.0});
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.authority_signals.back().value = 0.5;
    CHECK_NOTHROW(c.validate());

    Post p;
    p.post_id = "p1";
    p.created_at = 0;
    CHECK_THROWS_WITH(p.validate(), "created_at must be > 0");
    p.created_at = 10;
    p.ground_truth_queries = {"Taylor Swift"};  // not normalized
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.ground_truth_queries = {"taylor swift"};
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("jsonl round trip for every record schema") {
    Creator c{"creator-1", 1000, {{"meta_verified", 0.5}, {"publisher_score", 1.25}}};
    Post p{"post-1", "creator-1", "Mounts of Mayhem", "A building game story.", 7200,
           {"minecraft", "mounts of mayhem"}};
    EngagementEvent e{"post-1", EngagementKind::comment, 7300, "user-9"};
    GeneratedQuery g{"post-1", "minecraft", 1, Location{"US", "CA"}, "template"};
    GeneratedQuery g2{"post-1", "mounts of mayhem", 2, std::nullopt, "template"};
    SearchLogEntry s{"minecraft", 7400, std::string("post-1")};
    SearchLogEntry s2{"minecraft", 7401, std::nullopt};
    TrendCandidate t{"minecraft", 7200, 3600, 18.5, 12, {"post-1"}, CandidateSource::both};

    CHECK(json(c).get<Creator>().follower_count == 1000);
    CHECK(json(c).get<Creator>().authority_signals.size() == 2);
    CHECK(json(p).get<Post>().ground_truth_queries == p.ground_truth_queries);
    CHECK(json(e).get<EngagementEvent>().kind == EngagementKind::comment);
    CHECK(json(g).get<GeneratedQuery>().location->state.value() == "CA");
    CHECK_FALSE(json(g2).get<GeneratedQuery>().location.has_value());
    CHECK(json(s).get<SearchLogEntry>().engaged_post_id.value() == "post-1");
    CHECK_FALSE(json(s2).get<SearchLogEntry>().engaged_post_id.has_value());
    CHECK(json(t).get<TrendCandidate>().source == CandidateSource::both);
    CHECK(json(t).get<TrendCandidate>().score == 18.5);

    // enums serialize as lowercase strings, timestamps as integers
    CHECK(json(e)["kind"] == "comment");
    CHECK(json(e)["occurred_at"].is_number_integer());
    CHECK(json(t)["source"] == "both");
}

TEST_CASE("jsonl file round trip") {
    const std::string path = "test_domain_roundtrip.jsonl";
    std::vector<Post> posts;
    for (int i = 0; i < 5; ++i) {
        Post p;
        p.post_id = "post-" + std::to_string(i);
        p.creator_id = "creator-1";
        p.title = "title " + std::to_string(i);
        p.created_at = 1000 + i;
        p.ground_truth_queries = {"query " + std::to_string(i)};
        posts.push_back(p);
    }
    jsonl::write_file(path, posts);
    const auto loaded = jsonl::read_file<Post>(path);
    REQUIRE(loaded.size() == posts.size());
    for (std::size_t i = 0; i < posts.size(); ++i) {
        CHECK(loaded[i].post_id == posts[i].post_id);
        CHECK(loaded[i].created_at == posts[i].created_at);
        CHECK(loaded[i].ground_truth_queries == posts[i].ground_truth_queries);
    }
    std::remove(path.c_str());
}
