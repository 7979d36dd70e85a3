#pragma once

// Deterministic synthetic world for desk-scale runs: creators with
// heavy-tailed audiences, planted head trends (search-heavy, moderate
// engagement) and tail trends (search-sparse, engagement-rich, authored by
// high-authority creators), Poisson background search noise, and the
// ground-truth labels to score against. Identical seeds produce
// byte-identical output files.
//
// Head trends are detectable from raw volume alone; tail trends are only
// reachable through generated queries plus engagement weighting, which is
// exactly the separation the pipeline comparison needs. A fixed share of
// each trend's posts carries an oblique title whose mapping to the trend
// query lives in a knowledge sidecar, so extractive generation misses them
// while the template generator does not.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rttp/domain.hpp"
#include "rttp/jsonl.hpp"
#include "rttp/rand_util.hpp"
#include "rttp/scoring.hpp"

namespace rttp::sim {

struct WorldConfig {
    std::uint64_t seed = 42;
    std::size_t n_creators = 50;
    std::size_t n_posts = 7000;  // total, planted trend posts included
    std::size_t horizon = 56;    // number of windows
    std::int64_t window_length = 3600;
    std::size_t n_head_trends = 25;
    std::size_t n_tail_trends = 25;
    double head_search_rate = 30.0;  // expected searches/window while active
    double tail_search_rate = 0.5;
    double tail_engagement_multiplier = 3.0;  // > 1
    double background_query_rate = 0.05;      // per background query per window
    std::size_t vocabulary_size = 500;        // background query vocabulary
    std::size_t warmup_windows = 26;          // no trends before this window
    std::size_t posts_per_trend_window = 4;
    double oblique_fraction = 0.25;  // trend posts titled without their query
    double follower_log_mean = 6.0;
    double follower_log_sd = 2.0;

    void validate() const {
        if (n_head_trends + n_tail_trends == 0 &&
            (vocabulary_size == 0 || background_query_rate <= 0.0))
            throw std::runtime_error("empty world");
        if (!(tail_search_rate < head_search_rate))
            throw std::invalid_argument("tail_search_rate must be below head_search_rate");
        if (!(tail_engagement_multiplier > 1.0))
            throw std::invalid_argument("tail_engagement_multiplier must be > 1");
        if (head_search_rate < 0.0 || tail_search_rate < 0.0 || background_query_rate < 0.0)
            throw std::invalid_argument("rates must be >= 0");
        if (horizon == 0 || window_length <= 0)
            throw std::invalid_argument("horizon and window_length must be positive");
        if (warmup_windows >= horizon && n_head_trends + n_tail_trends > 0)
            throw std::invalid_argument("warmup_windows must leave room for active trends");
        if (n_creators == 0) throw std::invalid_argument("n_creators must be >= 1");
        if (posts_per_trend_window == 0)
            throw std::invalid_argument("posts_per_trend_window must be >= 1");
        if (!(oblique_fraction >= 0.0 && oblique_fraction <= 1.0))
            throw std::invalid_argument("oblique_fraction must be in [0, 1]");
    }
};

enum class TrendKind { head, tail };

inline std::string to_string(TrendKind k) { return k == TrendKind::head ? "head" : "tail"; }

struct PlantedTrend {
    std::string query;
    TrendKind kind = TrendKind::head;
    std::size_t active_start = 0;  // window index, inclusive
    std::size_t active_end = 0;    // inclusive
};

struct WorldTruth {
    std::vector<PlantedTrend> planted_trends;

    std::set<std::string> active_queries(std::size_t window) const {
        std::set<std::string> out;
        for (const auto& t : planted_trends) {
            if (window >= t.active_start && window <= t.active_end) out.insert(t.query);
        }
        return out;
    }
};

inline void to_json(json& j, const PlantedTrend& t) {
    j = json{{"query", t.query},
             {"kind", to_string(t.kind)},
             {"active_start", t.active_start},
             {"active_end", t.active_end}};
}
inline void from_json(const json& j, PlantedTrend& t) {
    j.at("query").get_to(t.query);
    t.kind = j.at("kind").get<std::string>() == "head" ? TrendKind::head : TrendKind::tail;
    j.at("active_start").get_to(t.active_start);
    j.at("active_end").get_to(t.active_end);
}

namespace detail {

inline constexpr std::array<const char*, 24> kAdjectives = {
    "amber",  "crimson", "velvet",  "quantum", "silent", "neon",   "lunar",  "rustic",
    "golden", "frozen",  "hidden",  "electric", "coastal", "midnight", "scarlet", "emerald",
    "turbo",  "cosmic",  "wild",    "solar",   "iron",   "misty",  "royal",  "echo"};

inline constexpr std::array<const char*, 60> kNouns = {
    "derby",    "festival", "eclipse",  "summit",   "carnival", "expedition", "tournament",
    "premiere", "rally",    "regatta",  "armada",   "symphony", "marathon",   "heist",
    "voyage",   "pageant",  "showdown", "uprising", "audition", "monsoon",    "harvest",
    "parade",   "odyssey",  "retreat",  "gala",     "derby2",   "masquerade", "sprint",
    "expanse",  "citadel",  "bazaar",   "cascade",  "meridian", "paradox",    "aurora",
    "tempest",  "renegade", "covenant", "dynasty",  "frontier", "gauntlet",   "haven",
    "inferno",  "jubilee",  "kingdom",  "labyrinth", "mirage",  "nebula",     "outpost",
    "pinnacle", "quarry",   "reverie",  "sanctum",  "threshold", "utopia",    "vortex",
    "wharf",    "zephyr",   "beacon",   "crusade"};

inline constexpr std::array<const char*, 12> kFlavors = {
    "tour",     "tickets", "highlights", "explained", "reaction", "update",
    "schedule", "recap",   "rumors",     "analysis",  "interview", "trailer"};

inline constexpr std::array<const char*, 16> kObliqueWords = {
    "whisper", "ember",  "willow",  "harbor", "lantern", "meadow", "orchid", "pebble",
    "quill",   "saffron", "thimble", "umbra",  "vellum",  "wisteria", "yonder", "zinnia"};

inline constexpr std::array<const char*, 36> kBackgroundWords = {
    "daily",   "weekly",  "local",   "simple", "quick",   "easy",    "best",   "top",
    "cheap",   "fresh",   "classic", "modern", "recipe",  "weather", "score",  "review",
    "guide",   "news",    "deal",    "market", "stream",  "movie",   "series", "game",
    "routine", "workout", "travel",  "flight", "hotel",   "menu",    "salary", "resume",
    "quote",   "lyrics",  "chords",  "trivia"};

}  // namespace detail

// Generates the event streams plus sidecars into out_dir:
//   creators.jsonl, posts.jsonl, engagements.jsonl, searches.jsonl,
//   truth.jsonl (planted-trend labels), knowledge.jsonl (oblique-title map).
inline WorldTruth generate_world(const WorldConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::mt19937_64 rng(cfg.seed);

    // --- creators -----------------------------------------------------
    std::vector<Creator> creators;
    creators.reserve(cfg.n_creators);
    for (std::size_t i = 0; i < cfg.n_creators; ++i) {
        Creator c;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "creator-%04zu", i);
        c.creator_id = buf;
        const double ln_followers =
            rnd::normal(rng, cfg.follower_log_mean, cfg.follower_log_sd);
        c.follower_count = static_cast<std::uint64_t>(
            std::llround(std::min(std::exp(ln_followers), 1e12)));
        if (rnd::bernoulli(rng, 0.3))
            c.authority_signals.push_back({"meta_verified", 0.5});
        if (rnd::bernoulli(rng, 0.4))
            c.authority_signals.push_back({"publisher_score", rnd::uniform(rng, 0.0, 2.0)});
        creators.push_back(std::move(c));
    }

    // High-authority slice authors the tail trends.
    std::vector<std::size_t> by_authority(creators.size());
    for (std::size_t i = 0; i < creators.size(); ++i) by_authority[i] = i;
    std::sort(by_authority.begin(), by_authority.end(), [&](std::size_t a, std::size_t b) {
        const double qa = scoring::creator_authority(creators[a]).value;
        const double qb = scoring::creator_authority(creators[b]).value;
        if (qa != qb) return qa > qb;
        return creators[a].creator_id < creators[b].creator_id;
    });
    const std::size_t elite = std::max<std::size_t>(1, creators.size() / 5);

    // --- planted trends ------------------------------------------------
    const std::size_t n_trends = cfg.n_head_trends + cfg.n_tail_trends;
    if (n_trends > detail::kNouns.size())
        throw std::invalid_argument("too many trends for the noun vocabulary");

    WorldTruth truth;
    std::vector<std::string> oblique_phrases(n_trends);
    std::set<std::string> used_queries;
    for (std::size_t i = 0; i < n_trends; ++i) {
        PlantedTrend t;
        // nouns are unique per trend so sub-phrase noise never aggregates
        // across trends
        const std::string noun = detail::kNouns[i];
        const std::string adj =
            detail::kAdjectives[rnd::uniform_index(rng, detail::kAdjectives.size())];
        t.query = normalize_query(adj + " " + noun);
        if (!used_queries.insert(t.query).second)
            throw std::logic_error("trend query collision: " + t.query);
        t.kind = i < cfg.n_head_trends ? TrendKind::head : TrendKind::tail;
        t.active_start = cfg.warmup_windows + i % 4;  // light stagger
        t.active_end = cfg.horizon - 1;
        if (t.active_start > t.active_end)
            throw std::invalid_argument("horizon too short for planted trends");
        truth.planted_trends.push_back(t);

        const std::string w1 =
            detail::kObliqueWords[rnd::uniform_index(rng, detail::kObliqueWords.size())];
        const std::string w2 =
            detail::kObliqueWords[rnd::uniform_index(rng, detail::kObliqueWords.size())];
        oblique_phrases[i] = normalize_query(w1 + " " + w2 + " " + std::to_string(100 + i));
    }

    // --- background vocabulary -----------------------------------------
    std::vector<std::string> background;
    background.reserve(cfg.vocabulary_size);
    for (std::size_t j = 0; j < cfg.vocabulary_size; ++j) {
        const std::string a =
            detail::kBackgroundWords[rnd::uniform_index(rng, detail::kBackgroundWords.size())];
        const std::string b =
            detail::kBackgroundWords[rnd::uniform_index(rng, detail::kBackgroundWords.size())];
        background.push_back(normalize_query(a + " " + b + " " + std::to_string(1000 + j)));
    }

    // --- posts + engagement ---------------------------------------------
    struct Rates {
        double reaction, comment, reshare, click;
    };
    const Rates head_rates{8.0, 2.0, 1.0, 4.0};
    const Rates filler_rates{1.0, 0.15, 0.1, 0.5};
    const double mult = cfg.tail_engagement_multiplier;

    std::size_t trend_post_budget = 0;
    for (const auto& t : truth.planted_trends)
        trend_post_budget += (t.active_end - t.active_start + 1) * cfg.posts_per_trend_window;
    if (cfg.n_posts < trend_post_budget)
        throw std::invalid_argument(
            "n_posts too small for planted trends: need >= " + std::to_string(trend_post_budget));
    const std::size_t filler_total = cfg.n_posts - trend_post_budget;

    std::vector<Post> posts;
    std::vector<EngagementEvent> engagements;
    posts.reserve(cfg.n_posts);
    std::size_t post_seq = 0;

    auto make_post_id = [&]() {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "post-%06zu", post_seq++);
        return std::string(buf);
    };

    auto emit_engagement = [&](const Post& post, std::int64_t window_end, const Rates& r) {
        auto emit_kind = [&](EngagementKind kind, double rate) {
            const std::uint64_t n = rnd::poisson(rng, rate);
            for (std::uint64_t e = 0; e < n; ++e) {
                EngagementEvent ev;
                ev.post_id = post.post_id;
                ev.kind = kind;
                ev.occurred_at =
                    post.created_at +
                    rnd::uniform_int(rng, 0, std::max<std::int64_t>(0, window_end - post.created_at - 1));
                ev.actor_id = "user-" + std::to_string(rnd::uniform_index(rng, 100000));
                engagements.push_back(std::move(ev));
            }
        };
        emit_kind(EngagementKind::reaction, r.reaction);
        emit_kind(EngagementKind::comment, r.comment);
        emit_kind(EngagementKind::reshare, r.reshare);
        emit_kind(EngagementKind::click, r.click);
    };

    for (std::size_t w = 0; w < cfg.horizon; ++w) {
        const std::int64_t window_start = static_cast<std::int64_t>(w) * cfg.window_length;
        const std::int64_t window_end = window_start + cfg.window_length;

        for (std::size_t ti = 0; ti < truth.planted_trends.size(); ++ti) {
            const auto& trend = truth.planted_trends[ti];
            if (w < trend.active_start || w > trend.active_end) continue;
            const bool tail = trend.kind == TrendKind::tail;
            const std::size_t oblique_count = std::min(
                cfg.posts_per_trend_window,
                static_cast<std::size_t>(std::llround(
                    cfg.oblique_fraction * static_cast<double>(cfg.posts_per_trend_window))));
            for (std::size_t j = 0; j < cfg.posts_per_trend_window; ++j) {
                Post p;
                p.post_id = make_post_id();
                const std::size_t creator_idx =
                    tail ? by_authority[rnd::uniform_index(rng, elite)]
                         : rnd::uniform_index(rng, creators.size());
                p.creator_id = creators[creator_idx].creator_id;
                if (j < oblique_count) {
                    p.title = oblique_phrases[ti];
                } else {
                    const auto& flavor =
                        detail::kFlavors[(w * cfg.posts_per_trend_window + j) %
                                         detail::kFlavors.size()];
                    p.title = trend.query + " " + flavor;
                }
                p.body = "story " + std::to_string(post_seq) + " window " + std::to_string(w) + ".";
                p.created_at =
                    window_start + rnd::uniform_int(rng, 1, std::max<std::int64_t>(1, cfg.window_length / 2));
                p.ground_truth_queries = {trend.query};
                Rates r = head_rates;
                if (tail) {
                    r = Rates{head_rates.reaction * mult, head_rates.comment * mult,
                              head_rates.reshare * mult, head_rates.click * mult};
                }
                emit_engagement(p, window_end, r);
                posts.push_back(std::move(p));
            }
        }

        // Background filler spread evenly across the horizon.
        const std::size_t filler_here =
            filler_total / cfg.horizon + (w < filler_total % cfg.horizon ? 1 : 0);
        for (std::size_t j = 0; j < filler_here; ++j) {
            Post p;
            p.post_id = make_post_id();
            p.creator_id = creators[rnd::uniform_index(rng, creators.size())].creator_id;
            const std::string& query =
                background.empty() ? truth.planted_trends.front().query
                                   : background[rnd::uniform_index(rng, background.size())];
            p.title = query;
            p.body = "story " + std::to_string(post_seq) + " window " + std::to_string(w) + ".";
            p.created_at =
                window_start + rnd::uniform_int(rng, 1, std::max<std::int64_t>(1, cfg.window_length / 2));
            p.ground_truth_queries = {normalize_query(p.title)};
            emit_engagement(p, window_end, filler_rates);
            posts.push_back(std::move(p));
        }
    }

    // --- searches --------------------------------------------------------
    std::vector<SearchLogEntry> searches;
    // post ids per (trend, window) for engaged_post_id references
    for (std::size_t w = 0; w < cfg.horizon; ++w) {
        const std::int64_t window_start = static_cast<std::int64_t>(w) * cfg.window_length;
        for (const auto& trend : truth.planted_trends) {
            if (w < trend.active_start || w > trend.active_end) continue;
            const double rate = trend.kind == TrendKind::head ? cfg.head_search_rate
                                                              : cfg.tail_search_rate;
            const std::uint64_t n = rnd::poisson(rng, rate);
            for (std::uint64_t s = 0; s < n; ++s) {
                SearchLogEntry e;
                e.query = trend.query;
                e.occurred_at = window_start + rnd::uniform_int(rng, 0, cfg.window_length - 1);
                searches.push_back(std::move(e));
            }
        }
        for (const auto& query : background) {
            const std::uint64_t n = rnd::poisson(rng, cfg.background_query_rate);
            for (std::uint64_t s = 0; s < n; ++s) {
                SearchLogEntry e;
                e.query = query;
                e.occurred_at = window_start + rnd::uniform_int(rng, 0, cfg.window_length - 1);
                searches.push_back(std::move(e));
            }
        }
    }

    // Link a share of trend searches to posts of the same trend.
    {
        std::map<std::string, std::vector<std::string>> posts_by_query;
        for (const auto& p : posts) {
            for (const auto& q : p.ground_truth_queries) posts_by_query[q].push_back(p.post_id);
        }
        for (auto& s : searches) {
            auto it = posts_by_query.find(s.query);
            if (it == posts_by_query.end()) continue;
            if (rnd::bernoulli(rng, 0.3)) {
                s.engaged_post_id = it->second[rnd::uniform_index(rng, it->second.size())];
            }
        }
    }

    // --- files -------------------------------------------------------------
    jsonl::write_file(out_dir + "/creators.jsonl", creators);
    jsonl::write_file(out_dir + "/posts.jsonl", posts);
    jsonl::write_file(out_dir + "/engagements.jsonl", engagements);
    jsonl::write_file(out_dir + "/searches.jsonl", searches);
    jsonl::write_file(out_dir + "/truth.jsonl", truth.planted_trends);

    {
        std::ofstream out(out_dir + "/knowledge.jsonl", std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + out_dir + "/knowledge.jsonl");
        for (std::size_t i = 0; i < n_trends; ++i) {
            out << json{{"term", oblique_phrases[i]},
                        {"queries", std::vector<std::string>{truth.planted_trends[i].query}}}
                       .dump()
                << '\n';
        }
    }
    return truth;
}

}  // namespace rttp::sim
