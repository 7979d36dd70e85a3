#pragma once

// Windowed aggregation and ranking. Every event lands in exactly one window
// by floor(occurred_at / window_length); posts trigger query generation into
// their creation window, engagement accrues per (window, post), searches
// bump per (window, query) volume. Sealed windows are immutable and can be
// ranked under three method variants:
//
//   volume_only            bursting organic queries, ranked by search volume
//   volume_plus_generated  organic volume + one pseudo-count per distinct
//                          supporting post; generated queries always included
//   rttp_full              generated queries scored by summed
//                          engagement-weighted post scores, organic bursts
//                          appended behind a volume-to-score factor
//
// Streams are lossy by contract: events referencing unknown posts/creators
// or arriving after their window sealed are dropped and counted, never fatal.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rttp/burst.hpp"
#include "rttp/domain.hpp"
#include "rttp/querygen.hpp"
#include "rttp/scoring.hpp"

namespace rttp::pipeline {

enum class MethodVariant { volume_only, volume_plus_generated, rttp_full };

inline std::string to_string(MethodVariant v) {
    switch (v) {
        case MethodVariant::volume_only: return "volume_only";
        case MethodVariant::volume_plus_generated: return "volume_plus_generated";
        case MethodVariant::rttp_full: return "rttp_full";
    }
    throw std::invalid_argument("unknown method variant");
}

inline MethodVariant method_variant_from_string(std::string_view s) {
    if (s == "volume_only") return MethodVariant::volume_only;
    if (s == "volume_plus_generated") return MethodVariant::volume_plus_generated;
    if (s == "rttp_full") return MethodVariant::rttp_full;
    throw std::invalid_argument("unknown method variant: " + std::string(s));
}

inline constexpr MethodVariant kAllMethodVariants[] = {
    MethodVariant::volume_only, MethodVariant::volume_plus_generated, MethodVariant::rttp_full};

struct PipelineConfig {
    std::int64_t window_length = 3600;   // seconds
    std::int64_t allowed_lateness = 300; // watermark = max event time - lateness
    scoring::EngagementWeights weights{};
    burst::BurstConfig burst{};
    double volume_score_factor = 1.0;    // organic burst volume -> rttp_full score
    bool include_organic_bursts = true;  // append organic bursts to rttp_full
    std::size_t generator_max_queries = 3;

    void validate() const {
        if (window_length <= 0) throw std::invalid_argument("window_length must be > 0");
        if (allowed_lateness < 0) throw std::invalid_argument("allowed_lateness must be >= 0");
        weights.validate();
        if (burst.history_len < 1) throw std::invalid_argument("history_len must be >= 1");
        if (!(burst.threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");
        if (!(burst.rate_floor > 0.0)) throw std::invalid_argument("rate floor must be > 0");
        if (generator_max_queries < 1) throw std::invalid_argument("max_queries must be >= 1");
    }
};

struct WindowSummary {
    std::int64_t window_index = 0;
    std::uint64_t posts = 0;
    std::uint64_t engagements = 0;
    std::uint64_t searches = 0;
    std::uint64_t generated_queries = 0;
    bool sealed = false;
};

struct DropCounters {
    std::uint64_t unknown_post = 0;     // engagement for a post never ingested
    std::uint64_t unknown_creator = 0;  // post by a creator never registered
    std::uint64_t late_event = 0;       // event for an already sealed window
    std::uint64_t invalid_event = 0;    // event violating type invariants
    std::uint64_t generator_failures = 0;

    std::uint64_t total() const {
        return unknown_post + unknown_creator + late_event + invalid_event;
    }
};

class WindowStore {
  public:
    explicit WindowStore(PipelineConfig cfg, gen::QueryGenerator* generator = nullptr)
        : cfg_(std::move(cfg)), generator_(generator) {
        cfg_.validate();
    }

    std::int64_t window_of(std::int64_t timestamp) const {
        // floor division for possibly negative timestamps
        std::int64_t w = timestamp / cfg_.window_length;
        if (timestamp % cfg_.window_length < 0) --w;
        return w;
    }

    void register_creator(const Creator& creator) {
        creator.validate();
        std::lock_guard lock(mu_);
        creators_[creator.creator_id] = creator;
    }

    void ingest(const Post& post) {
        std::lock_guard lock(mu_);
        try {
            post.validate();
        } catch (const std::invalid_argument&) {
            ++drops_.invalid_event;
            return;
        }
        if (creators_.find(post.creator_id) == creators_.end()) {
            ++drops_.unknown_creator;
            return;
        }
        advance_watermark(post.created_at);
        const std::int64_t w = window_of(post.created_at);
        auto* win = mutable_window(w);
        if (win == nullptr) {
            ++drops_.late_event;
            return;
        }
        ++win->summary.posts;
        posts_[post.post_id] = PostState{post.creator_id, post.created_at, w};

        if (generator_ == nullptr) return;
        gen::GeneratorRequest req{post.post_id, post.title, post.body,
                                  cfg_.generator_max_queries};
        gen::GeneratorResponse resp;
        try {
            resp = generator_->generate(req);
        } catch (const std::exception&) {
            ++drops_.generator_failures;  // post stays recorded, just without queries
            return;
        }
        for (const auto& q : resp.queries) {
            auto& agg = win->queries[q.text];
            agg.supporting_posts.insert(post.post_id);
            ++win->summary.generated_queries;
        }
    }

    void ingest(const EngagementEvent& event) {
        std::lock_guard lock(mu_);
        auto pit = posts_.find(event.post_id);
        if (pit == posts_.end()) {
            ++drops_.unknown_post;
            return;
        }
        if (event.occurred_at < pit->second.created_at) {
            ++drops_.invalid_event;
            return;
        }
        advance_watermark(event.occurred_at);
        const std::int64_t w = window_of(event.occurred_at);
        auto* win = mutable_window(w);
        if (win == nullptr) {
            ++drops_.late_event;
            return;
        }
        ++win->summary.engagements;
        ++win->engagement[event.post_id][event.kind];
    }

    void ingest(const SearchLogEntry& entry) {
        std::lock_guard lock(mu_);
        const std::string query = normalize_query(entry.query);
        if (query.empty()) {
            ++drops_.invalid_event;
            return;
        }
        advance_watermark(entry.occurred_at);
        const std::int64_t w = window_of(entry.occurred_at);
        auto* win = mutable_window(w);
        if (win == nullptr) {
            ++drops_.late_event;
            return;
        }
        ++win->summary.searches;
        ++win->queries[query].search_volume;
    }

    // End of stream: no further events can arrive for any window.
    void close_stream() {
        std::lock_guard lock(mu_);
        stream_closed_ = true;
    }

    std::int64_t watermark() const {
        std::lock_guard lock(mu_);
        if (stream_closed_) return std::numeric_limits<std::int64_t>::max();
        return max_event_time_ - cfg_.allowed_lateness;
    }

    // Seals one window; idempotent (re-sealing returns the same summary).
    // The caller asserts completeness; watermark-driven sealing is available
    // via seal_complete_windows().
    WindowSummary seal_window(std::int64_t index) {
        std::lock_guard lock(mu_);
        auto& win = windows_[index];  // sealing an empty window is legal
        win.summary.window_index = index;
        win.summary.sealed = true;
        win.sealed = true;
        return win.summary;
    }

    // Seals every known window whose end lies at or before the watermark.
    std::vector<WindowSummary> seal_complete_windows() {
        std::lock_guard lock(mu_);
        const std::int64_t wm = stream_closed_ ? std::numeric_limits<std::int64_t>::max()
                                               : max_event_time_ - cfg_.allowed_lateness;
        std::vector<WindowSummary> sealed;
        for (auto& [index, win] : windows_) {
            if (win.sealed) continue;
            const bool complete =
                stream_closed_ ||
                (index < std::numeric_limits<std::int64_t>::max() / cfg_.window_length &&
                 (index + 1) * cfg_.window_length <= wm);
            if (!complete) continue;
            win.summary.window_index = index;
            win.summary.sealed = true;
            win.sealed = true;
            sealed.push_back(win.summary);
        }
        return sealed;
    }

    std::vector<std::int64_t> window_indices() const {
        std::lock_guard lock(mu_);
        std::vector<std::int64_t> out;
        out.reserve(windows_.size());
        for (const auto& [index, win] : windows_) out.push_back(index);
        return out;
    }

    DropCounters drop_counters() const {
        std::lock_guard lock(mu_);
        return drops_;
    }

    std::vector<TrendCandidate> rank_window(std::int64_t index, MethodVariant variant,
                                            std::size_t k) const {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        std::lock_guard lock(mu_);
        const auto it = windows_.find(index);
        const bool sealed = it != windows_.end() && it->second.sealed;
        if (!sealed) throw std::runtime_error("window not sealed");
        const WindowState& win = it->second;

        std::vector<TrendCandidate> candidates;
        switch (variant) {
            case MethodVariant::volume_only: {
                for (const auto& [query, agg] : win.queries) {
                    if (agg.search_volume == 0) continue;
                    if (!bursts_at(query, index, /*combined=*/false)) continue;
                    candidates.push_back(make_candidate(
                        index, query, static_cast<double>(agg.search_volume), agg.search_volume,
                        {}, CandidateSource::organic));
                }
                break;
            }
            case MethodVariant::volume_plus_generated: {
                for (const auto& [query, agg] : win.queries) {
                    const std::uint64_t combined =
                        agg.search_volume + agg.supporting_posts.size();
                    if (combined == 0) continue;
                    const bool generated = !agg.supporting_posts.empty();
                    if (!generated && !bursts_at(query, index, /*combined=*/true)) continue;
                    const CandidateSource source =
                        !generated ? CandidateSource::organic
                                   : (agg.search_volume > 0 ? CandidateSource::both
                                                            : CandidateSource::generated);
                    candidates.push_back(make_candidate(
                        index, query, static_cast<double>(combined), agg.search_volume,
                        {agg.supporting_posts.begin(), agg.supporting_posts.end()}, source));
                }
                break;
            }
            case MethodVariant::rttp_full: {
                for (const auto& [query, agg] : win.queries) {
                    if (agg.supporting_posts.empty()) continue;
                    std::vector<double> post_scores;
                    post_scores.reserve(agg.supporting_posts.size());
                    for (const auto& post_id : agg.supporting_posts) {
                        post_scores.push_back(post_score(win, post_id));
                    }
                    const bool also_bursts =
                        cfg_.include_organic_bursts && agg.search_volume > 0 &&
                        bursts_at(query, index, /*combined=*/false);
                    candidates.push_back(make_candidate(
                        index, query, scoring::aggregate_candidate_score(post_scores),
                        agg.search_volume,
                        {agg.supporting_posts.begin(), agg.supporting_posts.end()},
                        also_bursts ? CandidateSource::both : CandidateSource::generated));
                }
                if (cfg_.include_organic_bursts) {
                    for (const auto& [query, agg] : win.queries) {
                        if (!agg.supporting_posts.empty() || agg.search_volume == 0) continue;
                        if (!bursts_at(query, index, /*combined=*/false)) continue;
                        candidates.push_back(make_candidate(
                            index, query,
                            static_cast<double>(agg.search_volume) * cfg_.volume_score_factor,
                            agg.search_volume, {}, CandidateSource::organic));
                    }
                }
                break;
            }
        }

        // Contractual order: score desc, then search volume desc, then query
        // text; selection is bounded instead of a full sort.
        auto better = [](const TrendCandidate& a, const TrendCandidate& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.search_volume != b.search_volume) return a.search_volume > b.search_volume;
            return a.query < b.query;
        };
        if (candidates.size() > k) {
            std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                              candidates.end(), better);
            candidates.resize(k);
        } else {
            std::sort(candidates.begin(), candidates.end(), better);
        }
        return candidates;
    }

  private:
    struct QueryWindowAgg {
        std::uint64_t search_volume = 0;
        std::set<std::string> supporting_posts;
    };

    struct WindowState {
        bool sealed = false;
        std::map<std::string, QueryWindowAgg> queries;
        std::map<std::string, scoring::EngagementCounts> engagement;  // post -> counts
        WindowSummary summary;
    };

    struct PostState {
        std::string creator_id;
        std::int64_t created_at = 0;
        std::int64_t window = 0;
    };

    void advance_watermark(std::int64_t event_time) {
        max_event_time_ = std::max(max_event_time_, event_time);
    }

    WindowState* mutable_window(std::int64_t index) {
        auto& win = windows_[index];
        if (win.sealed) return nullptr;
        win.summary.window_index = index;
        return &win;
    }

    double post_score(const WindowState& win, const std::string& post_id) const {
        const auto& post = posts_.at(post_id);
        const auto quality = scoring::creator_authority(creators_.at(post.creator_id));
        const auto eit = win.engagement.find(post_id);
        static const scoring::EngagementCounts kNoEngagement;
        const auto& counts = eit == win.engagement.end() ? kNoEngagement : eit->second;
        return scoring::trending_score(quality, counts, cfg_.weights);
    }

    // True when the query's volume series has a burst event exactly at
    // `index`. The combined series adds one pseudo-count per distinct
    // supporting post.
    bool bursts_at(const std::string& query, std::int64_t index, bool combined) const {
        if (index < static_cast<std::int64_t>(cfg_.burst.history_len)) return false;
        burst::QueryVolumeSeries series;
        series.query = query;
        series.window_length = cfg_.window_length;
        const std::int64_t first = windows_.begin()->first;
        const std::int64_t base = std::min<std::int64_t>(first, 0);
        series.counts.reserve(static_cast<std::size_t>(index - base + 1));
        for (std::int64_t w = base; w <= index; ++w) {
            std::uint64_t count = 0;
            if (auto wit = windows_.find(w); wit != windows_.end()) {
                if (auto qit = wit->second.queries.find(query); qit != wit->second.queries.end()) {
                    count = qit->second.search_volume;
                    if (combined) count += qit->second.supporting_posts.size();
                }
            }
            series.counts.push_back(count);
        }
        const std::size_t target = static_cast<std::size_t>(index - base);
        const auto events = burst::detect_bursts(series, cfg_.burst.history_len,
                                                 cfg_.burst.threshold, cfg_.burst.rate_floor);
        return std::any_of(events.begin(), events.end(),
                           [&](const burst::BurstEvent& e) { return e.window_index == target; });
    }

    TrendCandidate make_candidate(std::int64_t index, const std::string& query, double score,
                                  std::uint64_t volume, std::vector<std::string> supporting,
                                  CandidateSource source) const {
        TrendCandidate c;
        c.query = query;
        c.window_start = index * cfg_.window_length;
        c.window_length = cfg_.window_length;
        c.score = score;
        c.search_volume = volume;
        c.supporting_posts = std::move(supporting);
        c.source = source;
        return c;
    }

    PipelineConfig cfg_;
    gen::QueryGenerator* generator_;
    mutable std::mutex mu_;
    std::map<std::int64_t, WindowState> windows_;
    std::unordered_map<std::string, PostState> posts_;
    std::unordered_map<std::string, Creator> creators_;
    DropCounters drops_;
    std::int64_t max_event_time_ = std::numeric_limits<std::int64_t>::min();
    bool stream_closed_ = false;
};

}  // namespace rttp::pipeline
