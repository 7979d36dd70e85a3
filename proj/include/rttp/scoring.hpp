#pragma once

// Creator authority and engagement-weighted trend scoring.
//
//   authority = ln(max(1, follower_count)) + sum of authority signal values
//   score     = authority + sum_i w_i * count_i
//
// Per-query scores aggregate across supporting posts by summation, so many
// moderately engaged posts about one topic outrank a single strong post.

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>

#include "rttp/domain.hpp"

namespace rttp::scoring {

struct EngagementWeights {
    double reaction = 1.0;
    double comment = 3.0;
    double reshare = 2.0;
    double click = 0.5;

    double at(EngagementKind k) const {
        switch (k) {
            case EngagementKind::reaction: return reaction;
            case EngagementKind::comment: return comment;
            case EngagementKind::reshare: return reshare;
            case EngagementKind::click: return click;
        }
        throw std::invalid_argument("unknown engagement kind");
    }

    // All four kinds present by construction; commenting must outweigh
    // shallow reactions.
    void validate() const {
        for (EngagementKind k : kAllEngagementKinds) {
            const double w = at(k);
            if (!std::isfinite(w) || w < 0.0)
                throw std::invalid_argument("engagement weights must be finite and >= 0");
        }
        if (!(comment > reaction))
            throw std::invalid_argument("comment weight must exceed reaction weight");
    }
};

struct CreatorQualityScore {
    double value = 0.0;
};

using EngagementCounts = std::map<EngagementKind, std::uint64_t>;

inline CreatorQualityScore creator_authority(const Creator& c) {
    double signals = 0.0;
    for (const auto& s : c.authority_signals) signals += s.value;
    const double followers = static_cast<double>(std::max<std::uint64_t>(1, c.follower_count));
    return CreatorQualityScore{std::log(followers) + signals};
}

inline double trending_score(CreatorQualityScore quality, const EngagementCounts& counts,
                             const EngagementWeights& w) {
    double engagement = 0.0;
    for (const auto& [kind, count] : counts) {
        engagement += w.at(kind) * static_cast<double>(count);
    }
    return quality.value + engagement;
}

// Sum of per-post trending scores for all posts supporting a query in a
// window. An empty list is a caller bug, not a data condition.
inline double aggregate_candidate_score(std::span<const double> post_scores) {
    if (post_scores.empty()) throw std::invalid_argument("no supporting posts");
    return std::accumulate(post_scores.begin(), post_scores.end(), 0.0);
}

}  // namespace rttp::scoring
