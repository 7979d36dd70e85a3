#pragma once

// Ranking evaluation: Recall@K over generated queries, Precision@K over
// ranked trend candidates, and the recall-drop retraining trigger.

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rttp/domain.hpp"

namespace rttp::eval {

struct RecallSample {
    std::string post_id;
    std::vector<std::string> generated;  // ranked, normalized
    std::set<std::string> ground_truth;  // non-empty, normalized
};

// Fraction of samples whose top-k generations intersect the ground truth.
// A hit counts once per post no matter how many ground-truth queries match.
inline double recall_at_k(std::span<const RecallSample> samples, std::size_t k) {
    if (samples.empty()) throw std::invalid_argument("no samples");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::size_t hits = 0;
    for (const auto& s : samples) {
        if (s.ground_truth.empty()) throw std::invalid_argument("sample has empty ground truth");
        const std::size_t limit = std::min(k, s.generated.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (s.ground_truth.count(s.generated[i]) > 0) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

// |top-k ∩ labeled_true| / min(k, |ranked|); 0 for an empty ranked list.
inline double precision_at_k(std::span<const TrendCandidate> ranked,
                             const std::set<std::string>& labeled_true, std::size_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (ranked.empty()) return 0.0;
    const std::size_t limit = std::min(k, ranked.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < limit; ++i) {
        if (labeled_true.count(ranked[i].query) > 0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(limit);
}

enum class DropMode { relative, absolute };

struct TriggerConfig {
    std::size_t k = 3;
    double drop_threshold = 0.10;
    double baseline_recall = 0.0;  // must be set before use
    DropMode mode = DropMode::relative;
};

// True when recall regressed past the configured drop from baseline.
inline bool should_retrain(double current_recall, const TriggerConfig& cfg) {
    if (!(cfg.drop_threshold > 0.0 && cfg.drop_threshold < 1.0))
        throw std::invalid_argument("drop_threshold must be in (0, 1)");
    if (cfg.baseline_recall == 0.0) throw std::invalid_argument("uninitialized baseline");
    if (!(cfg.baseline_recall > 0.0 && cfg.baseline_recall <= 1.0))
        throw std::invalid_argument("baseline_recall must be in (0, 1]");
    const double drop = cfg.baseline_recall - current_recall;
    if (cfg.mode == DropMode::absolute) return drop > cfg.drop_threshold;
    return drop / cfg.baseline_recall > cfg.drop_threshold;
}

}  // namespace rttp::eval
