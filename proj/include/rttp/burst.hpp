#pragma once

// Poisson burst detection over per-window query search volume.
//
// A window bursts when the observed count is surprising under a rate
// estimated from trailing history: surprise = -ln P(X >= observed) for
// X ~ Poisson(rate). Thresholds are expressed in nats so they compose
// additively with ranking scores.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rttp::burst {

struct QueryVolumeSeries {
    std::string query;
    std::vector<std::uint64_t> counts;  // one per consecutive window
    std::int64_t window_length = 3600;  // seconds
};

struct BurstEvent {
    std::string query;
    std::size_t window_index = 0;
    std::uint64_t observed = 0;
    double expected_rate = 0.0;
    double surprise = 0.0;  // -ln P(X >= observed)
};

struct BurstConfig {
    std::size_t history_len = 24;
    double threshold = 9.0;  // nats; tail probability <= e^-9 ~ 1.2e-4
    double rate_floor = 0.5;
};

// Floored trailing mean. The floor keeps previously unseen queries from
// producing a degenerate zero rate.
inline double estimate_rate(std::span<const std::uint64_t> history, double floor = 0.5) {
    if (history.empty()) throw std::invalid_argument("no history");
    if (!(floor > 0.0)) throw std::invalid_argument("rate floor must be > 0");
    double sum = 0.0;
    for (std::uint64_t c : history) sum += static_cast<double>(c);
    return std::max(floor, sum / static_cast<double>(history.size()));
}

// -ln P(X >= observed) for X ~ Poisson(lambda).
//
// Two regimes keep every value accurate to ~1e-12 relative:
//  - observed <= lambda: the lower CDF stays below ~1/2, so
//    -log1p(-CDF) has no cancellation. Terms are summed in log space.
//  - observed > lambda: the upper tail is summed directly from the leading
//    pmf term; the running geometric bound on the remainder decides
//    truncation, so the deep tail never underflows to zero.
inline double poisson_surprise(std::uint64_t observed, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("invalid rate");
    if (observed == 0) return 0.0;  // P(X >= 0) = 1

    const double log_lambda = std::log(lambda);
    const double obs = static_cast<double>(observed);

    if (obs <= lambda) {
        double cdf = 0.0;
        for (std::uint64_t k = 0; k < observed; ++k) {
            cdf += std::exp(static_cast<double>(k) * log_lambda - lambda -
                            std::lgamma(static_cast<double>(k) + 1.0));
        }
        return -std::log1p(-cdf);
    }

    const double log_lead = obs * log_lambda - lambda - std::lgamma(obs + 1.0);
    double series = 1.0;
    double term = 1.0;
    for (std::uint64_t j = observed + 1;; ++j) {
        term *= lambda / static_cast<double>(j);
        series += term;
        const double ratio = lambda / static_cast<double>(j + 1);
        if (term * ratio / (1.0 - ratio) < series * 1e-17) break;
    }
    const double surprise = -(log_lead + std::log(series));
    return surprise < 0.0 ? 0.0 : surprise;
}

// Scans a volume series and emits one event per window whose count is
// surprising against the trailing history_len windows. Series shorter than
// history_len + 1 yield nothing.
inline std::vector<BurstEvent> detect_bursts(const QueryVolumeSeries& series,
                                             std::size_t history_len = 24,
                                             double threshold = 9.0,
                                             double rate_floor = 0.5) {
    if (history_len < 1) throw std::invalid_argument("history_len must be >= 1");
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");
    if (series.counts.empty()) throw std::invalid_argument("series counts must be non-empty");
    if (series.window_length <= 0) throw std::invalid_argument("window_length must be > 0");

    std::vector<BurstEvent> events;
    const auto& counts = series.counts;
    for (std::size_t i = history_len; i < counts.size(); ++i) {
        const double rate = estimate_rate(
            std::span<const std::uint64_t>(counts).subspan(i - history_len, history_len),
            rate_floor);
        const double surprise = poisson_surprise(counts[i], rate);
        if (surprise >= threshold) {
            events.push_back(BurstEvent{series.query, i, counts[i], rate, surprise});
        }
    }
    return events;
}

}  // namespace rttp::burst
