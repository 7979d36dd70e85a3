#pragma once

// Mix-policy preference optimization over a tabular softmax policy.
//
// The policy is a logits matrix, one row per context (prompt), one column
// per vocabulary query; pi(y|x) = softmax of row x. Pairwise loss for a
// preference pair (win, lose):
//
//   L = -ln sigmoid( beta * [ (ln pi(win|x)  - ln pi_ref(win|x))
//                           - (ln pi(lose|x) - ln pi_ref(lose|x)) ] )
//
// computed in log space so it is finite for all finite logits. Training
// mixes on-policy pairs (both completions model-generated) with off-policy
// pairs (ground-truth win the model failed to produce) at a per-slot
// Bernoulli ratio; keeping the off-policy share small preserves output
// diversity instead of funneling probability mass onto single answers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rttp/domain.hpp"
#include "rttp/rand_util.hpp"

namespace rttp::dpo {

struct TabularPolicy {
    std::vector<std::string> contexts;
    std::vector<std::string> vocabulary;
    std::vector<double> logits;  // row-major [contexts x vocabulary]

    std::size_t n_contexts() const { return contexts.size(); }
    std::size_t n_vocab() const { return vocabulary.size(); }

    static TabularPolicy uniform(std::vector<std::string> contexts,
                                 std::vector<std::string> vocabulary) {
        if (vocabulary.empty()) throw std::invalid_argument("vocabulary must be non-empty");
        TabularPolicy p;
        p.contexts = std::move(contexts);
        p.vocabulary = std::move(vocabulary);
        p.logits.assign(p.contexts.size() * p.vocabulary.size(), 0.0);
        return p;
    }

    std::span<const double> row(std::size_t ctx) const {
        return std::span<const double>(logits).subspan(ctx * n_vocab(), n_vocab());
    }
    std::span<double> row(std::size_t ctx) {
        return std::span<double>(logits).subspan(ctx * n_vocab(), n_vocab());
    }

    double& logit(std::size_t ctx, std::size_t v) { return logits[ctx * n_vocab() + v]; }
    double logit(std::size_t ctx, std::size_t v) const { return logits[ctx * n_vocab() + v]; }

    double log_sum_exp(std::size_t ctx) const {
        const auto r = row(ctx);
        double m = r[0];
        for (double x : r) m = std::max(m, x);
        double s = 0.0;
        for (double x : r) s += std::exp(x - m);
        return m + std::log(s);
    }

    double log_prob(std::size_t ctx, std::size_t v) const {
        return logit(ctx, v) - log_sum_exp(ctx);
    }

    std::vector<double> probs(std::size_t ctx) const {
        const double lse = log_sum_exp(ctx);
        const auto r = row(ctx);
        std::vector<double> p(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) p[i] = std::exp(r[i] - lse);
        return p;
    }

    double entropy(std::size_t ctx) const {
        double h = 0.0;
        for (double p : probs(ctx)) {
            if (p > 0.0) h -= p * std::log(p);
        }
        return h;
    }

    bool same_shape(const TabularPolicy& other) const {
        return contexts == other.contexts && vocabulary == other.vocabulary;
    }
};

enum class PolicyKind { on_policy, off_policy };

inline std::string to_string(PolicyKind k) {
    return k == PolicyKind::on_policy ? "on_policy" : "off_policy";
}

inline PolicyKind policy_kind_from_string(std::string_view s) {
    if (s == "on_policy") return PolicyKind::on_policy;
    if (s == "off_policy") return PolicyKind::off_policy;
    throw std::invalid_argument("unknown policy kind: " + std::string(s));
}

struct PreferencePair {
    std::size_t context = 0;
    std::size_t win = 0;
    std::size_t lose = 0;
    PolicyKind policy_kind = PolicyKind::on_policy;

    void validate(std::size_t n_ctx, std::size_t n_vocab) const {
        if (context >= n_ctx) throw std::invalid_argument("pair context out of range");
        if (win >= n_vocab || lose >= n_vocab)
            throw std::invalid_argument("pair vocab index out of range");
        if (win == lose) throw std::invalid_argument("pair win must differ from lose");
    }
};

struct PairPool {
    std::vector<PreferencePair> on_policy;
    std::vector<PreferencePair> off_policy;
};

struct DpoConfig {
    double beta = 0.1;
    double rho_off = 0.1;  // off-policy fraction; 0.1 is the 1:9 mix
    double learning_rate = 0.5;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    bool refresh_ref = false;  // when true, train() re-pins ref to theta0

    void validate() const {
        if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
        if (!(rho_off >= 0.0 && rho_off <= 1.0))
            throw std::invalid_argument("rho_off must be in [0, 1]");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    }
};

// ---------------------------------------------------------------------------
// Pair construction from posts + generations.
// ---------------------------------------------------------------------------

struct PairDataset {
    PairPool pool;
    std::vector<std::string> contexts;    // one per post that yielded pairs' context
    std::vector<std::string> vocabulary;  // generations seen + ground-truth additions
    std::size_t skipped_posts = 0;        // no generations and no match: nothing to pair
};

// For each post: if a ground-truth query appears in the top-k generations,
// emit on-policy pairs (win = highest-ranked match, lose = every non-match
// in the top-k). Otherwise emit off-policy pairs (win = each ground-truth
// query, lose = the top-1 generation). Texts are normalized before matching.
inline PairDataset build_pairs(const std::vector<Post>& posts,
                               const std::map<std::string, std::vector<std::string>>& generations,
                               std::size_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    PairDataset ds;
    std::unordered_map<std::string, std::size_t> vocab_index;
    auto intern = [&](const std::string& text) {
        auto it = vocab_index.find(text);
        if (it != vocab_index.end()) return it->second;
        const std::size_t idx = ds.vocabulary.size();
        vocab_index.emplace(text, idx);
        ds.vocabulary.push_back(text);
        return idx;
    };

    for (const auto& post : posts) {
        if (post.ground_truth_queries.empty())
            throw std::invalid_argument("post lacks ground-truth queries: " + post.post_id);

        std::vector<std::string> topk;
        if (auto it = generations.find(post.post_id); it != generations.end()) {
            for (const auto& raw : it->second) {
                std::string q = normalize_query(raw);
                if (q.empty()) continue;
                if (std::find(topk.begin(), topk.end(), q) != topk.end()) continue;
                topk.push_back(std::move(q));
                if (topk.size() == k) break;
            }
        }

        std::set<std::string> gt;
        for (const auto& q : post.ground_truth_queries) gt.insert(normalize_query(q));

        const auto match = std::find_if(topk.begin(), topk.end(),
                                        [&](const std::string& q) { return gt.count(q) > 0; });
        if (match != topk.end()) {
            const std::size_t ctx = ds.contexts.size();
            ds.contexts.push_back(post.post_id);
            const std::size_t win = intern(*match);
            for (const auto& q : topk) {
                if (gt.count(q) > 0) continue;
                ds.pool.on_policy.push_back(
                    PreferencePair{ctx, win, intern(q), PolicyKind::on_policy});
            }
        } else if (!topk.empty()) {
            const std::size_t ctx = ds.contexts.size();
            ds.contexts.push_back(post.post_id);
            const std::size_t lose = intern(topk.front());
            for (const auto& q : gt) {
                ds.pool.off_policy.push_back(
                    PreferencePair{ctx, intern(q), lose, PolicyKind::off_policy});
            }
        } else {
            ++ds.skipped_posts;  // cannot pick a lose
        }
    }
    return ds;
}

// Policy whose rows reproduce the generator's ranking: the rank-r entry of a
// post's top-k gets logit scale*(k - r + 1), everything else 0. Gives the
// trainer a starting point that behaves like the model that produced the
// generations.
inline TabularPolicy seeded_policy(const PairDataset& ds,
                                   const std::map<std::string, std::vector<std::string>>& generations,
                                   std::size_t k, double scale) {
    TabularPolicy p = TabularPolicy::uniform(ds.contexts, ds.vocabulary);
    std::unordered_map<std::string, std::size_t> vocab_index;
    for (std::size_t i = 0; i < ds.vocabulary.size(); ++i) vocab_index.emplace(ds.vocabulary[i], i);
    for (std::size_t ctx = 0; ctx < ds.contexts.size(); ++ctx) {
        auto it = generations.find(ds.contexts[ctx]);
        if (it == generations.end()) continue;
        std::size_t rank = 0;
        for (const auto& raw : it->second) {
            if (rank == k) break;
            const std::string q = normalize_query(raw);
            auto vit = vocab_index.find(q);
            if (vit == vocab_index.end()) continue;
            ++rank;
            p.logit(ctx, vit->second) = scale * static_cast<double>(k - rank + 1);
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Loss and gradient.
// ---------------------------------------------------------------------------

namespace detail {

inline double softplus(double x) {
    // ln(1 + e^x) without overflow
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Inner bracket of the loss. win and lose share one softmax row, so the
// log-sum-exp normalizers cancel exactly and the log-probability ratios
// reduce to logit differences; computing them that way keeps the loss
// finite for all finite logits and exactly softmax-shift-invariant.
inline double pair_delta(const TabularPolicy& theta, const TabularPolicy& ref,
                         const PreferencePair& pair) {
    const double theta_gap =
        theta.logit(pair.context, pair.win) - theta.logit(pair.context, pair.lose);
    const double ref_gap = ref.logit(pair.context, pair.win) - ref.logit(pair.context, pair.lose);
    return theta_gap - ref_gap;
}

}  // namespace detail

inline double dpo_loss(const TabularPolicy& theta, const TabularPolicy& ref,
                       const PreferencePair& pair, double beta) {
    if (!theta.same_shape(ref)) throw std::invalid_argument("policy shape mismatch");
    pair.validate(theta.n_contexts(), theta.n_vocab());
    return detail::softplus(-beta * detail::pair_delta(theta, ref, pair));
}

// Analytic gradient of the mean batch loss with respect to theta's logits.
// Each pair contributes s = sigmoid(-beta * delta) only at its win/lose
// entries (the softmax terms of the two log-probabilities cancel); rows of
// untouched contexts stay exactly zero.
inline std::vector<double> dpo_grad(const TabularPolicy& theta, const TabularPolicy& ref,
                                    std::span<const PreferencePair> batch, double beta) {
    if (!theta.same_shape(ref)) throw std::invalid_argument("policy shape mismatch");
    if (batch.empty()) throw std::invalid_argument("empty batch");
    std::vector<double> grad(theta.logits.size(), 0.0);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (const auto& pair : batch) {
        pair.validate(theta.n_contexts(), theta.n_vocab());
        const double s = detail::sigmoid(-beta * detail::pair_delta(theta, ref, pair));
        const double coef = beta * s * inv_batch;
        grad[pair.context * theta.n_vocab() + pair.win] -= coef;
        grad[pair.context * theta.n_vocab() + pair.lose] += coef;
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Mixed-batch sampling and training.
// ---------------------------------------------------------------------------

// Each slot independently draws off-policy with probability rho_off, then
// uniformly with replacement within the chosen pool. A single empty pool
// degrades to the other with a logged warning; two empty pools are an error.
inline std::vector<PreferencePair> sample_mixed_batch(const PairPool& pool, const DpoConfig& cfg,
                                                      std::mt19937_64& rng, bool warn = true) {
    cfg.validate();
    const bool has_on = !pool.on_policy.empty();
    const bool has_off = !pool.off_policy.empty();
    if (!has_on && !has_off) throw std::runtime_error("no training data");
    if (warn && (!has_on || !has_off)) {
        std::cerr << "warning: sampling from " << (has_on ? "on" : "off")
                  << "-policy pool only (other pool is empty)\n";
    }
    std::vector<PreferencePair> batch;
    batch.reserve(cfg.batch_size);
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
        bool off = rnd::bernoulli(rng, cfg.rho_off);
        if (off && !has_off) off = false;
        if (!off && !has_on) off = true;
        const auto& src = off ? pool.off_policy : pool.on_policy;
        batch.push_back(src[rnd::uniform_index(rng, src.size())]);
    }
    return batch;
}

struct StepMetrics {
    std::size_t step = 0;       // 1-based
    double loss = 0.0;          // batch mean, after the step's update
    double margin = 0.0;        // batch mean ln pi(win) - ln pi(lose), after update
    double mean_entropy = 0.0;  // mean over contexts, after update
    double off_fraction = 0.0;  // share of off-policy pairs in the batch
};

struct TrainResult {
    TabularPolicy policy;
    std::vector<StepMetrics> metrics;
};

// Plain gradient descent over mixed batches; fully deterministic given
// cfg.seed. The per-step gradient only touches the batch pairs' win/lose
// entries, so updates are accumulated sparsely (per-entry sums, applied
// once, matching the dense dpo_grad semantics) and the entropy metric is
// maintained incrementally over changed rows.
inline TrainResult train(const TabularPolicy& theta0, const TabularPolicy& ref_in,
                         const PairPool& pool, const DpoConfig& cfg, std::size_t steps) {
    cfg.validate();
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (!theta0.same_shape(ref_in)) throw std::invalid_argument("policy shape mismatch");

    const TabularPolicy ref = cfg.refresh_ref ? theta0 : ref_in;  // pinned for this run
    TabularPolicy theta = theta0;
    std::mt19937_64 rng(cfg.seed);

    std::vector<double> ctx_entropy(theta.n_contexts(), 0.0);
    double entropy_sum = 0.0;
    for (std::size_t c = 0; c < theta.n_contexts(); ++c) {
        ctx_entropy[c] = theta.entropy(c);
        entropy_sum += ctx_entropy[c];
    }

    TrainResult result;
    result.metrics.reserve(steps);
    std::map<std::size_t, double> grad_entries;  // logit index -> batch-mean gradient
    for (std::size_t step = 1; step <= steps; ++step) {
        const auto batch = sample_mixed_batch(pool, cfg, rng, /*warn=*/step == 1);

        grad_entries.clear();
        const double inv_batch = 1.0 / static_cast<double>(batch.size());
        for (const auto& pair : batch) {
            pair.validate(theta.n_contexts(), theta.n_vocab());
            const double s = detail::sigmoid(-cfg.beta * detail::pair_delta(theta, ref, pair));
            const double coef = cfg.beta * s * inv_batch;
            grad_entries[pair.context * theta.n_vocab() + pair.win] -= coef;
            grad_entries[pair.context * theta.n_vocab() + pair.lose] += coef;
        }
        for (const auto& [index, g] : grad_entries) {
            theta.logits[index] -= cfg.learning_rate * g;
        }
        std::set<std::size_t> touched;
        for (const auto& pair : batch) touched.insert(pair.context);
        for (const std::size_t c : touched) {
            entropy_sum -= ctx_entropy[c];
            ctx_entropy[c] = theta.entropy(c);
            entropy_sum += ctx_entropy[c];
        }

        StepMetrics m;
        m.step = step;
        std::size_t off_count = 0;
        for (const auto& pair : batch) {
            m.loss += dpo_loss(theta, ref, pair, cfg.beta);
            m.margin += theta.log_prob(pair.context, pair.win) -
                        theta.log_prob(pair.context, pair.lose);
            if (pair.policy_kind == PolicyKind::off_policy) ++off_count;
        }
        m.loss /= static_cast<double>(batch.size());
        m.margin /= static_cast<double>(batch.size());
        m.off_fraction = static_cast<double>(off_count) / static_cast<double>(batch.size());
        m.mean_entropy = theta.n_contexts() == 0
                             ? 0.0
                             : entropy_sum / static_cast<double>(theta.n_contexts());
        result.metrics.push_back(m);
    }
    result.policy = std::move(theta);
    return result;
}

// ---------------------------------------------------------------------------
// Squeezing diagnostic.
// ---------------------------------------------------------------------------

struct ContextSqueeze {
    std::size_t context = 0;
    double entropy_before = 0.0;
    double entropy_after = 0.0;
    double off_top1_before = 0.0;  // probability mass outside the top-1 entry
    double off_top1_after = 0.0;
};

struct SqueezeReport {
    std::vector<ContextSqueeze> per_context;
    double mean_entropy_before = 0.0;
    double mean_entropy_after = 0.0;
    double mean_off_top1_before = 0.0;
    double mean_off_top1_after = 0.0;
};

inline SqueezeReport squeeze_diagnostic(const TabularPolicy& before, const TabularPolicy& after,
                                        std::span<const std::size_t> eval_contexts) {
    if (!before.same_shape(after)) throw std::invalid_argument("policy shape mismatch");
    SqueezeReport report;
    auto off_top1 = [](const TabularPolicy& p, std::size_t ctx) {
        const auto probs = p.probs(ctx);
        return 1.0 - *std::max_element(probs.begin(), probs.end());
    };
    for (std::size_t ctx : eval_contexts) {
        if (ctx >= before.n_contexts()) throw std::invalid_argument("eval context out of range");
        ContextSqueeze c;
        c.context = ctx;
        c.entropy_before = before.entropy(ctx);
        c.entropy_after = after.entropy(ctx);
        c.off_top1_before = off_top1(before, ctx);
        c.off_top1_after = off_top1(after, ctx);
        report.per_context.push_back(c);
    }
    if (!report.per_context.empty()) {
        const double n = static_cast<double>(report.per_context.size());
        for (const auto& c : report.per_context) {
            report.mean_entropy_before += c.entropy_before / n;
            report.mean_entropy_after += c.entropy_after / n;
            report.mean_off_top1_before += c.off_top1_before / n;
            report.mean_off_top1_after += c.off_top1_after / n;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Serialization: versioned JSONL for policies, pair datasets and squeeze
// reports; CSV for per-step metrics.
// ---------------------------------------------------------------------------

inline void save_policy(const std::string& path, const TabularPolicy& p) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << nlohmann::json{{"format", "rttp.policy"},
                          {"version", 1},
                          {"n_contexts", p.n_contexts()},
                          {"n_vocab", p.n_vocab()}}
               .dump()
        << '\n';
    out << nlohmann::json{{"contexts", p.contexts}}.dump() << '\n';
    out << nlohmann::json{{"vocabulary", p.vocabulary}}.dump() << '\n';
    for (std::size_t c = 0; c < p.n_contexts(); ++c) {
        const auto row = p.row(c);
        out << nlohmann::json{{"context", c},
                              {"logits", std::vector<double>(row.begin(), row.end())}}
                   .dump()
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline TabularPolicy load_policy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    auto next = [&](const char* what) {
        if (!std::getline(in, line)) throw std::runtime_error(std::string("policy file truncated: ") + what);
        return nlohmann::json::parse(line);
    };
    const auto header = next("header");
    if (header.value("format", "") != "rttp.policy" || header.value("version", 0) != 1)
        throw std::runtime_error("unsupported policy file: " + path);
    TabularPolicy p;
    next("contexts").at("contexts").get_to(p.contexts);
    next("vocabulary").at("vocabulary").get_to(p.vocabulary);
    p.logits.assign(p.contexts.size() * p.vocabulary.size(), 0.0);
    for (std::size_t c = 0; c < p.n_contexts(); ++c) {
        const auto j = next("row");
        const std::size_t ctx = j.at("context").get<std::size_t>();
        const auto logits = j.at("logits").get<std::vector<double>>();
        if (ctx >= p.n_contexts() || logits.size() != p.n_vocab())
            throw std::runtime_error("corrupt policy row in: " + path);
        std::copy(logits.begin(), logits.end(), p.row(ctx).begin());
    }
    return p;
}

inline void save_pairs(const std::string& path, const PairDataset& ds) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << nlohmann::json{{"format", "rttp.pairs"}, {"version", 1}}.dump() << '\n';
    out << nlohmann::json{{"contexts", ds.contexts}}.dump() << '\n';
    out << nlohmann::json{{"vocabulary", ds.vocabulary}}.dump() << '\n';
    auto dump_pair = [&](const PreferencePair& pr) {
        out << nlohmann::json{{"context", pr.context},
                              {"win", pr.win},
                              {"lose", pr.lose},
                              {"policy_kind", to_string(pr.policy_kind)}}
                   .dump()
            << '\n';
    };
    for (const auto& pr : ds.pool.on_policy) dump_pair(pr);
    for (const auto& pr : ds.pool.off_policy) dump_pair(pr);
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline PairDataset load_pairs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    auto next = [&](const char* what) {
        if (!std::getline(in, line)) throw std::runtime_error(std::string("pairs file truncated: ") + what);
        return nlohmann::json::parse(line);
    };
    const auto header = next("header");
    if (header.value("format", "") != "rttp.pairs" || header.value("version", 0) != 1)
        throw std::runtime_error("unsupported pairs file: " + path);
    PairDataset ds;
    next("contexts").at("contexts").get_to(ds.contexts);
    next("vocabulary").at("vocabulary").get_to(ds.vocabulary);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        PreferencePair pr;
        pr.context = j.at("context").get<std::size_t>();
        pr.win = j.at("win").get<std::size_t>();
        pr.lose = j.at("lose").get<std::size_t>();
        pr.policy_kind = policy_kind_from_string(j.at("policy_kind").get<std::string>());
        pr.validate(ds.contexts.size(), ds.vocabulary.size());
        (pr.policy_kind == PolicyKind::on_policy ? ds.pool.on_policy : ds.pool.off_policy)
            .push_back(pr);
    }
    return ds;
}

inline void save_metrics_csv(const std::string& path, std::span<const StepMetrics> metrics) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "step,loss,margin,mean_entropy,off_fraction\n";
    char buf[256];
    for (const auto& m : metrics) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", m.step, m.loss, m.margin,
                      m.mean_entropy, m.off_fraction);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void save_squeeze_report(const std::string& path, const SqueezeReport& report) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << nlohmann::json{{"format", "rttp.squeeze"},
                          {"version", 1},
                          {"mean_entropy_before", report.mean_entropy_before},
                          {"mean_entropy_after", report.mean_entropy_after},
                          {"mean_off_top1_before", report.mean_off_top1_before},
                          {"mean_off_top1_after", report.mean_off_top1_after}}
               .dump()
        << '\n';
    for (const auto& c : report.per_context) {
        out << nlohmann::json{{"context", c.context},
                              {"entropy_before", c.entropy_before},
                              {"entropy_after", c.entropy_after},
                              {"off_top1_before", c.off_top1_before},
                              {"off_top1_after", c.off_top1_after}}
                   .dump()
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace rttp::dpo
