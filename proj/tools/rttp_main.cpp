// rttp: single entry point for the trend-prediction experiment pipeline.
//
//   rttp simulate --config exp.conf --out world/
//   rttp run      --config exp.conf --events world/ --out runs/
//   rttp eval     --config exp.conf --rankings runs/ --truth world/truth.jsonl
//                 [--posts world/posts.jsonl] --out reports/
//   rttp train    --config exp.conf (--posts world/posts.jsonl | --pairs pairs.jsonl)
//                 --out model/ [--monitor --current-recall R]
//
// Exit codes: 0 success, 1 runtime failure, 2 config/usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rttp/config.hpp"
#include "rttp/domain.hpp"
#include "rttp/eval.hpp"
#include "rttp/jsonl.hpp"
#include "rttp/mixdpo.hpp"
#include "rttp/pipeline.hpp"
#include "rttp/querygen.hpp"
#include "rttp/remote_generator.hpp"
#include "rttp/simgen.hpp"

namespace fs = std::filesystem;
using rttp::config::ConfigError;
using rttp::config::GeneratorChoice;
using rttp::config::RunConfig;

namespace {

std::uint64_t fnv1a_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for digest: " + path.string());
    std::uint64_t hash = 1469598103934665603ULL;
    char buf[1 << 15];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << v;
    return out.str();
}

std::size_t count_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

std::unique_ptr<rttp::gen::QueryGenerator> make_generator(const RunConfig& cfg,
                                                          const fs::path& data_dir) {
    switch (cfg.generator) {
        case GeneratorChoice::extractive:
            return std::make_unique<rttp::gen::ExtractiveGenerator>();
        case GeneratorChoice::template_table: {
            const std::string path =
                rttp::config::resolve_path(cfg, cfg.knowledge_file, data_dir);
            if (!fs::exists(path))
                throw ConfigError("knowledge file not found: " + cfg.knowledge_file);
            return std::make_unique<rttp::gen::TemplateGenerator>(
                rttp::gen::load_knowledge(path), cfg.seed);
        }
        case GeneratorChoice::remote:
            return std::make_unique<rttp::gen::RemoteGenerator>(cfg.remote);
    }
    throw ConfigError("unknown generator");
}

std::string rankings_file_name(rttp::pipeline::MethodVariant v) {
    return "rankings_" + rttp::pipeline::to_string(v) + ".jsonl";
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
    const auto truth = rttp::sim::generate_world(cfg.world, out_dir);

    std::size_t heads = 0;
    for (const auto& t : truth.planted_trends) heads += t.kind == rttp::sim::TrendKind::head;

    std::cout << "world written to " << out_dir << "\n";
    std::cout << "  seed:            " << cfg.world.seed << "\n";
    std::cout << "  windows:         " << cfg.world.horizon << " x " << cfg.world.window_length
              << "s\n";
    std::cout << "  planted trends:  " << heads << " head / "
              << truth.planted_trends.size() - heads << " tail\n";
    for (const char* name : {"creators.jsonl", "posts.jsonl", "engagements.jsonl",
                             "searches.jsonl", "truth.jsonl", "knowledge.jsonl"}) {
        const fs::path p = fs::path(out_dir) / name;
        std::cout << "  " << std::left << std::setw(18) << name << std::right << std::setw(8)
                  << count_lines(p) << " records  digest " << hex64(fnv1a_file(p)) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int cmd_run(const RunConfig& cfg, const std::string& events_dir, const std::string& out_dir) {
    const auto generator = make_generator(cfg, events_dir);
    rttp::pipeline::WindowStore store(cfg.pipeline, generator.get());

    auto ingest_file = [&](const char* name, auto tag) {
        using T = decltype(tag);
        const fs::path path = fs::path(events_dir) / name;
        if (!fs::exists(path)) return std::size_t{0};  // empty stream
        std::size_t n = 0;
        rttp::jsonl::for_each<T>(path.string(), [&](T&& record) {
            if constexpr (std::is_same_v<T, rttp::Creator>) store.register_creator(record);
            else store.ingest(record);
            ++n;
        });
        return n;
    };

    const std::size_t creators = ingest_file("creators.jsonl", rttp::Creator{});
    const std::size_t posts = ingest_file("posts.jsonl", rttp::Post{});
    const std::size_t engagements = ingest_file("engagements.jsonl", rttp::EngagementEvent{});
    const std::size_t searches = ingest_file("searches.jsonl", rttp::SearchLogEntry{});

    store.close_stream();
    store.seal_complete_windows();

    fs::create_directories(out_dir);
    const auto windows = store.window_indices();
    for (const auto method : cfg.methods) {
        const fs::path path = fs::path(out_dir) / rankings_file_name(method);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
        std::size_t candidates = 0;
        for (const std::int64_t w : windows) {
            const auto ranked = store.rank_window(w, method, cfg.run_top_k);
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                const auto& c = ranked[i];
                out << rttp::json{{"window_start", c.window_start},
                                  {"rank", i + 1},
                                  {"query", c.query},
                                  {"score", c.score},
                                  {"search_volume", c.search_volume},
                                  {"source", rttp::to_string(c.source)},
                                  {"supporting_posts", c.supporting_posts}}
                           .dump()
                    << '\n';
            }
            candidates += ranked.size();
        }
        std::cout << std::left << std::setw(24) << rttp::pipeline::to_string(method)
                  << std::right << std::setw(8) << candidates << " candidates -> "
                  << path.string() << "\n";
    }

    const auto drops = store.drop_counters();
    std::cout << "ingested: " << creators << " creators, " << posts << " posts, " << engagements
              << " engagements, " << searches << " searches over " << windows.size()
              << " windows\n";
    std::cout << "dropped:  " << drops.total() << " events, " << drops.generator_failures
              << " generator failures (posts kept without queries)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct MethodReport {
    rttp::pipeline::MethodVariant method;
    bool present = false;
    std::map<std::size_t, double> precision_by_k;
    std::size_t windows = 0;
};

int cmd_eval(const RunConfig& cfg, const std::string& rankings_dir, const std::string& truth_file,
             const std::string& posts_file, const std::string& out_dir) {
    const auto planted =
        rttp::jsonl::read_file<rttp::sim::PlantedTrend>(truth_file);
    rttp::sim::WorldTruth truth{planted};
    std::size_t max_window = 0;
    for (const auto& t : planted) max_window = std::max(max_window, t.active_end);

    std::vector<MethodReport> reports;
    for (const auto method : cfg.methods) {
        MethodReport report;
        report.method = method;
        const fs::path path = fs::path(rankings_dir) / rankings_file_name(method);
        if (!fs::exists(path)) {
            reports.push_back(report);
            continue;
        }
        report.present = true;

        // window start -> ranked queries (rank order preserved)
        std::map<std::int64_t, std::vector<rttp::TrendCandidate>> by_window;
        std::ifstream in(path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = rttp::json::parse(line);
            rttp::TrendCandidate c;
            c.query = j.at("query").get<std::string>();
            c.score = j.at("score").get<double>();
            c.search_volume = j.at("search_volume").get<std::uint64_t>();
            by_window[j.at("window_start").get<std::int64_t>()].push_back(std::move(c));
        }

        for (const std::size_t k : cfg.eval_k_list) {
            double sum = 0.0;
            std::size_t windows = 0;
            for (std::size_t w = 0; w <= max_window; ++w) {
                const auto labeled = truth.active_queries(w);
                if (labeled.empty()) continue;
                ++windows;
                const std::int64_t start =
                    static_cast<std::int64_t>(w) * cfg.pipeline.window_length;
                const auto it = by_window.find(start);
                if (it == by_window.end()) continue;  // method produced nothing: 0
                sum += rttp::eval::precision_at_k(it->second, labeled, k);
            }
            report.precision_by_k[k] = windows == 0 ? 0.0 : sum / static_cast<double>(windows);
            report.windows = windows;
        }
        reports.push_back(std::move(report));
    }

    // Recall of the configured generator against per-post ground truth.
    std::optional<double> recall;
    std::size_t recall_samples = 0;
    if (!posts_file.empty()) {
        const auto posts = rttp::jsonl::read_file<rttp::Post>(posts_file);
        const auto generator = make_generator(cfg, fs::path(posts_file).parent_path());
        std::vector<rttp::eval::RecallSample> samples;
        for (const auto& post : posts) {
            if (post.ground_truth_queries.empty()) continue;
            rttp::eval::RecallSample s;
            s.post_id = post.post_id;
            s.ground_truth = post.ground_truth_queries;
            try {
                const auto resp = generator->generate(
                    {post.post_id, post.title, post.body, cfg.pipeline.generator_max_queries});
                for (const auto& q : resp.queries) s.generated.push_back(q.text);
            } catch (const std::exception&) {
                // generator failure: count the post as a miss, never crash
            }
            samples.push_back(std::move(s));
        }
        if (!samples.empty()) {
            recall = rttp::eval::recall_at_k(samples, cfg.recall_k);
            recall_samples = samples.size();
        }
    }

    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "report.jsonl", std::ios::binary | std::ios::trunc);
        for (const auto& r : reports) {
            const std::string name = rttp::pipeline::to_string(r.method);
            if (!r.present) {
                out << rttp::json{{"method", name}, {"status", "absent"}}.dump() << '\n';
                continue;
            }
            for (const std::size_t k : cfg.eval_k_list) {
                out << rttp::json{{"method", name},
                                  {"k", k},
                                  {"precision", r.precision_by_k.at(k)},
                                  {"windows", r.windows}}
                           .dump()
                    << '\n';
            }
        }
        if (recall) {
            out << rttp::json{{"generator", cfg.generator_name()},
                              {"k", cfg.recall_k},
                              {"recall", *recall},
                              {"samples", recall_samples}}
                       .dump()
                << '\n';
        }
    }

    // human-readable tier table
    std::cout << std::left << std::setw(24) << "method";
    for (const std::size_t k : cfg.eval_k_list) {
        std::cout << std::right << std::setw(10) << ("p@" + std::to_string(k));
    }
    std::cout << "\n";
    for (const auto& r : reports) {
        std::cout << std::left << std::setw(24) << rttp::pipeline::to_string(r.method);
        if (!r.present) {
            std::cout << std::right << std::setw(10) << "absent";
        } else {
            for (const std::size_t k : cfg.eval_k_list) {
                std::cout << std::right << std::setw(10) << std::fixed << std::setprecision(4)
                          << r.precision_by_k.at(k);
            }
        }
        std::cout << "\n";
    }
    if (recall) {
        std::cout << "recall@" << cfg.recall_k << " (" << cfg.generator_name()
                  << " generator): " << std::fixed << std::setprecision(4) << *recall << " over "
                  << recall_samples << " posts\n";
    }
    std::cout << "report written to " << (fs::path(out_dir) / "report.jsonl").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const RunConfig& cfg, const std::string& pairs_file, const std::string& posts_file,
              const std::string& out_dir, bool monitor, std::optional<double> current_recall) {
    rttp::dpo::PairDataset dataset;
    std::map<std::string, std::vector<std::string>> generations;
    std::size_t posts_without_truth = 0;
    std::optional<double> computed_recall;

    if (!pairs_file.empty()) {
        dataset = rttp::dpo::load_pairs(pairs_file);
    } else {
        const auto all_posts = rttp::jsonl::read_file<rttp::Post>(posts_file);
        const auto generator = make_generator(cfg, fs::path(posts_file).parent_path());
        std::vector<rttp::Post> posts;
        std::vector<rttp::eval::RecallSample> samples;
        for (const auto& post : all_posts) {
            if (post.ground_truth_queries.empty()) {
                ++posts_without_truth;
                continue;
            }
            std::vector<std::string> texts;
            try {
                const auto resp = generator->generate(
                    {post.post_id, post.title, post.body, cfg.pairs_k});
                for (const auto& q : resp.queries) texts.push_back(q.text);
            } catch (const std::exception&) {
                // lossy stream contract: the post simply has no generations
            }
            samples.push_back({post.post_id, texts, post.ground_truth_queries});
            generations[post.post_id] = std::move(texts);
            posts.push_back(post);
        }
        if (!samples.empty())
            computed_recall = rttp::eval::recall_at_k(samples, cfg.trigger.k);
        dataset = rttp::dpo::build_pairs(posts, generations, cfg.pairs_k);
    }

    if (monitor) {
        const std::optional<double> current =
            current_recall ? current_recall : computed_recall;
        if (!current)
            throw ConfigError("monitor mode needs --current-recall or --posts to measure recall");
        if (!rttp::eval::should_retrain(*current, cfg.trigger)) {
            std::cout << "no retraining needed (recall " << *current << " vs baseline "
                      << cfg.trigger.baseline_recall << ")\n";
            return 0;
        }
        std::cout << "retraining triggered (recall " << *current << " vs baseline "
                  << cfg.trigger.baseline_recall << ")\n";
    }

    if (dataset.pool.on_policy.empty() && dataset.pool.off_policy.empty())
        throw std::runtime_error("no training data");

    auto theta0 = generations.empty()
                      ? rttp::dpo::TabularPolicy::uniform(dataset.contexts, dataset.vocabulary)
                      : rttp::dpo::seeded_policy(dataset, generations, cfg.pairs_k,
                                                 cfg.dpo_init_scale);
    const auto result = rttp::dpo::train(theta0, theta0, dataset.pool, cfg.dpo, cfg.dpo_steps);

    std::vector<std::size_t> all_contexts(theta0.n_contexts());
    for (std::size_t i = 0; i < all_contexts.size(); ++i) all_contexts[i] = i;
    const auto squeeze = rttp::dpo::squeeze_diagnostic(theta0, result.policy, all_contexts);

    fs::create_directories(out_dir);
    rttp::dpo::save_policy((fs::path(out_dir) / "policy.jsonl").string(), result.policy);
    rttp::dpo::save_metrics_csv((fs::path(out_dir) / "metrics.csv").string(), result.metrics);
    rttp::dpo::save_squeeze_report((fs::path(out_dir) / "squeeze.jsonl").string(), squeeze);
    if (pairs_file.empty())
        rttp::dpo::save_pairs((fs::path(out_dir) / "pairs.jsonl").string(), dataset);

    std::cout << "pairs:   " << dataset.pool.on_policy.size() << " on-policy, "
              << dataset.pool.off_policy.size() << " off-policy (" << dataset.skipped_posts
              << " posts skipped, " << posts_without_truth << " without ground truth)\n";
    std::cout << "policy:  " << result.policy.n_contexts() << " contexts x "
              << result.policy.n_vocab() << " vocabulary, " << cfg.dpo_steps << " steps\n";
    if (!result.metrics.empty()) {
        std::cout << "final:   loss " << result.metrics.back().loss << ", margin "
                  << result.metrics.back().margin << ", off fraction "
                  << result.metrics.back().off_fraction << "\n";
    }
    std::cout << "entropy: " << squeeze.mean_entropy_before << " -> "
              << squeeze.mean_entropy_after << " (mean over contexts)\n";
    std::cout << "model written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trend-prediction pipeline: simulate, run, evaluate, train"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string events_dir;
    std::string rankings_dir;
    std::string truth_file;
    std::string posts_file;
    std::string pairs_file;
    bool monitor = false;
    double current_recall_flag = -1.0;

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic world");
    simulate->add_option("--config", config_path, "experiment config file")->required();
    simulate->add_option("--out", out_dir, "output directory")->required();

    auto* run = app.add_subcommand("run", "ingest events and rank every window");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--events", events_dir, "directory with the event streams")->required();
    run->add_option("--out", out_dir, "output directory")->required();

    auto* eval_cmd = app.add_subcommand("eval", "score rankings against planted truth");
    eval_cmd->add_option("--config", config_path, "experiment config file")->required();
    eval_cmd->add_option("--rankings", rankings_dir, "directory with rankings_*.jsonl")
        ->required();
    eval_cmd->add_option("--truth", truth_file, "truth.jsonl with planted trends")->required();
    eval_cmd->add_option("--posts", posts_file, "posts.jsonl for generator recall");
    eval_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* train = app.add_subcommand("train", "build pairs and train the tabular policy");
    train->add_option("--config", config_path, "experiment config file")->required();
    train->add_option("--pairs", pairs_file, "serialized pair dataset");
    train->add_option("--posts", posts_file, "posts.jsonl with ground-truth queries");
    train->add_option("--out", out_dir, "output directory")->required();
    train->add_flag("--monitor", monitor, "train only if the recall trigger fires");
    train->add_option("--current-recall", current_recall_flag,
                      "observed recall for the trigger (monitor mode)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const RunConfig cfg = rttp::config::load_config(config_path);
        if (simulate->parsed()) return cmd_simulate(cfg, out_dir);
        if (run->parsed()) return cmd_run(cfg, events_dir, out_dir);
        if (eval_cmd->parsed())
            return cmd_eval(cfg, rankings_dir, truth_file, posts_file, out_dir);
        if (train->parsed()) {
            if (pairs_file.empty() == posts_file.empty())
                throw ConfigError("train needs exactly one of --pairs or --posts");
            return cmd_train(cfg, pairs_file, posts_file, out_dir, monitor,
                             current_recall_flag >= 0.0
                                 ? std::optional<double>(current_recall_flag)
                                 : std::nullopt);
        }
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
