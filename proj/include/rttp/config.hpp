#pragma once

// Experiment configuration: one declarative key=value file drives every
// command, so a config file plus a seed is a reproducible experiment.
// Unknown keys are rejected. '#' starts a comment. Only the remote endpoint
// URL and its secret may come from the environment (RTTP_REMOTE_URL,
// RTTP_REMOTE_BEARER_TOKEN).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rttp/eval.hpp"
#include "rttp/mixdpo.hpp"
#include "rttp/pipeline.hpp"
#include "rttp/remote_generator.hpp"
#include "rttp/simgen.hpp"

namespace rttp::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class GeneratorChoice { extractive, template_table, remote };

struct RunConfig {
    std::uint64_t seed = 42;

    GeneratorChoice generator = GeneratorChoice::extractive;
    std::string knowledge_file;  // required for the template generator
    gen::RemoteEndpointConfig remote;

    pipeline::PipelineConfig pipeline;
    std::vector<pipeline::MethodVariant> methods = {
        pipeline::MethodVariant::volume_only,
        pipeline::MethodVariant::volume_plus_generated,
        pipeline::MethodVariant::rttp_full,
    };
    std::size_t run_top_k = 500;

    std::vector<std::size_t> eval_k_list = {50, 100, 500};
    std::size_t recall_k = 3;

    eval::TriggerConfig trigger;

    dpo::DpoConfig dpo;
    std::size_t dpo_steps = 500;
    double dpo_init_scale = 0.5;
    std::size_t pairs_k = 3;

    sim::WorldConfig world;

    std::filesystem::path config_dir;  // directory of the loaded file

    std::string generator_name() const {
        switch (generator) {
            case GeneratorChoice::extractive: return "extractive";
            case GeneratorChoice::template_table: return "template";
            case GeneratorChoice::remote: return "remote";
        }
        return "?";
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

class KeyValueFile {
  public:
    explicit KeyValueFile(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config file not found: " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": expected key = value, got: " + line);
            const std::string key = trim(line.substr(0, eq));
            if (key.empty())
                throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
            values_[key] = trim(line.substr(eq + 1));
        }
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        mark(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) {
        mark(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + " is not a number: " + it->second);
        }
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) {
        mark(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const std::int64_t v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + " is not an integer: " + it->second);
        }
    }

    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) {
        const std::int64_t v = get_int(key, static_cast<std::int64_t>(fallback));
        if (v < 0) throw ConfigError("config key " + key + " must be >= 0");
        return static_cast<std::uint64_t>(v);
    }

    bool get_bool(const std::string& key, bool fallback) {
        mark(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("config key " + key + " is not a boolean: " + it->second);
    }

    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback) {
        mark(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    void reject_unknown_keys() const {
        for (const auto& [key, value] : values_) {
            (void)value;
            if (!seen_.count(key)) throw ConfigError("unknown config key: " + key);
        }
    }

  private:
    void mark(const std::string& key) { seen_.insert(key); }

    std::map<std::string, std::string> values_;
    std::set<std::string> seen_;
};

}  // namespace detail

inline RunConfig load_config(const std::string& path) {
    detail::KeyValueFile file(path);
    RunConfig cfg;
    cfg.config_dir = std::filesystem::absolute(path).parent_path();

    cfg.seed = file.get_uint("seed", cfg.seed);

    const std::string generator = file.get_string("generator", "extractive");
    if (generator == "extractive") cfg.generator = GeneratorChoice::extractive;
    else if (generator == "template") cfg.generator = GeneratorChoice::template_table;
    else if (generator == "remote") cfg.generator = GeneratorChoice::remote;
    else throw ConfigError("unknown generator: " + generator);
    cfg.knowledge_file = file.get_string("knowledge_file", "");
    cfg.pipeline.generator_max_queries =
        static_cast<std::size_t>(file.get_uint("max_queries", 3));

    cfg.remote.url = file.get_string("remote.url", "");
    cfg.remote.timeout_sec = file.get_double("remote.timeout_sec", 10.0);
    cfg.remote.retries = static_cast<unsigned>(file.get_uint("remote.retries", 2));
    cfg.remote.backoff_base_ms =
        static_cast<unsigned>(file.get_uint("remote.backoff_ms", 500));
    cfg.remote.max_in_flight =
        static_cast<unsigned>(file.get_uint("remote.max_in_flight", 8));
    if (const char* url = std::getenv("RTTP_REMOTE_URL")) cfg.remote.url = url;
    if (const char* token = std::getenv("RTTP_REMOTE_BEARER_TOKEN"))
        cfg.remote.bearer_token = token;

    cfg.pipeline.window_length = file.get_int("window_length", 3600);
    cfg.pipeline.allowed_lateness = file.get_int("allowed_lateness", 300);
    cfg.pipeline.weights.reaction = file.get_double("weights.reaction", 1.0);
    cfg.pipeline.weights.comment = file.get_double("weights.comment", 3.0);
    cfg.pipeline.weights.reshare = file.get_double("weights.reshare", 2.0);
    cfg.pipeline.weights.click = file.get_double("weights.click", 0.5);
    cfg.pipeline.burst.history_len =
        static_cast<std::size_t>(file.get_uint("burst.history_len", 24));
    cfg.pipeline.burst.threshold = file.get_double("burst.threshold", 9.0);
    cfg.pipeline.burst.rate_floor = file.get_double("burst.rate_floor", 0.5);
    cfg.pipeline.volume_score_factor = file.get_double("run.volume_score_factor", 1.0);
    cfg.pipeline.include_organic_bursts = file.get_bool("run.include_organic_bursts", true);
    cfg.run_top_k = static_cast<std::size_t>(file.get_uint("run.top_k", 500));

    const auto methods = file.get_list(
        "run.methods", {"volume_only", "volume_plus_generated", "rttp_full"});
    cfg.methods.clear();
    for (const auto& m : methods) {
        try {
            cfg.methods.push_back(pipeline::method_variant_from_string(m));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (cfg.methods.empty()) throw ConfigError("run.methods must not be empty");

    cfg.eval_k_list.clear();
    for (const auto& k : file.get_list("eval.k_list", {"50", "100", "500"})) {
        try {
            cfg.eval_k_list.push_back(static_cast<std::size_t>(std::stoull(k)));
        } catch (const std::exception&) {
            throw ConfigError("eval.k_list entry is not an integer: " + k);
        }
    }
    cfg.recall_k = static_cast<std::size_t>(file.get_uint("eval.recall_k", 3));

    cfg.trigger.k = static_cast<std::size_t>(file.get_uint("trigger.k", 3));
    cfg.trigger.drop_threshold = file.get_double("trigger.drop_threshold", 0.10);
    cfg.trigger.baseline_recall = file.get_double("trigger.baseline_recall", 0.0);
    const std::string mode = file.get_string("trigger.mode", "relative");
    if (mode == "relative") cfg.trigger.mode = eval::DropMode::relative;
    else if (mode == "absolute") cfg.trigger.mode = eval::DropMode::absolute;
    else throw ConfigError("trigger.mode must be relative or absolute: " + mode);

    cfg.dpo.beta = file.get_double("dpo.beta", 0.1);
    cfg.dpo.rho_off = file.get_double("dpo.rho_off", 0.1);
    cfg.dpo.learning_rate = file.get_double("dpo.learning_rate", 0.5);
    cfg.dpo.batch_size = static_cast<std::size_t>(file.get_uint("dpo.batch_size", 32));
    cfg.dpo.seed = file.get_uint("dpo.seed", cfg.seed);
    cfg.dpo.refresh_ref = file.get_bool("dpo.refresh_ref", false);
    cfg.dpo_steps = static_cast<std::size_t>(file.get_uint("dpo.steps", 500));
    cfg.dpo_init_scale = file.get_double("dpo.init_scale", 0.5);
    cfg.pairs_k = static_cast<std::size_t>(
        file.get_uint("dpo.pairs_k", cfg.pipeline.generator_max_queries));

    cfg.world.seed = file.get_uint("world.seed", cfg.seed);
    cfg.world.n_creators = static_cast<std::size_t>(file.get_uint("world.n_creators", 50));
    cfg.world.n_posts = static_cast<std::size_t>(file.get_uint("world.n_posts", 7000));
    cfg.world.horizon = static_cast<std::size_t>(file.get_uint("world.horizon", 56));
    cfg.world.window_length = cfg.pipeline.window_length;
    cfg.world.n_head_trends =
        static_cast<std::size_t>(file.get_uint("world.n_head_trends", 25));
    cfg.world.n_tail_trends =
        static_cast<std::size_t>(file.get_uint("world.n_tail_trends", 25));
    cfg.world.head_search_rate = file.get_double("world.head_search_rate", 30.0);
    cfg.world.tail_search_rate = file.get_double("world.tail_search_rate", 0.5);
    cfg.world.tail_engagement_multiplier =
        file.get_double("world.tail_engagement_multiplier", 3.0);
    cfg.world.background_query_rate = file.get_double("world.background_query_rate", 0.05);
    cfg.world.vocabulary_size =
        static_cast<std::size_t>(file.get_uint("world.vocabulary_size", 500));
    cfg.world.warmup_windows =
        static_cast<std::size_t>(file.get_uint("world.warmup_windows", 26));
    cfg.world.posts_per_trend_window =
        static_cast<std::size_t>(file.get_uint("world.posts_per_trend_window", 4));
    cfg.world.oblique_fraction = file.get_double("world.oblique_fraction", 0.25);

    file.reject_unknown_keys();

    // numeric ranges are enforced by the module configs themselves
    try {
        cfg.pipeline.validate();
        cfg.dpo.validate();
        cfg.world.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    if (cfg.generator == GeneratorChoice::template_table && cfg.knowledge_file.empty())
        throw ConfigError("generator = template requires knowledge_file");
    if (cfg.generator == GeneratorChoice::remote && cfg.remote.url.empty())
        throw ConfigError("generator = remote requires remote.url (or RTTP_REMOTE_URL)");
    if (cfg.run_top_k < 1) throw ConfigError("run.top_k must be >= 1");
    if (cfg.eval_k_list.empty()) throw ConfigError("eval.k_list must not be empty");
    if (cfg.dpo_steps < 1) throw ConfigError("dpo.steps must be >= 1");
    if (cfg.pairs_k < 1) throw ConfigError("dpo.pairs_k must be >= 1");
    return cfg;
}

// Resolves a possibly relative data path: as given, then inside `primary`
// (the events/posts directory), then next to the config file.
inline std::string resolve_path(const RunConfig& cfg, const std::string& name,
                                const std::filesystem::path& primary) {
    namespace fs = std::filesystem;
    const fs::path raw(name);
    if (raw.is_absolute() || fs::exists(raw)) return raw.string();
    if (!primary.empty() && fs::exists(primary / raw)) return (primary / raw).string();
    if (fs::exists(cfg.config_dir / raw)) return (cfg.config_dir / raw).string();
    return raw.string();  // caller reports the miss
}

}  // namespace rttp::config
