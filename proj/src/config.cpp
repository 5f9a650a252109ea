#include "dcuprl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dcuprl {

const std::vector<Config::KeySpec>& Config::keys() {
    static const std::vector<KeySpec> table = {
        {"run.seed", "0", "master seed; all substreams derive from it"},
        {"run.out", "runs", "base directory for run artifacts"},
        {"run.scale", "desk", "desk|paper: render/crop/budget/capacity preset"},
        {"env.id", "env1", "env1|env2"},
        {"env.arena", "", "explicit arena file path (overrides env.id lookup)"},
        {"env.arena_dir", "arenas", "directory of shipped arena files"},
        {"env.dt", "0.1", "integration step, seconds"},
        {"env.fov_deg", "90", "camera horizontal field of view, degrees"},
        {"env.max_range", "10", "depth clamp, meters"},
        {"env.noise_sigma", "0", "additive depth noise sigma, meters"},
        {"obs.render", "", "render resolution (derived from run.scale when empty)"},
        {"obs.crop", "", "crop resolution (derived from run.scale when empty)"},
        {"variant.preset", "depth-cuprl", "depth-cuprl|curl-depth|curl-pixel|sac-cnn-prio"},
        {"variant.input", "", "depth|pixel (derived from preset when empty)"},
        {"variant.contrastive", "", "on|off (derived from preset when empty)"},
        {"variant.prioritized", "", "on|off (derived from preset when empty)"},
        {"sac.gamma", "0.99", "discount"},
        {"sac.tau", "0.005", "Polyak rate for target critics"},
        {"sac.alpha", "0.1", "entropy coefficient"},
        {"sac.auto_alpha", "off", "on|off: adapt alpha toward -|A| entropy"},
        {"sac.lr", "0.0003", "Adam learning rate (actor, critics, encoder)"},
        {"sac.batch", "32", "minibatch size"},
        {"sac.hidden", "256", "hidden width of actor/critic MLPs"},
        {"curl.latent", "50", "encoder latent dimension"},
        {"curl.momentum", "0.95", "key encoder retention per update"},
        {"curl.bilinear", "off", "on|off: bilinear similarity q^T W k"},
        {"curl.rl_period", "1", "RL update every n post-warmup steps"},
        {"curl.nce_period", "1", "contrastive update every n post-warmup steps"},
        {"replay.capacity", "", "buffer size (derived from scale/env when empty)"},
        {"replay.alpha", "0.6", "priority exponent"},
        {"replay.beta0", "0.4", "initial importance-sampling exponent (anneals to 1)"},
        {"replay.eps", "1e-6", "priority floor added to |td|"},
        {"train.total_steps", "", "environment steps (derived from scale/env when empty)"},
        {"train.episode_cap", "1000", "steps per episode"},
        {"train.warmup", "1000", "uniform-random steps before updates"},
        {"train.eval_period", "1000", "steps between deterministic evals"},
        {"train.eval_episodes", "10", "episodes per periodic eval"},
        {"train.final_episodes", "1000", "episodes in the final evaluation"},
    };
    return table;
}

std::string Config::valid_keys_message() {
    std::string msg = "valid keys:";
    for (const auto& k : keys()) msg += "\n  " + k.key + " (default '" + k.def + "') - " + k.doc;
    return msg;
}

void Config::check_known(const std::string& key, const std::string& origin) {
    for (const auto& k : keys())
        if (k.key == key) return;
    throw ConfigError("unknown config key '" + key + "' (" + origin + ")\n" + valid_keys_message());
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty())
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        check_known(key, path + ":" + std::to_string(lineno));
        file_[key] = value;
    }
}

void Config::set_flag(const std::string& key, const std::string& value) {
    check_known(key, "command line");
    flags_[key] = value;
}

void Config::set_flag_kv(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_flag(kv.substr(0, eq), kv.substr(eq + 1));
}

void Config::finalize() {
    // resolve the meta keys first; everything scale/env/preset-dependent
    // lands in a derived layer that files and flags still override
    auto meta = [&](const std::string& key) -> std::string {
        if (flags_.count(key)) return flags_.at(key);
        if (file_.count(key)) return file_.at(key);
        for (const auto& k : keys())
            if (k.key == key) return k.def;
        throw ConfigError("missing key spec: " + key);
    };
    const std::string scale = meta("run.scale");
    const std::string env = meta("env.id");
    const std::string preset = meta("variant.preset");
    if (scale != "desk" && scale != "paper")
        throw ConfigError("run.scale must be desk or paper, got '" + scale + "'");
    if (env != "env1" && env != "env2")
        throw ConfigError("env.id must be env1 or env2, got '" + env + "'");

    std::map<std::string, std::string> derived;
    derived["obs.render"] = scale == "desk" ? "40" : "100";
    derived["obs.crop"] = scale == "desk" ? "32" : "84";
    if (scale == "desk") {
        derived["replay.capacity"] = "10000";
        derived["train.total_steps"] = env == "env1" ? "20000" : "50000";
    } else {
        derived["replay.capacity"] = env == "env1" ? "35000" : "140000";
        derived["train.total_steps"] = env == "env1" ? "100000" : "300000";
    }
    const VariantConfig v = variant_preset(preset);
    derived["variant.input"] = v.input == InputKind::depth ? "depth" : "pixel";
    derived["variant.contrastive"] = v.contrastive ? "on" : "off";
    derived["variant.prioritized"] = v.prioritized ? "on" : "off";

    resolved_.clear();
    for (const auto& k : keys()) {
        if (flags_.count(k.key))
            resolved_[k.key] = flags_.at(k.key);
        else if (file_.count(k.key))
            resolved_[k.key] = file_.at(k.key);
        else if (derived.count(k.key))
            resolved_[k.key] = derived.at(k.key);
        else
            resolved_[k.key] = k.def;
    }
    finalized_ = true;
}

const std::string& Config::lookup(const std::string& key) const {
    if (!finalized_) throw ContractError("config used before finalize()");
    auto it = resolved_.find(key);
    if (it == resolved_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

std::string Config::get(const std::string& key) const { return lookup(key); }

double Config::get_f64(const std::string& key) const {
    const std::string& s = lookup(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "' expects a number, got '" + s + "'");
    }
}

long Config::get_i64(const std::string& key) const {
    const std::string& s = lookup(key);
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "' expects an integer, got '" + s + "'");
    }
}

bool Config::get_bool(const std::string& key) const {
    const std::string& s = lookup(key);
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw ConfigError("config key '" + key + "' expects on/off, got '" + s + "'");
}

std::string Config::resolved_text() const {
    if (!finalized_) throw ContractError("config used before finalize()");
    std::ostringstream out;
    for (const auto& [k, v] : resolved_) out << k << " = " << v << "\n";
    return out.str();
}

std::string Config::arena_path() const {
    const std::string explicit_path = get("env.arena");
    if (!explicit_path.empty()) return explicit_path;
    return get("env.arena_dir") + "/" + get("env.id") + ".txt";
}

TrainConfig Config::to_train_config() const {
    TrainConfig cfg;
    cfg.arena_path = arena_path();
    cfg.seed = static_cast<std::uint64_t>(get_i64("run.seed"));
    cfg.total_steps = get_i64("train.total_steps");
    cfg.episode_cap = static_cast<int>(get_i64("train.episode_cap"));
    cfg.warmup = get_i64("train.warmup");
    cfg.eval_period = get_i64("train.eval_period");
    cfg.eval_episodes = static_cast<int>(get_i64("train.eval_episodes"));
    cfg.final_episodes = static_cast<int>(get_i64("train.final_episodes"));
    cfg.render_size = static_cast<int>(get_i64("obs.render"));
    cfg.crop_size = static_cast<int>(get_i64("obs.crop"));
    cfg.dt = get_f64("env.dt");
    cfg.fov = get_f64("env.fov_deg") * 3.141592653589793238 / 180.0;
    cfg.max_range = get_f64("env.max_range");
    cfg.depth_noise_sigma = get_f64("env.noise_sigma");
    cfg.rl_period = static_cast<int>(get_i64("curl.rl_period"));
    cfg.nce_period = static_cast<int>(get_i64("curl.nce_period"));
    cfg.latent_dim = static_cast<int>(get_i64("curl.latent"));
    cfg.replay.capacity = static_cast<std::size_t>(get_i64("replay.capacity"));
    cfg.replay.alpha = get_f64("replay.alpha");
    cfg.replay.beta = get_f64("replay.beta0");
    cfg.replay.eps = get_f64("replay.eps");
    cfg.sac.gamma = static_cast<float>(get_f64("sac.gamma"));
    cfg.sac.tau = static_cast<float>(get_f64("sac.tau"));
    cfg.sac.alpha = static_cast<float>(get_f64("sac.alpha"));
    cfg.sac.auto_alpha = get_bool("sac.auto_alpha");
    cfg.sac.lr = static_cast<float>(get_f64("sac.lr"));
    cfg.sac.batch = static_cast<int>(get_i64("sac.batch"));
    cfg.sac.hidden = static_cast<int>(get_i64("sac.hidden"));
    cfg.curl.momentum = static_cast<float>(get_f64("curl.momentum"));
    cfg.curl.bilinear = get_bool("curl.bilinear");
    return cfg;
}

VariantConfig Config::to_variant() const {
    VariantConfig v = variant_preset(get("variant.preset"));
    const std::string input = get("variant.input");
    if (input == "depth")
        v.input = InputKind::depth;
    else if (input == "pixel")
        v.input = InputKind::pixel;
    else
        throw ConfigError("variant.input must be depth or pixel, got '" + input + "'");
    v.contrastive = get_bool("variant.contrastive");
    v.prioritized = get_bool("variant.prioritized");
    return v;
}

} // namespace dcuprl
