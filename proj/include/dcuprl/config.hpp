#pragma once
#include <map>
#include <string>
#include <vector>

#include "dcuprl/trainer.hpp"

namespace dcuprl {

/**
 * Flat dotted-key configuration with strict key checking and layered
 * precedence: command-line flag > config file > scale/env/preset-derived
 * default > hard default. Unknown keys are rejected with the full list
 * of valid ones. The fully resolved map is dumped into every run
 * directory so results stay reproducible from artifacts alone.
 *
 * File format: one `key = value` per line, `#` comments.
 */
class Config {
public:
    struct KeySpec {
        std::string key;
        std::string def;
        std::string doc;
    };
    static const std::vector<KeySpec>& keys();
    static std::string valid_keys_message();

    /// Parse a config file into the file layer.
    void load_file(const std::string& path);

    /// Set one key in the flag layer ("key=value" form or split).
    void set_flag(const std::string& key, const std::string& value);
    void set_flag_kv(const std::string& kv);

    /// Resolve all layers. Must be called before any getter.
    void finalize();

    std::string get(const std::string& key) const;
    double get_f64(const std::string& key) const;
    long get_i64(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// Sorted `key=value` lines of the fully resolved configuration.
    std::string resolved_text() const;

    /// Arena file location: env.arena when set, else <env.arena_dir>/<env.id>.txt.
    std::string arena_path() const;

    TrainConfig to_train_config() const;
    VariantConfig to_variant() const;

private:
    std::map<std::string, std::string> file_, flags_, resolved_;
    bool finalized_ = false;

    static void check_known(const std::string& key, const std::string& origin);
    const std::string& lookup(const std::string& key) const;
};

} // namespace dcuprl
