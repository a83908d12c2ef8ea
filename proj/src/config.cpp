#include "tsr/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tsr {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value, const std::string& where) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError(where + ": " + key + ": expected a number, got '" + value + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value,
                             const std::string& where) {
    const bool digits = !value.empty() && value.size() <= 20 &&
                        std::all_of(value.begin(), value.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (!digits) {
        throw ConfigError(where + ": " + key + ": expected a non-negative integer, got '" + value + "'");
    }
    errno = 0;
    const unsigned long long v = std::strtoull(value.c_str(), nullptr, 10);
    if (errno == ERANGE) throw ConfigError(where + ": " + key + ": value out of range");
    return v;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value,
             const std::string& where) {
    TrainConfig& t = cfg.train;
    auto number = [&] { return parse_double(key, value, where); };
    auto count = [&] { return static_cast<std::size_t>(parse_unsigned(key, value, where)); };
    auto path = [&] {
        if (value.empty()) throw ConfigError(where + ": " + key + ": empty path");
        return std::filesystem::path(value);
    };

    if (key == "learning_rate") t.learning_rate = number();
    else if (key == "batch_size") t.batch_size = count();
    else if (key == "max_epochs") t.max_epochs = count();
    else if (key == "early_stop_patience") t.early_stop_patience = count();
    else if (key == "lr_factor") t.lr_factor = number();
    else if (key == "lr_patience") t.lr_patience = count();
    else if (key == "min_lr") t.min_lr = number();
    else if (key == "seed") t.seed = parse_unsigned(key, value, where);
    else if (key == "val_fraction") t.val_fraction = number();
    else if (key == "test_fraction") cfg.test_fraction = number();
    else if (key == "threads") cfg.threads = count();
    else if (key == "data_root") cfg.data_root = path();
    else if (key == "out_dir") cfg.out_dir = path();
    else if (key == "checkpoint") cfg.checkpoint = path();
    else throw ConfigError(where + ": unknown key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "learning_rate", "batch_size", "max_epochs",    "early_stop_patience", "lr_factor",
        "lr_patience",   "min_lr",     "seed",          "val_fraction",        "test_fraction",
        "threads",       "data_root",  "out_dir",       "checkpoint"};
    return keys;
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": missing key before '='");
        set_key(cfg, key, trim(line.substr(eq + 1)), where);
    }
}

RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& overrides, Command command) {
    RunConfig cfg;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("cannot read config file " + file->string());
        std::ostringstream text;
        text << in.rdbuf();
        apply_config_text(cfg, text.str(), file->string());
    }
    for (const auto& [key, value] : overrides) set_key(cfg, key, value, "command line");

    try {
        cfg.train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
        throw ConfigError("invalid configuration: test_fraction must be in (0, 1)");
    }

    auto require = [](const std::filesystem::path& p, const char* key) {
        if (p.empty()) throw ConfigError(std::string("missing required path '") + key + "'");
    };
    switch (command) {
        case Command::train:
            require(cfg.data_root, "data_root");
            require(cfg.out_dir, "out_dir");
            if (cfg.checkpoint.empty()) cfg.checkpoint = cfg.out_dir / "model.tsrn";
            break;
        case Command::eval:
            require(cfg.data_root, "data_root");
            require(cfg.checkpoint, "checkpoint");
            require(cfg.out_dir, "out_dir");
            break;
        case Command::predict:
            require(cfg.checkpoint, "checkpoint");
            break;
        case Command::report:
            require(cfg.out_dir, "out_dir");
            break;
    }
    return cfg;
}

}  // namespace tsr
