#include "nlc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include "nlc/errors.hpp"

namespace nlc {

namespace {

std::string trim(const std::string& s) {
    auto b = s.begin();
    auto e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return {b, e};
}

class Setter {
public:
    template <typename F>
    Setter(F f) : apply_(std::move(f)) {}
    void operator()(const std::string& key, const std::string& value) const {
        apply_(key, value);
    }

private:
    std::function<void(const std::string&, const std::string&)> apply_;
};

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": bad real value '" + value + "'");
    }
}

long long to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": bad integer value '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key + ": bad boolean value '" + value + "'");
}

}  // namespace

std::vector<std::size_t> parse_hidden(const std::string& spec) {
    std::vector<std::size_t> dims;
    if (trim(spec).empty()) return dims;
    std::istringstream ss(spec);
    std::string field;
    while (std::getline(ss, field, ',')) {
        const long long v = to_int("hidden", trim(field));
        if (v < 1) throw ConfigError("hidden: widths must be positive");
        dims.push_back(static_cast<std::size_t>(v));
    }
    return dims;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& spec) {
    std::vector<std::pair<int, int>> pairs;
    if (trim(spec).empty()) return pairs;
    std::istringstream ss(spec);
    std::string field;
    while (std::getline(ss, field, ',')) {
        const auto sep = field.find('>');
        if (sep == std::string::npos)
            throw ConfigError("pairs: expected 'source>target', got '" + field + "'");
        pairs.emplace_back(static_cast<int>(to_int("pairs", trim(field.substr(0, sep)))),
                           static_cast<int>(to_int("pairs", trim(field.substr(sep + 1)))));
    }
    return pairs;
}

HarnessConfig parse_config(const std::string& file_path,
                           const std::map<std::string, std::string>& overrides) {
    HarnessConfig cfg;

    const std::map<std::string, Setter> setters = {
        {"seed", Setter([&](const std::string& k, const std::string& v) {
             cfg.seed = static_cast<std::uint64_t>(to_int(k, v));
         })},
        {"mode", Setter([&](const std::string&, const std::string& v) {
             mode_from_string(v);  // validates
             cfg.mode = v;
         })},
        {"out", Setter([&](const std::string&, const std::string& v) { cfg.out = v; })},
        {"data", Setter([&](const std::string&, const std::string& v) { cfg.data = v; })},
        {"tau", Setter([&](const std::string& k, const std::string& v) {
             cfg.tau = to_double(k, v);
         })},
        {"noise", Setter([&](const std::string& k, const std::string& v) {
             if (v != "symmetric" && v != "pairmap" && v != "circular")
                 throw ConfigError(k + ": must be symmetric, pairmap or circular");
             cfg.noise = v;
         })},
        {"pairs", Setter([&](const std::string&, const std::string& v) {
             parse_pairs(v);  // validates
             cfg.pairs = v;
         })},
        {"superclass_size", Setter([&](const std::string& k, const std::string& v) {
             cfg.superclass_size = static_cast<int>(to_int(k, v));
         })},
        {"num_classes", Setter([&](const std::string& k, const std::string& v) {
             cfg.num_classes = static_cast<int>(to_int(k, v));
         })},
        {"per_class", Setter([&](const std::string& k, const std::string& v) {
             cfg.per_class = static_cast<int>(to_int(k, v));
         })},
        {"dim", Setter([&](const std::string& k, const std::string& v) {
             cfg.dim = static_cast<int>(to_int(k, v));
         })},
        {"separation", Setter([&](const std::string& k, const std::string& v) {
             cfg.separation = to_double(k, v);
         })},
        {"spread", Setter([&](const std::string& k, const std::string& v) {
             cfg.spread = to_double(k, v);
         })},
        {"test_fraction", Setter([&](const std::string& k, const std::string& v) {
             cfg.test_fraction = to_double(k, v);
         })},
        {"hidden", Setter([&](const std::string&, const std::string& v) {
             parse_hidden(v);  // validates
             cfg.hidden = v;
         })},
        {"batch_size", Setter([&](const std::string& k, const std::string& v) {
             cfg.batch_size = static_cast<int>(to_int(k, v));
         })},
        {"stage1_epochs", Setter([&](const std::string& k, const std::string& v) {
             cfg.stage1_epochs = static_cast<int>(to_int(k, v));
         })},
        {"finetune_epochs", Setter([&](const std::string& k, const std::string& v) {
             cfg.finetune_epochs = static_cast<int>(to_int(k, v));
         })},
        {"lr_stage1", Setter([&](const std::string& k, const std::string& v) {
             cfg.lr_stage1 = to_double(k, v);
         })},
        {"lr_finetune_start", Setter([&](const std::string& k, const std::string& v) {
             cfg.lr_finetune_start = to_double(k, v);
         })},
        {"t_k", Setter([&](const std::string& k, const std::string& v) {
             cfg.t_k = static_cast<int>(to_int(k, v));
         })},
        {"t_update", Setter([&](const std::string& k, const std::string& v) {
             cfg.t_update = static_cast<int>(to_int(k, v));
         })},
        {"c_restart", Setter([&](const std::string& k, const std::string& v) {
             cfg.c_restart = to_double(k, v);
         })},
        {"lambda_start", Setter([&](const std::string& k, const std::string& v) {
             cfg.lambda_start = to_double(k, v);
         })},
        {"lambda_end", Setter([&](const std::string& k, const std::string& v) {
             cfg.lambda_end = to_double(k, v);
         })},
        {"rates_use_initial_tau", Setter([&](const std::string& k, const std::string& v) {
             cfg.rates_use_initial_tau = to_bool(k, v);
         })},
        {"tau_count_changed_only", Setter([&](const std::string& k, const std::string& v) {
             cfg.tau_count_changed_only = to_bool(k, v);
         })},
    };

    auto apply = [&](const std::string& key, const std::string& value) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(key, value);
    };

    if (!file_path.empty()) {
        std::ifstream in(file_path);
        if (!in) throw ConfigError("cannot open config file: " + file_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key=value, got '" + line + "'");
            apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }
    for (const auto& [key, value] : overrides) apply(key, value);

    // range checks, each naming its key
    auto in_unit = [](const std::string& key, double v) {
        if (v < 0.0 || v > 1.0) throw ConfigError(key + " out of [0,1]");
    };
    in_unit("tau", cfg.tau);
    in_unit("c_restart", cfg.c_restart);
    in_unit("lambda_start", cfg.lambda_start);
    in_unit("lambda_end", cfg.lambda_end);
    if (cfg.lambda_end > cfg.lambda_start)
        throw ConfigError("lambda_end must not exceed lambda_start");
    if (cfg.num_classes < 2) throw ConfigError("num_classes must be at least 2");
    if (cfg.per_class < 1) throw ConfigError("per_class must be positive");
    if (cfg.dim < 2) throw ConfigError("dim must be at least 2");
    if (cfg.separation <= 0.0) throw ConfigError("separation must be positive");
    if (cfg.spread < 0.0) throw ConfigError("spread must be non-negative");
    if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0)
        throw ConfigError("test_fraction out of (0,1)");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be positive");
    if (cfg.stage1_epochs < 1) throw ConfigError("stage1_epochs must be positive");
    if (cfg.finetune_epochs < 0) throw ConfigError("finetune_epochs must be non-negative");
    if (cfg.lr_stage1 <= 0.0) throw ConfigError("lr_stage1 must be positive");
    if (cfg.lr_finetune_start <= 0.0) throw ConfigError("lr_finetune_start must be positive");
    if (cfg.t_k < 1) throw ConfigError("t_k must be positive");
    if (cfg.t_update < 1) throw ConfigError("t_update must be positive");
    if (cfg.superclass_size < 1) throw ConfigError("superclass_size must be positive");
    return cfg;
}

RunConfig to_run_config(const HarnessConfig& cfg, std::size_t input_dim) {
    RunConfig rc;
    rc.schedules.tau0 = cfg.tau;
    rc.schedules.t_k = cfg.t_k;
    rc.schedules.t_update = cfg.t_update;
    rc.schedules.c_restart = cfg.c_restart;
    rc.schedules.lambda_start = cfg.lambda_start;
    rc.schedules.lambda_end = cfg.lambda_end;
    rc.layer_dims.push_back(input_dim);
    for (std::size_t h : parse_hidden(cfg.hidden)) rc.layer_dims.push_back(h);
    rc.layer_dims.push_back(static_cast<std::size_t>(cfg.num_classes));
    rc.stage1_epochs = cfg.stage1_epochs;
    rc.finetune_epochs = cfg.finetune_epochs;
    rc.batch_size = static_cast<std::size_t>(cfg.batch_size);
    rc.lr_stage1 = cfg.lr_stage1;
    rc.lr_finetune_start = cfg.lr_finetune_start;
    rc.mode = mode_from_string(cfg.mode);
    rc.seed = cfg.seed;
    rc.rates_use_initial_tau = cfg.rates_use_initial_tau;
    rc.tau_counts_changed_only = cfg.tau_count_changed_only;
    return rc;
}

nlohmann::ordered_json config_json(const HarnessConfig& cfg) {
    nlohmann::ordered_json j;
    j["seed"] = cfg.seed;
    j["mode"] = cfg.mode;
    j["out"] = cfg.out;
    j["data"] = cfg.data;
    j["tau"] = cfg.tau;
    j["noise"] = cfg.noise;
    j["pairs"] = cfg.pairs;
    j["superclass_size"] = cfg.superclass_size;
    j["num_classes"] = cfg.num_classes;
    j["per_class"] = cfg.per_class;
    j["dim"] = cfg.dim;
    j["separation"] = cfg.separation;
    j["spread"] = cfg.spread;
    j["test_fraction"] = cfg.test_fraction;
    j["hidden"] = cfg.hidden;
    j["batch_size"] = cfg.batch_size;
    j["stage1_epochs"] = cfg.stage1_epochs;
    j["finetune_epochs"] = cfg.finetune_epochs;
    j["lr_stage1"] = cfg.lr_stage1;
    j["lr_finetune_start"] = cfg.lr_finetune_start;
    j["t_k"] = cfg.t_k;
    j["t_update"] = cfg.t_update;
    j["c_restart"] = cfg.c_restart;
    j["lambda_start"] = cfg.lambda_start;
    j["lambda_end"] = cfg.lambda_end;
    j["rates_use_initial_tau"] = cfg.rates_use_initial_tau;
    j["tau_count_changed_only"] = cfg.tau_count_changed_only;
    return j;
}

}  // namespace nlc
