#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vmr/data.hpp"
#include "vmr/losses.hpp"
#include "vmr/model.hpp"

namespace vmr {

// Everything one run needs: training hyperparameters, model dimensions, the
// dataset (a path or a generation spec), seed, checkpoint path, proposal
// thresholds, and the evaluation tIoU grid.
struct RunConfig {
    Hyperparameters hp;
    std::size_t d_hidden = 16;
    std::size_t d_proj = 16;
    std::size_t d_out = 16;
    GenSpec gen;
    std::string dataset_path;     // empty: generate from `gen` with `seed`
    std::string checkpoint_path;
    std::uint64_t seed = 7;
    std::size_t triplets_per_epoch = 0;  // 0: one per training video
    std::vector<double> thresholds = {0.3, 0.5, 0.7};
    std::vector<double> tiou_grid = {0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};

    ModelDims dims(std::size_t d_in, std::size_t t) const {
        return {d_in, t, d_hidden, d_proj, d_out};
    }

    void validate() const {
        hp.validate();
        if (tiou_grid.empty()) throw ConfigError("config: tiou grid must be nonempty");
        double prev = 0.0;
        for (double v : tiou_grid) {
            if (!(v > prev && v <= 1.0))
                throw ConfigError("config: tiou grid must be strictly increasing in (0, 1]");
            prev = v;
        }
        if (thresholds.empty()) throw ConfigError("config: proposal thresholds must be nonempty");
        for (double th : thresholds)
            if (!(th > 0.0 && th < 1.0))
                throw ConfigError("config: proposal thresholds must lie strictly in (0, 1)");
        try {
            gen.validate();
        } catch (const InvalidInput& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + value + "'");
    }
    if (pos != value.size())
        throw ConfigError("config: trailing characters in " + key + ": '" + value + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::uint64_t>(v)))
        throw ConfigError("config: " + key + " must be a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a == std::string::npos) throw ConfigError("config: empty item in list " + key);
        out.push_back(parse_double(key, item.substr(a, b - a + 1)));
    }
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

}  // namespace detail

// `key = value` lines, '#' starts a comment. Unknown keys are rejected so
// typos fail loudly.
inline RunConfig parse_config_text(std::istream& is) {
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r\n");
            const auto b = s.find_last_not_of(" \t\r\n");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");

        using detail::parse_double;
        using detail::parse_list;
        using detail::parse_u64;
        if (key == "gamma") cfg.hp.gamma = parse_double(key, value);
        else if (key == "lambda") cfg.hp.lambda = parse_double(key, value);
        else if (key == "lr_triplet") cfg.hp.lr_tri = parse_double(key, value);
        else if (key == "lr_regression") cfg.hp.lr_reg = parse_double(key, value);
        else if (key == "lr_sparsity") cfg.hp.lr_sparsity = parse_double(key, value);
        else if (key == "batch_size") cfg.hp.batch = parse_u64(key, value);
        else if (key == "epochs") cfg.hp.epochs = parse_u64(key, value);
        else if (key == "t") cfg.hp.t = parse_u64(key, value);
        else if (key == "adam_epsilon") cfg.hp.adam_eps = parse_double(key, value);
        else if (key == "beta1") cfg.hp.beta1 = parse_double(key, value);
        else if (key == "beta2") cfg.hp.beta2 = parse_double(key, value);
        else if (key == "d_hidden") cfg.d_hidden = parse_u64(key, value);
        else if (key == "d_proj") cfg.d_proj = parse_u64(key, value);
        else if (key == "d_out") cfg.d_out = parse_u64(key, value);
        else if (key == "num_classes") cfg.gen.num_classes = parse_u64(key, value);
        else if (key == "videos_per_class") cfg.gen.videos_per_class = parse_u64(key, value);
        else if (key == "train_classes") cfg.gen.train_class_count = parse_u64(key, value);
        else if (key == "t_video") cfg.gen.t_video = parse_u64(key, value);
        else if (key == "d_in") cfg.gen.d_in = parse_u64(key, value);
        else if (key == "snr") cfg.gen.snr = parse_double(key, value);
        else if (key == "actionness_noise") cfg.gen.actionness_noise = parse_double(key, value);
        else if (key == "motif_min") cfg.gen.motif_min = parse_u64(key, value);
        else if (key == "motif_max") cfg.gen.motif_max = parse_u64(key, value);
        else if (key == "dataset") cfg.dataset_path = value;
        else if (key == "checkpoint") cfg.checkpoint_path = value;
        else if (key == "seed") cfg.seed = parse_u64(key, value);
        else if (key == "triplets_per_epoch") cfg.triplets_per_epoch = parse_u64(key, value);
        else if (key == "thresholds") cfg.thresholds = parse_list(key, value);
        else if (key == "tiou_grid") cfg.tiou_grid = parse_list(key, value);
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    return parse_config_text(is);
}

}  // namespace vmr
