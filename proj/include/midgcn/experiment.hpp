#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "midgcn/errors.hpp"
#include "midgcn/filter.hpp"
#include "midgcn/model.hpp"

namespace midgcn {

struct AttackSpec {
    std::string kind = "random_flip";   // random_flip | dice | targeted | feature_flip | load
    double rate = 0.25;
    int n_perturbations = 2;
    int target = 0;
    long long n_flips = 0;
    std::string perturbed_edges;        // for kind=load
};

struct ExperimentConfig {
    std::string dataset_manifest;
    FilterSpec model_filter = FilterSpec{FilterKind::mid_alpha, 0.5};
    FilterSpec baseline_filter = FilterSpec{FilterKind::low, 1.0};
    TrainConfig train;
    double train_frac = 0.1;
    double val_frac = 0.1;
    AttackSpec attack;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<double> rates = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
    std::vector<double> alpha_sweep;
    double band_p = 0.5;
    int degree_min = 10;
    std::string out_dir = "runs/out";
    bool diag_lemma1 = true;
    bool diag_rank = false;
    bool diag_srl = true;
    bool diag_bands = true;
    int threads = 1;

    void validate() const {
        if (dataset_manifest.empty()) throw ConfigError("config: dataset manifest path is required");
        if (!std::filesystem::exists(dataset_manifest))
            throw ConfigError("config: dataset manifest not found: " + dataset_manifest);
        if (seeds.empty()) throw ConfigError("config: seed list must be non-empty");
        if (!(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0))
            throw ConfigError("config: split fractions out of range");
        for (double r : rates)
            if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("config: perturbation rate outside [0, 1]");
        if (!(band_p > 0.0 && band_p < 1.0)) throw ConfigError("config: band_p must lie in (0, 1)");
        if (degree_min < 0) throw ConfigError("config: degree_min must be nonnegative");
        if (threads < 1) throw ConfigError("config: threads must be at least 1");
        if (attack.kind != "random_flip" && attack.kind != "dice" && attack.kind != "targeted" &&
            attack.kind != "feature_flip" && attack.kind != "load")
            throw ConfigError("config: unknown attack kind: " + attack.kind);
        if (attack.kind == "load" && !std::filesystem::exists(attack.perturbed_edges))
            throw ConfigError("config: perturbed edge list not found: " + attack.perturbed_edges);
        if (!(attack.rate >= 0.0 && attack.rate <= 1.0))
            throw ConfigError("config: attack rate outside [0, 1]");
        for (double a : alpha_sweep)
            if (!(a >= 0.0 && a <= 2.0)) throw ConfigError("config: alpha sweep value outside [0, 2]");
        train.validate();
        FilterSpec::make(model_filter.kind, model_filter.alpha);
        FilterSpec::make(baseline_filter.kind, baseline_filter.alpha);
    }
};

namespace detail {

inline FilterSpec filter_from_json(const nlohmann::json& j, const FilterSpec& fallback) {
    FilterSpec spec = fallback;
    if (j.contains("filter")) spec.kind = parse_filter_kind(j.at("filter").get<std::string>());
    if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
    return FilterSpec::make(spec.kind, spec.alpha);
}

} // namespace detail

inline nlohmann::json filter_to_json(const FilterSpec& spec) {
    return {{"filter", filter_kind_name(spec.kind)}, {"alpha", spec.alpha}};
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::string& base_dir = ".") {
    ExperimentConfig c;
    try {
        const auto base = std::filesystem::path(base_dir);
        if (j.contains("dataset"))
            c.dataset_manifest = (base / j.at("dataset").get<std::string>()).lexically_normal().string();
        if (j.contains("model")) c.model_filter = detail::filter_from_json(j.at("model"), c.model_filter);
        if (j.contains("baseline"))
            c.baseline_filter = detail::filter_from_json(j.at("baseline"), c.baseline_filter);

        if (j.contains("model") && j.at("model").contains("hidden"))
            c.train.hidden = j.at("model").at("hidden").get<int>();
        if (j.contains("train")) {
            const auto& t = j.at("train");
            c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
            c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
            c.train.dropout_rate = t.value("dropout_rate", c.train.dropout_rate);
            c.train.epochs_max = t.value("epochs_max", c.train.epochs_max);
            c.train.patience = t.value("patience", c.train.patience);
            c.train.row_normalize_features = t.value("row_normalize_features", c.train.row_normalize_features);
            c.train_frac = t.value("train_frac", c.train_frac);
            c.val_frac = t.value("val_frac", c.val_frac);
        }
        c.train.filter = c.model_filter;

        if (j.contains("attack")) {
            const auto& a = j.at("attack");
            c.attack.kind = a.value("kind", c.attack.kind);
            c.attack.rate = a.value("rate", c.attack.rate);
            c.attack.n_perturbations = a.value("n_perturbations", c.attack.n_perturbations);
            c.attack.target = a.value("target", c.attack.target);
            c.attack.n_flips = a.value("n_flips", c.attack.n_flips);
            if (a.contains("perturbed_edges"))
                c.attack.perturbed_edges =
                    (base / a.at("perturbed_edges").get<std::string>()).lexically_normal().string();
        }

        if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("rates")) c.rates = j.at("rates").get<std::vector<double>>();
        if (j.contains("alpha_sweep")) c.alpha_sweep = j.at("alpha_sweep").get<std::vector<double>>();
        c.band_p = j.value("band_p", c.band_p);
        c.degree_min = j.value("degree_min", c.degree_min);
        if (j.contains("out")) c.out_dir = (base / j.at("out").get<std::string>()).lexically_normal().string();
        if (j.contains("diagnostics")) {
            const auto& d = j.at("diagnostics");
            c.diag_lemma1 = d.value("lemma1", c.diag_lemma1);
            c.diag_rank = d.value("rank_curve", c.diag_rank);
            c.diag_srl = d.value("srl", c.diag_srl);
            c.diag_bands = d.value("bands", c.diag_bands);
        }
        c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: malformed field: ") + e.what());
    }
    return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": bad JSON: " + e.what());
    }
    return parse_experiment_config(j, std::filesystem::path(path).parent_path().string());
}

inline nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["dataset"] = c.dataset_manifest;
    j["model"] = filter_to_json(c.model_filter);
    j["model"]["hidden"] = c.train.hidden;
    j["baseline"] = filter_to_json(c.baseline_filter);
    j["train"] = {{"learning_rate", c.train.learning_rate},
                  {"weight_decay", c.train.weight_decay},
                  {"dropout_rate", c.train.dropout_rate},
                  {"epochs_max", c.train.epochs_max},
                  {"patience", c.train.patience},
                  {"row_normalize_features", c.train.row_normalize_features},
                  {"train_frac", c.train_frac},
                  {"val_frac", c.val_frac}};
    j["attack"] = {{"kind", c.attack.kind},
                   {"rate", c.attack.rate},
                   {"n_perturbations", c.attack.n_perturbations},
                   {"target", c.attack.target},
                   {"n_flips", c.attack.n_flips}};
    if (!c.attack.perturbed_edges.empty()) j["attack"]["perturbed_edges"] = c.attack.perturbed_edges;
    j["seeds"] = c.seeds;
    j["rates"] = c.rates;
    if (!c.alpha_sweep.empty()) j["alpha_sweep"] = c.alpha_sweep;
    j["band_p"] = c.band_p;
    j["degree_min"] = c.degree_min;
    j["out"] = c.out_dir;
    j["diagnostics"] = {{"lemma1", c.diag_lemma1}, {"rank_curve", c.diag_rank},
                        {"srl", c.diag_srl}, {"bands", c.diag_bands}};
    j["threads"] = c.threads;
    return j;
}

inline std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[8192];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    return h;
}

} // namespace midgcn
