#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "midgcn/analysis.hpp"
#include "midgcn/attack.hpp"
#include "midgcn/data.hpp"
#include "midgcn/errors.hpp"
#include "midgcn/experiment.hpp"
#include "midgcn/model.hpp"
#include "midgcn/spectral.hpp"

namespace midgcn {

namespace detail {

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

inline std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Runs fn(task) for every index, spread over the requested worker count.
/// The first exception thrown by any task is rethrown after all join.
inline void parallel_tasks(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline void snapshot_run_inputs(const ExperimentConfig& config) {
    std::filesystem::create_directories(config.out_dir);
    write_json_file(experiment_config_to_json(config),
                    (std::filesystem::path(config.out_dir) / "config_snapshot.json").string());

    const DatasetManifest m = read_manifest(config.dataset_manifest);
    nlohmann::json inputs;
    auto add = [&](const char* key, const std::string& path) {
        inputs[key] = {{"path", path}, {"fnv1a", hex64(fnv1a_file(path))}};
    };
    add("manifest", config.dataset_manifest);
    add("edges", m.edges_path);
    add("features", m.features_path);
    add("labels", m.labels_path);
    if (!config.attack.perturbed_edges.empty() && std::filesystem::exists(config.attack.perturbed_edges))
        add("perturbed_edges", config.attack.perturbed_edges);
    write_json_file(inputs, (std::filesystem::path(config.out_dir) / "inputs.json").string());
}

inline std::string out_path(const ExperimentConfig& config, const std::string& name) {
    return (std::filesystem::path(config.out_dir) / name).string();
}

/// Structural attack for one (seed, rate); feature attacks leave the graph
/// alone and are handled where features are consumed.
inline Graph attacked_graph(const ExperimentConfig& config, const Dataset& ds, std::uint64_t seed,
                            double rate) {
    const auto& a = config.attack;
    if (a.kind == "load") return load_perturbed(a.perturbed_edges, ds.graph.n);
    if (rate == 0.0 && a.kind != "targeted") return ds.graph;
    if (a.kind == "random_flip") return apply_perturbation(ds.graph, random_flip(ds.graph, rate, seed));
    if (a.kind == "dice")
        return apply_perturbation(ds.graph, dice_attack(ds.graph, ds.labels, rate, seed));
    if (a.kind == "targeted")
        return apply_perturbation(
            ds.graph, targeted_perturb(ds.graph, ds.labels, a.target, a.n_perturbations, seed));
    if (a.kind == "feature_flip") return ds.graph;
    throw ConfigError("unknown attack kind: " + a.kind);
}

struct SeedStats {
    double mean = 0.0;
    double stddev = 0.0;
};

inline SeedStats mean_std(const std::vector<double>& xs) {
    SeedStats s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
    return s;
}

} // namespace detail

/// Laplacian spectrum of the clean graph, paired with the attacked graph's
/// spectrum when an attack is configured; optional per-band shift stats.
inline void cmd_spectrum(const ExperimentConfig& config) {
    config.validate();
    detail::snapshot_run_inputs(config);
    const Dataset ds = load_dataset(config.dataset_manifest);

    const bool have_attack =
        config.attack.kind == "load" || (config.attack.kind != "feature_flip" && config.attack.rate > 0.0);

    const std::string csv_path = detail::out_path(config, "spectrum.csv");
    if (!have_attack) {
        const SpectralDecomposition dec = eig(laplacian(ds.graph));
        std::ofstream out(csv_path);
        if (!out) throw DataError("cannot write file: " + csv_path);
        out << "index,lambda_clean\n";
        for (int i = 0; i < dec.n(); ++i)
            out << i << ',' << format_sig12(dec.eigenvalues(i)) << '\n';
        std::cout << "wrote " << csv_path << " (" << dec.n() << " eigenvalues)\n";
        return;
    }

    const Graph attacked = detail::attacked_graph(config, ds, config.seeds.front(), config.attack.rate);
    const auto rows = spectrum_shift_report(ds.graph, attacked);
    write_spectrum_csv(rows, csv_path);
    std::cout << "wrote " << csv_path << " (" << rows.size() << " eigenvalue pairs)\n";

    if (config.diag_bands) {
        const BandDeltaStats stats = band_eigendelta_stats(ds.graph, attacked, config.band_p);
        nlohmann::json j;
        j["p"] = config.band_p;
        auto put = [&](const char* key, const std::optional<double>& v) {
            if (v.has_value()) j[key] = *v;
            else j[key] = nullptr;
        };
        put("mean_abs_delta_low", stats.mean_abs_delta_low);
        put("mean_abs_delta_mid", stats.mean_abs_delta_mid);
        put("mean_abs_delta_high", stats.mean_abs_delta_high);
        const std::string bands_path = detail::out_path(config, "bands.json");
        detail::write_json_file(j, bands_path);
        std::cout << "wrote " << bands_path << '\n';
    }
}

/// Trains the configured model once per seed and aggregates test accuracy.
inline void cmd_train(const ExperimentConfig& config) {
    config.validate();
    detail::snapshot_run_inputs(config);
    const Dataset ds = load_dataset(config.dataset_manifest);

    struct SeedOutcome {
        double test_accuracy = 0.0;
        double wall_seconds = 0.0;
        int best_epoch = 0;
        int epochs_run = 0;
        double final_train_loss = 0.0;
        double best_val_accuracy = 0.0;
    };
    std::vector<SeedOutcome> outcomes(config.seeds.size());

    detail::parallel_tasks(config.seeds.size(), config.threads, [&](std::size_t i) {
        const std::uint64_t seed = config.seeds[i];
        TrainConfig tc = config.train;
        tc.seed = seed;
        tc.filter = config.model_filter;
        const Split split = random_split(ds.labels, config.train_frac, config.val_frac, seed);
        const TrainResult result = train(ds.graph, ds.features, ds.labels, split, tc);
        save_checkpoint(result.params,
                        detail::out_path(config, "checkpoint_seed" + std::to_string(seed) + ".ckpt"));
        SeedOutcome& o = outcomes[i];
        o.test_accuracy = result.report.test_accuracy;
        o.wall_seconds = result.report.wall_seconds;
        o.best_epoch = result.report.best_epoch;
        o.epochs_run = result.report.epochs_run;
        o.final_train_loss = result.report.train_loss.empty() ? 0.0 : result.report.train_loss.back();
        o.best_val_accuracy = result.report.best_epoch >= 1
                                  ? result.report.val_accuracy[static_cast<std::size_t>(result.report.best_epoch - 1)]
                                  : 0.0;
    });

    nlohmann::json j;
    j["dataset"] = ds.name;
    j["model"] = filter_to_json(config.model_filter);
    j["model"]["hidden"] = config.train.hidden;
    std::vector<double> accs;
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
        const auto& o = outcomes[i];
        j["seeds"].push_back({{"seed", config.seeds[i]},
                              {"test_accuracy", o.test_accuracy},
                              {"best_val_accuracy", o.best_val_accuracy},
                              {"best_epoch", o.best_epoch},
                              {"epochs_run", o.epochs_run},
                              {"final_train_loss", o.final_train_loss},
                              {"wall_seconds", o.wall_seconds}});
        accs.push_back(o.test_accuracy);
    }
    const detail::SeedStats stats = detail::mean_std(accs);
    j["test_accuracy_mean"] = stats.mean;
    j["test_accuracy_std"] = stats.stddev;
    const std::string report_path = detail::out_path(config, "train_report.json");
    detail::write_json_file(j, report_path);
    std::cout << "test accuracy mean " << stats.mean << " std " << stats.stddev << '\n'
              << "wrote " << report_path << '\n';
}

/// Generates the configured attack and writes the perturbation plus the
/// attacked artifact (edge list or feature file).
inline void cmd_attack(const ExperimentConfig& config) {
    config.validate();
    detail::snapshot_run_inputs(config);
    const Dataset ds = load_dataset(config.dataset_manifest);
    const std::uint64_t seed = config.seeds.front();

    if (config.attack.kind == "feature_flip") {
        const NodeFeatures flipped = feature_flip(ds.features, config.attack.n_flips, seed);
        const std::string path = detail::out_path(config, "attacked_features.csv");
        write_features_csv(flipped, path);
        std::cout << "wrote " << path << " (" << config.attack.n_flips << " flips)\n";
        return;
    }

    EdgePerturbation perturbation;
    if (config.attack.kind == "random_flip") {
        perturbation = random_flip(ds.graph, config.attack.rate, seed);
    } else if (config.attack.kind == "dice") {
        perturbation = dice_attack(ds.graph, ds.labels, config.attack.rate, seed);
    } else if (config.attack.kind == "targeted") {
        perturbation = targeted_perturb(ds.graph, ds.labels, config.attack.target,
                                        config.attack.n_perturbations, seed);
    } else {
        const Graph loaded = load_perturbed(config.attack.perturbed_edges, ds.graph.n);
        perturbation = diff_edges(ds.graph, loaded);
    }

    const Graph attacked = apply_perturbation(ds.graph, perturbation);
    const std::string pert_path = detail::out_path(config, "perturbation.txt");
    const std::string edges_path = detail::out_path(config, "attacked_edges.txt");
    write_perturbation(perturbation, pert_path);
    write_edge_list(attacked, edges_path);
    std::cout << "wrote " << pert_path << " (" << perturbation.ops.size() << " ops)\n"
              << "wrote " << edges_path << " (" << attacked.edge_count() << " edges)\n";
}

/// Graph-level diagnostics bundle: homophily, common-neighbor statistics,
/// filter alignment, band shifts, rank growth.
inline void cmd_analyze(const ExperimentConfig& config) {
    config.validate();
    detail::snapshot_run_inputs(config);
    const Dataset ds = load_dataset(config.dataset_manifest);

    nlohmann::json j;
    j["dataset"] = ds.name;
    j["n"] = ds.graph.n;
    j["edges"] = ds.graph.edge_count();
    j["homophily"] = edge_homophily(ds.graph, ds.labels);

    if (config.diag_lemma1) {
        const Lemma1Stats stats = lemma1_monte_carlo(ds.graph);
        j["common_neighbor_reciprocal"] = {{"mean", stats.mean},
                                           {"violation_fraction", stats.violation_fraction},
                                           {"pairs", stats.pairs}};
    }

    if (config.diag_srl && ds.graph.n <= kDenseEigCap) {
        const SpectralDecomposition dec = eig(laplacian(ds.graph));
        Eigen::VectorXd sign_labels(ds.graph.n);
        for (int i = 0; i < ds.graph.n; ++i)
            sign_labels(i) = (ds.labels.y[static_cast<std::size_t>(i)] % 2 == 0) ? 1.0 : -1.0;
        const Eigen::VectorXd alpha_coeffs =
            graph_fourier(sign_labels, dec) / std::sqrt(static_cast<double>(ds.graph.n));
        const Eigen::VectorXd beta_coeffs = graph_fourier(Eigen::VectorXd::Ones(ds.graph.n), dec);
        const std::vector<FilterSpec> specs = {FilterSpec::make(FilterKind::low),
                                               FilterSpec::make(FilterKind::high),
                                               FilterSpec::make(FilterKind::mid),
                                               config.model_filter};
        for (const auto& spec : specs) {
            nlohmann::json entry = filter_to_json(spec);
            entry["generalization_condition"] = generalization_condition(spec);
            try {
                entry["srl"] = srl(dec, spec, alpha_coeffs, beta_coeffs);
            } catch (const NumericalError& e) {
                entry["srl"] = nullptr;
                entry["srl_error"] = e.what();
            }
            j["filters"].push_back(entry);
        }
    }

    const bool have_attack =
        config.attack.kind == "load" || (config.attack.kind != "feature_flip" && config.attack.rate > 0.0);
    if (config.diag_bands && have_attack) {
        const Graph attacked = detail::attacked_graph(config, ds, config.seeds.front(), config.attack.rate);
        const BandDeltaStats stats = band_eigendelta_stats(ds.graph, attacked, config.band_p);
        nlohmann::json bands;
        bands["p"] = config.band_p;
        bands["mean_abs_delta_low"] =
            stats.mean_abs_delta_low ? nlohmann::json(*stats.mean_abs_delta_low) : nlohmann::json(nullptr);
        bands["mean_abs_delta_mid"] =
            stats.mean_abs_delta_mid ? nlohmann::json(*stats.mean_abs_delta_mid) : nlohmann::json(nullptr);
        bands["mean_abs_delta_high"] =
            stats.mean_abs_delta_high ? nlohmann::json(*stats.mean_abs_delta_high) : nlohmann::json(nullptr);
        j["band_delta"] = bands;
    }

    if (config.diag_rank) {
        const auto rows = rank_growth_curve(ds.graph, config.rates, config.seeds.front());
        const std::string rank_path = detail::out_path(config, "rank_curve.csv");
        std::ofstream out(rank_path);
        if (!out) throw DataError("cannot write file: " + rank_path);
        out << "rate,rank_a,rank_a2\n";
        for (const auto& row : rows) {
            out << format_sig12(row.rate) << ',' << row.rank_a << ',' << row.rank_a2 << '\n';
            j["rank_curve"].push_back({{"rate", row.rate}, {"rank_a", row.rank_a}, {"rank_a2", row.rank_a2}});
        }
        std::cout << "wrote " << rank_path << '\n';
    }

    const std::string path = detail::out_path(config, "analysis.json");
    detail::write_json_file(j, path);
    std::cout << "wrote " << path << '\n';
}

/// Accuracy grid of the configured model against the low-pass baseline over
/// rates x seeds, the connected-node distance diagnostic, and an optional
/// alpha sweep.
inline void cmd_compare(const ExperimentConfig& config) {
    config.validate();
    detail::snapshot_run_inputs(config);
    const Dataset ds = load_dataset(config.dataset_manifest);

    struct Cell {
        double rate = 0.0;
        std::uint64_t seed = 0;
        bool baseline = false;
        double test_accuracy = 0.0;
    };
    const std::size_t n_rates = config.rates.size();
    const std::size_t n_seeds = config.seeds.size();
    std::vector<Cell> cells(n_rates * n_seeds * 2);

    detail::parallel_tasks(cells.size(), config.threads, [&](std::size_t t) {
        const std::size_t pair_idx = t / 2;
        const bool baseline = (t % 2) == 1;
        const double rate = config.rates[pair_idx / n_seeds];
        const std::uint64_t seed = config.seeds[pair_idx % n_seeds];

        const Graph g = detail::attacked_graph(config, ds, seed, rate);
        TrainConfig tc = config.train;
        tc.seed = seed;
        tc.filter = baseline ? config.baseline_filter : config.model_filter;
        const Split split = random_split(ds.labels, config.train_frac, config.val_frac, seed);
        const TrainResult result = train(g, ds.features, ds.labels, split, tc);
        cells[t] = {rate, seed, baseline, result.report.test_accuracy};
    });

    const std::string grid_path = detail::out_path(config, "accuracy_grid.csv");
    {
        std::ofstream out(grid_path);
        if (!out) throw DataError("cannot write file: " + grid_path);
        out << "rate,filter,seed,test_accuracy\n";
        for (const auto& c : cells)
            out << format_sig12(c.rate) << ','
                << filter_kind_name((c.baseline ? config.baseline_filter : config.model_filter).kind) << ','
                << c.seed << ',' << format_sig12(c.test_accuracy) << '\n';
    }
    std::cout << "wrote " << grid_path << '\n';

    nlohmann::json j;
    j["dataset"] = ds.name;
    j["model"] = filter_to_json(config.model_filter);
    j["baseline"] = filter_to_json(config.baseline_filter);
    for (std::size_t r = 0; r < n_rates; ++r) {
        std::vector<double> model_accs, base_accs;
        for (const auto& c : cells) {
            if (c.rate != config.rates[r]) continue;
            (c.baseline ? base_accs : model_accs).push_back(c.test_accuracy);
        }
        const auto ms = detail::mean_std(model_accs);
        const auto bs = detail::mean_std(base_accs);
        j["grid"].push_back({{"rate", config.rates[r]},
                             {"model_mean", ms.mean},
                             {"model_std", ms.stddev},
                             {"baseline_mean", bs.mean},
                             {"baseline_std", bs.stddev},
                             {"gap", ms.mean - bs.mean}});
    }

    // Connected-node distance diagnostic at the largest nonzero rate.
    double diag_rate = 0.0;
    for (double r : config.rates) diag_rate = std::max(diag_rate, r);
    if (diag_rate > 0.0) {
        const std::uint64_t seed = config.seeds.front();
        const Graph attacked = detail::attacked_graph(config, ds, seed, diag_rate);
        const Split split = random_split(ds.labels, config.train_frac, config.val_frac, seed);
        auto embed_pair = [&](const FilterSpec& spec) {
            TrainConfig tc = config.train;
            tc.seed = seed;
            tc.filter = spec;
            const TrainResult clean = train(ds.graph, ds.features, ds.labels, split, tc);
            const TrainResult pois = train(attacked, ds.features, ds.labels, split, tc);
            const Eigen::MatrixXd h_clean = hidden_representation(clean.params, ds.graph, ds.features);
            const Eigen::MatrixXd h_pois = hidden_representation(pois.params, attacked, ds.features);
            return distance_change_rate(h_clean, h_pois, ds.graph, config.degree_min);
        };
        try {
            j["distance_change_rate"] = {{"rate", diag_rate},
                                         {"degree_min", config.degree_min},
                                         {"model", embed_pair(config.model_filter)},
                                         {"baseline", embed_pair(config.baseline_filter)}};
        } catch (const DataError& e) {
            j["distance_change_rate"] = {{"rate", diag_rate},
                                         {"degree_min", config.degree_min},
                                         {"error", e.what()}};
        }
    }

    if (!config.alpha_sweep.empty()) {
        const std::size_t n_alpha = config.alpha_sweep.size();
        std::vector<double> sweep_accs(n_alpha * n_seeds, 0.0);
        detail::parallel_tasks(sweep_accs.size(), config.threads, [&](std::size_t t) {
            const double alpha = config.alpha_sweep[t / n_seeds];
            const std::uint64_t seed = config.seeds[t % n_seeds];
            const Graph g = detail::attacked_graph(config, ds, seed, config.attack.rate);
            TrainConfig tc = config.train;
            tc.seed = seed;
            tc.filter = FilterSpec::make(FilterKind::mid_alpha, alpha);
            const Split split = random_split(ds.labels, config.train_frac, config.val_frac, seed);
            sweep_accs[t] = train(g, ds.features, ds.labels, split, tc).report.test_accuracy;
        });
        const std::string sweep_path = detail::out_path(config, "alpha_sweep.csv");
        std::ofstream out(sweep_path);
        if (!out) throw DataError("cannot write file: " + sweep_path);
        out << "alpha,mean_test_accuracy,std_test_accuracy\n";
        for (std::size_t a = 0; a < n_alpha; ++a) {
            std::vector<double> accs(sweep_accs.begin() + static_cast<std::ptrdiff_t>(a * n_seeds),
                                     sweep_accs.begin() + static_cast<std::ptrdiff_t>((a + 1) * n_seeds));
            const auto s = detail::mean_std(accs);
            out << format_sig12(config.alpha_sweep[a]) << ',' << format_sig12(s.mean) << ','
                << format_sig12(s.stddev) << '\n';
        }
        std::cout << "wrote " << sweep_path << '\n';
    }

    const std::string path = detail::out_path(config, "compare.json");
    detail::write_json_file(j, path);
    std::cout << "wrote " << path << '\n';
}

} // namespace midgcn
