#include "mstm/experiment.hpp"
#include "mstm/rng.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace mstm;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    int jobs = 1;
};

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file '" + path + "'");
    json j;
    in >> j;
    return model_from_json(j);
}

int cmd_run(const std::string& config_path, const GlobalOpts& g) {
    ExperimentConfig cfg = config_from_file(config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (!g.out.empty()) cfg.output_dir = g.out;
    const ReportBundle bundle = run_experiment(cfg, g.jobs);
    emit_report(bundle, cfg.output_dir);
    std::cout << "wrote " << cfg.output_dir << "/results.csv (" << bundle.rows.size()
              << " rows)\n";
    return 0;
}

int cmd_synthetic(const std::string& preset_name, const GlobalOpts& g) {
    SyntheticPreset preset;
    if (preset_name == "noisy-bisquare")
        preset = SyntheticPreset::NoisyBisquare;
    else if (preset_name == "clean-bisquare")
        preset = SyntheticPreset::CleanBisquare;
    else if (preset_name == "noisy-leastsquares")
        preset = SyntheticPreset::NoisyLeastSquares;
    else
        throw std::invalid_argument("unknown preset '" + preset_name + "'");

    const SyntheticRunResult r = run_synthetic_preset(preset, g.seed.value_or(0));

    ReportBundle bundle;
    bundle.method_order = {"one_hop", "two_hop"};
    bundle.rows.push_back({"one_hop", 0, "mse_vs_truth", r.mse_one_hop});
    bundle.rows.push_back({"two_hop", 0, "mse_vs_truth", r.mse_two_hop});
    bundle.summaries.push_back(aggregate_splits("one_hop.mse_vs_truth", {r.mse_one_hop}));
    bundle.summaries.push_back(aggregate_splits("two_hop.mse_vs_truth", {r.mse_two_hop}));

    CurveTable ct;
    ct.name = preset_name;
    ct.headers = {"x", "ground_truth", "teacher", "intermediate", "one_hop", "two_hop"};
    ct.data.resize(r.data.x.size(), 6);
    ct.data.col(0) = r.data.x;
    ct.data.col(1) = r.data.clean;
    ct.data.col(2) = r.data.noisy;
    ct.data.col(3) = r.pred_intermediate;
    ct.data.col(4) = r.pred_one_hop;
    ct.data.col(5) = r.pred_two_hop;
    bundle.curves.push_back(std::move(ct));

    emit_report(bundle, g.out);
    std::cout << "one_hop mse " << format_g17(r.mse_one_hop) << "\n"
              << "two_hop mse " << format_g17(r.mse_two_hop) << "\n"
              << "one_hop coef [" << format_g17(r.coef_one_hop[0]) << ", "
              << format_g17(r.coef_one_hop[1]) << "]\n"
              << "two_hop coef [" << format_g17(r.coef_two_hop[0]) << ", "
              << format_g17(r.coef_two_hop[1]) << "]\n";
    return 0;
}

int cmd_bruteforce(const std::string& config_path, const GlobalOpts& g) {
    ExperimentConfig cfg = config_from_file(config_path);
    if (g.seed) cfg.seed = *g.seed;

    TrainedModel complex_model;
    Matrix Xtr, Xval;
    TargetSpec ytr, yval;
    AnchorSet anchors;
    SearchConfig scfg = cfg.search;
    FitConfig fcfg = cfg.search.base_fit;
    fcfg.seed = cfg.seed;

    if (const auto* syn = std::get_if<DataSourceSynthetic>(&cfg.data)) {
        SyntheticSpec sspec = syn->spec;
        sspec.seed = mix_seed(cfg.seed, 0, sspec.seed);
        const SyntheticData data = synthetic_poly_dataset(sspec);
        complex_model = make_tabulated(data.x, data.noisy);
        const int n = static_cast<int>(data.x.size());
        const int n_test = static_cast<int>(std::llround(n * cfg.split.test_fraction));
        const int vsize = std::min(cfg.split.validation_size,
                                   static_cast<int>(cfg.split.validation_fraction *
                                                    static_cast<double>(n - n_test)));
        const SplitIndices idx = split_indices(n, cfg.split.test_fraction, vsize, 0, cfg.seed);
        Xtr.resize(static_cast<Eigen::Index>(idx.train.size()), 1);
        Vector v1(Xtr.rows());
        for (std::size_t i = 0; i < idx.train.size(); ++i) {
            Xtr(static_cast<Eigen::Index>(i), 0) = data.x[idx.train[i]];
            v1[static_cast<Eigen::Index>(i)] = data.noisy[idx.train[i]];
        }
        Xval.resize(static_cast<Eigen::Index>(idx.validation.size()), 1);
        Vector v2(Xval.rows());
        for (std::size_t i = 0; i < idx.validation.size(); ++i) {
            Xval(static_cast<Eigen::Index>(i), 0) = data.x[idx.validation[i]];
            v2[static_cast<Eigen::Index>(i)] = data.noisy[idx.validation[i]];
        }
        ytr = RealTargets{v1};
        yval = RealTargets{v2};
        scfg.reward = RewardKind::NegMse;
        if (cfg.anchor_list)
            anchors.specs = *cfg.anchor_list;
        else
            for (int d = 4; d >= 1; --d) anchors.specs.push_back(Polynomial{d});
    } else {
        Dataset ds;
        if (const auto* csv = std::get_if<DataSourceCsv>(&cfg.data))
            ds = load_csv(csv->path, csv->label_column, csv->task);
        else {
            const auto& gm = std::get<DataSourceGaussian>(cfg.data);
            ds = gaussian_mixture_dataset(gm.n, gm.d, gm.classes, gm.clusters,
                                          mix_seed(cfg.seed, gm.seed));
        }
        const int n = static_cast<int>(ds.X.rows());
        const int n_test = static_cast<int>(std::llround(n * cfg.split.test_fraction));
        const int vsize = std::min(cfg.split.validation_size,
                                   static_cast<int>(cfg.split.validation_fraction *
                                                    static_cast<double>(n - n_test)));
        const SplitIndices idx = split_indices(n, cfg.split.test_fraction, vsize, 0, cfg.seed);
        const Dataset train = take_rows(ds, idx.train);
        const Dataset val = take_rows(ds, idx.validation);
        complex_model = fit(cfg.complex_spec, train.X, train.targets, fcfg);
        Xtr = train.X;
        ytr = train.targets;
        Xval = val.X;
        yval = val.targets;
        anchors = cfg.anchor_list ? AnchorSet{*cfg.anchor_list}
                                  : derive_anchors(cfg.complex_spec, cfg.anchor_k);
    }

    const BruteForceResult res = brute_force_search(
        complex_model, anchors, cfg.simple_spec, Xtr, ytr, Xval, yval, scfg.m, scfg.reward,
        scfg.hop_method, scfg.final_method, fcfg);

    std::filesystem::create_directories(g.out);
    std::ofstream f(std::filesystem::path(g.out) / "bruteforce.csv");
    f << "tuple,reward\n";
    for (const auto& e : res.table) {
        for (std::size_t i = 0; i < e.tuple.size(); ++i) f << (i ? "-" : "") << e.tuple[i];
        f << ',' << format_g17(e.reward) << '\n';
    }
    std::cout << "best tuple";
    for (int j : res.best_tuple) std::cout << ' ' << j;
    std::cout << " reward " << format_g17(res.best_reward) << '\n';
    return 0;
}

int cmd_analyze(const std::string& before_path, const std::string& after_path,
                const std::string& complex_path, const std::string& data_path,
                const std::string& label_column, const GlobalOpts& g) {
    const TrainedModel before = load_model(before_path);
    const TrainedModel after = load_model(after_path);
    const TrainedModel complex_model = load_model(complex_path);
    const Dataset ds = load_csv(data_path, label_column, Task::Classification);
    const auto& labels = std::get<HardTargets>(ds.targets).labels;
    const ConfidenceSummary s = confidence_analysis(before, after, complex_model, ds.X, labels);

    std::cout << "sac " << format_g17(s.sac) << "\ncac " << format_g17(s.cac)
              << "\nn_corrected " << s.n_corrected << '\n';
    if (s.n_corrected > 0)
        std::cout << "scc " << format_g17(s.scc) << "\nccc " << format_g17(s.ccc) << '\n';

    std::filesystem::create_directories(g.out);
    std::ofstream f(std::filesystem::path(g.out) / "analysis.csv");
    f << "metric,value\nsac," << format_g17(s.sac) << "\ncac," << format_g17(s.cac)
      << "\nn_corrected," << s.n_corrected << '\n';
    if (s.n_corrected > 0)
        f << "scc," << format_g17(s.scc) << "\nccc," << format_g17(s.ccc) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multihop knowledge transfer toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    std::uint64_t seed_arg = 0;
    auto* seed_opt = app.add_option("--seed", seed_arg, "master seed override");
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);

    std::string config_path, preset, bf_config;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "config JSON path")->required();

    auto* synthetic = app.add_subcommand("synthetic", "run a synthetic preset");
    synthetic->add_option("--preset", preset, "noisy-bisquare|clean-bisquare|noisy-leastsquares")
        ->required();

    auto* bruteforce = app.add_subcommand("bruteforce", "exhaustive chain search (small instances)");
    bruteforce->add_option("config", bf_config, "config JSON path")->required();

    std::string before_path, after_path, complex_path, data_path, label_column;
    auto* analyze = app.add_subcommand("analyze", "confidence analysis on saved models");
    analyze->add_option("--before", before_path, "simple model before transfer")->required();
    analyze->add_option("--after", after_path, "simple model after transfer")->required();
    analyze->add_option("--complex", complex_path, "complex model")->required();
    analyze->add_option("--data", data_path, "CSV dataset")->required();
    analyze->add_option("--label", label_column, "label column name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (seed_opt->count()) g.seed = seed_arg;

    try {
        if (*run) return cmd_run(config_path, g);
        if (*synthetic) return cmd_synthetic(preset, g);
        if (*bruteforce) return cmd_bruteforce(bf_config, g);
        return cmd_analyze(before_path, after_path, complex_path, data_path, label_column, g);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
