#include "mstm/experiment.hpp"

#include "mstm/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace mstm {

using nlohmann::json;

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

TransferMethod method_from_json(const json& j) {
    const std::string type = j.at("type");
    if (type == "distill") {
        reject_unknown_keys(j, {"type", "temperature"}, "transfer method");
        Distill d;
        d.temperature = j.value("temperature", 4.0);
        if (d.temperature <= 0) throw std::invalid_argument("temperature must be > 0");
        return d;
    }
    if (type == "confidence_weight") {
        reject_unknown_keys(j, {"type", "normalize"}, "transfer method");
        ConfidenceWeight c;
        const std::string norm = j.value("normalize", "mean_one");
        if (norm == "none")
            c.normalize = WeightNormalize::None;
        else if (norm == "mean_one")
            c.normalize = WeightNormalize::MeanOne;
        else
            throw std::invalid_argument("normalize must be none|mean_one");
        return c;
    }
    throw std::invalid_argument("unknown transfer method '" + type + "'");
}

json method_to_json(const TransferMethod& m) {
    if (const auto* d = std::get_if<Distill>(&m))
        return {{"type", "distill"}, {"temperature", d->temperature}};
    const auto& c = std::get<ConfidenceWeight>(m);
    return {{"type", "confidence_weight"},
            {"normalize", c.normalize == WeightNormalize::MeanOne ? "mean_one" : "none"}};
}

json trace_to_json(const SearchTrace& trace) {
    json hops = json::array();
    for (const auto& h : trace.hops) {
        json cands = json::array();
        for (const auto& c : h.candidates) {
            json jc = {{"anchor_index", c.anchor_index}, {"reward", c.reward}};
            if (c.perturbed_spec) jc["spec"] = spec_to_json(*c.perturbed_spec);
            cands.push_back(std::move(jc));
        }
        json jh = {{"sampled", h.sampled},
                   {"candidates", std::move(cands)},
                   {"chosen_index", h.chosen_index},
                   {"chosen_reward", h.chosen_reward},
                   {"remaining", h.remaining_after}};
        if (h.chosen_spec) jh["chosen_spec"] = spec_to_json(*h.chosen_spec);
        hops.push_back(std::move(jh));
    }
    return {{"hops", std::move(hops)}};
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"data", "complex", "simple", "anchors", "perturb", "search", "fit",
                         "split", "baselines", "output_dir", "seed", "save_models"},
                        "experiment config");
    ExperimentConfig cfg;

    const json& jd = j.at("data");
    const std::string dtype = jd.at("type");
    if (dtype == "csv") {
        reject_unknown_keys(jd, {"type", "path", "label_column", "task"}, "data");
        DataSourceCsv src;
        src.path = jd.at("path");
        src.label_column = jd.at("label_column");
        const std::string task = jd.value("task", "classification");
        if (task != "classification" && task != "regression")
            throw std::invalid_argument("data task must be classification|regression");
        src.task = task == "classification" ? Task::Classification : Task::Regression;
        cfg.data = src;
    } else if (dtype == "synthetic") {
        reject_unknown_keys(jd,
                            {"type", "x_min", "x_max", "step", "coefficient", "noise_fraction",
                             "noise_low", "noise_high", "seed"},
                            "data");
        DataSourceSynthetic src;
        src.spec.x_min = jd.value("x_min", -14.0);
        src.spec.x_max = jd.value("x_max", 14.0);
        src.spec.step = jd.value("step", 0.01);
        src.spec.coefficient = jd.value("coefficient", 1e-5);
        src.spec.noise_fraction = jd.value("noise_fraction", 0.2);
        src.spec.noise_low = jd.value("noise_low", 0.0);
        src.spec.noise_high = jd.value("noise_high", 1.0);
        src.spec.seed = jd.value("seed", 0);
        cfg.data = src;
    } else if (dtype == "gaussian_mixture") {
        reject_unknown_keys(jd, {"type", "n", "d", "classes", "clusters", "seed"}, "data");
        DataSourceGaussian src;
        src.n = jd.value("n", 2000);
        src.d = jd.value("d", 10);
        src.classes = jd.value("classes", 2);
        src.clusters = jd.value("clusters", 4);
        src.seed = jd.value("seed", 0);
        cfg.data = src;
    } else {
        throw std::invalid_argument("unknown data source '" + dtype + "'");
    }

    cfg.complex_spec = spec_from_json(j.at("complex"));
    cfg.simple_spec = spec_from_json(j.at("simple"));

    if (j.contains("anchors")) {
        const json& ja = j.at("anchors");
        reject_unknown_keys(ja, {"k", "list"}, "anchors");
        if (ja.contains("list")) {
            std::vector<ArchSpec> list;
            for (const auto& js : ja.at("list")) list.push_back(spec_from_json(js));
            cfg.anchor_list = std::move(list);
        }
        cfg.anchor_k = ja.value("k", cfg.anchor_k);
    }

    if (j.contains("perturb")) {
        const json& jp = j.at("perturb");
        reject_unknown_keys(jp,
                            {"max_steps", "depth_jitter", "width_jitter_fraction",
                             "degree_jitter", "identity"},
                            "perturb");
        cfg.perturb.max_steps = jp.value("max_steps", 3);
        cfg.perturb.depth_jitter = jp.value("depth_jitter", 2);
        cfg.perturb.width_jitter_fraction = jp.value("width_jitter_fraction", 0.25);
        cfg.perturb.degree_jitter = jp.value("degree_jitter", 1);
        cfg.perturb.identity = jp.value("identity", false);
        if (cfg.perturb.max_steps < 1 || cfg.perturb.depth_jitter < 0 ||
            cfg.perturb.degree_jitter < 0)
            throw std::invalid_argument("perturb: jitters must be >= 0 and max_steps >= 1");
    }

    if (j.contains("search")) {
        const json& js = j.at("search");
        reject_unknown_keys(js, {"m", "n", "delta", "seed", "reward", "hop_method", "final_method"},
                            "search");
        cfg.search.m = js.value("m", 3);
        if (js.contains("n") && js.contains("delta"))
            throw std::invalid_argument("search: n and delta are mutually exclusive");
        if (js.contains("n")) cfg.search.n = js.at("n").get<int>();
        if (js.contains("delta")) cfg.search.delta = js.at("delta").get<double>();
        cfg.search.seed = js.value("seed", 0);
        const std::string reward = js.value("reward", "accuracy");
        if (reward == "accuracy")
            cfg.search.reward = RewardKind::Accuracy;
        else if (reward == "neg_mse")
            cfg.search.reward = RewardKind::NegMse;
        else if (reward == "neg_cross_entropy")
            cfg.search.reward = RewardKind::NegCrossEntropy;
        else
            throw std::invalid_argument("reward must be accuracy|neg_mse|neg_cross_entropy");
        if (js.contains("hop_method")) cfg.search.hop_method = method_from_json(js.at("hop_method"));
        if (js.contains("final_method"))
            cfg.search.final_method = method_from_json(js.at("final_method"));
    }

    if (j.contains("fit")) {
        const json& jf = j.at("fit");
        reject_unknown_keys(jf,
                            {"epochs", "learning_rate", "batch_size", "irls_tol", "irls_max_iter"},
                            "fit");
        cfg.search.base_fit.epochs = jf.value("epochs", 200);
        cfg.search.base_fit.learning_rate = jf.value("learning_rate", 0.05);
        cfg.search.base_fit.batch_size = jf.value("batch_size", 32);
        cfg.search.base_fit.irls_tol = jf.value("irls_tol", 1e-8);
        cfg.search.base_fit.irls_max_iter = jf.value("irls_max_iter", 100);
    }

    if (j.contains("split")) {
        const json& js = j.at("split");
        reject_unknown_keys(js, {"test_fraction", "repeats", "validation_size", "validation_fraction"},
                            "split");
        cfg.split.test_fraction = js.value("test_fraction", 0.25);
        cfg.split.repeats = js.value("repeats", 10);
        cfg.split.validation_size = js.value("validation_size", 500);
        cfg.split.validation_fraction = js.value("validation_fraction", 0.2);
        if (cfg.split.test_fraction <= 0 || cfg.split.test_fraction >= 1 ||
            cfg.split.validation_fraction <= 0 || cfg.split.validation_fraction >= 1 ||
            cfg.split.repeats < 1)
            throw std::invalid_argument("split: fractions must be in (0,1), repeats >= 1");
    }

    if (j.contains("baselines")) {
        cfg.baselines.clear();
        for (const auto& b : j.at("baselines")) {
            const std::string name = b.get<std::string>();
            if (name == "direct")
                cfg.baselines.push_back(Baseline::Direct);
            else if (name == "one_hop")
                cfg.baselines.push_back(Baseline::OneHop);
            else if (name == "mstm")
                cfg.baselines.push_back(Baseline::Mstm);
            else if (name == "mstm_np")
                cfg.baselines.push_back(Baseline::MstmNp);
            else if (name == "brute_force")
                cfg.baselines.push_back(Baseline::BruteForce);
            else
                throw std::invalid_argument("unknown baseline '" + name + "'");
        }
    }

    cfg.output_dir = j.value("output_dir", "out");
    cfg.seed = j.value("seed", 0);
    cfg.save_models = j.value("save_models", false);
    return cfg;
}

ExperimentConfig config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    json j;
    in >> j;
    return config_from_json(j);
}

namespace {

std::string baseline_name(Baseline b) {
    switch (b) {
    case Baseline::Direct: return "direct";
    case Baseline::OneHop: return "one_hop";
    case Baseline::Mstm: return "mstm";
    case Baseline::MstmNp: return "mstm_np";
    case Baseline::BruteForce: return "brute_force";
    }
    return "?";
}

void add_classification_metrics(ReportBundle& bundle, const std::string& method, int repeat,
                                const TrainedModel& model, const Matrix& Xtest,
                                const std::vector<int>& labels) {
    const Matrix pred = model.predict(Xtest);
    bundle.rows.push_back({method, repeat, "accuracy", accuracy(pred, labels)});
    if (std::holds_alternative<Cart>(model.spec))
        bundle.rows.push_back(
            {method, repeat, "wgi", weighted_gini_index(model, Xtest, labels)});
    if (std::holds_alternative<Mlp>(model.spec))
        bundle.rows.push_back({method, repeat, "cross_entropy", cross_entropy(pred, labels)});
}

void finalize_summaries(ReportBundle& bundle) {
    // Preserve first-appearance order of (method, metric) pairs.
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& row : bundle.rows) {
        const auto key = std::make_pair(row.method, row.metric);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (const auto& [method, metric] : keys) {
        std::vector<double> vals;
        for (const auto& row : bundle.rows)
            if (row.method == method && row.metric == metric) vals.push_back(row.value);
        bundle.summaries.push_back(aggregate_splits(method + "." + metric, vals));
    }
}

ReportBundle run_synthetic_experiment(const ExperimentConfig& cfg, int jobs) {
    const auto& src = std::get<DataSourceSynthetic>(cfg.data);
    ReportBundle bundle;
    for (const auto b : cfg.baselines) bundle.method_order.push_back(baseline_name(b));

    std::vector<ArchSpec> anchor_specs;
    if (cfg.anchor_list) {
        anchor_specs = *cfg.anchor_list;
    } else {
        for (int d = 4; d >= 1; --d) anchor_specs.push_back(Polynomial{d});
    }
    AnchorSet anchors{anchor_specs};

    for (int repeat = 0; repeat < cfg.split.repeats; ++repeat) {
        SyntheticSpec sspec = src.spec;
        sspec.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(repeat), sspec.seed);
        const SyntheticData data = synthetic_poly_dataset(sspec);
        const Eigen::Index n = data.x.size();
        const Matrix grid = data.x;
        const TrainedModel teacher = make_tabulated(data.x, data.noisy);
        const RealTargets truth_noisy{data.noisy};

        const int n_test = static_cast<int>(std::llround(static_cast<double>(n) *
                                                         cfg.split.test_fraction));
        const int vsize = std::min(
            cfg.split.validation_size,
            static_cast<int>(cfg.split.validation_fraction * static_cast<double>(n - n_test)));
        const SplitIndices idx =
            split_indices(static_cast<int>(n), cfg.split.test_fraction, vsize, repeat, cfg.seed);

        Matrix Xtr(static_cast<Eigen::Index>(idx.train.size()), 1);
        Vector ytr(static_cast<Eigen::Index>(idx.train.size()));
        for (std::size_t i = 0; i < idx.train.size(); ++i) {
            Xtr(static_cast<Eigen::Index>(i), 0) = data.x[idx.train[i]];
            ytr[static_cast<Eigen::Index>(i)] = data.noisy[idx.train[i]];
        }
        Matrix Xval(static_cast<Eigen::Index>(idx.validation.size()), 1);
        Vector yval(static_cast<Eigen::Index>(idx.validation.size()));
        for (std::size_t i = 0; i < idx.validation.size(); ++i) {
            Xval(static_cast<Eigen::Index>(i), 0) = data.x[idx.validation[i]];
            yval[static_cast<Eigen::Index>(i)] = data.noisy[idx.validation[i]];
        }
        const TargetSpec ytr_t = RealTargets{ytr};
        const TargetSpec yval_t = RealTargets{yval};

        SearchConfig scfg = cfg.search;
        scfg.reward = RewardKind::NegMse;
        scfg.seed = mix_seed(cfg.seed, 0xa11, static_cast<std::uint64_t>(repeat));
        FitConfig fcfg = cfg.search.base_fit;
        fcfg.seed = mix_seed(cfg.seed, 0xd14ec7, static_cast<std::uint64_t>(repeat));

        const auto grid_mse = [&](const TrainedModel& model) {
            return mse(model.predict(grid).col(0), data.clean);
        };

        std::optional<TrainedModel> one_hop_model, mstm_model;
        std::vector<TrainedModel> mstm_intermediates;
        for (const auto b : cfg.baselines) {
            const std::string name = baseline_name(b);
            switch (b) {
            case Baseline::Direct: {
                const TrainedModel m = fit(cfg.simple_spec, Xtr, ytr_t, fcfg);
                bundle.rows.push_back({name, repeat, "mse_vs_truth", grid_mse(m)});
                break;
            }
            case Baseline::OneHop: {
                one_hop_model =
                    hop_transfer(teacher, cfg.simple_spec, Xtr, ytr_t, scfg.final_method, fcfg);
                bundle.rows.push_back({name, repeat, "mse_vs_truth", grid_mse(*one_hop_model)});
                break;
            }
            case Baseline::Mstm:
            case Baseline::MstmNp: {
                PerturbConfig pc = cfg.perturb;
                if (b == Baseline::MstmNp) pc.identity = true;
                const SearchResult res = mstm_search(teacher, anchors, cfg.simple_spec, Xtr,
                                                     ytr_t, Xval, yval_t, scfg, pc, jobs);
                bundle.rows.push_back({name, repeat, "mse_vs_truth", grid_mse(res.simple)});
                bundle.traces.push_back(trace_to_json(res.trace));
                if (b == Baseline::Mstm) {
                    mstm_model = res.simple;
                    ChainResult chain = chain_transfer(teacher, res.plan, cfg.simple_spec, Xtr,
                                                       ytr_t, fcfg);
                    mstm_intermediates = std::move(chain.intermediates);
                }
                break;
            }
            case Baseline::BruteForce: {
                const BruteForceResult res = brute_force_search(
                    teacher, anchors, cfg.simple_spec, Xtr, ytr_t, Xval, yval_t, scfg.m,
                    scfg.reward, scfg.hop_method, scfg.final_method, fcfg);
                const ChainResult chain =
                    chain_transfer(teacher, res.best_plan, cfg.simple_spec, Xtr, ytr_t, fcfg);
                bundle.rows.push_back({name, repeat, "mse_vs_truth", grid_mse(chain.simple)});
                break;
            }
            }
        }

        if (repeat == 0) {
            CurveTable ct;
            ct.name = "synthetic";
            ct.headers = {"x", "ground_truth", "teacher"};
            std::vector<Vector> cols = {data.x, data.clean, data.noisy};
            for (std::size_t i = 0; i < mstm_intermediates.size(); ++i) {
                ct.headers.push_back("intermediate_" + std::to_string(i));
                cols.push_back(mstm_intermediates[i].predict(grid).col(0));
            }
            if (one_hop_model) {
                ct.headers.push_back("one_hop");
                cols.push_back(one_hop_model->predict(grid).col(0));
            }
            if (mstm_model) {
                ct.headers.push_back("mstm");
                cols.push_back(mstm_model->predict(grid).col(0));
            }
            ct.data.resize(n, static_cast<Eigen::Index>(cols.size()));
            for (std::size_t c = 0; c < cols.size(); ++c) ct.data.col(static_cast<Eigen::Index>(c)) = cols[c];
            bundle.curves.push_back(std::move(ct));
        }
    }
    finalize_summaries(bundle);
    return bundle;
}

} // namespace

ReportBundle run_experiment(const ExperimentConfig& cfg, int jobs) {
    if (std::holds_alternative<DataSourceSynthetic>(cfg.data))
        return run_synthetic_experiment(cfg, jobs);

    Dataset ds;
    if (const auto* csv = std::get_if<DataSourceCsv>(&cfg.data))
        ds = load_csv(csv->path, csv->label_column, csv->task);
    else {
        const auto& g = std::get<DataSourceGaussian>(cfg.data);
        ds = gaussian_mixture_dataset(g.n, g.d, g.classes, g.clusters, mix_seed(cfg.seed, g.seed));
    }

    ReportBundle bundle;
    bundle.label_names = ds.label_names;
    bundle.method_order.push_back("complex");
    for (const auto b : cfg.baselines) bundle.method_order.push_back(baseline_name(b));

    const int n = static_cast<int>(ds.X.rows());
    const bool classification = ds.task == Task::Classification;

    for (int repeat = 0; repeat < cfg.split.repeats; ++repeat) {
        const int n_test =
            static_cast<int>(std::llround(n * cfg.split.test_fraction));
        const int vsize = std::min(
            cfg.split.validation_size,
            static_cast<int>(cfg.split.validation_fraction * static_cast<double>(n - n_test)));
        const SplitIndices idx =
            split_indices(n, cfg.split.test_fraction, vsize, repeat, cfg.seed);
        const Dataset train = take_rows(ds, idx.train);
        const Dataset val = take_rows(ds, idx.validation);
        const Dataset test = take_rows(ds, idx.test);
        const std::vector<int>* test_labels =
            classification ? &std::get<HardTargets>(test.targets).labels : nullptr;

        FitConfig fcfg = cfg.search.base_fit;
        fcfg.seed = mix_seed(cfg.seed, 0xc0117, static_cast<std::uint64_t>(repeat));
        const TrainedModel complex_model = fit(cfg.complex_spec, train.X, train.targets, fcfg);
        if (classification)
            add_classification_metrics(bundle, "complex", repeat, complex_model, test.X,
                                       *test_labels);
        else
            bundle.rows.push_back({"complex", repeat, "mse",
                                   mse(complex_model.predict(test.X).col(0),
                                       target_reals(test.targets))});

        const bool needs_anchors =
            std::any_of(cfg.baselines.begin(), cfg.baselines.end(), [](Baseline b) {
                return b == Baseline::Mstm || b == Baseline::MstmNp ||
                       b == Baseline::BruteForce;
            });
        AnchorSet anchors;
        if (needs_anchors)
            anchors = cfg.anchor_list ? AnchorSet{*cfg.anchor_list}
                                      : derive_anchors(cfg.complex_spec, cfg.anchor_k);

        SearchConfig scfg = cfg.search;
        scfg.seed = mix_seed(cfg.search.seed, 0x5eed, static_cast<std::uint64_t>(repeat));
        scfg.base_fit = fcfg;

        std::optional<TrainedModel> direct_model, mstm_model;
        for (const auto b : cfg.baselines) {
            const std::string name = baseline_name(b);
            TrainedModel model;
            switch (b) {
            case Baseline::Direct:
                model = fit(cfg.simple_spec, train.X, train.targets, fcfg);
                direct_model = model;
                break;
            case Baseline::OneHop:
                model = hop_transfer(complex_model, cfg.simple_spec, train.X, train.targets,
                                     scfg.final_method, fcfg);
                break;
            case Baseline::Mstm:
            case Baseline::MstmNp: {
                PerturbConfig pc = cfg.perturb;
                if (b == Baseline::MstmNp) pc.identity = true;
                SearchResult res = mstm_search(complex_model, anchors, cfg.simple_spec,
                                               train.X, train.targets, val.X, val.targets,
                                               scfg, pc, jobs);
                model = std::move(res.simple);
                bundle.traces.push_back(trace_to_json(res.trace));
                if (b == Baseline::Mstm) mstm_model = model;
                break;
            }
            case Baseline::BruteForce: {
                BruteForceResult res = brute_force_search(
                    complex_model, anchors, cfg.simple_spec, train.X, train.targets, val.X,
                    val.targets, scfg.m, scfg.reward, scfg.hop_method, scfg.final_method, fcfg);
                model = chain_transfer(complex_model, res.best_plan, cfg.simple_spec, train.X,
                                       train.targets, fcfg)
                            .simple;
                break;
            }
            }
            if (classification)
                add_classification_metrics(bundle, name, repeat, model, test.X, *test_labels);
            else
                bundle.rows.push_back({name, repeat, "mse",
                                       mse(model.predict(test.X).col(0),
                                           target_reals(test.targets))});
        }

        if (classification && direct_model && mstm_model) {
            const ConfidenceSummary cs = confidence_analysis(*direct_model, *mstm_model,
                                                             complex_model, test.X, *test_labels);
            bundle.confidence.push_back(cs);
            bundle.rows.push_back({"confidence", repeat, "sac", cs.sac});
            bundle.rows.push_back({"confidence", repeat, "cac", cs.cac});
            bundle.rows.push_back(
                {"confidence", repeat, "n_corrected", static_cast<double>(cs.n_corrected)});
            if (cs.n_corrected > 0) {
                bundle.rows.push_back({"confidence", repeat, "scc", cs.scc});
                bundle.rows.push_back({"confidence", repeat, "ccc", cs.ccc});
            }
        }

        if (cfg.save_models && repeat == 0) {
            bundle.saved_models["complex"] = model_to_json(complex_model);
            if (direct_model) bundle.saved_models["simple_direct"] = model_to_json(*direct_model);
            if (mstm_model) bundle.saved_models["simple_mstm"] = model_to_json(*mstm_model);
        }
    }
    finalize_summaries(bundle);
    return bundle;
}

void emit_report(const ReportBundle& bundle, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir))
        throw std::runtime_error("emit_report: cannot create output directory " + out_dir);

    {
        std::ofstream f(fs::path(out_dir) / "results.csv");
        if (!f) throw std::runtime_error("emit_report: cannot write results.csv");
        f << "method,repeat,metric,value\n";
        for (const auto& row : bundle.rows)
            f << row.method << ',' << row.repeat << ',' << row.metric << ','
              << format_g17(row.value) << '\n';
    }
    {
        std::ofstream f(fs::path(out_dir) / "summary.md");
        f << "# Experiment summary\n\n";
        if (!bundle.label_names.empty()) {
            f << "Label mapping: ";
            for (std::size_t i = 0; i < bundle.label_names.size(); ++i)
                f << (i ? ", " : "") << i << " = " << bundle.label_names[i];
            f << "\n\n";
        }
        f << "| method.metric | mean | std |\n|---|---|---|\n";
        for (const auto& s : bundle.summaries)
            f << "| " << s.name << " | " << format_g17(s.mean) << " | " << format_g17(s.stddev)
              << " |\n";
    }
    {
        json traces = json::array();
        for (const auto& t : bundle.traces) traces.push_back(t);
        std::ofstream f(fs::path(out_dir) / "trace.json");
        f << traces.dump(2) << '\n';
    }
    if (!bundle.curves.empty()) {
        fs::create_directories(fs::path(out_dir) / "curves", ec);
        for (const auto& ct : bundle.curves) {
            std::ofstream f(fs::path(out_dir) / "curves" / (ct.name + ".csv"));
            for (std::size_t i = 0; i < ct.headers.size(); ++i)
                f << (i ? "," : "") << ct.headers[i];
            f << '\n';
            for (Eigen::Index r = 0; r < ct.data.rows(); ++r) {
                for (Eigen::Index c = 0; c < ct.data.cols(); ++c)
                    f << (c ? "," : "") << format_g17(ct.data(r, c));
                f << '\n';
            }
        }
    }
    if (!bundle.saved_models.empty()) {
        fs::create_directories(fs::path(out_dir) / "models", ec);
        for (const auto& [name, jm] : bundle.saved_models) {
            std::ofstream f(fs::path(out_dir) / "models" / (name + ".json"));
            f << jm.dump() << '\n';
        }
    }
}

SyntheticRunResult run_synthetic_preset(SyntheticPreset preset, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    if (preset == SyntheticPreset::CleanBisquare) spec.noise_fraction = 0.0;

    SyntheticRunResult out;
    out.data = synthetic_poly_dataset(spec);
    const Matrix grid = out.data.x;
    const TrainedModel teacher = make_tabulated(out.data.x, out.data.noisy);
    const TargetSpec truth = RealTargets{out.data.noisy};
    const ArchSpec simple_spec =
        preset == SyntheticPreset::NoisyLeastSquares ? ArchSpec{LinearLS{}}
                                                     : ArchSpec{RobustLinear{}};
    FitConfig cfg;
    cfg.seed = seed;

    const TrainedModel one_hop =
        hop_transfer(teacher, simple_spec, grid, truth, Distill{1.0}, cfg);
    TransferPlan plan;
    plan.hops.push_back({Polynomial{3}, Distill{1.0}});
    plan.final_method = Distill{1.0};
    const ChainResult chain = chain_transfer(teacher, plan, simple_spec, grid, truth, cfg);

    out.coef_one_hop = std::get<LinearParams>(one_hop.params).coef;
    out.coef_two_hop = std::get<LinearParams>(chain.simple.params).coef;
    out.pred_intermediate = chain.intermediates.front().predict(grid).col(0);
    out.pred_one_hop = one_hop.predict(grid).col(0);
    out.pred_two_hop = chain.simple.predict(grid).col(0);
    out.mse_one_hop = mse(out.pred_one_hop, out.data.clean);
    out.mse_two_hop = mse(out.pred_two_hop, out.data.clean);
    return out;
}

} // namespace mstm
