#include "doctest.h"

#include "mstm/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace mstm;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p);
    f << content;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("load_csv") {
    SUBCASE("basic 3-row file") {
        const auto p = write_temp("t_basic.csv", "a,b,y\n1,2,0\n3,4,1\n5,6,0\n");
        const Dataset ds = load_csv(p.string(), "y", Task::Classification);
        CHECK(ds.X.rows() == 3);
        CHECK(ds.X.cols() == 2);
        CHECK(ds.X(1, 0) == doctest::Approx(3.0));
        CHECK(std::get<HardTargets>(ds.targets).labels == std::vector<int>{0, 1, 0});
    }
    SUBCASE("missing label column names the column") {
        const auto p = write_temp("t_missing.csv", "a,b\n1,2\n");
        try {
            load_csv(p.string(), "label", Task::Classification);
            FAIL("expected throw");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("label") != std::string::npos);
        }
    }
    SUBCASE("string labels map in first-appearance order") {
        const auto p = write_temp("t_labels.csv", "x,y\n1,cat\n2,dog\n3,cat\n");
        const Dataset ds = load_csv(p.string(), "y", Task::Classification);
        CHECK(std::get<HardTargets>(ds.targets).labels == std::vector<int>{0, 1, 0});
        CHECK(ds.label_names == std::vector<std::string>{"cat", "dog"});
    }
    SUBCASE("non-numeric cell reports row and column") {
        const auto p = write_temp("t_bad.csv", "a,b,y\n1,2,0\n1,oops,1\n");
        try {
            load_csv(p.string(), "y", Task::Classification);
            FAIL("expected throw");
        } catch (const std::invalid_argument& e) {
            const std::string msg = e.what();
            CHECK(msg.find("oops") != std::string::npos);
            CHECK(msg.find("3") != std::string::npos); // file row
            CHECK(msg.find("b") != std::string::npos);
        }
    }
}

TEST_CASE("split_indices") {
    const SplitIndices s = split_indices(100, 0.25, 10, 0, 42);
    CHECK(s.test.size() == 25);
    CHECK(s.validation.size() == 10);
    CHECK(s.train.size() == 65);

    std::set<int> all;
    for (const auto* part : {&s.train, &s.validation, &s.test})
        for (int i : *part) all.insert(i);
    CHECK(all.size() == 100); // disjoint cover

    const SplitIndices again = split_indices(100, 0.25, 10, 0, 42);
    CHECK(s.train == again.train);
    CHECK(s.test == again.test);

    // repeats give pairwise different test sets on N = 1000
    std::vector<std::vector<int>> tests;
    for (int r = 0; r < 10; ++r) tests.push_back(split_indices(1000, 0.25, 50, r, 42).test);
    for (std::size_t i = 0; i < tests.size(); ++i)
        for (std::size_t j = i + 1; j < tests.size(); ++j) CHECK(tests[i] != tests[j]);

    CHECK_THROWS_AS(split_indices(10, 0.25, 9, 0, 1), std::invalid_argument);
}

TEST_CASE("synthetic_poly_dataset") {
    SyntheticSpec spec;
    const SyntheticData d = synthetic_poly_dataset(spec);
    CHECK(d.x.size() == 2801);
    // x = 0 sits at grid index 1400; clean value there is the bias alone
    CHECK(d.x[1400] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d.clean[1400] == doctest::Approx(1e-5));

    SyntheticSpec clean_spec;
    clean_spec.noise_fraction = 0.0;
    const SyntheticData c = synthetic_poly_dataset(clean_spec);
    CHECK((c.noisy - c.clean).cwiseAbs().maxCoeff() == 0.0);

    // noise hits exactly the first floor(0.2 * N) points, additively in [0,1]
    const Eigen::Index n_noise = static_cast<Eigen::Index>(0.2 * 2801);
    for (Eigen::Index i = 0; i < d.x.size(); ++i) {
        const double delta = d.noisy[i] - d.clean[i];
        if (i < n_noise) {
            CHECK(delta >= 0.0);
            CHECK(delta <= 1.0);
        } else {
            CHECK(delta == 0.0);
        }
    }
}

TEST_CASE("config_from_json") {
    nlohmann::json base = {
        {"data", {{"type", "gaussian_mixture"}, {"n", 300}, {"d", 4}}},
        {"complex", {{"family", "tree_ensemble"}, {"kind", "boosted"}, {"n_trees", 10},
                     {"max_depth", 3}}},
        {"simple", {{"family", "cart"}, {"max_depth", 3}}},
    };
    SUBCASE("defaults") {
        const ExperimentConfig cfg = config_from_json(base);
        CHECK(cfg.split.test_fraction == doctest::Approx(0.25));
        CHECK(cfg.split.repeats == 10);
        CHECK(cfg.search.m == 3);
        CHECK(cfg.baselines.size() == 4);
    }
    SUBCASE("unknown top-level key") {
        nlohmann::json j = base;
        j["surprise"] = 1;
        CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    }
    SUBCASE("unknown nested key") {
        nlohmann::json j = base;
        j["search"] = {{"m", 2}, {"wat", 3}};
        CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    }
    SUBCASE("n and delta are mutually exclusive") {
        nlohmann::json j = base;
        j["search"] = {{"n", 3}, {"delta", 0.1}};
        CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    }
    SUBCASE("bad baseline name") {
        nlohmann::json j = base;
        j["baselines"] = {"direct", "psychic"};
        CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    }
}

TEST_CASE("run_experiment with direct baseline only") {
    nlohmann::json j = {
        {"data", {{"type", "gaussian_mixture"}, {"n", 300}, {"d", 4}}},
        {"complex", {{"family", "tree_ensemble"}, {"kind", "boosted"}, {"n_trees", 10},
                     {"max_depth", 3}}},
        {"simple", {{"family", "cart"}, {"max_depth", 3}}},
        {"baselines", {"direct"}},
        {"split", {{"repeats", 2}, {"validation_size", 30}}},
        {"seed", 7},
    };
    const ReportBundle bundle = run_experiment(config_from_json(j));
    std::set<std::string> methods;
    for (const auto& row : bundle.rows) methods.insert(row.method);
    CHECK(methods == std::set<std::string>{"complex", "direct"});
    // tree simple models always report both accuracy and WGI
    bool saw_acc = false, saw_wgi = false;
    for (const auto& row : bundle.rows)
        if (row.method == "direct") {
            saw_acc |= row.metric == "accuracy";
            saw_wgi |= row.metric == "wgi";
        }
    CHECK(saw_acc);
    CHECK(saw_wgi);
}

TEST_CASE("emit_report") {
    const fs::path dir = fs::temp_directory_path() / "mstm_emit_test";
    fs::remove_all(dir);

    SUBCASE("empty bundle writes a header-only results.csv") {
        emit_report(ReportBundle{}, dir.string());
        CHECK(slurp(dir / "results.csv") == "method,repeat,metric,value\n");
    }
    SUBCASE("synthetic run emits one curve row per grid point") {
        nlohmann::json j = {
            {"data", {{"type", "synthetic"}}},
            {"complex", {{"family", "tabulated"}}},
            {"simple", {{"family", "robust_linear"}}},
            {"baselines", {"one_hop", "mstm"}},
            {"search", {{"m", 2}}},
            {"split", {{"repeats", 1}}},
        };
        const ReportBundle bundle = run_experiment(config_from_json(j));
        emit_report(bundle, dir.string());
        const std::string curves = slurp(dir / "curves" / "synthetic.csv");
        CHECK(std::count(curves.begin(), curves.end(), '\n') == 2802); // header + 2801
        // summary order follows config baseline order
        const std::string summary = slurp(dir / "summary.md");
        CHECK(summary.find("one_hop") < summary.find("mstm."));
    }
    SUBCASE("reruns are byte-identical") {
        nlohmann::json j = {
            {"data", {{"type", "gaussian_mixture"}, {"n", 250}, {"d", 3}}},
            {"complex", {{"family", "tree_ensemble"}, {"kind", "boosted"}, {"n_trees", 8},
                         {"max_depth", 3}}},
            {"simple", {{"family", "cart"}, {"max_depth", 2}}},
            {"baselines", {"direct", "one_hop"}},
            {"split", {{"repeats", 2}, {"validation_size", 25}}},
            {"seed", 3},
        };
        const ExperimentConfig cfg = config_from_json(j);
        emit_report(run_experiment(cfg), (dir / "a").string());
        emit_report(run_experiment(cfg), (dir / "b").string());
        CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));
        CHECK(!slurp(dir / "a" / "results.csv").empty());
    }
}

TEST_CASE("synthetic presets reproduce the three regimes") {
    const SyntheticRunResult noisy = run_synthetic_preset(SyntheticPreset::NoisyBisquare, 1);
    CHECK(noisy.mse_two_hop <= 0.55 * noisy.mse_one_hop);

    const SyntheticRunResult clean = run_synthetic_preset(SyntheticPreset::CleanBisquare, 1);
    CHECK(clean.mse_two_hop <= clean.mse_one_hop);

    const SyntheticRunResult ls = run_synthetic_preset(SyntheticPreset::NoisyLeastSquares, 1);
    CHECK((ls.coef_one_hop - ls.coef_two_hop).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("format_g17 round-trips doubles") {
    for (double v : {1.0 / 3.0, 2.29, -1e-5, 123456.789012345678}) {
        const std::string s = format_g17(v);
        CHECK(std::stod(s) == v);
    }
}
