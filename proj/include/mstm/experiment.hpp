#pragma once

#include "mstm/data.hpp"
#include "mstm/metrics.hpp"
#include "mstm/search.hpp"

#include "json.hpp"

#include <map>

namespace mstm {

struct DataSourceCsv {
    std::string path;
    std::string label_column;
    Task task = Task::Classification;
};

struct DataSourceSynthetic {
    SyntheticSpec spec;
};

struct DataSourceGaussian {
    int n = 2000;
    int d = 10;
    int classes = 2;
    int clusters = 4;
    std::uint64_t seed = 0;
};

using DataSource = std::variant<DataSourceCsv, DataSourceSynthetic, DataSourceGaussian>;

struct SplitProtocol {
    double test_fraction = 0.25;
    int repeats = 10;
    int validation_size = 500;        // capped at validation_fraction of train
    double validation_fraction = 0.2;
};

enum class Baseline { Direct, OneHop, Mstm, MstmNp, BruteForce };

struct ExperimentConfig {
    DataSource data;
    ArchSpec complex_spec;
    ArchSpec simple_spec;
    int anchor_k = 10;
    std::optional<std::vector<ArchSpec>> anchor_list; // overrides anchor_k
    PerturbConfig perturb;
    SearchConfig search;
    SplitProtocol split;
    std::vector<Baseline> baselines{Baseline::Direct, Baseline::OneHop, Baseline::Mstm,
                                    Baseline::MstmNp};
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    bool save_models = false; // dump repeat-0 models for later analysis
};

// Strict parse: unknown keys anywhere in the document are errors.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig config_from_file(const std::string& path);

struct CurveTable {
    std::string name;
    std::vector<std::string> headers;
    Matrix data;
};

struct ReportBundle {
    std::vector<std::string> method_order;
    struct Row {
        std::string method;
        int repeat = 0;
        std::string metric;
        double value = 0;
    };
    std::vector<Row> rows;
    std::vector<MetricReport> summaries; // one per method x metric, config order
    std::vector<nlohmann::json> traces;  // search traces per repeat
    std::vector<CurveTable> curves;
    std::vector<std::string> label_names;
    std::vector<ConfidenceSummary> confidence; // per repeat, when applicable
    std::map<std::string, nlohmann::json> saved_models;
};

ReportBundle run_experiment(const ExperimentConfig& cfg, int jobs = 1);

// Writes results.csv, summary.md, trace.json and curves/*.csv; numerics are
// emitted with 17 significant digits.
void emit_report(const ReportBundle& bundle, const std::string& out_dir);

enum class SyntheticPreset { NoisyBisquare, CleanBisquare, NoisyLeastSquares };

struct SyntheticRunResult {
    SyntheticData data;
    Vector coef_one_hop; // simple model [bias, slope]
    Vector coef_two_hop;
    Vector pred_intermediate; // degree-3 intermediate on the grid
    Vector pred_one_hop;
    Vector pred_two_hop;
    double mse_one_hop = 0; // vs ground truth
    double mse_two_hop = 0;
};

// Single-seed reproduction of the three synthetic regimes: direct fit vs a
// fixed degree-3 intermediate chain.
SyntheticRunResult run_synthetic_preset(SyntheticPreset preset, std::uint64_t seed);

std::string format_g17(double v);

} // namespace mstm
