#include "mstm/data.hpp"

#include "mstm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace mstm {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& label_column, Task task) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("load_csv: empty file " + path);

    const auto header = split_line(line);
    int label_idx = -1;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string h = strip(header[i]);
        if (h == label_column)
            label_idx = static_cast<int>(i);
        else
            names.push_back(h);
    }
    if (label_idx < 0)
        throw std::invalid_argument("load_csv: label column '" + label_column +
                                    "' not found in " + path);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("load_csv: row " + std::to_string(line_no) +
                                        " has " + std::to_string(cells.size()) +
                                        " cells, expected " + std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = strip(cells[c]);
            if (static_cast<int>(c) == label_idx) {
                raw_labels.push_back(cell);
                continue;
            }
            try {
                std::size_t pos = 0;
                const double v = std::stod(cell, &pos);
                if (pos != cell.size() || !std::isfinite(v)) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("load_csv: non-numeric cell '" + cell +
                                            "' at row " + std::to_string(line_no) +
                                            ", column '" + strip(header[c]) + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("load_csv: no data rows in " + path);

    Dataset ds;
    ds.task = task;
    ds.feature_names = names;
    ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    if (task == Task::Classification) {
        HardTargets ht;
        for (const auto& raw : raw_labels) {
            auto it = std::find(ds.label_names.begin(), ds.label_names.end(), raw);
            if (it == ds.label_names.end()) {
                ds.label_names.push_back(raw);
                ht.labels.push_back(static_cast<int>(ds.label_names.size()) - 1);
            } else {
                ht.labels.push_back(static_cast<int>(it - ds.label_names.begin()));
            }
        }
        ht.n_classes = static_cast<int>(ds.label_names.size());
        ds.targets = std::move(ht);
    } else {
        RealTargets rt;
        rt.values.resize(static_cast<Eigen::Index>(raw_labels.size()));
        for (std::size_t i = 0; i < raw_labels.size(); ++i) {
            try {
                rt.values[static_cast<Eigen::Index>(i)] = std::stod(raw_labels[i]);
            } catch (const std::exception&) {
                throw std::invalid_argument("load_csv: non-numeric label '" + raw_labels[i] + "'");
            }
        }
        ds.targets = std::move(rt);
    }
    return ds;
}

SplitIndices split_indices(int n, double test_fraction, int validation_size,
                           int repeat_index, std::uint64_t master_seed) {
    if (test_fraction <= 0 || test_fraction >= 1)
        throw std::invalid_argument("test_fraction must be in (0,1)");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(master_seed, 0x5917, static_cast<std::uint64_t>(repeat_index)));
    std::shuffle(order.begin(), order.end(), rng);

    const int n_test = static_cast<int>(std::llround(n * test_fraction));
    const int n_train_pool = n - n_test;
    if (n_test < 1 || n_train_pool < 2 || validation_size >= n_train_pool || validation_size < 1)
        throw std::invalid_argument("split: infeasible sizes");

    SplitIndices s;
    s.test.assign(order.begin(), order.begin() + n_test);
    s.validation.assign(order.begin() + n_test, order.begin() + n_test + validation_size);
    s.train.assign(order.begin() + n_test + validation_size, order.end());
    return s;
}

Dataset take_rows(const Dataset& ds, const std::vector<int>& idx) {
    Dataset out;
    out.task = ds.task;
    out.feature_names = ds.feature_names;
    out.label_names = ds.label_names;
    out.X.resize(static_cast<Eigen::Index>(idx.size()), ds.X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.X.row(static_cast<Eigen::Index>(i)) = ds.X.row(idx[i]);
    out.targets = subset_targets(ds.targets, idx);
    return out;
}

SyntheticData synthetic_poly_dataset(const SyntheticSpec& spec) {
    if (spec.x_min >= spec.x_max || spec.step <= 0)
        throw std::invalid_argument("synthetic: invalid grid");
    if (spec.noise_fraction < 0 || spec.noise_fraction > 1)
        throw std::invalid_argument("synthetic: noise_fraction must be in [0,1]");

    std::vector<double> xs;
    for (long i = 0;; ++i) {
        const double x = spec.x_min + static_cast<double>(i) * spec.step;
        if (x > spec.x_max + 1e-12) break;
        xs.push_back(x);
    }
    SyntheticData d;
    d.x = Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    d.clean.resize(d.x.size());
    for (Eigen::Index i = 0; i < d.x.size(); ++i) {
        const double x = d.x[i];
        d.clean[i] = spec.coefficient * (std::pow(x, 5) + std::pow(x, 4) + std::pow(x, 3) +
                                         x * x + x + 1.0);
    }
    d.noisy = d.clean;
    const auto n_noise = static_cast<Eigen::Index>(
        std::floor(spec.noise_fraction * static_cast<double>(d.x.size())));
    std::mt19937_64 rng(mix_seed(spec.seed, 0x4015e));
    std::uniform_real_distribution<double> u(spec.noise_low, spec.noise_high);
    for (Eigen::Index i = 0; i < n_noise; ++i) d.noisy[i] += u(rng);
    return d;
}

Dataset gaussian_mixture_dataset(int n, int d, int n_classes, int clusters_per_class,
                                 std::uint64_t seed) {
    if (n < 1 || d < 1 || n_classes < 2 || clusters_per_class < 1)
        throw std::invalid_argument("gaussian_mixture_dataset: invalid sizes");
    std::mt19937_64 rng(mix_seed(seed, 0x9a0551a4));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    Matrix centers(n_classes * clusters_per_class, d);
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
        for (Eigen::Index j = 0; j < d; ++j) centers(i, j) = 2.5 * unit(rng);

    Dataset ds;
    ds.task = Task::Classification;
    ds.X.resize(n, d);
    HardTargets ht;
    ht.n_classes = n_classes;
    for (int i = 0; i < n; ++i) {
        const int label = static_cast<int>(rng() % static_cast<std::uint64_t>(n_classes));
        const int cluster = static_cast<int>(rng() % static_cast<std::uint64_t>(clusters_per_class));
        const Eigen::Index c = label * clusters_per_class + cluster;
        for (Eigen::Index j = 0; j < d; ++j)
            ds.X(i, j) = centers(c, j) + normal(rng);
        ht.labels.push_back(label);
    }
    for (int c = 0; c < n_classes; ++c) ds.label_names.push_back(std::to_string(c));
    for (int j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
    ds.targets = std::move(ht);
    return ds;
}

} // namespace mstm
