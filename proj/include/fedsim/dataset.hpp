#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Labeled dataset, features stored row-major (n x dim).
struct Dataset {
    std::vector<double> features;
    std::vector<int> labels;
    int num_classes = 0;
    int dim = 0;
    std::string split_tag = "train";

    std::size_t size() const { return labels.size(); }
    const double* row(std::size_t i) const { return features.data() + i * static_cast<std::size_t>(dim); }

    void validate() const {
        if (labels.empty()) throw config_error("dataset: empty");
        if (dim < 1) throw config_error("dataset: dim must be >= 1");
        if (num_classes < 2) throw config_error("dataset: need at least 2 classes");
        if (features.size() != labels.size() * static_cast<std::size_t>(dim))
            throw config_error("dataset: feature matrix shape mismatch");
        for (int y : labels)
            if (y < 0 || y >= num_classes) throw config_error("dataset: label out of range");
        for (double v : features)
            if (!std::isfinite(v)) throw numeric_error("dataset: non-finite feature");
    }
};

namespace detail {

// Class counts balanced to within one sample: the first (n mod C) classes get
// the extra sample.
inline std::vector<int> balanced_counts(int n, int num_classes) {
    std::vector<int> counts(num_classes, n / num_classes);
    for (int c = 0; c < n % num_classes; ++c) counts[c] += 1;
    return counts;
}

inline Dataset sample_gaussian_blobs(const std::vector<std::vector<double>>& means, int n, int dim,
                                     std::string split_tag, RngStream& rng) {
    const int num_classes = static_cast<int>(means.size());
    Dataset ds;
    ds.num_classes = num_classes;
    ds.dim = dim;
    ds.split_tag = std::move(split_tag);
    ds.features.reserve(static_cast<std::size_t>(n) * dim);
    ds.labels.reserve(n);

    std::vector<int> remaining = balanced_counts(n, num_classes);
    int cls = 0;
    for (int i = 0; i < n; ++i) {
        while (remaining[cls] == 0) cls = (cls + 1) % num_classes;
        remaining[cls] -= 1;
        ds.labels.push_back(cls);
        for (int j = 0; j < dim; ++j) ds.features.push_back(means[cls][j] + rng.normal(0.0, 1.0));
        cls = (cls + 1) % num_classes;
    }
    return ds;
}

}  // namespace detail

// Isotropic Gaussian blobs around per-class means placed at
// class_separation * (random unit direction). Labels are balanced to within
// one sample per class in each split; train and test are drawn from disjoint
// streams of the same seed.
inline std::pair<Dataset, Dataset> generate_synthetic(int num_classes, int dim, int n_train,
                                                      int n_test, double class_separation,
                                                      std::uint64_t seed) {
    if (num_classes < 2) throw config_error("generate_synthetic: num_classes must be >= 2");
    if (dim < 2) throw config_error("generate_synthetic: dim must be >= 2");
    if (n_train < 1 || n_test < 1) throw config_error("generate_synthetic: split sizes must be >= 1");
    if (!(class_separation > 0.0)) throw config_error("generate_synthetic: class_separation must be > 0");

    RngStream mean_rng(derive_seed(seed, "means"));
    std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim));
    for (auto& mu : means) {
        double norm = 0.0;
        do {
            norm = 0.0;
            for (auto& v : mu) {
                v = mean_rng.normal(0.0, 1.0);
                norm += v * v;
            }
            norm = std::sqrt(norm);
        } while (norm < 1e-12);
        for (auto& v : mu) v *= class_separation / norm;
    }

    RngStream train_rng(derive_seed(seed, "train"));
    RngStream test_rng(derive_seed(seed, "test"));
    Dataset train = detail::sample_gaussian_blobs(means, n_train, dim, "train", train_rng);
    Dataset test = detail::sample_gaussian_blobs(means, n_test, dim, "test", test_rng);
    return {std::move(train), std::move(test)};
}

namespace detail {

inline bool parse_double(const std::string& token, double& out) {
    const char* begin = token.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream iss(line);
    while (std::getline(iss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace detail

// Rows are f_1,...,f_d,label; an optional header is detected by a non-numeric
// first row. Labels are remapped to contiguous [0, C) preserving their sorted
// original order.
inline Dataset load_csv(const std::string& path, std::string split_tag = "train") {
    std::ifstream in(path);
    if (!in) throw io_error("load_csv: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<double> raw_labels;
    int dim = -1;
    std::string line;
    long line_no = 0;
    bool first_content_line = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        const auto fields = detail::split_csv_line(line);
        std::vector<double> values(fields.size());
        bool numeric = true;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!detail::parse_double(fields[i], values[i])) {
                numeric = false;
                break;
            }
        }
        if (first_content_line) {
            first_content_line = false;
            if (!numeric) continue;  // header row
        }
        if (!numeric) throw parse_error("load_csv: non-numeric field", line_no);
        if (dim < 0) {
            if (fields.size() < 2) throw parse_error("load_csv: need at least one feature and a label", line_no);
            dim = static_cast<int>(fields.size()) - 1;
        } else if (static_cast<int>(fields.size()) != dim + 1) {
            throw parse_error("load_csv: ragged row, expected " + std::to_string(dim + 1) + " fields", line_no);
        }
        raw_labels.push_back(values.back());
        values.pop_back();
        rows.push_back(std::move(values));
    }

    if (rows.empty()) throw parse_error("load_csv: no data rows in " + path, line_no);

    std::map<double, int> label_map;
    for (double y : raw_labels) label_map.emplace(y, 0);
    if (label_map.size() < 2) throw parse_error("load_csv: fewer than 2 distinct labels in " + path);
    int next = 0;
    for (auto& [value, id] : label_map) id = next++;

    Dataset ds;
    ds.dim = dim;
    ds.num_classes = static_cast<int>(label_map.size());
    ds.split_tag = std::move(split_tag);
    ds.features.reserve(rows.size() * static_cast<std::size_t>(dim));
    ds.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.features.insert(ds.features.end(), rows[i].begin(), rows[i].end());
        ds.labels.push_back(label_map.at(raw_labels[i]));
    }
    ds.validate();
    return ds;
}

}  // namespace fedsim
