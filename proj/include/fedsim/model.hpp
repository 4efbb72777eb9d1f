#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

struct TrainConfig {
    double learning_rate = 0.05;
    int batch_size = 64;
    int local_epochs = 5;
    double weight_decay = 1e-4;

    void validate() const {
        if (!(learning_rate >= 0.0)) throw config_error("train: learning_rate must be >= 0");
        if (batch_size < 1) throw config_error("train: batch_size must be >= 1");
        if (local_epochs < 1) throw config_error("train: local_epochs must be >= 1");
        if (weight_decay < 0.0) throw config_error("train: weight_decay must be >= 0");
    }
};

// Multinomial logistic regression parameters: C x (dim+1) row-major, the bias
// folded in as the last column.
struct ModelParams {
    std::vector<double> weights;
    int num_classes = 0;
    int dim = 0;

    std::size_t cols() const { return static_cast<std::size_t>(dim) + 1; }
    double* row(int c) { return weights.data() + c * cols(); }
    const double* row(int c) const { return weights.data() + c * cols(); }

    bool finite() const {
        return std::all_of(weights.begin(), weights.end(), [](double v) { return std::isfinite(v); });
    }
    bool operator==(const ModelParams&) const = default;
};

inline ModelParams init_params(int num_classes, int dim) {
    if (num_classes < 2) throw config_error("model: num_classes must be >= 2");
    if (dim < 1) throw config_error("model: dim must be >= 1");
    ModelParams p;
    p.num_classes = num_classes;
    p.dim = dim;
    p.weights.assign(static_cast<std::size_t>(num_classes) * (dim + 1), 0.0);
    return p;
}

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // same layout as ModelParams::weights
};

// Mean cross-entropy plus (weight_decay/2)*||W||_F^2 over a batch stored
// row-major in `features` (m x dim). Loss uses the log-sum-exp form so it
// stays finite for large logits.
inline LossGrad loss_and_grad(const ModelParams& params, const double* features, const int* labels,
                              std::size_t m, double weight_decay) {
    const int C = params.num_classes;
    const int d = params.dim;
    const std::size_t cols = params.cols();
    for (std::size_t i = 0; i < m * static_cast<std::size_t>(d); ++i)
        if (!std::isfinite(features[i])) throw numeric_error("loss_and_grad: non-finite feature");

    LossGrad out;
    out.grad.assign(params.weights.size(), 0.0);
    std::vector<double> logits(C);

    for (std::size_t i = 0; i < m; ++i) {
        const double* x = features + i * d;
        for (int c = 0; c < C; ++c) {
            const double* w = params.row(c);
            double z = w[d];  // bias
            for (int j = 0; j < d; ++j) z += w[j] * x[j];
            logits[c] = z;
        }
        const double zmax = *std::max_element(logits.begin(), logits.end());
        double sum_exp = 0.0;
        for (int c = 0; c < C; ++c) sum_exp += std::exp(logits[c] - zmax);
        out.loss += std::log(sum_exp) + zmax - logits[labels[i]];

        for (int c = 0; c < C; ++c) {
            const double p = std::exp(logits[c] - zmax) / sum_exp;
            const double delta = p - (c == labels[i] ? 1.0 : 0.0);
            double* g = out.grad.data() + c * cols;
            for (int j = 0; j < d; ++j) g[j] += delta * x[j];
            g[d] += delta;
        }
    }

    const double inv_m = 1.0 / static_cast<double>(m);
    out.loss *= inv_m;
    for (std::size_t k = 0; k < out.grad.size(); ++k)
        out.grad[k] = out.grad[k] * inv_m + weight_decay * params.weights[k];
    for (double w : params.weights) out.loss += 0.5 * weight_decay * w * w;
    return out;
}

// One epoch of mini-batch SGD. The sample order is shuffled by `rng`, but
// indices are sorted within each batch so the gradient summation order is
// canonical; with batch_size >= m the epoch is exactly one full-batch step.
inline ModelParams sgd_epoch(ModelParams params, const double* features, const int* labels,
                             std::size_t m, const TrainConfig& config, RngStream& rng) {
    const int d = params.dim;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::vector<double> batch_features;
    std::vector<int> batch_labels;
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);

    for (std::size_t start = 0; start < m; start += bs) {
        const std::size_t end = std::min(start + bs, m);
        std::vector<std::size_t> batch(order.begin() + start, order.begin() + end);
        std::sort(batch.begin(), batch.end());

        batch_features.clear();
        batch_labels.clear();
        for (std::size_t i : batch) {
            const double* x = features + i * d;
            batch_features.insert(batch_features.end(), x, x + d);
            batch_labels.push_back(labels[i]);
        }
        const LossGrad lg =
            loss_and_grad(params, batch_features.data(), batch_labels.data(), batch.size(), config.weight_decay);
        for (std::size_t k = 0; k < params.weights.size(); ++k)
            params.weights[k] -= config.learning_rate * lg.grad[k];
    }
    return params;
}

// Fraction of argmax-correct predictions; ties break toward the lowest class.
inline double evaluate(const ModelParams& params, const Dataset& test) {
    if (test.size() == 0) throw config_error("evaluate: empty test set");
    const int C = params.num_classes;
    const int d = params.dim;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double* x = test.row(i);
        int best = 0;
        double best_z = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < C; ++c) {
            const double* w = params.row(c);
            double z = w[d];
            for (int j = 0; j < d; ++j) z += w[j] * x[j];
            if (z > best_z) {
                best_z = z;
                best = c;
            }
        }
        if (best == test.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace fedsim
