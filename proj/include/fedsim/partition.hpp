#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

struct PartitionConfig {
    int num_clients = 1;
    double gamma = 0.5;  // Dirichlet concentration; ~1e3 gives near-iid shards
    int min_shard_size = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_clients < 1) throw config_error("partition: num_clients must be >= 1");
        if (!(gamma > 0.0)) throw config_error("partition: gamma must be > 0");
        if (min_shard_size < 1) throw config_error("partition: min_shard_size must be >= 1");
    }
};

// One client's index set into the train dataset.
struct ClientShard {
    int client_id = 0;
    std::vector<std::size_t> indices;

    std::size_t size() const { return indices.size(); }
};

// Largest-remainder apportionment of `total` items across proportions:
// every assigned count is within 1 of its quota total*p[i] and the counts
// sum to exactly `total`. Remainder ties go to the lower index.
inline std::vector<int> apportion_largest_remainder(int total, const std::vector<double>& proportions) {
    const std::size_t k = proportions.size();
    std::vector<int> counts(k);
    std::vector<std::pair<double, std::size_t>> remainders(k);
    int assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double quota = total * proportions[i];
        counts[i] = static_cast<int>(std::floor(quota));
        remainders[i] = {quota - counts[i], i};
        assigned += counts[i];
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int r = 0; r < total - assigned; ++r) counts[remainders[r].second] += 1;
    return counts;
}

// Label-skew partition: per class, a proportion vector ~ Dirichlet(gamma*1_E)
// decides how many of that class's samples each client gets. Shards below
// min_shard_size are then topped up by moving uniformly-chosen samples from
// the largest shard.
inline std::vector<ClientShard> partition_dirichlet(const Dataset& train, const PartitionConfig& config) {
    config.validate();
    train.validate();
    const int num_clients = config.num_clients;
    const std::size_t n = train.size();
    if (static_cast<std::size_t>(num_clients) * config.min_shard_size > n)
        throw config_error("partition: num_clients * min_shard_size exceeds dataset size");

    RngStream rng(derive_seed(config.seed, "partition"));

    std::vector<std::vector<std::size_t>> by_class(train.num_classes);
    for (std::size_t i = 0; i < n; ++i) by_class[train.labels[i]].push_back(i);

    std::vector<ClientShard> shards(num_clients);
    for (int e = 0; e < num_clients; ++e) shards[e].client_id = e;

    for (int c = 0; c < train.num_classes; ++c) {
        auto& indices = by_class[c];
        rng.shuffle(indices);
        const auto proportions = rng.dirichlet(config.gamma, num_clients);
        const auto counts = apportion_largest_remainder(static_cast<int>(indices.size()), proportions);
        std::size_t offset = 0;
        for (int e = 0; e < num_clients; ++e) {
            shards[e].indices.insert(shards[e].indices.end(), indices.begin() + offset,
                                     indices.begin() + offset + counts[e]);
            offset += counts[e];
        }
    }

    // Rebalance: whenever some shard is deficient the largest shard is
    // strictly above min_shard_size (counting argument), so this terminates.
    for (;;) {
        int deficient = -1;
        for (int e = 0; e < num_clients; ++e) {
            if (shards[e].size() < static_cast<std::size_t>(config.min_shard_size)) {
                deficient = e;
                break;
            }
        }
        if (deficient < 0) break;
        int largest = 0;
        for (int e = 1; e < num_clients; ++e)
            if (shards[e].size() > shards[largest].size()) largest = e;
        auto& src = shards[largest].indices;
        const std::size_t pick = static_cast<std::size_t>(rng.uniform_below(src.size()));
        shards[deficient].indices.push_back(src[pick]);
        src.erase(src.begin() + pick);
    }

    for (auto& shard : shards) std::sort(shard.indices.begin(), shard.indices.end());
    return shards;
}

// Empirical label distribution of a shard; entries sum to 1.
inline std::vector<double> label_histogram(const ClientShard& shard, const Dataset& train) {
    if (shard.indices.empty()) throw config_error("label_histogram: empty shard");
    std::vector<double> hist(train.num_classes, 0.0);
    for (std::size_t i : shard.indices) hist[train.labels[i]] += 1.0;
    for (auto& v : hist) v /= static_cast<double>(shard.indices.size());
    return hist;
}

inline std::vector<double> dataset_label_histogram(const Dataset& ds) {
    std::vector<double> hist(ds.num_classes, 0.0);
    for (int y : ds.labels) hist[y] += 1.0;
    for (auto& v : hist) v /= static_cast<double>(ds.size());
    return hist;
}

inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
    return 0.5 * sum;
}

}  // namespace fedsim
