#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/energy.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/model.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

enum class Policy { fedavg, leanfed_static, leanfed_adaptive };

inline std::string to_string(Policy p) {
    switch (p) {
        case Policy::fedavg: return "fedavg";
        case Policy::leanfed_static: return "leanfed_static";
        case Policy::leanfed_adaptive: return "leanfed_adaptive";
    }
    return "?";
}

inline Policy policy_from_string(const std::string& s) {
    if (s == "fedavg") return Policy::fedavg;
    if (s == "leanfed_static") return Policy::leanfed_static;
    if (s == "leanfed_adaptive") return Policy::leanfed_adaptive;
    throw config_error("unknown policy '" + s + "' (expected fedavg | leanfed_static | leanfed_adaptive)");
}

struct FederationConfig {
    int total_rounds = 100;           // R
    double participation_rate = 1.0;  // lambda in (0, 1]
    Policy policy = Policy::leanfed_adaptive;
    int num_clients = 0;  // E
    TrainConfig train_config;
    std::uint64_t master_seed = 0;
    // Per-client epoch counts; empty means train_config.local_epochs for everyone.
    std::vector<int> local_epochs_per_client;

    int local_epochs(int client_id) const {
        return local_epochs_per_client.empty() ? train_config.local_epochs
                                               : local_epochs_per_client[client_id];
    }

    void validate() const {
        if (total_rounds < 1) throw config_error("federation: total_rounds must be >= 1");
        if (!(participation_rate > 0.0) || participation_rate > 1.0)
            throw config_error("federation: participation_rate must be in (0, 1]");
        if (num_clients < 1) throw config_error("federation: num_clients must be >= 1");
        train_config.validate();
        if (!local_epochs_per_client.empty()) {
            if (static_cast<int>(local_epochs_per_client.size()) != num_clients)
                throw config_error("federation: local_epochs_per_client size must equal num_clients");
            for (int l : local_epochs_per_client)
                if (l < 1) throw config_error("federation: local epochs must be >= 1");
        }
    }
};

// A completed device's upload: trained parameters plus aggregation-weight inputs.
struct LocalUpdate {
    int client_id = 0;
    ModelParams params;
    std::size_t shard_size = 0;
    int epochs_completed = 0;
    double fraction_used = 0.0;
};

struct RoundOutcome {
    int round_index = 0;
    std::vector<int> participants;         // ascending client id
    std::vector<LocalUpdate> completed;    // ascending client id
    std::vector<int> depleted_this_round;  // ascending client id
    ModelParams global_params_after;
};

using RoundObserver = std::function<void(const RoundOutcome&)>;

// Data fraction from the *initial* budget over the whole horizon:
// eta = B / (lambda * R * cost * L), clamped to [0, 1]. A device following it
// keeps a constant fraction for the entire run.
inline double data_fraction_static(double budget_initial, double per_epoch_cost, int local_epochs,
                                   double lambda, int total_rounds) {
    const double eta = budget_initial / (lambda * total_rounds * per_epoch_cost * local_epochs);
    return std::clamp(eta, 0.0, 1.0);
}

// Per-round re-estimate from the *remaining* budget over the expected number
// of remaining participations: eta = B / (max(1, lambda*rounds_remaining) * cost * L).
// Spends the budget down instead of geometrically under-spending it.
inline double data_fraction_adaptive(double budget_remaining, double per_epoch_cost, int local_epochs,
                                     double lambda, int rounds_remaining) {
    const double expected = std::max(1.0, lambda * rounds_remaining);
    const double eta = budget_remaining / (expected * per_epoch_cost * local_epochs);
    return std::clamp(eta, 0.0, 1.0);
}

// Uniform sample without replacement of round(lambda * E) ids from the active
// set; everyone when lambda = 1 or the active set is short.
inline std::vector<int> sample_participants(const std::vector<int>& active, double lambda,
                                            int num_clients, RngStream& rng) {
    const auto target = static_cast<std::size_t>(std::floor(lambda * num_clients + 0.5));
    if (target >= active.size()) return active;
    std::vector<int> pool = active;
    for (std::size_t i = 0; i < target; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(target);
    std::sort(pool.begin(), pool.end());
    return pool;
}

// max(1, floor(eta * |D_e|)) indices without replacement, redrawn each round;
// eta = 1 short-circuits to the whole shard, eta = 0 to nothing.
inline std::vector<std::size_t> subsample_shard(const ClientShard& shard, double eta, RngStream& rng) {
    if (eta >= 1.0) return shard.indices;
    if (eta <= 0.0) return {};
    const std::size_t n = shard.indices.size();
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(eta * n)));
    std::vector<std::size_t> pool = shard.indices;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

// One device's round: copy the broadcast model, train up to L epochs on an
// eta-subsample, each epoch gated on remaining energy and charged afterwards.
// The update is returned only if the device is still active after the loop;
// otherwise its partial work is discarded.
inline std::optional<LocalUpdate> local_round(const ClientShard& shard, const Dataset& train,
                                              DeviceEnergy& device, const ModelParams& global,
                                              double eta, int local_epochs,
                                              const TrainConfig& train_config, RngStream& rng) {
    const auto sub = subsample_shard(shard, eta, rng);

    std::vector<double> features;
    std::vector<int> labels;
    features.reserve(sub.size() * static_cast<std::size_t>(train.dim));
    labels.reserve(sub.size());
    for (std::size_t i : sub) {
        const double* x = train.row(i);
        features.insert(features.end(), x, x + train.dim);
        labels.push_back(train.labels[i]);
    }

    ModelParams params = global;
    int epochs_completed = 0;
    for (int epoch = 0; epoch < local_epochs; ++epoch) {
        if (!device.is_active()) break;
        if (!sub.empty())
            params = sgd_epoch(std::move(params), features.data(), labels.data(), labels.size(),
                               train_config, rng);
        device.charge_epoch(eta);
        ++epochs_completed;
    }
    if (!device.is_active()) return std::nullopt;
    return LocalUpdate{device.client_id(), std::move(params), shard.size(), epochs_completed, eta};
}

// Weighted mean with weights |D_e| / sum over senders, summed in ascending
// client_id order. Empty input signals a stalled round.
inline std::optional<ModelParams> aggregate(const std::vector<LocalUpdate>& updates) {
    if (updates.empty()) return std::nullopt;
    std::vector<const LocalUpdate*> order;
    order.reserve(updates.size());
    for (const auto& u : updates) order.push_back(&u);
    std::sort(order.begin(), order.end(),
              [](const LocalUpdate* a, const LocalUpdate* b) { return a->client_id < b->client_id; });

    double total = 0.0;
    for (const auto* u : order) total += static_cast<double>(u->shard_size);

    ModelParams out = order.front()->params;
    std::fill(out.weights.begin(), out.weights.end(), 0.0);
    for (const auto* u : order) {
        const double w = static_cast<double>(u->shard_size) / total;
        for (std::size_t k = 0; k < out.weights.size(); ++k) out.weights[k] += w * u->params.weights[k];
    }
    return out;
}

namespace detail {

inline double policy_eta(Policy policy, const DeviceEnergy& device, int local_epochs, double lambda,
                         int total_rounds, int rounds_remaining) {
    switch (policy) {
        case Policy::fedavg:
            return 1.0;
        case Policy::leanfed_static:
            return data_fraction_static(device.budget_initial(), device.per_epoch_cost(), local_epochs,
                                        lambda, total_rounds);
        case Policy::leanfed_adaptive:
            return data_fraction_adaptive(device.budget_remaining(), device.per_epoch_cost(),
                                          local_epochs, lambda, rounds_remaining);
    }
    return 1.0;
}

}  // namespace detail

// Full federation: R rounds of broadcast -> participant sampling among active
// devices -> policy-dependent data fractions -> local rounds (parallelizable;
// per-(client, round) RNG streams keep the result schedule-independent) ->
// sender-only aggregation with carry-over on stalled rounds -> evaluation.
inline MetricsLog run_federation(const Dataset& train, const Dataset& test,
                                 const std::vector<ClientShard>& shards,
                                 std::vector<DeviceEnergy> fleet, const FederationConfig& config,
                                 int num_threads = 1, const RoundObserver& observer = {}) {
    config.validate();
    train.validate();
    test.validate();
    const int num_clients = config.num_clients;
    if (static_cast<int>(shards.size()) != num_clients || static_cast<int>(fleet.size()) != num_clients)
        throw config_error("run_federation: shards/fleet size must equal num_clients");
    if (train.num_classes != test.num_classes || train.dim != test.dim)
        throw config_error("run_federation: train/test shape mismatch");
    for (int e = 0; e < num_clients; ++e)
        if (fleet[e].client_id() != e) throw config_error("run_federation: fleet must be ordered by client id");

    ModelParams global = init_params(train.num_classes, train.dim);
    std::vector<std::optional<int>> depletion_round(num_clients);

    MetricsLog log;
    log.rounds.reserve(config.total_rounds);

    for (int round = 1; round <= config.total_rounds; ++round) {
        std::vector<int> active;
        for (int e = 0; e < num_clients; ++e)
            if (fleet[e].is_active()) active.push_back(e);
        const int num_active_start = static_cast<int>(active.size());

        RngStream participant_rng(derive_seed(config.master_seed, fnv1a64("participants"), round));
        const std::vector<int> participants =
            sample_participants(active, config.participation_rate, num_clients, participant_rng);

        const int rounds_remaining = config.total_rounds - round + 1;
        std::vector<std::optional<LocalUpdate>> results(participants.size());
        std::vector<double> etas(participants.size(), 0.0);

        const auto train_one = [&](std::size_t i) {
            const int client = participants[i];
            const int epochs = config.local_epochs(client);
            const double eta = detail::policy_eta(config.policy, fleet[client], epochs,
                                                  config.participation_rate, config.total_rounds,
                                                  rounds_remaining);
            etas[i] = eta;
            RngStream rng(derive_seed(config.master_seed, static_cast<std::uint64_t>(client), round));
            results[i] = local_round(shards[client], train, fleet[client], global, eta, epochs,
                                     config.train_config, rng);
        };

        const int workers =
            std::clamp(num_threads, 1, std::max(1, static_cast<int>(participants.size())));
        if (workers <= 1) {
            for (std::size_t i = 0; i < participants.size(); ++i) train_one(i);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (int t = 0; t < workers; ++t) {
                pool.emplace_back([&, t] {
                    for (std::size_t i = t; i < participants.size(); i += workers) train_one(i);
                });
            }
            for (auto& th : pool) th.join();
        }

        RoundOutcome outcome;
        outcome.round_index = round;
        outcome.participants = participants;
        for (auto& r : results)
            if (r) outcome.completed.push_back(std::move(*r));

        if (auto agg = aggregate(outcome.completed)) global = std::move(*agg);
        outcome.global_params_after = global;

        for (int e = 0; e < num_clients; ++e) {
            if (!depletion_round[e] && !fleet[e].is_active()) {
                depletion_round[e] = round;
                outcome.depleted_this_round.push_back(e);
            }
        }

        RoundRecord rec;
        rec.round = round;
        rec.test_accuracy = evaluate(global, test);
        rec.num_active_start = num_active_start;
        rec.num_participating = static_cast<int>(participants.size());
        rec.num_completed = static_cast<int>(outcome.completed.size());
        rec.mean_eta = etas.empty() ? 0.0
                                    : std::accumulate(etas.begin(), etas.end(), 0.0) /
                                          static_cast<double>(etas.size());
        double remaining = 0.0;
        for (const auto& d : fleet) remaining += d.budget_remaining();
        rec.total_energy_remaining = remaining;
        log.rounds.push_back(rec);

        if (observer) observer(outcome);
    }

    log.depletions.reserve(num_clients);
    for (int e = 0; e < num_clients; ++e) log.depletions.push_back({e, depletion_round[e]});
    return log;
}

}  // namespace fedsim
