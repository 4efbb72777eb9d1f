#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Battery model parameters. alpha scales the budget with the device's data
// share, beta with the round horizon; both are Gaussian draws clipped to
// [clip_lo, clip_hi]. Variances are variances, not standard deviations.
struct EnergyConfig {
    double alpha_mean = 0.5;
    double alpha_var = 0.5;
    double beta_mean = 0.5;
    double beta_var = 0.5;
    double clip_lo = 0.1;
    double clip_hi = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(clip_lo > 0.0) || clip_lo > clip_hi) throw config_error("energy: need 0 < clip_lo <= clip_hi");
        if (alpha_var < 0.0 || beta_var < 0.0) throw config_error("energy: variances must be >= 0");
    }
};

// A device's energy state. The remaining budget is kept as
// budget_initial - accumulated spend, decreases only through charge_epoch,
// and may overdraw below zero by at most one epoch's cost (the round loop
// checks is_active before each epoch, not whether the epoch is affordable).
class DeviceEnergy {
public:
    DeviceEnergy(int client_id, double budget_initial, double per_epoch_cost)
        : client_id_(client_id), budget_initial_(budget_initial), per_epoch_cost_(per_epoch_cost) {
        if (budget_initial < 0.0) throw config_error("energy: negative initial budget");
        if (!(per_epoch_cost > 0.0)) throw config_error("energy: per_epoch_cost must be > 0");
    }

    int client_id() const { return client_id_; }
    double budget_initial() const { return budget_initial_; }
    double budget_remaining() const { return budget_initial_ - spent_; }
    double per_epoch_cost() const { return per_epoch_cost_; }

    bool is_active() const { return budget_remaining() > 0.0; }

    // One epoch over a data_fraction-sized subsample costs per_epoch_cost * data_fraction.
    void charge_epoch(double data_fraction) {
        assert(data_fraction >= 0.0 && data_fraction <= 1.0);
        spent_ += per_epoch_cost_ * data_fraction;
    }

private:
    int client_id_;
    double budget_initial_;
    double per_epoch_cost_;
    double spent_ = 0.0;
};

// Budget B_e = alpha_e * (|D_e|/|D|) * beta_e * R, per-epoch cost |D_e|/|D|.
inline std::vector<DeviceEnergy> sample_fleet(const std::vector<std::size_t>& shard_sizes,
                                              std::size_t total_samples, int total_rounds,
                                              const EnergyConfig& config) {
    config.validate();
    if (total_rounds < 1) throw config_error("energy: total_rounds must be >= 1");
    std::size_t sum = 0;
    for (std::size_t s : shard_sizes) {
        if (s == 0) throw config_error("energy: shard sizes must be positive");
        sum += s;
    }
    if (sum > total_samples) throw config_error("energy: shard sizes exceed total_samples");

    const double alpha_std = std::sqrt(config.alpha_var);
    const double beta_std = std::sqrt(config.beta_var);
    RngStream rng(derive_seed(config.seed, "energy"));

    std::vector<DeviceEnergy> fleet;
    fleet.reserve(shard_sizes.size());
    for (std::size_t e = 0; e < shard_sizes.size(); ++e) {
        const double alpha = std::clamp(rng.normal(config.alpha_mean, alpha_std), config.clip_lo, config.clip_hi);
        const double beta = std::clamp(rng.normal(config.beta_mean, beta_std), config.clip_lo, config.clip_hi);
        const double data_share = static_cast<double>(shard_sizes[e]) / static_cast<double>(total_samples);
        fleet.emplace_back(static_cast<int>(e), alpha * data_share * beta * total_rounds, data_share);
    }
    return fleet;
}

inline double budget_rounds(double budget, double per_epoch_cost, int local_epochs) {
    return budget / (per_epoch_cost * local_epochs);
}

// Maximum full-data rounds the remaining budget supports: B / (cost * L).
inline double max_rounds(const DeviceEnergy& device, int local_epochs) {
    assert(local_epochs >= 1);
    return budget_rounds(device.budget_remaining(), device.per_epoch_cost(), local_epochs);
}

}  // namespace fedsim
