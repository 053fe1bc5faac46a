#pragma once

#include "nlheat/common.hpp"
#include "nlheat/kernels.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nlheat {

enum class EstimatorKind { Histogram, Tail };

struct SimConfig {
    KernelFamily family = KernelFamily::gaussian(1);
    double t = 1.0;
    long paths = 100000;
    std::uint64_t seed = 1;
    EstimatorKind estimator = EstimatorKind::Histogram;
    double bin_width = 0.25;
    double half_width = 0.0;          // histogram range [-R, R]^d; 0 = 4 sqrt(sigma t) + bin
    std::vector<double> thresholds;   // tail estimator: P{X_1(t) > x}
    std::optional<Vec> tilt;          // importance-sampling tilt gamma
    int batches = 32;

    void validate() const;
    nlohmann::json to_json() const;
    static SimConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
};

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

struct EstimateReport {
    long paths = 0;
    Estimate atom_fraction;
    Estimate mean;      // first coordinate
    Estimate variance;  // first coordinate
    // histogram
    std::vector<Vec> bin_centers;
    std::vector<Estimate> density;
    double bin_width = 0.0;
    double histogram_mass = 0.0;
    // tails
    std::vector<double> thresholds;
    std::vector<Estimate> tail;
    double ess = 0.0;  // (sum w)^2 / sum w^2
    double max_log_weight = 0.0;

    nlohmann::json to_json() const;
    void write_csv(const std::string& path) const;
};

EstimateReport sample_paths(const SimConfig& cfg);
EstimateReport tilted_tail(const SimConfig& cfg);

// P{S_k > x} for sums of exactly k jumps (no Poisson clock).
EstimateReport sample_sums(const KernelFamily& family, long k, const std::vector<double>& thresholds, long paths,
                           std::uint64_t seed, int batches = 32);

// Certified jump samplers, independent of the lattice code.
class JumpSampler {
public:
    JumpSampler(const KernelFamily& family, const Vec& gamma);
    Vec operator()(std::mt19937_64& rng) const;
    double log_mgf() const { return ell_; }

private:
    KernelFamily fam_;
    Vec gamma_;
    double ell_ = 0.0;
    double mode_ = 0.0, fmode_ = 1.0;  // 1-D log-concave envelope
    double accept_max_ = 1.0;           // rejection from uniform
};

long sample_poisson(double mean, std::mt19937_64& rng);

}  // namespace nlheat
