// Monte Carlo calibration of the detection threshold at a nominal Pfa:
// simulate H0 windows under each structure class, take the conservative
// empirical quantile per class, keep the maximum.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcm/scenario.hpp"

namespace pcm {

struct CalibrationSpec {
    Architecture architecture;
    int K = 120;
    double pfa = 0.01;
    int trials = 1000;
    std::uint64_t seed = 0;
    EmConfig em_config;
    std::array<Herm3, 4> matrices = nominal_matrices();

    void validate() const {
        if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("pfa must be in (0,1)");
        if (trials * pfa < 5.0)
            throw std::invalid_argument("trials * pfa must be >= 5 for a stable quantile");
    }
};

struct CalibrationResult {
    std::array<double, 4> per_class_thresholds{};
    double eta = 0.0;
};

/// Decision statistic of the penalized LLRT (left side of the test).
inline double detection_statistic(std::span<const Vec3c> z, const Architecture& arch,
                                  const EmConfig& cfg) {
    const double gamma = penalty_gamma(arch.rule, static_cast<int>(z.size()));
    return h1_term(z, gamma, arch.strategy, cfg).value - h0_term(z, gamma).value;
}

inline CalibrationResult calibrate(const CalibrationSpec& spec, int threads = 1) {
    spec.validate();
    CalibrationResult res;
    res.eta = -std::numeric_limits<double>::infinity();
    const RngStream root(spec.seed);
    const int kth = static_cast<int>(std::ceil(spec.trials * spec.pfa));  // k-th largest
    for (int cls = 0; cls < 4; ++cls) {
        std::vector<double> stats(spec.trials);
        const Lower3 L = cholesky(spec.matrices[cls]);
        parallel_for(spec.trials, threads, [&](std::size_t t) {
            RngStream rng = root.split(static_cast<std::uint64_t>(cls) * 1000003 + t);
            WindowData z(spec.K);
            for (auto& v : z) v = sample_gaussian(L, rng);
            stats[t] = detection_statistic(z, spec.architecture, spec.em_config);
        });
        std::sort(stats.begin(), stats.end(), std::greater<>());
        res.per_class_thresholds[cls] = stats[kth - 1];
        res.eta = std::max(res.eta, res.per_class_thresholds[cls]);
    }
    return res;
}

}  // namespace pcm
