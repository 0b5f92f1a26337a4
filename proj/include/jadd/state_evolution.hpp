#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jadd/detection.hpp"
#include "jadd/metrics.hpp"

namespace jadd {

struct SEConfig {
    int K = 500;
    int Ka = 50;
    int M = 70;
    int T = 10;
    Constellation constellation = make_constellation(4, "qpsk");
    /// Monte-Carlo sample count.
    int N = 100;
    int max_iters = 50;
    /// True noise variance; SE does not learn it.
    double sigma2 = 0.01;
    DetectorKind kind = DetectorKind::SSL;
    std::uint64_t seed = 1;
    std::optional<double> lambda0;
    Guards guards;
    /// Keep the final per-sample estimates (needed by se_predict_ber on the trace).
    bool keep_samples = true;
};

struct SESample {
    CMatrix X;
    Eigen::MatrixXi symbols;
    CMatrix mu;
    std::vector<std::uint8_t> detected;
};

struct SETrace {
    /// Predicted MSE per iteration.
    std::vector<double> theta;
    /// v[n][i]: NLE error of sample n after iteration i + 1.
    std::vector<std::vector<double>> v;
    /// Predicted BER per iteration (same convention as the simulator).
    std::vector<double> ber_per_iter;
    double predicted_ber = 0.0;
    std::vector<SESample> samples;
};

SETrace se_run(const SEConfig& config);

/// BER of the retained samples: hard decisions on detected rows against the
/// transmitted symbols, missed devices counted as all-wrong.
double se_predict_ber(std::span<const SESample> samples, const Constellation& constellation);

}  // namespace jadd
