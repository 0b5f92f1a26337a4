#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jadd/model.hpp"
#include "jadd/types.hpp"

namespace jadd {

/// (1/K) sum_k |alpha_hat_k - alpha_k|.
double compute_adep(std::span<const std::uint8_t> indicators_hat, std::span<const std::uint8_t> indicators_true);

/// Correct-bit and total-bit counters for BER = 1 - N_s / total.
struct BitTally {
    std::uint64_t correct = 0;
    std::uint64_t total = 0;

    double ber() const { return total == 0 ? 0.0 : 1.0 - static_cast<double>(correct) / total; }
    BitTally& operator+=(const BitTally& o) {
        correct += o.correct;
        total += o.total;
        return *this;
    }
};

/// Per-device bit comparison. `truth[k]` is empty for inactive devices and
/// `decoded[k]` is empty for undetected ones; the denominator counts every
/// truly active device, so missed devices contribute errors only.
BitTally tally_bits(std::span<const std::vector<std::uint8_t>> decoded,
                    std::span<const std::vector<std::uint8_t>> truth);

/// BER over all truly active devices; equals 1 - N_s / (Ka T log2 L) for uncoded runs.
double compute_ber(std::span<const std::vector<std::uint8_t>> decoded,
                   std::span<const std::vector<std::uint8_t>> truth);

/// (1/KT) ||X_hat - X||_F^2.
double compute_mse(const CMatrix& X_hat, const CMatrix& X);

/// Gray labels of the nearest constellation points of one row, concatenated.
std::vector<std::uint8_t> hard_demap(const Eigen::Ref<const CVector>& row, const Constellation& constellation);

/// Bits of a row of constellation indices.
std::vector<std::uint8_t> symbol_bits(const Eigen::Ref<const Eigen::VectorXi>& indices,
                                      const Constellation& constellation);

/// Uncoded tally: hard-demapped rows of X_hat for detected devices against the
/// transmitted symbols (-1 marks inactive rows).
BitTally tally_uncoded(const CMatrix& X_hat, const Eigen::MatrixXi& symbols,
                       std::span<const std::uint8_t> detected, const Constellation& constellation);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for `successes` out of `n` at normal quantile z.
Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = 1.959963984540054);

}  // namespace jadd
