#include "jadd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "jadd/errors.hpp"

namespace jadd {

double compute_adep(std::span<const std::uint8_t> indicators_hat, std::span<const std::uint8_t> indicators_true) {
    if (indicators_hat.size() != indicators_true.size())
        throw ContractViolation("compute_adep: indicator lengths differ");
    if (indicators_hat.empty()) return 0.0;
    std::size_t errors = 0;
    for (std::size_t k = 0; k < indicators_hat.size(); ++k)
        errors += (indicators_hat[k] != 0) != (indicators_true[k] != 0);
    return static_cast<double>(errors) / indicators_hat.size();
}

BitTally tally_bits(std::span<const std::vector<std::uint8_t>> decoded,
                    std::span<const std::vector<std::uint8_t>> truth) {
    if (decoded.size() != truth.size()) throw ContractViolation("tally_bits: device counts differ");
    BitTally tally;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (truth[k].empty()) continue;
        tally.total += truth[k].size();
        if (decoded[k].empty()) continue;
        if (decoded[k].size() != truth[k].size())
            throw ContractViolation("tally_bits: decoded length differs from the transmitted length");
        for (std::size_t i = 0; i < truth[k].size(); ++i) tally.correct += decoded[k][i] == truth[k][i];
    }
    return tally;
}

double compute_ber(std::span<const std::vector<std::uint8_t>> decoded,
                   std::span<const std::vector<std::uint8_t>> truth) {
    return tally_bits(decoded, truth).ber();
}

double compute_mse(const CMatrix& X_hat, const CMatrix& X) {
    if (X_hat.rows() != X.rows() || X_hat.cols() != X.cols())
        throw ContractViolation("compute_mse: dimension mismatch");
    if (X.size() == 0) return 0.0;
    return (X_hat - X).squaredNorm() / static_cast<double>(X.size());
}

std::vector<std::uint8_t> hard_demap(const Eigen::Ref<const CVector>& row, const Constellation& constellation) {
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(row.size()) * constellation.bits_per_symbol);
    for (Eigen::Index t = 0; t < row.size(); ++t) {
        const int l = constellation.nearest(row(t));
        for (int b = 0; b < constellation.bits_per_symbol; ++b)
            bits.push_back(static_cast<std::uint8_t>(constellation.bit(l, b)));
    }
    return bits;
}

std::vector<std::uint8_t> symbol_bits(const Eigen::Ref<const Eigen::VectorXi>& indices,
                                      const Constellation& constellation) {
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(indices.size()) * constellation.bits_per_symbol);
    for (Eigen::Index t = 0; t < indices.size(); ++t)
        for (int b = 0; b < constellation.bits_per_symbol; ++b)
            bits.push_back(static_cast<std::uint8_t>(constellation.bit(indices(t), b)));
    return bits;
}

BitTally tally_uncoded(const CMatrix& X_hat, const Eigen::MatrixXi& symbols,
                       std::span<const std::uint8_t> detected, const Constellation& constellation) {
    const auto K = X_hat.rows();
    if (symbols.rows() != K || symbols.cols() != X_hat.cols() || static_cast<Eigen::Index>(detected.size()) != K)
        throw ContractViolation("tally_uncoded: dimension mismatch");
    BitTally tally;
    const int bps = constellation.bits_per_symbol;
    for (Eigen::Index k = 0; k < K; ++k) {
        if (symbols(k, 0) < 0) continue;
        tally.total += static_cast<std::uint64_t>(symbols.cols()) * bps;
        if (!detected[k]) continue;
        for (Eigen::Index t = 0; t < symbols.cols(); ++t) {
            const int est = constellation.nearest(X_hat(k, t));
            const int truth = symbols(k, t);
            for (int b = 0; b < bps; ++b) tally.correct += constellation.bit(est, b) == constellation.bit(truth, b);
        }
    }
    return tally;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    if (successes > n) throw ContractViolation("wilson_interval: more successes than trials");
    const double nn = static_cast<double>(n);
    const double p = successes / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace jadd
