#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jadd/detection.hpp"

namespace jadd {

/// Least squares restricted to the true support; off-support rows are zero.
CMatrix oracle_ls(const CMatrix& Y, const SpreadingMatrix& S, std::span<const int> support);

/// OAMP with pi pinned to the true activity and sigma^2 pinned to its true value.
DetectionResult gene_aided_oamp(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                                std::span<const std::uint8_t> indicators, double true_sigma2,
                                const DetectorConfig& config = {});

/// AMP with Onsager correction, the same MMSE denoiser and the SSL EM updates.
///
/// Recursion, with delta = M/K and the matched filter rescaled by K/M so that
/// r = x + noise for the partial DFT:
///   z^i = y - S mu^i + (1/delta) (gbar^i / tau^i) z^{i-1}
///   r^{i+1} = mu^i + (K/M) S^H z^i,  tau^{i+1} = (K/M)(sigma2 + gbar^i)
DetectionResult amp_mmv(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                        const DetectorConfig& config = {});

}  // namespace jadd
