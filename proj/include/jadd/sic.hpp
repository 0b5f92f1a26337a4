#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jadd/coding.hpp"
#include "jadd/detection.hpp"

namespace jadd {

/// ln( sum_{a in Omega0} exp(-|x - a|^2 / sigma2) / sum_{a in Omega1} exp(-|x - a|^2 / sigma2) ).
double exact_llr(cplx x_hat, double sigma2, const Constellation& constellation, int bit_index);

/// Max-log form: -(1/sigma2) (min_{Omega0} |x - a|^2 - min_{Omega1} |x - a|^2).
double approx_llr(cplx x_hat, double sigma2, const Constellation& constellation, int bit_index);

/// Mean absolute value.
double average_allr(std::span<const double> llr_values);

/// ALLRs of one device row, ordered t-major then bit position.
std::vector<double> row_allr(const Eigen::Ref<const CVector>& row, double sigma2, const Constellation& constellation);

struct SICConfig {
    int n_sic = 10;
    int i_max = 10;
    DetectorKind inner = DetectorKind::SSL;
    DetectorConfig detector;
};

struct SICRound {
    std::vector<int> cancelled;
    int detected = 0;
    double residual_energy = 0.0;
};

struct SICResult {
    /// Decoded information bits per device; empty for devices outside kappa.
    std::vector<std::vector<std::uint8_t>> decoded_bits;
    std::vector<int> kappa;
    std::vector<std::uint8_t> indicators;
    std::vector<SICRound> rounds;
    CMatrix residual;
};

/// Runs the inner detector once and decodes every detected device.
SICResult coded_detect(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                       const ChannelCode& code, DetectorKind inner, const DetectorConfig& detector = {});

/// Detect, rank by average ALLR, decode and cancel the N_sic most reliable
/// new devices per round. At most I_max rounds are run.
SICResult sic_detect(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                     const ChannelCode& code, const SICConfig& config);

/// Dispatches SSL / ASL / AMP-MMV by kind (Gene-Aided and Oracle LS need ground truth).
DetectionResult run_blind_detector(DetectorKind kind, const CMatrix& Y, const SpreadingMatrix& S,
                                   const Constellation& constellation, const DetectorConfig& config);

}  // namespace jadd
