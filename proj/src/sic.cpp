#include "jadd/sic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jadd/baselines.hpp"
#include "jadd/detector_asl.hpp"
#include "jadd/detector_ssl.hpp"
#include "jadd/errors.hpp"

namespace jadd {

namespace {

void check_llr_args(double sigma2, const Constellation& c, int b) {
    if (!(sigma2 > 0.0)) throw ContractViolation("llr: sigma2 must be positive");
    if (b < 0 || b >= c.bits_per_symbol) throw ContractViolation("llr: bit index out of range");
}

double log_sum_exp(const std::vector<double>& v) {
    const double peak = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - peak);
    return peak + std::log(s);
}

std::vector<std::uint8_t> decode_row(const Eigen::Ref<const CVector>& row, double sigma2,
                                     const Constellation& constellation, const ChannelCode& code) {
    const int T = static_cast<int>(row.size());
    const int capacity = T * constellation.bits_per_symbol;
    const int info_len = code.info_length(capacity);
    std::vector<double> llr = row_allr(row, sigma2, constellation);
    llr.resize(code.encoded_length(info_len));
    return code.soft_decode(llr, info_len);
}

void cancel(CMatrix& residual, const SpreadingMatrix& S, int k, const std::vector<cplx>& symbols) {
    for (Eigen::Index t = 0; t < residual.cols(); ++t) residual.col(t) -= S.entries.col(k) * symbols[t];
}

}  // namespace

double exact_llr(cplx x_hat, double sigma2, const Constellation& constellation, int bit_index) {
    check_llr_args(sigma2, constellation, bit_index);
    std::vector<double> zero, one;
    for (int l : constellation.bit_subsets[bit_index][0]) zero.push_back(-std::norm(x_hat - constellation.points[l]) / sigma2);
    for (int l : constellation.bit_subsets[bit_index][1]) one.push_back(-std::norm(x_hat - constellation.points[l]) / sigma2);
    return log_sum_exp(zero) - log_sum_exp(one);
}

double approx_llr(cplx x_hat, double sigma2, const Constellation& constellation, int bit_index) {
    check_llr_args(sigma2, constellation, bit_index);
    double d0 = std::numeric_limits<double>::infinity();
    double d1 = d0;
    for (int l : constellation.bit_subsets[bit_index][0]) d0 = std::min(d0, std::norm(x_hat - constellation.points[l]));
    for (int l : constellation.bit_subsets[bit_index][1]) d1 = std::min(d1, std::norm(x_hat - constellation.points[l]));
    return -(d0 - d1) / sigma2;
}

double average_allr(std::span<const double> llr_values) {
    if (llr_values.empty()) return 0.0;
    double s = 0.0;
    for (double x : llr_values) s += std::abs(x);
    return s / static_cast<double>(llr_values.size());
}

std::vector<double> row_allr(const Eigen::Ref<const CVector>& row, double sigma2, const Constellation& constellation) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(row.size()) * constellation.bits_per_symbol);
    for (Eigen::Index t = 0; t < row.size(); ++t)
        for (int b = 0; b < constellation.bits_per_symbol; ++b)
            out.push_back(approx_llr(row(t), sigma2, constellation, b));
    return out;
}

DetectionResult run_blind_detector(DetectorKind kind, const CMatrix& Y, const SpreadingMatrix& S,
                                   const Constellation& constellation, const DetectorConfig& config) {
    switch (kind) {
        case DetectorKind::SSL: return detect_ssl(Y, S, constellation, config);
        case DetectorKind::ASL: return detect_asl(Y, S, constellation, config);
        case DetectorKind::AmpMmv: return amp_mmv(Y, S, constellation, config);
        default: throw ConfigError(to_string(kind) + " needs ground truth and cannot run blind");
    }
}

SICResult coded_detect(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                       const ChannelCode& code, DetectorKind inner, const DetectorConfig& detector) {
    const int K = S.cols();
    const DetectionResult det = run_blind_detector(inner, Y, S, constellation, detector);
    const double sigma2 = std::max(det.sigma2, 1e-12);

    SICResult out;
    out.decoded_bits.assign(K, {});
    out.indicators.assign(K, 0);
    out.residual = Y;
    SICRound round;
    round.detected = static_cast<int>(det.support_hat.size());
    for (int k : det.support_hat) {
        out.decoded_bits[k] = decode_row(det.X_hat.row(k).transpose(), sigma2, constellation, code);
        out.indicators[k] = 1;
        out.kappa.push_back(k);
        round.cancelled.push_back(k);
    }
    round.residual_energy = Y.squaredNorm();
    out.rounds.push_back(std::move(round));
    return out;
}

SICResult sic_detect(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                     const ChannelCode& code, const SICConfig& config) {
    if (config.n_sic < 1) throw ConfigError("N_sic must be at least 1");
    if (config.i_max < 1) throw ConfigError("I_max must be at least 1");
    const int K = S.cols();
    const int T = static_cast<int>(Y.cols());

    SICResult out;
    out.decoded_bits.assign(K, {});
    out.indicators.assign(K, 0);
    out.residual = Y;

    for (int round_index = 1; round_index <= config.i_max; ++round_index) {
        DetectionResult det;
        try {
            det = run_blind_detector(config.inner, out.residual, S, constellation, config.detector);
        } catch (const NumericalFailure& e) {
            throw NumericalFailure("SIC round " + std::to_string(round_index) + ": inner detector diverged",
                                   e.iteration());
        }
        const double sigma2 = std::max(det.sigma2, 1e-12);

        // New detections only; a device is never cancelled twice.
        std::vector<int> fresh;
        for (int k : det.support_hat)
            if (!out.indicators[k]) fresh.push_back(k);

        std::vector<double> score(K, 0.0);
        for (int k : fresh) {
            const auto llr = row_allr(det.X_hat.row(k).transpose(), sigma2, constellation);
            score[k] = average_allr(llr);
        }
        std::stable_sort(fresh.begin(), fresh.end(), [&](int a, int b) { return score[a] > score[b]; });

        const bool last = static_cast<int>(fresh.size()) <= config.n_sic;
        if (!last) fresh.resize(config.n_sic);

        SICRound round;
        round.detected = static_cast<int>(det.support_hat.size());
        for (int k : fresh) {
            out.decoded_bits[k] = decode_row(det.X_hat.row(k).transpose(), sigma2, constellation, code);
            out.indicators[k] = 1;
            out.kappa.push_back(k);
            cancel(out.residual, S, k, reconstruct_device(out.decoded_bits[k], code, constellation, T));
        }
        round.cancelled = std::move(fresh);
        round.residual_energy = out.residual.squaredNorm();
        out.rounds.push_back(std::move(round));
        if (last) break;
    }
    std::sort(out.kappa.begin(), out.kappa.end());
    return out;
}

}  // namespace jadd
