#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jadd/model.hpp"
#include "jadd/oamp_core.hpp"

namespace jadd {

enum class DetectorKind { SSL, ASL, GeneAided, AmpMmv, OracleLS };

std::string to_string(DetectorKind kind);
/// Accepts "ssl", "asl", "gene", "amp", "ls" and the long forms used in results tables.
DetectorKind parse_detector(std::string_view name);

struct IterationRecord {
    int iteration = 0;
    RVector tau;
    RVector v;
    double sigma2 = 0.0;
    double mean_lambda = 0.0;
    /// Mean activity score (pi_bar or xi_bar) across devices.
    double mean_score = 0.0;
    double delta_mu = 0.0;
};

struct DetectorConfig {
    int max_iters = 50;
    /// Early stop once (1/KT) ||mu^i - mu^{i-1}||^2 drops below this, checked from i = 2.
    double tolerance = 1e-10;
    Guards guards;
    /// Replace v_t by the residual-based estimate before each LE step.
    bool empirical_variance = false;
    std::optional<double> lambda0;
    std::optional<double> sigma2_0;
    double snr0 = 100.0;
    /// Record one IterationRecord per iteration.
    bool keep_trace = false;
    /// Called after every iteration with the record and the current posterior mean.
    std::function<void(const IterationRecord&, const CMatrix& mu)> observer;
};

struct DetectionResult {
    CMatrix X_hat;
    /// pi_bar for SSL-type detectors, xi_bar for ASL.
    RVector pi_bar;
    std::vector<std::uint8_t> indicators_hat;
    std::vector<int> support_hat;
    double sigma2 = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> trace;
};

/// How a detector turns likelihoods into posterior sparsity ratios and learns
/// its sparsity prior. One instance holds the state of one detection run.
class StructureModel {
public:
    virtual ~StructureModel() = default;
    /// Posterior sparsity ratio per (k, t) given the current prior.
    virtual RMatrix infer(const Likelihoods& q) = 0;
    /// EM update of the sparsity prior from the most recent `infer`.
    virtual void learn() = 0;
    /// Per-device score compared against 1/2 for the activity decision.
    virtual RVector activity_score() const = 0;
    virtual double mean_lambda() const = 0;
};

/// SSL: independent per-symbol priors, averaged posteriors as the EM update.
std::unique_ptr<StructureModel> make_ssl_structure(int K, int T, double lambda0);
/// ASL: sum-product messages over the shared activity variable.
std::unique_ptr<StructureModel> make_asl_structure(int K, int T, double lambda0);
/// Activity pinned to the given 0/1 indicators; learning is a no-op.
std::unique_ptr<StructureModel> make_pinned_structure(std::span<const std::uint8_t> indicators, int T);

struct ModuleBOutput {
    Likelihoods q;
    RMatrix pi;
    PosteriorMoments moments;
};

/// Likelihoods, posterior sparsity and MMSE moments for given LE outputs.
ModuleBOutput module_b(const CMatrix& R, const RVector& tau, StructureModel& structure,
                       const Constellation& constellation);

/// alpha_k = 1 iff score_k > 1/2.
std::vector<std::uint8_t> decide_activity(const RVector& score);

enum class LinearStep { Oamp, Amp };

struct LoopOptions {
    LinearStep linear = LinearStep::Oamp;
    bool learn_sigma2 = true;
    /// Used as-is when set; otherwise the SNR0-based initialization.
    std::optional<double> sigma2;
};

/// Shared iteration loop behind SSL, ASL, Gene-Aided OAMP and AMP-MMV.
DetectionResult run_detector(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                             StructureModel& structure, const DetectorConfig& config, const LoopOptions& options);

}  // namespace jadd
