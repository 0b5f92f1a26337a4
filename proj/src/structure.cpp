#include <algorithm>
#include <cctype>
#include <cmath>

#include "jadd/detection.hpp"
#include "jadd/detector_asl.hpp"
#include "jadd/detector_ssl.hpp"
#include "jadd/errors.hpp"

namespace jadd {

namespace {

constexpr double kLambdaClamp = 1e-12;

double clamp_lambda(double x) { return std::clamp(x, kLambdaClamp, 1.0 - kLambdaClamp); }

class SslStructure final : public StructureModel {
public:
    SslStructure(int K, int T, double lambda0) : lambda_(RMatrix::Constant(K, T, lambda0)) {}

    RMatrix infer(const Likelihoods& q) override {
        pi_ = posterior_sparsity_ssl(lambda_.unaryExpr(&clamp_lambda), q);
        return pi_;
    }
    void learn() override { lambda_ = em_update_sparsity_ssl(pi_); }
    RVector activity_score() const override { return pi_.rowwise().mean(); }
    double mean_lambda() const override { return lambda_.mean(); }

private:
    RMatrix lambda_;
    RMatrix pi_;
};

class AslStructure final : public StructureModel {
public:
    AslStructure(int K, double lambda0) : lambda_(RVector::Constant(K, lambda0)) {}

    RMatrix infer(const Likelihoods& q) override {
        const RMatrix logit_xi = extrinsic_sparsity_logit(lambda_.unaryExpr(&clamp_lambda), q.log_mean_q);
        xi_ = logit_xi.unaryExpr(&sigmoid);
        // pi' in logit form: logit(xi) + log mean q, the same arithmetic as SSL.
        return (logit_xi + q.log_mean_q).unaryExpr(&sigmoid);
    }
    void learn() override { lambda_ = em_update_sparsity_asl(xi_); }
    RVector activity_score() const override { return xi_.rowwise().mean(); }
    double mean_lambda() const override { return lambda_.mean(); }

private:
    RVector lambda_;
    RMatrix xi_;
};

class PinnedStructure final : public StructureModel {
public:
    PinnedStructure(std::span<const std::uint8_t> indicators, int T)
        : pi_(static_cast<Eigen::Index>(indicators.size()), T) {
        for (std::size_t k = 0; k < indicators.size(); ++k) pi_.row(k).setConstant(indicators[k] ? 1.0 : 0.0);
    }

    RMatrix infer(const Likelihoods&) override { return pi_; }
    void learn() override {}
    RVector activity_score() const override { return pi_.rowwise().mean(); }
    double mean_lambda() const override { return pi_.mean(); }

private:
    RMatrix pi_;
};

bool all_finite(const CMatrix& m) { return m.allFinite(); }

}  // namespace

std::string to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::SSL: return "oamp-mmv-ssl";
        case DetectorKind::ASL: return "oamp-mmv-asl";
        case DetectorKind::GeneAided: return "gene-aided-oamp";
        case DetectorKind::AmpMmv: return "amp-mmv";
        case DetectorKind::OracleLS: return "oracle-ls";
    }
    return "unknown";
}

DetectorKind parse_detector(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "ssl" || s == "oamp-mmv-ssl") return DetectorKind::SSL;
    if (s == "asl" || s == "oamp-mmv-asl") return DetectorKind::ASL;
    if (s == "gene" || s == "gene-aided" || s == "gene-aided-oamp") return DetectorKind::GeneAided;
    if (s == "amp" || s == "amp-mmv") return DetectorKind::AmpMmv;
    if (s == "ls" || s == "oracle-ls") return DetectorKind::OracleLS;
    throw ConfigError("unknown detector '" + std::string(name) + "'");
}

std::unique_ptr<StructureModel> make_ssl_structure(int K, int T, double lambda0) {
    return std::make_unique<SslStructure>(K, T, lambda0);
}

std::unique_ptr<StructureModel> make_asl_structure(int K, int /*T*/, double lambda0) {
    return std::make_unique<AslStructure>(K, lambda0);
}

std::unique_ptr<StructureModel> make_pinned_structure(std::span<const std::uint8_t> indicators, int T) {
    return std::make_unique<PinnedStructure>(indicators, T);
}

ModuleBOutput module_b(const CMatrix& R, const RVector& tau, StructureModel& structure,
                       const Constellation& constellation) {
    ModuleBOutput out;
    out.q = symbol_likelihoods(R, tau, constellation);
    out.pi = structure.infer(out.q);
    out.moments = posterior_moments(out.pi, out.q, constellation);
    return out;
}

std::vector<std::uint8_t> decide_activity(const RVector& score) {
    std::vector<std::uint8_t> out(score.size());
    for (Eigen::Index k = 0; k < score.size(); ++k) out[k] = score(k) > 0.5 ? 1 : 0;
    return out;
}

DetectionResult run_detector(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                             StructureModel& structure, const DetectorConfig& config, const LoopOptions& options) {
    const int M = S.rows();
    const int K = S.cols();
    const int T = static_cast<int>(Y.cols());
    if (Y.rows() != M) throw ContractViolation("observation rows do not match the spreading matrix");
    if (T < 1) throw ContractViolation("observation has no columns");
    if (config.max_iters < 1) throw ConfigError("max_iters must be at least 1");

    const Guards& g = config.guards;
    const double ratio = static_cast<double>(K) / M;

    double sigma2 = options.sigma2 ? *options.sigma2
                                   : (config.sigma2_0 ? *config.sigma2_0 : noise_init(Y, config.snr0));

    CMatrix U = CMatrix::Zero(K, T);
    RVector v = RVector::Ones(T);
    CMatrix mu = CMatrix::Zero(K, T);
    CMatrix mu_prev = mu;
    CMatrix R(K, T);
    RVector tau(T);

    // AMP state: residual with Onsager memory and the previous mean posterior variance.
    CMatrix Z = Y;
    RVector gbar_prev = RVector::Constant(T, structure.mean_lambda());
    RVector tau_prev = RVector::Ones(T);

    DetectionResult result;
    for (int i = 1; i <= config.max_iters; ++i) {
        if (options.linear == LinearStep::Oamp) {
            if (config.empirical_variance)
                for (int t = 0; t < T; ++t)
                    v(t) = empirical_tau_variance(Y.col(t), S, U.col(t), sigma2, g.v_floor);
            linear_estimate_all(U, Y, S, v, sigma2, R, tau);
        } else {
            if (i > 1) {
                const CMatrix fit = sense(S, mu);
                for (int t = 0; t < T; ++t) {
                    const double onsager = ratio * gbar_prev(t) / tau_prev(t);
                    Z.col(t) = Y.col(t) - fit.col(t) + onsager * Z.col(t);
                }
            }
            R = mu;
            R.noalias() += ratio * sense_adjoint(S, Z);
            tau = ratio * (sigma2 + gbar_prev.array());
        }
        tau = tau.cwiseMax(g.tau_floor);
        if (!tau.allFinite() || !R.allFinite()) throw NumericalFailure("linear step diverged", i);

        const ModuleBOutput b = module_b(R, tau, structure, constellation);
        mu = b.moments.mu;

        if (options.linear == LinearStep::Oamp) {
            for (int t = 0; t < T; ++t) {
                const NonlinearEstimate nle = nonlinear_estimate(mu.col(t), R.col(t), b.moments.gamma_bar(t), tau(t), g);
                U.col(t) = nle.u;
                v(t) = nle.v;
            }
        } else {
            gbar_prev = b.moments.gamma_bar.cwiseMax(g.gamma_floor);
            tau_prev = tau;
            v = gbar_prev;
        }

        structure.learn();
        if (options.learn_sigma2) sigma2 = em_update_noise(Y, S, mu, b.moments.gamma_bar);

        if (!all_finite(mu) || !std::isfinite(sigma2) || !v.allFinite())
            throw NumericalFailure("non-finite detector state", i);

        const double delta = (mu - mu_prev).squaredNorm() / (static_cast<double>(K) * T);
        mu_prev = mu;
        result.iterations = i;

        if (config.keep_trace || config.observer) {
            IterationRecord rec;
            rec.iteration = i;
            rec.tau = tau;
            rec.v = v;
            rec.sigma2 = sigma2;
            rec.mean_lambda = structure.mean_lambda();
            rec.mean_score = structure.activity_score().mean();
            rec.delta_mu = delta;
            if (config.observer) config.observer(rec, mu);
            if (config.keep_trace) result.trace.push_back(std::move(rec));
        }

        // mu^0 = 0 is not an estimate: at large T the first pass can leave every
        // device off, which would look converged.
        if (i > 1 && delta < config.tolerance) {
            result.converged = true;
            break;
        }
    }

    result.X_hat = mu;
    result.pi_bar = structure.activity_score();
    result.indicators_hat = decide_activity(result.pi_bar);
    for (int k = 0; k < K; ++k)
        if (result.indicators_hat[k]) result.support_hat.push_back(k);
    result.sigma2 = sigma2;
    return result;
}

}  // namespace jadd
