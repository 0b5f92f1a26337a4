#include "jadd/detector_ssl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "jadd/errors.hpp"

namespace jadd {

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double phase_transition_objective(double c, double rho) {
    const double psi = (1.0 + c * c) * std_normal_cdf(-c) - c * std_normal_pdf(c);
    return rho * (1.0 - 2.0 * psi / rho) / (1.0 + c * c - 2.0 * psi);
}

}  // namespace

double sparsity_init(double measurement_ratio) {
    if (!(measurement_ratio > 0.0) || measurement_ratio > 1.0)
        throw ConfigError("measurement ratio M/K must lie in (0, 1]");
    const double rho = measurement_ratio;

    // Coarse log grid to bracket the maximum, then Brent on the bracket.
    double best_c = 1e-3;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) {
        const double c = std::pow(10.0, -3.0 + 5.0 * i / 400.0);
        const double f = phase_transition_objective(c, rho);
        if (f > best) {
            best = f;
            best_c = c;
        }
    }
    const double lo = best_c / std::pow(10.0, 5.0 / 400.0);
    const double hi = best_c * std::pow(10.0, 5.0 / 400.0);
    const auto [c_star, neg] = boost::math::tools::brent_find_minima(
        [rho](double c) { return -phase_transition_objective(c, rho); }, lo, hi, 52);
    return std::clamp(std::max(-neg, best), 0.0, 1.0);
}

double noise_init(const CMatrix& Y, double snr0) {
    if (Y.cols() == 0 || Y.rows() == 0) throw ContractViolation("empty observation");
    return Y.squaredNorm() / (static_cast<double>(Y.cols()) * (snr0 + 1.0) * Y.rows());
}

HyperParams init_hyperparams(const CMatrix& Y, int M, int K, int T, double snr0) {
    if (Y.rows() != M || Y.cols() != T) throw ContractViolation("init_hyperparams: Y is not M x T");
    HyperParams h;
    h.lambda = RMatrix::Constant(K, T, sparsity_init(static_cast<double>(M) / K));
    h.sigma2 = noise_init(Y, snr0);
    return h;
}

RMatrix posterior_sparsity_ssl(const RMatrix& lambda, const Likelihoods& q) {
    if (lambda.rows() != q.K || lambda.cols() != q.T)
        throw ContractViolation("posterior_sparsity_ssl: lambda dimensions do not match the likelihoods");
    RMatrix pi(q.K, q.T);
    for (int t = 0; t < q.T; ++t)
        for (int k = 0; k < q.K; ++k) {
            const double l = lambda(k, t);
            if (l <= 0.0)
                pi(k, t) = 0.0;
            else if (l >= 1.0)
                pi(k, t) = 1.0;
            else
                pi(k, t) = sigmoid(logit(l) + q.log_mean_q(k, t));
        }
    return pi;
}

RMatrix em_update_sparsity_ssl(const RMatrix& pi) {
    const RVector mean = pi.rowwise().mean();
    return mean.replicate(1, pi.cols());
}

double em_update_noise(const CMatrix& Y, const SpreadingMatrix& S, const CMatrix& mu, const RVector& gamma_bar) {
    const int T = static_cast<int>(Y.cols());
    if (mu.cols() != T || gamma_bar.size() != T || mu.rows() != S.cols() || Y.rows() != S.rows())
        throw ContractViolation("em_update_noise: dimension mismatch");
    const double M = static_cast<double>(S.rows());
    const double fit = (Y - sense(S, mu)).squaredNorm() / M;
    return (fit + gamma_bar.sum()) / T;
}

DetectionResult detect_ssl(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                           const DetectorConfig& config) {
    const int K = S.cols();
    const double lambda0 = config.lambda0 ? *config.lambda0 : sparsity_init(static_cast<double>(S.rows()) / K);
    auto structure = make_ssl_structure(K, static_cast<int>(Y.cols()), lambda0);
    return run_detector(Y, S, constellation, *structure, config, {});
}

}  // namespace jadd
