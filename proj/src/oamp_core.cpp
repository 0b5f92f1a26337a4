#include "jadd/oamp_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jadd/errors.hpp"

namespace jadd {

double logit(double p) {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    return std::log(p) - std::log1p(-p);
}

LinearEstimate linear_estimate(const CVector& u, const CVector& y, const SpreadingMatrix& S, double v,
                               double sigma2) {
    if (u.size() != S.cols() || y.size() != S.rows())
        throw ContractViolation("linear_estimate: vector sizes do not match the spreading matrix");
    CMatrix R;
    RVector tau;
    linear_estimate_all(u, y, S, RVector::Constant(1, v), sigma2, R, tau);
    return {R.col(0), tau(0)};
}

void linear_estimate_all(const CMatrix& U, const CMatrix& Y, const SpreadingMatrix& S, const RVector& v,
                         double sigma2, CMatrix& R, RVector& tau) {
    const auto M = S.rows();
    const auto K = S.cols();
    if (U.rows() != K || Y.rows() != M || U.cols() != Y.cols() || v.size() != Y.cols())
        throw ContractViolation("linear_estimate: dimensions do not match the spreading matrix");

    const double scale = static_cast<double>(K) / M;
    const CMatrix residual = Y - sense(S, U);
    R = U;
    R.noalias() += scale * sense_adjoint(S, residual);
    tau = (static_cast<double>(K - M) / M) * v.array() + scale * sigma2;
}

Likelihoods symbol_likelihoods(const CMatrix& R, const RVector& tau, const Constellation& constellation) {
    const int K = static_cast<int>(R.rows());
    const int T = static_cast<int>(R.cols());
    const int L = constellation.size();
    if (tau.size() != T) throw ContractViolation("symbol_likelihoods: one tau per column required");

    Likelihoods q;
    q.K = K;
    q.T = T;
    q.L = L;
    q.log_q.resize(static_cast<std::size_t>(K) * T * L);
    q.weights.resize(q.log_q.size());
    q.offset.resize(K, T);
    q.log_mean_q.resize(K, T);

    std::vector<double> energy(L);
    for (int l = 0; l < L; ++l) energy[l] = std::norm(constellation.points[l]);
    const double log_L = std::log(static_cast<double>(L));

    for (int t = 0; t < T; ++t) {
        if (!(tau(t) > 0.0)) throw ContractViolation("symbol_likelihoods: tau must be positive");
        const double inv_tau = 1.0 / tau(t);
        for (int k = 0; k < K; ++k) {
            const cplx r = R(k, t);
            double* lq = &q.log_q[q.index(k, t, 0)];
            double* w = &q.weights[q.index(k, t, 0)];
            double peak = -std::numeric_limits<double>::infinity();
            for (int l = 0; l < L; ++l) {
                const cplx a = constellation.points[l];
                const double re = a.real() * r.real() + a.imag() * r.imag();  // Re{a^* r}
                lq[l] = -(energy[l] - 2.0 * re) * inv_tau;
                peak = std::max(peak, lq[l]);
            }
            double sum = 0.0;
            for (int l = 0; l < L; ++l) {
                lq[l] -= peak;
                w[l] = std::exp(lq[l]);
                sum += w[l];
            }
            const double inv_sum = 1.0 / sum;
            for (int l = 0; l < L; ++l) w[l] *= inv_sum;
            q.offset(k, t) = peak;
            q.log_mean_q(k, t) = peak + std::log(sum) - log_L;
        }
    }
    return q;
}

PosteriorMoments posterior_moments(const RMatrix& pi, const Likelihoods& q, const Constellation& constellation) {
    if (pi.rows() != q.K || pi.cols() != q.T)
        throw ContractViolation("posterior_moments: pi dimensions do not match the likelihoods");

    PosteriorMoments out;
    out.mu.resize(q.K, q.T);
    out.gamma.resize(q.K, q.T);
    out.gamma_bar.resize(q.T);
    const int L = q.L;

    for (int t = 0; t < q.T; ++t) {
        double col_sum = 0.0;
        for (int k = 0; k < q.K; ++k) {
            const double p = pi(k, t);
            const double* w = &q.weights[q.index(k, t, 0)];
            cplx first(0.0, 0.0);
            double second = 0.0;
            for (int l = 0; l < L; ++l) {
                first += w[l] * constellation.points[l];
                second += w[l] * std::norm(constellation.points[l]);
            }
            const cplx mu = p * first;
            const double gamma = std::max(p * second - std::norm(mu), 0.0);
            out.mu(k, t) = mu;
            out.gamma(k, t) = gamma;
            col_sum += gamma;
        }
        out.gamma_bar(t) = col_sum / q.K;
    }
    return out;
}

NonlinearEstimate nonlinear_estimate(const CVector& mu, const CVector& r, double gamma_bar, double tau,
                                     const Guards& guards) {
    if (mu.size() != r.size()) throw ContractViolation("nonlinear_estimate: mu and r sizes differ");
    if (!(tau > 0.0)) throw ContractViolation("nonlinear_estimate: tau must be positive");

    NonlinearEstimate out;
    const double g = std::min(std::max(gamma_bar, guards.gamma_floor), (1.0 - guards.gamma_margin) * tau);
    out.gamma_bar = g;
    out.C = tau / (tau - g);
    const double ratio = g / tau;
    out.u = out.C * (mu - ratio * r);
    out.v = std::max(1.0 / (1.0 / g - 1.0 / tau), guards.v_floor);
    return out;
}

double empirical_tau_variance(const CVector& y, const SpreadingMatrix& S, const CVector& u, double sigma2,
                              double floor) {
    if (u.size() != S.cols() || y.size() != S.rows())
        throw ContractViolation("empirical_tau_variance: vector sizes do not match the spreading matrix");
    const double M = static_cast<double>(S.rows());
    const double raw = ((y - sense(S, u)).squaredNorm() - M * sigma2) / M;
    return std::max(raw, floor);
}

}  // namespace jadd
