#pragma once

#include <span>
#include <vector>

#include "jadd/model.hpp"
#include "jadd/types.hpp"

namespace jadd {

/// Singularity guards shared by every OAMP-type loop.
struct Guards {
    double gamma_floor = 1e-12;
    /// gamma_bar is clamped to at most (1 - margin) * tau.
    double gamma_margin = 1e-6;
    double v_floor = 1e-12;
    double tau_floor = 1e-12;
};

/// Per-symbol likelihood ratios q_{k,t,l} = exp(-(|a_l|^2 - 2 Re{a_l^* r_{k,t}}) / tau_t).
///
/// Stored in the log domain with the per-(k,t) maximum subtracted; `offset`
/// holds the subtracted maximum so absolute magnitudes can be restored.
struct Likelihoods {
    int K = 0;
    int T = 0;
    int L = 0;
    /// log q - offset, laid out as ((t * K) + k) * L + l.
    std::vector<double> log_q;
    RMatrix offset;
    /// q_l / sum_l' q_l', same layout as log_q.
    std::vector<double> weights;
    /// log((1/L) sum_l q_l), the offset-restored log mean likelihood.
    RMatrix log_mean_q;

    std::size_t index(int k, int t, int l) const {
        return (static_cast<std::size_t>(t) * K + k) * L + l;
    }
    double log_q_abs(int k, int t, int l) const { return log_q[index(k, t, l)] + offset(k, t); }
};

struct LinearEstimate {
    CVector r;
    double tau = 0.0;
};

/// Module A for one column: r = u + (K/M) S^H (y - S u), tau = ((K-M)/M) v + (K/M) sigma2.
LinearEstimate linear_estimate(const CVector& u, const CVector& y, const SpreadingMatrix& S, double v,
                               double sigma2);

/// Module A for all columns at once; `v` and the returned tau have one entry per column.
void linear_estimate_all(const CMatrix& U, const CMatrix& Y, const SpreadingMatrix& S, const RVector& v,
                         double sigma2, CMatrix& R, RVector& tau);

Likelihoods symbol_likelihoods(const CMatrix& R, const RVector& tau, const Constellation& constellation);

struct PosteriorMoments {
    CMatrix mu;
    RMatrix gamma;
    /// Column means of gamma (after clamping gamma at zero).
    RVector gamma_bar;
};

/// mu = pi sum a_l q_l / sum q_l,  gamma = pi sum |a_l|^2 q_l / sum q_l - |mu|^2.
PosteriorMoments posterior_moments(const RMatrix& pi, const Likelihoods& q, const Constellation& constellation);

struct NonlinearEstimate {
    CVector u;
    double v = 0.0;
    double C = 0.0;
    /// gamma_bar after the [floor, (1 - margin) tau] clamp.
    double gamma_bar = 0.0;
};

/// Module B de-correlation: C = tau / (tau - gbar), u = C (mu - (gbar/tau) r), v = (1/gbar - 1/tau)^-1.
NonlinearEstimate nonlinear_estimate(const CVector& mu, const CVector& r, double gamma_bar, double tau,
                                     const Guards& guards = {});

/// Residual-based estimate of the NLE error: max((||y - S u||^2 - M sigma2) / M, floor).
double empirical_tau_variance(const CVector& y, const SpreadingMatrix& S, const CVector& u, double sigma2,
                              double floor = 1e-12);

/// Stable logistic function.
inline double sigmoid(double x) {
    if (x >= 0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(p / (1 - p)) with the endpoints mapped to -inf / +inf.
double logit(double p);

}  // namespace jadd
