#pragma once

#include "jadd/detection.hpp"

namespace jadd {

struct HyperParams {
    RMatrix lambda;
    double sigma2 = 0.0;
};

/// lambda0 = rho * max_{c>0} [1 - (2/rho) psi(c)] / [1 + c^2 - 2 psi(c)],
/// psi(c) = (1 + c^2) Phi(-c) - c phi(c), rho = M/K.
double sparsity_init(double measurement_ratio);

/// (1/T) sum_t ||y_t||^2 / ((snr0 + 1) M).
double noise_init(const CMatrix& Y, double snr0 = 100.0);

HyperParams init_hyperparams(const CMatrix& Y, int M, int K, int T, double snr0 = 100.0);

/// pi = [1 + (1 - lambda) / (lambda (1/L) sum_l q_l)]^-1, evaluated in logit form.
RMatrix posterior_sparsity_ssl(const RMatrix& lambda, const Likelihoods& q);

/// Every entry of row k becomes the row mean of pi.
RMatrix em_update_sparsity_ssl(const RMatrix& pi);

/// (1/T) sum_t [ (1/M) ||y_t - S mu_t||^2 + gamma_bar_t ].
double em_update_noise(const CMatrix& Y, const SpreadingMatrix& S, const CMatrix& mu, const RVector& gamma_bar);

DetectionResult detect_ssl(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                           const DetectorConfig& config = {});

}  // namespace jadd
