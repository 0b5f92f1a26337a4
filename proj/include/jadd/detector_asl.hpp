#pragma once

#include "jadd/detection.hpp"

namespace jadd {

/// eta = 1 - 1 / (1 + (1/L) sum_l q_l).
RMatrix activity_message(const Likelihoods& q);

/// Leave-one-out combination of the per-symbol activity messages:
/// xi_{k,t} = lambda_k prod eta / ((1 - lambda_k) prod (1 - eta) + lambda_k prod eta), products over t' != t.
RMatrix extrinsic_sparsity(const RVector& lambda, const RMatrix& eta);

/// Same as extrinsic_sparsity but from log mean likelihoods, which avoids
/// rounding eta near 0 or 1. Returns logit(xi).
RMatrix extrinsic_sparsity_logit(const RVector& lambda, const RMatrix& log_mean_q);

/// SSL posterior form with xi in place of lambda.
RMatrix posterior_sparsity_asl(const RMatrix& xi, const Likelihoods& q);

/// lambda_k = (1/T) sum_t xi_{k,t}.
RVector em_update_sparsity_asl(const RMatrix& xi);

DetectionResult detect_asl(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                           const DetectorConfig& config = {});

}  // namespace jadd
