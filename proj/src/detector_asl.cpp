#include "jadd/detector_asl.hpp"

#include <cmath>
#include <limits>

#include "jadd/detector_ssl.hpp"
#include "jadd/errors.hpp"

namespace jadd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sum over t' != t of `terms`, where some terms may be -inf.
struct LeaveOneOut {
    double finite_sum = 0.0;
    int neg_inf = 0;

    explicit LeaveOneOut(const Eigen::Ref<const RVector>& terms) {
        for (Eigen::Index t = 0; t < terms.size(); ++t) {
            if (terms(t) == -kInf)
                ++neg_inf;
            else
                finite_sum += terms(t);
        }
    }
    double without(double own) const {
        if (own == -kInf) return neg_inf > 1 ? -kInf : finite_sum;
        return neg_inf > 0 ? -kInf : finite_sum - own;
    }
};

}  // namespace

RMatrix activity_message(const Likelihoods& q) {
    // eta / (1 - eta) equals the mean likelihood, so eta is its logistic image.
    return q.log_mean_q.unaryExpr(&sigmoid);
}

RMatrix extrinsic_sparsity(const RVector& lambda, const RMatrix& eta) {
    const Eigen::Index K = eta.rows();
    const Eigen::Index T = eta.cols();
    if (lambda.size() != K) throw ContractViolation("extrinsic_sparsity: one lambda per device required");

    RMatrix xi(K, T);
    RVector log_on(T), log_off(T);
    for (Eigen::Index k = 0; k < K; ++k) {
        for (Eigen::Index t = 0; t < T; ++t) {
            log_on(t) = std::log(eta(k, t));
            log_off(t) = std::log1p(-eta(k, t));
        }
        const LeaveOneOut on(log_on), off(log_off);
        const double la = lambda(k);
        for (Eigen::Index t = 0; t < T; ++t) {
            const double num = std::log(la) + on.without(log_on(t));
            const double den = std::log1p(-la) + off.without(log_off(t));
            if (num == -kInf && den == -kInf)
                xi(k, t) = la;
            else if (num == -kInf)
                xi(k, t) = 0.0;
            else if (den == -kInf)
                xi(k, t) = 1.0;
            else
                xi(k, t) = sigmoid(num - den);
        }
    }
    return xi;
}

RMatrix extrinsic_sparsity_logit(const RVector& lambda, const RMatrix& log_mean_q) {
    const Eigen::Index K = log_mean_q.rows();
    const Eigen::Index T = log_mean_q.cols();
    if (lambda.size() != K) throw ContractViolation("extrinsic_sparsity: one lambda per device required");

    RMatrix out(K, T);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double prior = logit(lambda(k));
        const double total = log_mean_q.row(k).sum();
        for (Eigen::Index t = 0; t < T; ++t) out(k, t) = prior + (total - log_mean_q(k, t));
    }
    return out;
}

RMatrix posterior_sparsity_asl(const RMatrix& xi, const Likelihoods& q) { return posterior_sparsity_ssl(xi, q); }

RVector em_update_sparsity_asl(const RMatrix& xi) { return xi.rowwise().mean(); }

DetectionResult detect_asl(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                           const DetectorConfig& config) {
    const int K = S.cols();
    const double lambda0 = config.lambda0 ? *config.lambda0 : sparsity_init(static_cast<double>(S.rows()) / K);
    auto structure = make_asl_structure(K, static_cast<int>(Y.cols()), lambda0);
    return run_detector(Y, S, constellation, *structure, config, {});
}

}  // namespace jadd
