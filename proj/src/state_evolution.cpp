#include "jadd/state_evolution.hpp"

#include <cmath>

#include "jadd/detector_ssl.hpp"
#include "jadd/errors.hpp"
#include "jadd/rng.hpp"

namespace jadd {

namespace {

std::unique_ptr<StructureModel> make_structure(const SEConfig& c, double lambda0) {
    switch (c.kind) {
        case DetectorKind::SSL: return make_ssl_structure(c.K, c.T, lambda0);
        case DetectorKind::ASL: return make_asl_structure(c.K, c.T, lambda0);
        default: throw ConfigError("state evolution supports the SSL and ASL detectors only");
    }
}

}  // namespace

SETrace se_run(const SEConfig& c) {
    if (c.N < 1) throw ConfigError("state evolution needs at least one sample");
    if (c.max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (c.K < 1 || c.M < 1 || c.M > c.K || c.Ka < 0 || c.Ka > c.K || c.T < 1)
        throw ConfigError("invalid state evolution dimensions");
    if (!(c.sigma2 >= 0.0)) throw ConfigError("noise variance must be non-negative");

    const int K = c.K, T = c.T, I = c.max_iters;
    const double lambda0 = c.lambda0 ? *c.lambda0 : sparsity_init(static_cast<double>(c.M) / K);
    const double a = static_cast<double>(K - c.M) / c.M;
    const double b = static_cast<double>(K) / c.M * c.sigma2;
    const Constellation& cons = c.constellation;

    SETrace trace;
    trace.theta.assign(I, 0.0);
    trace.v.assign(c.N, std::vector<double>(I, 0.0));
    std::vector<BitTally> tallies(I);

    for (int n = 0; n < c.N; ++n) {
        auto rng = make_stream(c.seed, static_cast<std::uint64_t>(n), StreamTag::StateEvolution);
        const ActivityPattern act = sample_activity(K, c.Ka, rng);
        std::uniform_int_distribution<int> pick(0, cons.size() - 1);
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

        SESample s;
        s.X = CMatrix::Zero(K, T);
        s.symbols = Eigen::MatrixXi::Constant(K, T, -1);
        for (int k : act.support)
            for (int t = 0; t < T; ++t) {
                const int l = pick(rng);
                s.symbols(k, t) = l;
                s.X(k, t) = cons.points[l];
            }
        CMatrix Z(K, T);
        for (int t = 0; t < T; ++t)
            for (int k = 0; k < K; ++k) Z(k, t) = cplx(gauss(rng), gauss(rng));

        auto structure = make_structure(c, lambda0);
        double v = 1.0;
        for (int i = 0; i < I; ++i) {
            const double tau = std::max(a * v + b, c.guards.tau_floor);
            const CMatrix R = s.X + std::sqrt(tau) * Z;
            const RVector taus = RVector::Constant(T, tau);
            const ModuleBOutput out = module_b(R, taus, *structure, cons);

            double u_err = 0.0;
            for (int t = 0; t < T; ++t) {
                const NonlinearEstimate nle =
                    nonlinear_estimate(out.moments.mu.col(t), R.col(t), out.moments.gamma_bar(t), tau, c.guards);
                u_err += (nle.u - s.X.col(t)).squaredNorm();
            }
            structure->learn();

            const double mu_err = (out.moments.mu - s.X).squaredNorm();
            if (!std::isfinite(mu_err) || !std::isfinite(u_err))
                throw NumericalFailure("state evolution produced non-finite error", i + 1);
            trace.theta[i] += mu_err;
            v = std::max(u_err / (static_cast<double>(K) * T), c.guards.v_floor);
            trace.v[n][i] = v;

            const auto detected = decide_activity(structure->activity_score());
            tallies[i] += tally_uncoded(out.moments.mu, s.symbols, detected, cons);
            if (i == I - 1 && c.keep_samples) {
                s.mu = out.moments.mu;
                s.detected = detected;
            }
        }
        if (c.keep_samples) trace.samples.push_back(std::move(s));
    }

    const double norm = static_cast<double>(K) * T * c.N;
    trace.ber_per_iter.resize(I);
    for (int i = 0; i < I; ++i) {
        trace.theta[i] /= norm;
        trace.ber_per_iter[i] = tallies[i].ber();
    }
    trace.predicted_ber = trace.ber_per_iter.back();
    return trace;
}

double se_predict_ber(std::span<const SESample> samples, const Constellation& constellation) {
    BitTally tally;
    for (const SESample& s : samples) {
        if (s.mu.size() == 0) throw ContractViolation("se_predict_ber: sample has no retained estimate");
        tally += tally_uncoded(s.mu, s.symbols, s.detected, constellation);
    }
    return tally.ber();
}

}  // namespace jadd
