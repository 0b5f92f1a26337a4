#include "jadd/baselines.hpp"

#include <Eigen/QR>

#include "jadd/detector_ssl.hpp"
#include "jadd/errors.hpp"

namespace jadd {

CMatrix oracle_ls(const CMatrix& Y, const SpreadingMatrix& S, std::span<const int> support) {
    const int K = S.cols();
    if (Y.rows() != S.rows()) throw ContractViolation("oracle_ls: observation rows do not match S");
    CMatrix X = CMatrix::Zero(K, Y.cols());
    if (support.empty()) return X;
    if (static_cast<int>(support.size()) > S.rows())
        throw DegenerateSupportError("support larger than the number of measurements");

    CMatrix A(S.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) {
        if (support[j] < 0 || support[j] >= K) throw ContractViolation("oracle_ls: support index out of range");
        A.col(j) = S.entries.col(support[j]);
    }
    const Eigen::ColPivHouseholderQR<CMatrix> qr(A);
    if (qr.rank() < A.cols()) throw DegenerateSupportError("restricted sensing matrix is rank deficient");
    const CMatrix sol = qr.solve(Y);
    for (std::size_t j = 0; j < support.size(); ++j) X.row(support[j]) = sol.row(j);
    return X;
}

DetectionResult gene_aided_oamp(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                                std::span<const std::uint8_t> indicators, double true_sigma2,
                                const DetectorConfig& config) {
    if (static_cast<int>(indicators.size()) != S.cols())
        throw ContractViolation("gene_aided_oamp: one indicator per device required");
    auto structure = make_pinned_structure(indicators, static_cast<int>(Y.cols()));
    LoopOptions options;
    options.learn_sigma2 = false;
    options.sigma2 = true_sigma2;
    return run_detector(Y, S, constellation, *structure, config, options);
}

DetectionResult amp_mmv(const CMatrix& Y, const SpreadingMatrix& S, const Constellation& constellation,
                        const DetectorConfig& config) {
    const int K = S.cols();
    const double lambda0 = config.lambda0 ? *config.lambda0 : sparsity_init(static_cast<double>(S.rows()) / K);
    auto structure = make_ssl_structure(K, static_cast<int>(Y.cols()), lambda0);
    LoopOptions options;
    options.linear = LinearStep::Amp;
    return run_detector(Y, S, constellation, *structure, config, options);
}

}  // namespace jadd
