#include <cmath>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "jadd/errors.hpp"
#include "jadd/model.hpp"

namespace jadd {

namespace {

// Plans are created once per length and shared; fftw_execute_dft on
// caller-owned arrays is thread safe, plan creation is not.
struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

const PlanPair& plans_for(int n) {
    static std::mutex mutex;
    static std::map<int, PlanPair> cache;
    const std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<cplx> a(n), b(n);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags);
    if (!p.forward || !p.backward) throw std::runtime_error("FFTW plan creation failed");
    return cache.emplace(n, p).first->second;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

CMatrix sense(const SpreadingMatrix& S, const CMatrix& X) {
    if (X.rows() != S.cols()) throw ContractViolation("sense: X rows do not match S columns");
    if (!S.partial_dft) return S.entries * X;

    const int K = S.cols();
    const PlanPair& p = plans_for(K);
    const double scale = 1.0 / std::sqrt(static_cast<double>(K));
    CMatrix out(S.rows(), X.cols());
    CVector in(K), spectrum(K);
    for (Eigen::Index t = 0; t < X.cols(); ++t) {
        in = X.col(t);
        fftw_execute_dft(p.forward, as_fftw(in.data()), as_fftw(spectrum.data()));
        for (int m = 0; m < S.rows(); ++m) out(m, t) = spectrum(S.selected_rows[m]) * scale;
    }
    return out;
}

CMatrix sense_adjoint(const SpreadingMatrix& S, const CMatrix& Z) {
    if (Z.rows() != S.rows()) throw ContractViolation("sense_adjoint: Z rows do not match S rows");
    if (!S.partial_dft) return S.entries.adjoint() * Z;

    const int K = S.cols();
    const PlanPair& p = plans_for(K);
    const double scale = 1.0 / std::sqrt(static_cast<double>(K));
    CMatrix out(K, Z.cols());
    CVector filled(K), signal(K);
    for (Eigen::Index t = 0; t < Z.cols(); ++t) {
        filled.setZero();
        for (int m = 0; m < S.rows(); ++m) filled(S.selected_rows[m]) = Z(m, t);
        fftw_execute_dft(p.backward, as_fftw(filled.data()), as_fftw(signal.data()));
        out.col(t) = signal * scale;
    }
    return out;
}

}  // namespace jadd
