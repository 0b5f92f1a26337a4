#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace jadd {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

}  // namespace jadd
