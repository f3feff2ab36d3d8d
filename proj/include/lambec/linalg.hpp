#pragma once

#include <complex>

#include <Eigen/Dense>

#include "errors.hpp"

namespace lambec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

inline double hermiticity_residual(const CMatrix& a) {
    const double scale = std::max(a.norm(), 1e-300);
    return (a - a.adjoint()).norm() / scale;
}

inline double unitarity_residual(const CMatrix& u) {
    return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
}

inline double offdiagonal_norm(const CMatrix& a) {
    CMatrix o = a;
    o.diagonal().setZero();
    return o.norm();
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

// exp(i * g) for Hermitian g, through its eigendecomposition.
inline CMatrix expi_hermitian(const CMatrix& g) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    if (es.info() != Eigen::Success)
        throw NumericalError("eigensolver failed in matrix exponential", g.norm());
    const RVector& w = es.eigenvalues();
    CVector phase(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) phase(i) = std::exp(I * w(i));
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace lambec
