#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace lfc {

using Mat  = Eigen::MatrixXd;
using Vec  = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

namespace linalg {

// Eigenvalues of a real square matrix, with algebraic multiplicity.
// Non-real values come in conjugate pairs.
struct Spectrum {
    std::vector<std::complex<double>> values;

    double max_real() const;
    // All real parts strictly below -margin.
    bool is_hurwitz(double margin = 0.0) const;
};

bool all_finite(const Mat& M);
bool all_finite(const CMat& M);

// Relative asymmetry ||S - S^T||_max / max(1, ||S||_max).
double sym_error(const Mat& S);
Mat symmetrize(const Mat& S);

// Eigenvalues of a general real square matrix.
// Throws DimensionError (non-square), InputError (non-finite),
// ConvergenceError (QR iteration budget exhausted).
Spectrum eig(const Mat& A);

// Eigenvalues of a symmetric matrix, ascending. Input is symmetrized first;
// asymmetry beyond 1e-9 relative is an InputError.
Vec eig_sym(const Mat& S);

// Largest eigenvalue of the symmetrized matrix.
double max_eig_sym(const Mat& S);

// X with A*X = B. Throws SingularityError when the reciprocal condition
// estimate falls below 1/cond_cap.
Mat solve_linear(const Mat& A, const Mat& B, double cond_cap = 1e12);

// True iff the symmetrized S admits a Cholesky factorization with every
// pivot above 1e-12*||S||_max. Asymmetry beyond 1e-12 relative is an
// InputError (it flags an assembly bug upstream).
bool certify_pd(const Mat& S);

// Largest singular value.
double sigma_max(const Mat& M);
double sigma_max(const CMat& M);

} // namespace linalg
} // namespace lfc
