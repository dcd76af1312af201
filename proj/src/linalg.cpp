#include "lfc/linalg.hpp"

#include "lfc/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace lfc::linalg {

double Spectrum::max_real() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& v : values)
        m = std::max(m, v.real());
    return m;
}

bool Spectrum::is_hurwitz(double margin) const {
    return !values.empty() && max_real() < -margin;
}

bool all_finite(const Mat& M) {
    return M.allFinite();
}

bool all_finite(const CMat& M) {
    return M.real().allFinite() && M.imag().allFinite();
}

double sym_error(const Mat& S) {
    if (S.rows() != S.cols())
        return std::numeric_limits<double>::infinity();
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    return (S - S.transpose()).cwiseAbs().maxCoeff() / scale;
}

Mat symmetrize(const Mat& S) {
    return 0.5 * (S + S.transpose());
}

Spectrum eig(const Mat& A) {
    if (A.rows() != A.cols())
        throw DimensionError("eig: matrix must be square");
    if (!all_finite(A))
        throw InputError("eig: non-finite entries");

    Eigen::EigenSolver<Mat> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("eig: QR iteration did not converge");

    Spectrum s;
    s.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
    return s;
}

Vec eig_sym(const Mat& S) {
    if (S.rows() != S.cols())
        throw DimensionError("eig_sym: matrix must be square");
    if (!all_finite(S))
        throw InputError("eig_sym: non-finite entries");
    if (sym_error(S) > 1e-9)
        throw InputError("eig_sym: input is not symmetric");

    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(S), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("eig_sym: iteration did not converge");
    return es.eigenvalues();
}

double max_eig_sym(const Mat& S) {
    const Vec ev = eig_sym(S);
    return ev(ev.size() - 1);
}

Mat solve_linear(const Mat& A, const Mat& B, double cond_cap) {
    if (A.rows() != A.cols())
        throw DimensionError("solve_linear: A must be square");
    if (A.rows() != B.rows())
        throw DimensionError("solve_linear: A and B row counts differ");
    if (!all_finite(A) || !all_finite(B))
        throw InputError("solve_linear: non-finite entries");

    Eigen::PartialPivLU<Mat> lu(A);
    const double rcond = lu.rcond();
    if (!(rcond > 1.0 / cond_cap))
        throw SingularityError("solve_linear: matrix is singular or near-singular (rcond="
                               + std::to_string(rcond) + ")");
    return lu.solve(B);
}

bool certify_pd(const Mat& S) {
    if (S.rows() != S.cols())
        throw DimensionError("certify_pd: matrix must be square");
    if (!all_finite(S))
        throw InputError("certify_pd: non-finite entries");
    if (sym_error(S) > 1e-12)
        throw InputError("certify_pd: asymmetry exceeds 1e-12 relative");

    const Mat A = symmetrize(S);
    const Eigen::Index n = A.rows();
    if (n == 0)
        return true;

    const double floor = 1e-12 * A.cwiseAbs().maxCoeff();
    Mat L = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = A(j, j) - L.row(j).head(j).squaredNorm();
        if (!(d > floor))
            return false;
        L(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i)
            L(i, j) = (A(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    }
    return true;
}

double sigma_max(const Mat& M) {
    if (!all_finite(M))
        throw InputError("sigma_max: non-finite entries");
    if (M.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues()(0);
}

double sigma_max(const CMat& M) {
    if (!all_finite(M))
        throw InputError("sigma_max: non-finite entries");
    if (M.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<CMat> svd(M);
    return svd.singularValues()(0);
}

} // namespace lfc::linalg
