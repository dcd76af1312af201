#include "lfc/analysis.hpp"

#include "lfc/errors.hpp"

#include <Eigen/QR>

#include <cmath>

namespace lfc::analysis {

ClosedLoopRealization build_closed_loop(const model::CompositeSystem& sys,
                                        const synthesis::GainSet& gains,
                                        const model::OutputSelection& out) {
    if (gains.n_areas() != sys.N)
        throw DimensionError("closed loop: gain set does not match the system");
    const int n = sys.n();
    const Mat K   = gains.K();
    const Mat Psi = gains.Psi();
    const Mat L1  = gains.L1();
    const Mat BK  = sys.B * K;

    ClosedLoopRealization r;
    r.n   = n;
    r.Acl = Mat::Zero(2 * n, 2 * n);
    r.Acl.topLeftCorner(n, n)     = sys.A - BK + sys.dA;
    r.Acl.topRightCorner(n, n)    = BK;
    r.Acl.bottomLeftCorner(n, n)  = Psi * sys.dA;
    r.Acl.bottomRightCorner(n, n) = Psi * sys.A - L1 * sys.C;

    r.Bcl = Mat::Zero(2 * n, sys.q());
    r.Bcl.topRows(n)    = sys.F;
    r.Bcl.bottomRows(n) = Psi * sys.F;

    r.Ccl = Mat::Zero(n, 2 * n);
    r.Ccl.leftCols(n)  = out.Cx;
    r.Ccl.rightCols(n) = out.Ce;
    return r;
}

Mat complement_basis(const Vec& unit_dir) {
    const int n = static_cast<int>(unit_dir.size());
    const Mat D = unit_dir;
    Eigen::HouseholderQR<Mat> qr(D);
    const Mat Q = qr.householderQ();
    return Q.rightCols(n - 1);
}

std::vector<std::complex<double>> reduced_spectrum(const Mat& M, const Vec& dir) {
    if (M.rows() != M.cols() || M.rows() != dir.size())
        throw DimensionError("reduced_spectrum: dimension mismatch");
    const Mat V = complement_basis(Vec(dir / dir.norm()));
    return linalg::eig(Mat(V.transpose() * M * V)).values;
}

StripCheck check_strips(const model::CompositeSystem& sys, const synthesis::GainSet& gains,
                        const synthesis::StripBounds& strips, double boundary_slack) {
    strips.validate(sys.N);
    if (gains.n_areas() != sys.N)
        throw DimensionError("strip check: gain set does not match the system");

    const Mat control  = sys.A - sys.B * gains.K() + sys.dA;
    const Mat observer = gains.Psi() * sys.A - gains.L1() * sys.C;

    StripCheck check;
    check.pass = true;

    // The control matrix couples all areas; its strip is the union-wise
    // envelope [min a1, max b1]. With the structural invariant present the
    // exact-zero conserved mode is excluded from the verdict and reported.
    std::vector<std::complex<double>> control_eigs;
    if (const auto ew = synthesis::tie_invariant(sys)) {
        control_eigs = reduced_spectrum(control, *ew);
        const auto full = linalg::eig(control).values;
        auto nearest    = full.front();
        for (const auto& lam : full)
            if (std::abs(lam) < std::abs(nearest))
                nearest = lam;
        check.invariant_mode = nearest;
    } else {
        control_eigs = linalg::eig(control).values;
    }

    const double a_env = strips.a1.minCoeff();
    const double b_env = strips.b1.maxCoeff();
    for (const auto& lam : control_eigs) {
        StripCheck::Entry e;
        e.lambda = lam;
        e.a      = a_env;
        e.b      = b_env;
        e.inside = lam.real() > a_env - boundary_slack && lam.real() < b_env + boundary_slack;
        check.pass = check.pass && e.inside;
        check.control.push_back(e);
    }
    // Observer blocks are block-diagonal: per-area strips apply exactly.
    for (int i = 0; i < sys.N; ++i) {
        const Mat block = observer.block(model::kStates * i, model::kStates * i, model::kStates,
                                         model::kStates);
        for (const auto& lam : linalg::eig(block).values) {
            StripCheck::Entry e;
            e.lambda = lam;
            e.a      = strips.a2(i);
            e.b      = strips.b2(i);
            e.inside = lam.real() > e.a - boundary_slack && lam.real() < e.b + boundary_slack;
            check.pass = check.pass && e.inside;
            check.observer.push_back(e);
        }
    }
    return check;
}

namespace {

struct Realization {
    Mat A, B, C;
};

double gain_at(const Realization& r, double omega) {
    const int n2 = static_cast<int>(r.A.rows());
    CMat sIA = -r.A.cast<std::complex<double>>();
    for (int i = 0; i < n2; ++i)
        sIA(i, i) += std::complex<double>(0.0, omega);
    const CMat X = sIA.partialPivLu().solve(r.B.cast<std::complex<double>>());
    return linalg::sigma_max(CMat(r.C.cast<std::complex<double>>() * X));
}

} // namespace

HinfEstimate hinf_norm(const ClosedLoopRealization& r, const HinfGrid& grid,
                       const Vec* invariant_x_dir) {
    if (grid.points < 2 || !(grid.omega_lo > 0.0) || !(grid.omega_hi > grid.omega_lo))
        throw ParameterError("hinf_norm: malformed frequency grid");

    Realization sys{r.Acl, r.Bcl, r.Ccl};
    if (invariant_x_dir) {
        if (invariant_x_dir->size() != r.n)
            throw DimensionError("hinf_norm: invariant direction length mismatch");
        // Restrict [x; e] to {w^T x = 0}: basis diag(V, I).
        const Mat V = complement_basis(Vec(*invariant_x_dir / invariant_x_dir->norm()));
        Mat Vcl     = Mat::Zero(2 * r.n, 2 * r.n - 1);
        Vcl.topLeftCorner(r.n, r.n - 1)      = V;
        Vcl.bottomRightCorner(r.n, r.n)      = Mat::Identity(r.n, r.n);
        sys.A = Vcl.transpose() * r.Acl * Vcl;
        sys.B = Vcl.transpose() * r.Bcl;
        sys.C = r.Ccl * Vcl;
    }
    if (!linalg::eig(sys.A).is_hurwitz())
        throw Error("hinf_norm: closed loop is not Hurwitz; the norm is undefined");

    HinfEstimate est;
    est.grid = grid;
    if (sys.B.cwiseAbs().maxCoeff() == 0.0)
        return est; // no disturbance path

    const double llo = std::log(grid.omega_lo), lhi = std::log(grid.omega_hi);
    int argmax = 0;
    for (int k = 0; k < grid.points; ++k) {
        const double w = std::exp(llo + (lhi - llo) * k / (grid.points - 1));
        const double g = gain_at(sys, w);
        if (g > est.value) {
            est.value      = g;
            est.peak_omega = w;
            argmax         = k;
        }
    }

    // Golden-section refinement on log-frequency around the grid argmax.
    const double step = (lhi - llo) / (grid.points - 1);
    double lo = llo + step * std::max(0, argmax - 1);
    double hi = llo + step * std::min(grid.points - 1, argmax + 1);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = gain_at(sys, std::exp(x1)), f2 = gain_at(sys, std::exp(x2));
    for (int it = 0; it < grid.refine_iters; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = gain_at(sys, std::exp(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = gain_at(sys, std::exp(x1));
        }
    }
    const double wref = std::exp(f1 > f2 ? x1 : x2);
    const double gref = std::max(f1, f2);
    if (gref > est.value) {
        est.value      = gref;
        est.peak_omega = wref;
    }
    return est;
}

double hinf_analysis_residual(const model::CompositeSystem& sys,
                              const model::OutputSelection& out,
                              const synthesis::GainSet& gains,
                              const synthesis::DesignSpec& spec) {
    if (!(spec.gamma > 0.0) || !(spec.eps1 > 0.0))
        throw ParameterError("analysis residual: gamma and eps1 must be > 0");
    if (gains.n_areas() != sys.N)
        throw DimensionError("analysis residual: gain set does not match the system");
    const int n = sys.n(), q = sys.q();
    // State block with the deflated coupling, cross-term quadratic with the
    // true one, mirroring the design LMI (both agree on wT x = 0).
    const Mat dA_eff = synthesis::effective_coupling(sys, spec);

    // P = Z^-1, block by block.
    Mat P = Mat::Zero(n, n);
    for (int i = 0; i < sys.N; ++i) {
        const Mat Zi = gains.areas[i].Z;
        P.block(model::kStates * i, model::kStates * i, model::kStates, model::kStates) =
            linalg::solve_linear(Zi, Mat::Identity(model::kStates, model::kStates));
    }
    const Mat Q   = gains.Q();
    const Mat K   = gains.K();
    const Mat L1  = gains.L1();
    const Mat Psi = gains.Psi();

    auto he = [](const Mat& M) { return Mat(M + M.transpose()); };

    const Mat pi11 = he(P * (sys.A - sys.B * K) + P * dA_eff)
                   + (1.0 / spec.eps1) * sys.dA.transpose() * sys.dA;
    const Mat pi22 = he(Q * (Psi * sys.A - L1 * sys.C))
                   + spec.eps1 * Q * Psi * Psi.transpose() * Q;

    const int dim = 3 * n + q;
    Mat T = Mat::Zero(dim, dim);
    T.block(0, 0, n, n) = pi11;
    T.block(0, n, n, n) = P * sys.B * K;
    T.block(n, 0, n, n) = (P * sys.B * K).transpose();
    T.block(0, 2 * n, n, q)     = P * sys.F;
    T.block(2 * n, 0, q, n)     = (P * sys.F).transpose();
    T.block(0, 2 * n + q, n, n) = out.Cx.transpose();
    T.block(2 * n + q, 0, n, n) = out.Cx;
    T.block(n, n, n, n)             = pi22;
    T.block(n, 2 * n + q, n, n)     = out.Ce.transpose();
    T.block(2 * n + q, n, n, n)     = out.Ce;
    T.block(2 * n, 2 * n, q, q)     = -spec.gamma * spec.gamma * Mat::Identity(q, q);
    T.block(2 * n + q, 2 * n + q, n, n) = -Mat::Identity(n, n);

    return linalg::max_eig_sym(T);
}

VerificationReport verify_design(const model::CompositeSystem& sys,
                                 const model::OutputSelection& out,
                                 const synthesis::GainSet& gains,
                                 const synthesis::DesignSpec& spec, const HinfGrid& grid) {
    VerificationReport rep;
    const auto cl = build_closed_loop(sys, gains, out);
    const auto ew = synthesis::tie_invariant(sys);

    rep.closed_loop_spectrum = linalg::eig(cl.Acl).values;
    if (ew) {
        rep.invariant_present = true;
        Vec dir               = Vec::Zero(2 * sys.n());
        dir.head(sys.n())     = *ew;
        rep.closed_loop_spectrum_reduced = reduced_spectrum(cl.Acl, dir);
        auto nearest = rep.closed_loop_spectrum.front();
        for (const auto& lam : rep.closed_loop_spectrum)
            if (std::abs(lam) < std::abs(nearest))
                nearest = lam;
        rep.invariant_mode_real = nearest.real();
    } else {
        rep.closed_loop_spectrum_reduced = rep.closed_loop_spectrum;
    }
    rep.hurwitz = linalg::Spectrum{rep.closed_loop_spectrum_reduced}.is_hurwitz();

    rep.control_spectrum = linalg::eig(Mat(sys.A - sys.B * gains.K() + sys.dA)).values;
    rep.control_spectrum_decoupled = linalg::eig(Mat(sys.A - sys.B * gains.K())).values;
    rep.observer_spectrum = linalg::eig(Mat(gains.Psi() * sys.A - gains.L1() * sys.C)).values;

    rep.gamma = spec.gamma;
    if (rep.hurwitz) {
        rep.hinf    = hinf_norm(cl, grid, ew ? &*ew : nullptr);
        rep.hinf_ok = rep.hinf.value < spec.gamma;
    }

    rep.analysis_residual = hinf_analysis_residual(sys, out, gains, spec);
    rep.analysis_ok       = rep.analysis_residual < 0.0;

    if (spec.strips) {
        rep.has_strips = true;
        rep.strips     = check_strips(sys, gains, *spec.strips);
    }
    return rep;
}

} // namespace lfc::analysis
