#include "lfc/analysis.hpp"

#include "lfc/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace lfc;
using namespace lfc::model;
using namespace lfc::synthesis;
using namespace lfc::analysis;

namespace {

CompositeSystem two_area() {
    std::vector<AreaParams> p{{"east", 10.0, 1.0, 0.1, 0.3, 0.05, 1.0},
                              {"west", 12.0, 1.5, 0.17, 0.4, 0.05, 1.0}};
    TieLines t = TieLines::zero(2);
    t.T(0, 1) = t.T(1, 0) = 0.2;
    return build_composite(p, t);
}

// Deterministic gain set built from prescribed M1/M2 at Z = Q = I.
GainSet crafted_gains(const CompositeSystem& sys, unsigned seed, double m1_scale = 1.0,
                      double m2_scale = 1.0) {
    const auto dec = compute_decouplers(sys);
    auto layout     = make_design_layout(sys.N);
    const auto vars = design_refs(layout, sys.N);
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Vec x = Vec::Zero(layout.scalar_count());
    for (int i = 0; i < sys.N; ++i) {
        layout.set_value(vars.Z[i], Mat::Identity(5, 5), x);
        layout.set_value(vars.Q[i], Mat::Identity(5, 5), x);
        Mat M1 = Mat::NullaryExpr(1, 5, [&](Eigen::Index, Eigen::Index) { return g(rng); });
        Mat M2 = Mat::NullaryExpr(5, 3, [&](Eigen::Index, Eigen::Index) { return g(rng); });
        layout.set_value(vars.M1[i], Mat(m1_scale * M1), x);
        layout.set_value(vars.M2[i], Mat(m2_scale * M2), x);
    }
    lmi::LmiSolution sol;
    sol.feasible = true;
    sol.x        = x;
    lmi::FeasibilityProblem problem;
    problem.layout = layout;
    return recover_gains(sol, problem, sys, dec);
}

} // namespace

TEST_CASE("closed-loop realization dimensions and decoupled input block") {
    const auto sys   = two_area();
    const auto gains = crafted_gains(sys, 1);
    const auto out   = default_output_selection(sys);
    const auto cl    = build_closed_loop(sys, gains, out);

    CHECK(cl.Acl.rows() == 20);
    CHECK(cl.Bcl.rows() == 20);
    CHECK(cl.Bcl.cols() == 2);
    CHECK(cl.Ccl.rows() == 10);
    // estimation error is decoupled from the load channel
    CHECK(cl.Bcl.bottomRows(10).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero state feedback makes the loop block-triangular") {
    const auto sys = two_area();
    auto gains     = crafted_gains(sys, 2);
    for (auto& g : gains.areas)
        g.K.setZero();
    const auto cl = build_closed_loop(sys, gains, default_output_selection(sys));
    CHECK(cl.Acl.topRightCorner(10, 10).cwiseAbs().maxCoeff() == 0.0);

    auto whole = linalg::eig(cl.Acl).values;
    auto plant = linalg::eig(Mat(sys.A + sys.dA)).values;
    auto err   = linalg::eig(Mat(gains.Psi() * sys.A - gains.L1() * sys.C)).values;
    std::vector<double> a, b;
    for (auto v : whole)
        a.push_back(v.real());
    for (auto v : plant)
        b.push_back(v.real());
    for (auto v : err)
        b.push_back(v.real());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
}

TEST_CASE("reduced spectrum removes exactly the invariant mode") {
    const auto sys   = two_area();
    const auto gains = crafted_gains(sys, 3);
    const Mat control = sys.A - sys.B * gains.K() + sys.dA;
    const auto ew     = tie_invariant(sys);
    REQUIRE(ew.has_value());

    auto full    = linalg::eig(control).values;
    auto reduced = reduced_spectrum(control, *ew);
    CHECK(full.size() == reduced.size() + 1);

    // the mode missing from the reduced set is the exact-zero invariant
    double nearest = 1e9;
    for (auto v : full)
        nearest = std::min(nearest, std::abs(v));
    CHECK(nearest < 1e-9 * std::max(1.0, control.norm()));
}

TEST_CASE("hinf of the trivial and scalar systems") {
    ClosedLoopRealization none;
    none.Acl = Mat::Constant(1, 1, -1.0);
    none.Bcl = Mat::Zero(1, 1);
    none.Ccl = Mat::Identity(1, 1);
    none.n   = 0;
    CHECK(hinf_norm(none).value == 0.0);

    ClosedLoopRealization scalar;
    scalar.Acl = Mat::Constant(1, 1, -1.0);
    scalar.Bcl = Mat::Identity(1, 1);
    scalar.Ccl = Mat::Identity(1, 1);
    scalar.n   = 0;
    const auto est = hinf_norm(scalar);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(est.peak_omega <= 2e-3); // flat from DC; the peak sits at the grid edge
}

TEST_CASE("hinf matches the analytic resonance peak") {
    // G(s) = wn^2 / (s^2 + 2 zeta wn s + wn^2)
    const double wn = 3.0, zeta = 0.2;
    ClosedLoopRealization r;
    r.Acl = Mat::Zero(2, 2);
    r.Acl << 0, 1, -wn * wn, -2 * zeta * wn;
    r.Bcl = Mat::Zero(2, 1);
    r.Bcl(1, 0) = wn * wn;
    r.Ccl = Mat::Zero(1, 2);
    r.Ccl(0, 0) = 1.0;
    r.n         = 0;
    const double analytic = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
    const auto est        = hinf_norm(r);
    CHECK(est.value == doctest::Approx(analytic).epsilon(1e-6));
    CHECK(est.peak_omega == doctest::Approx(wn * std::sqrt(1 - 2 * zeta * zeta)).epsilon(1e-3));
}

TEST_CASE("hinf refuses an unstable realization") {
    ClosedLoopRealization r;
    r.Acl = Mat::Constant(1, 1, 0.5);
    r.Bcl = Mat::Identity(1, 1);
    r.Ccl = Mat::Identity(1, 1);
    r.n   = 0;
    CHECK_THROWS_AS(hinf_norm(r), Error);
}

TEST_CASE("strip checks: monotonicity and corruption") {
    const auto sys = two_area();
    DesignSpec spec;
    spec.gamma = 6.0;
    spec.eps1  = 0.01;
    spec.eps2  = 0.01;
    const auto design = design_integrated(sys, default_output_selection(sys), spec);
    REQUIRE(design.feasible());
    const auto& gains  = design.gains;
    const Mat control  = sys.A - sys.B * gains.K() + sys.dA;
    const Mat observer = gains.Psi() * sys.A - gains.L1() * sys.C;

    // strips wide enough to contain the design
    double lo = -1.0, hi = -1e9;
    const auto ew = tie_invariant(sys);
    for (auto v : reduced_spectrum(control, *ew)) {
        lo = std::min(lo, v.real());
        hi = std::max(hi, v.real());
    }
    for (auto v : linalg::eig(observer).values) {
        lo = std::min(lo, v.real());
        hi = std::max(hi, v.real());
    }
    REQUIRE(hi < 0.0);

    const auto strips = StripBounds::uniform(2, lo - 1.0, hi + 0.5 * std::abs(hi), lo - 1.0,
                                             hi + 0.5 * std::abs(hi));
    auto check = check_strips(sys, gains, strips);
    CHECK(check.pass);

    const auto wider = StripBounds::uniform(2, 2.0 * (lo - 1.0), 0.5 * (hi + 0.1 * std::abs(hi)),
                                            2.0 * (lo - 1.0), 0.5 * (hi + 0.1 * std::abs(hi)));
    CHECK(check_strips(sys, gains, wider).pass);

    auto corrupted = gains;
    for (auto& g : corrupted.areas)
        g.K *= 100.0;
    CHECK_FALSE(check_strips(sys, corrupted, strips).pass);
}

TEST_CASE("analysis condition is violated for the open loop of an unstable plant") {
    const auto sys = two_area();
    auto gains     = crafted_gains(sys, 7);
    for (auto& g : gains.areas) {
        g.K.setZero(); // open loop retains the marginal integrator chain
        g.Z = Mat::Identity(5, 5);
        g.Q = Mat::Identity(5, 5);
    }
    DesignSpec spec;
    spec.gamma = 5.0;
    spec.eps1  = 0.01;
    spec.eps2  = 0.01;
    const double resid = hinf_analysis_residual(sys, default_output_selection(sys), gains, spec);
    CHECK(resid > 0.0);
}

TEST_CASE("analysis residual responds continuously to output scaling") {
    const auto sys   = two_area();
    const auto gains = crafted_gains(sys, 11);
    DesignSpec spec;
    spec.gamma = 5.0;
    spec.eps1  = 0.01;
    spec.eps2  = 0.01;
    auto out  = default_output_selection(sys);
    const double r0 = hinf_analysis_residual(sys, out, gains, spec);
    out.Cx *= 1.001;
    const double r1 = hinf_analysis_residual(sys, out, gains, spec);
    CHECK(std::abs(r1 - r0) < 0.05 * std::max(1.0, std::abs(r0)));
}
