// Acceptance suite: one line per criterion, nonzero exit when any
// hard criterion fails. XFAIL marks a documented, mathematically
// unattainable claim that the toolkit is required to detect and report
// (an unexpected pass there fails the suite).

#include "lfc/analysis.hpp"
#include "lfc/io.hpp"
#include "lfc/linalg.hpp"
#include "lfc/lmi.hpp"
#include "lfc/model.hpp"
#include "lfc/sim.hpp"
#include "lfc/synthesis.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

using namespace lfc;

namespace {

int g_failures = 0;

void line(const std::string& id, bool ok, const std::string& what,
          const std::string& detail) {
    std::printf("[%s] %s: %s%s%s\n", ok ? "PASS" : "FAIL", id.c_str(), what.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok)
        ++g_failures;
}

void xfail(const std::string& id, bool failed_as_documented, const std::string& what,
           const std::string& detail) {
    if (failed_as_documented) {
        std::printf("[XFAIL] %s: %s -- %s\n", id.c_str(), what.c_str(), detail.c_str());
    } else {
        std::printf("[FAIL] %s: %s -- expected the documented obstruction, got %s\n",
                    id.c_str(), what.c_str(), detail.c_str());
        ++g_failures;
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

} // namespace

int main() {
    const std::string fixtures = LFC_FIXTURE_DIR;

    const auto cfg1 = io::load_config(fixtures + "/three_area_hinf.json");
    const auto sys  = io::build_system(cfg1);
    const auto out1 = io::output_selection(cfg1, sys);

    const auto cfg2 = io::load_config(fixtures + "/three_area_strips.json");
    const auto out2 = io::output_selection(cfg2, sys);

    // ----- criterion 1: model construction exactness --------------------
    {
        const Mat& A1 = sys.areas[0].A;
        const double tie_formula = kTwoPi * (0.1986 + 0.2148);
        bool ok = std::abs(A1(3, 0) - tie_formula) <= 1e-15 * tie_formula;
        ok = ok && std::abs(A1(3, 0) - 2.5975) < 1e-3;
        ok = ok && std::abs(A1(1, 1) - (-1.0 / 0.3)) <= 1e-15 * (1.0 / 0.3);
        ok = ok && std::abs(A1(1, 1) - (-3.3333)) < 1e-3;
        ok = ok && A1(2, 0) == -1.0 / (0.05 * 0.1);
        ok = ok && std::abs(A1(2, 0) - (-200.0)) < 1e-3;
        ok = ok && sys.areas[0].B(2, 0) == 1.0 / 0.1;
        ok = ok && sys.areas[0].F(0, 0) == -1.0 / 10.0;
        line("criterion 1", ok, "model construction matches the parameter formulas",
             "A1(4,1)=" + fmt(A1(3, 0)) + " A1(2,2)=" + fmt(A1(1, 1))
                 + " A1(3,1)=" + fmt(A1(2, 0)) + " B1(3)=" + fmt(sys.areas[0].B(2, 0)));
    }

    // ----- criterion 2: disturbance decoupling --------------------------
    const auto dec = synthesis::compute_decouplers(sys);
    {
        Mat H_expected = Mat::Zero(5, 3);
        H_expected(0, 0) = 1.0;
        bool ok = (dec[0].H - H_expected).cwiseAbs().maxCoeff() < 1e-12;
        double worst = 0.0;
        for (int i = 0; i < sys.N; ++i)
            worst = std::max(worst, (dec[i].Psi * sys.areas[i].F).norm()
                                        / sys.areas[i].F.norm());
        ok = ok && worst <= 1e-12;
        line("criterion 2", ok, "disturbance decoupling H and Psi*F = 0",
             "max ||Psi F||/||F|| = " + fmt(worst));
    }

    // ----- criterion 3: first-scenario feasibility + structure ----------
    synthesis::DesignResult des1;
    {
        des1 = synthesis::design_integrated(sys, out1, cfg1.design);
        bool ok = des1.feasible();
        std::string detail = "margin " + fmt(des1.certificate.margin);

        if (ok) {
            // independent certificate replay
            auto problem   = synthesis::assemble_hinf_problem(sys, out1, cfg1.design, dec);
            const auto res = lmi::evaluate_residuals(problem, des1.certificate.x);
            for (double r : res)
                ok = ok && r < 0.0;
            for (const auto& l : problem.lmis)
                ok = ok && linalg::certify_pd(
                               Mat(-linalg::symmetrize(l.evaluate(des1.certificate.x))));

            // closed-loop spectrum: 29 strict + the conserved tie-line mode
            const auto cl = analysis::build_closed_loop(sys, des1.gains, out1);
            const auto ew = synthesis::tie_invariant(sys);
            Vec dir       = Vec::Zero(2 * sys.n());
            dir.head(sys.n()) = *ew;
            const auto reduced = analysis::reduced_spectrum(cl.Acl, dir);
            ok = ok && reduced.size() == 29;
            for (const auto& v : reduced)
                ok = ok && v.real() < 0.0;
            double nearest = 1e9;
            for (const auto& v : linalg::eig(cl.Acl).values)
                nearest = std::min(nearest, std::abs(v));
            ok = ok && nearest < 1e-8 * cl.Acl.norm();
            detail += ", invariant mode |lambda| = " + fmt(nearest);

            // solver-independent gain structure
            const double phi_ref[3][3] = {{-1.0 / 0.3, 1.0 / 0.3, -1.0 / 0.1},
                                          {-1.0 / 0.4, 1.0 / 0.4, -1.0 / 0.17},
                                          {-1.0 / 0.35, 1.0 / 0.35, -1.0 / 0.2}};
            const double printed_phi[3][3] = {{-3.3333, 3.3333, -10.0},
                                              {-2.5, 2.5, -5.8824},
                                              {-2.8571, 2.8571, -5.0}};
            const double printed_L[3][2] = {{-200.0, 2.5975},
                                            {-117.6471, 2.3977},
                                            {-100.0, 2.4995}};
            for (int i = 0; i < 3; ++i) {
                const auto& g  = des1.gains.areas[i];
                const Mat PsiA = g.Psi * sys.areas[i].A;
                ok = ok && (g.Phi.col(1) - PsiA.col(1)).norm() < 1e-9;
                ok = ok && (g.Phi.col(2) - PsiA.col(2)).norm() < 1e-9;
                ok = ok && std::abs(g.Phi(1, 1) - phi_ref[i][0]) < 1e-9;
                ok = ok && std::abs(g.Phi(1, 1) - printed_phi[i][0]) < 1e-3;
                ok = ok && std::abs(g.Phi(1, 2) - printed_phi[i][1]) < 1e-3;
                ok = ok && std::abs(g.Phi(2, 2) - printed_phi[i][2]) < 1e-3;
                ok = ok && std::abs(g.L(0, 0)) < 1e-9 && std::abs(g.L(1, 0)) < 1e-9;
                ok = ok && std::abs(g.L(2, 0) - printed_L[i][0]) < 1e-3;
                ok = ok && std::abs(g.L(3, 0) - printed_L[i][1]) < 1e-3;
                ok = ok && std::abs(g.L(4, 0) - 1.0) < 1e-3;
            }

            // the undeflated problem is exactly on the feasibility boundary,
            // which the solver must report rather than paper over
            auto raw_spec            = cfg1.design;
            raw_spec.invariant_decay = 0.0;
            auto raw_problem = synthesis::assemble_hinf_problem(sys, out1, raw_spec, dec);
            const auto raw   = lmi::solve_feasibility(raw_problem);
            ok = ok && !raw.feasible && raw.margin > -1e-6 && raw.margin < 1e-2;
            detail += ", undeflated margin " + fmt(raw.margin);
        }
        line("criterion 3", ok,
             "H-inf design feasible, independently re-verified, stable modulo the "
             "structural invariant, gain structure matches hand values",
             detail);
    }

    // strip-scenario design, used by criteria 4-7
    synthesis::DesignResult des2 = synthesis::design_integrated(sys, out2, cfg2.design);

    // ----- criterion 4: analysis-condition replay ------------------------
    {
        bool ok = des1.feasible() && des2.feasible();
        std::string detail;
        if (ok) {
            const double r1 = analysis::hinf_analysis_residual(sys, out1, des1.gains,
                                                               cfg1.design);
            const double r2 = analysis::hinf_analysis_residual(sys, out2, des2.gains,
                                                               cfg2.design);
            ok     = r1 < 0.0 && r2 < 0.0;
            detail = "residuals " + fmt(r1) + " and " + fmt(r2);
        }
        line("criterion 4", ok,
             "closed-loop analysis condition negative definite at the recovered gains",
             detail);
    }

    // ----- criterion 5: H-infinity bounds --------------------------------
    analysis::VerificationReport rep1, rep2;
    {
        bool ok = des1.feasible() && des2.feasible();
        std::string detail;
        if (ok) {
            rep1 = analysis::verify_design(sys, out1, des1.gains, cfg1.design);
            rep2 = analysis::verify_design(sys, out2, des2.gains, cfg2.design);
            ok = ok && rep1.hinf.value < 0.99 * 7.5;
            ok = ok && rep2.hinf.value < 0.99 * 1.0; // the strip scenario's target level
            ok = ok && rep2.hinf.value < cfg2.design.gamma;
            detail = "estimates " + fmt(rep1.hinf.value) + " < 7.5 and "
                     + fmt(rep2.hinf.value) + " < 1";
        }
        line("criterion 5", ok, "measured H-inf estimates beat both target levels", detail);
    }

    // ----- criterion 6: strip containment --------------------------------
    {
        // as printed: gamma = 1, eps1 = 1e-4, eps2 = 1e-3, strips
        // (-30,-1)/(-40,-2); structurally infeasible (see decisions notes)
        synthesis::DesignSpec printed;
        printed.gamma  = 1.0;
        printed.eps1   = 1e-4;
        printed.eps2   = 1e-3;
        printed.strips = synthesis::StripBounds::uniform(3, -30.0, -1.0, -40.0, -2.0);
        const auto attempt = synthesis::design_integrated(sys, out2, printed);
        xfail("criterion 6 (as stated)", !attempt.feasible(),
              "strip (-30,-1)/(-40,-2) with the printed scalars",
              "joint LMI reported infeasible at margin "
                  + fmt(attempt.certificate.margin)
                  + "; the conservative rate demand exceeds the frequency row's "
                    "certifiable decay");

        bool ok = des2.feasible();
        std::string detail = "margin " + fmt(des2.certificate.margin);
        if (ok) {
            const auto chk = analysis::check_strips(sys, des2.gains, *cfg2.design.strips);
            ok = ok && chk.pass;
            double worst_obs = -1e9, worst_ctrl = -1e9;
            for (const auto& e : chk.control)
                worst_ctrl = std::max(worst_ctrl, e.lambda.real());
            for (const auto& e : chk.observer)
                worst_obs = std::max(worst_obs, e.lambda.real());
            detail += ", control Re in (-30," + fmt(worst_ctrl) + "], observer Re in (-40,"
                      + fmt(worst_obs) + "]";
        }
        line("criterion 6 (achievable strips)", ok,
             "bundled strip scenario designs feasibly and contains its spectra", detail);
    }

    // ----- criterion 7: regulation under both schedules ------------------
    sim::Trajectory traj1, traj2;
    {
        bool ok = des1.feasible() && des2.feasible();
        std::string detail;
        if (ok) {
            traj1 = sim::simulate(sys, des1.gains, cfg1.schedule, cfg1.simc);
            traj2 = sim::simulate(sys, des2.gains, cfg2.schedule, cfg2.simc);
            const bool r1 = sim::regulation_ok(traj1, cfg1.schedule, 1e-3);
            const bool r2 = sim::regulation_ok(traj2, cfg2.schedule, 1e-3);
            ok     = r1 && r2;
            detail = std::string("step schedule: ") + (r1 ? "held" : "violated")
                     + ", strip schedule: " + (r2 ? "held" : "violated");
        }
        line("criterion 7", ok,
             "|df| and |dPtie| return below 1e-3 p.u. before each event and at the end",
             detail);
    }

    // ----- criterion 8: integrated vs separated comparison ---------------
    {
        const auto sep = synthesis::design_separated(sys, out1, cfg1.design);
        bool ok        = sep.feasible() && des1.feasible();
        std::string detail;
        if (ok) {
            const auto traj_sep = sim::simulate(sys, sep.gains, cfg1.schedule, cfg1.simc);
            const auto mi       = sim::metrics(traj1);
            const auto ms       = sim::metrics(traj_sep);
            const auto table = io::metrics_table({{"integrated", mi}, {"separated", ms}});
            std::printf("%s", table.c_str());
            ok = ok && std::isfinite(mi.total_ise_df) && std::isfinite(ms.total_ise_df);
            detail = "ISE(df): integrated " + fmt(mi.total_ise_df) + " vs separated "
                     + fmt(ms.total_ise_df) + " (regression ratio "
                     + fmt(ms.total_ise_df / mi.total_ise_df) + ")";
        }
        line("criterion 8", ok, "side-by-side strategy comparison emitted", detail);
    }

    // ----- criterion 9: numerical kernel property suites -----------------
    {
        std::mt19937 rng(2026);
        std::normal_distribution<double> g;
        auto rnd = [&](int r, int c) {
            return Mat(
                Mat::NullaryExpr(r, c, [&](Eigen::Index, Eigen::Index) { return g(rng); }));
        };
        bool ok = true;

        for (int it = 0; it < 1000 && ok; ++it) {
            const int n = 2 + static_cast<int>(rng() % 7);
            Mat A = rnd(n, n) + 4.0 * Mat::Identity(n, n);
            const Mat B = rnd(n, 2);
            const Mat X = linalg::solve_linear(A, B);
            ok = ok && (A * X - B).norm() <= 1e-10 * A.norm() * X.norm() + 1e-12;
        }
        for (int it = 0; it < 1000 && ok; ++it) {
            const int n = 2 + static_cast<int>(rng() % 7);
            const Mat A = rnd(n, n);
            std::complex<double> sum = 0.0;
            for (auto v : linalg::eig(A).values)
                sum += v;
            ok = ok && std::abs(sum - std::complex<double>(A.trace(), 0.0))
                           <= 1e-6 * std::max(1.0, A.norm());
        }
        for (int it = 0; it < 1000 && ok; ++it) {
            const int n = 2 + static_cast<int>(rng() % 6);
            Mat S = linalg::symmetrize(rnd(n, n));
            if (it % 2 == 0)
                S += (1.0 + n) * Mat::Identity(n, n);
            const bool pd     = linalg::certify_pd(S);
            const double lmin = linalg::eig_sym(S)(0);
            ok = ok && (pd ? lmin > 0.0 : lmin <= 1e-10 * std::max(1.0, S.norm()));
        }
        for (int it = 0; it < 1000 && ok; ++it) {
            const Mat M = rnd(4, 3);
            const Vec ev = linalg::eig_sym(Mat(M.transpose() * M));
            ok = ok && std::abs(linalg::sigma_max(M) - std::sqrt(ev(ev.size() - 1)))
                           <= 1e-8 * std::max(1.0, std::sqrt(ev(ev.size() - 1)));
        }

        // 4th-order integrator convergence on the smoke system
        const auto smoke_cfg = io::load_config(fixtures + "/two_area_smoke.json");
        const auto smoke_sys = io::build_system(smoke_cfg);
        const auto smoke_out = io::output_selection(smoke_cfg, smoke_sys);
        const auto smoke_des =
            synthesis::design_integrated(smoke_sys, smoke_out, smoke_cfg.design);
        ok = ok && smoke_des.feasible();
        if (ok) {
            sim::SimConfig coarse = smoke_cfg.simc;
            coarse.t_end          = 6.0;
            coarse.dt             = 2e-3;
            coarse.record_stride  = 10;
            sim::SimConfig fine = coarse;
            fine.dt             = 1e-3;
            fine.record_stride  = 20;
            const auto tc = sim::simulate(smoke_sys, smoke_des.gains, smoke_cfg.schedule,
                                          coarse);
            const auto tf = sim::simulate(smoke_sys, smoke_des.gains, smoke_cfg.schedule,
                                          fine);
            const double rel = (tc.x - tf.x).cwiseAbs().maxCoeff()
                               / std::max(1e-3, tf.x.cwiseAbs().maxCoeff());
            ok = ok && rel < 1e-6;
        }
        line("criterion 9", ok,
             "randomized kernel suites (1000 instances each) and integrator convergence",
             "");
    }

    std::printf("%s: %d failure(s)\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
