#include "lfc/synthesis.hpp"

#include "lfc/errors.hpp"

#include <cmath>

namespace lfc::synthesis {

using model::kStates;

StripBounds StripBounds::uniform(int n_areas, double a1v, double b1v, double a2v, double b2v) {
    StripBounds s;
    s.a1 = Vec::Constant(n_areas, a1v);
    s.b1 = Vec::Constant(n_areas, b1v);
    s.a2 = Vec::Constant(n_areas, a2v);
    s.b2 = Vec::Constant(n_areas, b2v);
    return s;
}

void StripBounds::validate(int n_areas) const {
    for (const Vec* v : {&a1, &b1, &a2, &b2})
        if (v->size() != n_areas)
            throw ParameterError("strip bounds: need one bound per area");
    for (int i = 0; i < n_areas; ++i) {
        if (!(a1(i) < b1(i) && b1(i) < 0.0))
            throw ParameterError("strip bounds: control strip must satisfy a < b < 0");
        if (!(a2(i) < b2(i) && b2(i) < 0.0))
            throw ParameterError("strip bounds: observer strip must satisfy a < b < 0");
    }
}

void DesignSpec::validate(int n_areas) const {
    if (!(gamma > 0.0))
        throw ParameterError("design: gamma must be > 0");
    if (!(eps1 > 0.0) || !(eps2 > 0.0))
        throw ParameterError("design: eps1 and eps2 must be > 0");
    if (!(pd_floor > 0.0))
        throw ParameterError("design: pd_floor must be > 0");
    if (!(invariant_decay >= 0.0))
        throw ParameterError("design: invariant_decay must be >= 0");
    if (strips)
        strips->validate(n_areas);
}

std::optional<Vec> tie_invariant(const model::CompositeSystem& sys) {
    if (sys.N < 2)
        return std::nullopt;
    Vec w = Vec::Zero(sys.n());
    for (int i = 0; i < sys.N; ++i)
        w(kStates * i + 3) = 1.0;
    const Mat total   = sys.A + sys.dA;
    const double qual = (total.transpose() * w).norm()
                        / std::max(1.0, total.cwiseAbs().maxCoeff());
    if (qual > 1e-9)
        return std::nullopt;
    return Vec(w / w.norm());
}

Mat effective_coupling(const model::CompositeSystem& sys, const DesignSpec& spec) {
    Mat W = sys.dA;
    if (spec.invariant_decay > 0.0) {
        if (const auto ew = tie_invariant(sys)) {
            W -= spec.invariant_decay * (*ew) * ew->transpose();
            if (spec.strips) {
                const double a_env = spec.strips->a1.minCoeff();
                const double b_env = spec.strips->b1.maxCoeff();
                if (!(a_env < -spec.invariant_decay && -spec.invariant_decay < b_env))
                    throw ParameterError(
                        "design: invariant_decay must place the deflated tie-sum mode "
                        "inside the control strip (a < -decay < b)");
            }
        }
    }
    return W;
}

Decoupler compute_disturbance_decoupler(const Mat& C, const Mat& F) {
    if (C.cols() != F.rows())
        throw DimensionError("decoupler: C and F dimensions disagree");
    const int n = static_cast<int>(F.rows());
    const int q = static_cast<int>(F.cols());

    Decoupler d;
    if (F.cwiseAbs().maxCoeff() == 0.0) {
        // No disturbance channel: nothing to decouple.
        d.H   = Mat::Zero(n, C.rows());
        d.Psi = Mat::Identity(n, n);
        return d;
    }

    const Mat CF = C * F;
    Eigen::JacobiSVD<Mat> svd_cf(CF);
    const auto& sv = svd_cf.singularValues();
    if (sv.size() < q || !(sv(q - 1) > 1e-10 * sv(0)))
        throw DecouplingError("decoupler: rank(C F) = rank(F) fails; the disturbance "
                              "channel cannot be decoupled from the estimation error");
    Eigen::JacobiSVD<Mat> svd_f(F);
    const auto& svf = svd_f.singularValues();
    if (!(svf(q - 1) > 1e-10 * svf(0)))
        throw DecouplingError("decoupler: F is rank deficient");

    // H = F ((CF)^T (CF))^-1 (CF)^T, via a normal-equation solve.
    const Mat gram = CF.transpose() * CF; // q x q
    d.H   = F * linalg::solve_linear(gram, Mat(CF.transpose()));
    d.Psi = Mat::Identity(n, n) - d.H * C;
    return d;
}

std::vector<Decoupler> compute_decouplers(const model::CompositeSystem& sys) {
    std::vector<Decoupler> dec;
    dec.reserve(sys.areas.size());
    for (const auto& a : sys.areas)
        dec.push_back(compute_disturbance_decoupler(a.C, a.F));
    return dec;
}

// ---------------------------------------------------------------------------
// GainSet
// ---------------------------------------------------------------------------

namespace {

Mat block_diag(const std::vector<AreaGains>& areas, Mat AreaGains::*field) {
    if (areas.empty())
        return Mat();
    const int br = static_cast<int>((areas[0].*field).rows());
    const int bc = static_cast<int>((areas[0].*field).cols());
    const int N  = static_cast<int>(areas.size());
    Mat M = Mat::Zero(br * N, bc * N);
    for (int i = 0; i < N; ++i)
        M.block(i * br, i * bc, br, bc) = areas[i].*field;
    return M;
}

} // namespace

Mat GainSet::K() const { return block_diag(areas, &AreaGains::K); }
Mat GainSet::H() const { return block_diag(areas, &AreaGains::H); }
Mat GainSet::Psi() const { return block_diag(areas, &AreaGains::Psi); }
Mat GainSet::Phi() const { return block_diag(areas, &AreaGains::Phi); }
Mat GainSet::G() const { return block_diag(areas, &AreaGains::G); }
Mat GainSet::L1() const { return block_diag(areas, &AreaGains::L1); }
Mat GainSet::L() const { return block_diag(areas, &AreaGains::L); }
Mat GainSet::Z() const { return block_diag(areas, &AreaGains::Z); }
Mat GainSet::Q() const { return block_diag(areas, &AreaGains::Q); }

void GainSet::validate(const model::CompositeSystem& sys, double tol) const {
    if (n_areas() != sys.N)
        throw IncompatibilityError("gain set: area count does not match the system");
    for (int i = 0; i < sys.N; ++i) {
        const auto& g = areas[i];
        const auto& a = sys.areas[i];
        for (const Mat* M : {&g.K, &g.H, &g.Psi, &g.Phi, &g.G, &g.L1, &g.L2, &g.L, &g.Z, &g.Q})
            if (!linalg::all_finite(*M))
                throw IncompatibilityError("gain set: non-finite entries in area "
                                           + std::to_string(i + 1));
        auto rel = [](const Mat& err, const Mat& ref) {
            return err.norm() / std::max(1.0, ref.norm());
        };
        if ((g.Psi * a.F).norm() > 1e-12 * std::max(1.0, a.F.norm()))
            throw IncompatibilityError("gain set: Psi*F != 0 in area " + std::to_string(i + 1));
        if (rel(g.Psi - (Mat::Identity(kStates, kStates) - g.H * a.C), g.Psi) > tol)
            throw IncompatibilityError("gain set: Psi != I - H*C in area "
                                       + std::to_string(i + 1));
        if (rel(g.Phi - (g.Psi * a.A - g.L1 * a.C), g.Phi) > tol)
            throw IncompatibilityError("gain set: Phi != Psi*A - L1*C in area "
                                       + std::to_string(i + 1));
        if (rel(g.G - g.Psi * a.B, g.G) > tol)
            throw IncompatibilityError("gain set: G != Psi*B in area " + std::to_string(i + 1));
        if (rel(g.L2 - g.Phi * g.H, g.L2) > tol)
            throw IncompatibilityError("gain set: L2 != Phi*H in area " + std::to_string(i + 1));
        if (rel(g.L - (g.L1 + g.L2), g.L) > tol)
            throw IncompatibilityError("gain set: L != L1 + L2 in area " + std::to_string(i + 1));
    }
}

// ---------------------------------------------------------------------------
// Design LMI assembly
// ---------------------------------------------------------------------------

lmi::VariableLayout make_design_layout(int n_areas) {
    lmi::VariableLayout layout;
    for (int i = 0; i < n_areas; ++i)
        layout.add_sym("Z" + std::to_string(i + 1), kStates);
    for (int i = 0; i < n_areas; ++i)
        layout.add_sym("Q" + std::to_string(i + 1), kStates);
    for (int i = 0; i < n_areas; ++i)
        layout.add_rect("M1_" + std::to_string(i + 1), model::kInputs, kStates);
    for (int i = 0; i < n_areas; ++i)
        layout.add_rect("M2_" + std::to_string(i + 1), kStates, model::kOutputs);
    return layout;
}

DesignVars design_refs(const lmi::VariableLayout& layout, int n_areas) {
    if (static_cast<int>(layout.sym_blocks().size()) != 2 * n_areas
        || static_cast<int>(layout.rect_blocks().size()) != 2 * n_areas)
        throw DimensionError("design layout: unexpected block structure");
    DesignVars v;
    for (int i = 0; i < n_areas; ++i) {
        v.Z.push_back({lmi::BlockRef::Kind::Sym, i});
        v.Q.push_back({lmi::BlockRef::Kind::Sym, n_areas + i});
        v.M1.push_back({lmi::BlockRef::Kind::Rect, i});
        v.M2.push_back({lmi::BlockRef::Kind::Rect, n_areas + i});
    }
    return v;
}

namespace {

// He(diag_i(A_i Z_i - B_i M1_i) + [W_ij Z_j]) scaled by sign, written at
// diagonal offset r0, where W is the (possibly deflated) coupling matrix.
// Shared by the design LMI and the control strip LMI.
void add_control_block(lmi::AffineLmi& lmi, int r0, double sign,
                       const model::CompositeSystem& sys, const Mat& W,
                       const lmi::VariableLayout& layout, const DesignVars& vars) {
    for (int i = 0; i < sys.N; ++i) {
        const auto& a = sys.areas[i];
        lmi.add_product(r0 + kStates * i, r0 + kStates * i, a.A, layout, vars.Z[i], sign, true);
        lmi.add_product(r0 + kStates * i, r0 + kStates * i, a.B, layout, vars.M1[i], -sign, true);
        for (int j = 0; j < sys.N; ++j) {
            const Mat Wij = W.block(kStates * i, kStates * j, kStates, kStates);
            if (Wij.cwiseAbs().maxCoeff() > 0.0)
                lmi.add_product(r0 + kStates * i, r0 + kStates * j, Wij, layout, vars.Z[j],
                                sign, true);
        }
    }
}

// He(diag_i(Q_i Psi_i A_i - M2_i C_i)) scaled by sign at diagonal offset r0.
void add_observer_block(lmi::AffineLmi& lmi, int r0, double sign,
                        const model::CompositeSystem& sys, const std::vector<Decoupler>& dec,
                        const lmi::VariableLayout& layout, const DesignVars& vars) {
    for (int i = 0; i < sys.N; ++i) {
        const auto& a = sys.areas[i];
        lmi.add_product_right(r0 + kStates * i, r0 + kStates * i, layout, vars.Q[i],
                              Mat(dec[i].Psi * a.A), sign, true);
        lmi.add_product_right(r0 + kStates * i, r0 + kStates * i, layout, vars.M2[i], a.C,
                              -sign, true);
    }
}

} // namespace

lmi::FeasibilityProblem assemble_hinf_problem(const model::CompositeSystem& sys,
                                              const model::OutputSelection& out,
                                              const DesignSpec& spec,
                                              const std::vector<Decoupler>& dec,
                                              const std::vector<Mat>* dist_override) {
    spec.validate(sys.N);
    out.validate_block_diagonal(sys);
    if (static_cast<int>(dec.size()) != sys.N)
        throw DimensionError("assemble: need one decoupler per area");

    std::vector<Mat> dist;
    for (int i = 0; i < sys.N; ++i) {
        Mat Fi = dist_override ? (*dist_override)[i] : sys.areas[i].F;
        if (Fi.rows() != kStates)
            throw DimensionError("assemble: disturbance channel must have 5 rows");
        dist.push_back(std::move(Fi));
    }
    std::vector<int> qoff(sys.N, 0);
    int q = 0;
    for (int i = 0; i < sys.N; ++i) {
        qoff[i] = q;
        q += static_cast<int>(dist[i].cols());
    }

    const int n  = sys.n();
    const int o2 = n, o3 = 2 * n, o4 = 2 * n + q, o5 = 3 * n + q, o6 = 4 * n + q,
              o7 = 5 * n + q, o8 = 6 * n + q;
    const int dim = 7 * n + q;

    lmi::FeasibilityProblem problem;
    problem.layout = make_design_layout(sys.N);
    const DesignVars vars = design_refs(problem.layout, sys.N);
    const auto& layout    = problem.layout;

    const Mat W = effective_coupling(sys, spec);

    lmi::AffineLmi omega("design", dim, layout.scalar_count());

    // Row 1: plant states in the Z-congruence frame.
    add_control_block(omega, 0, 1.0, sys, W, layout, vars);
    for (int i = 0; i < sys.N; ++i) {
        const auto& a = sys.areas[i];
        const Mat Cx_i = out.Cx.block(kStates * i, kStates * i, kStates, kStates);
        omega.add_const(kStates * i, o3 + qoff[i], dist[i], true);
        omega.add_product_right(kStates * i, o4 + kStates * i, layout, vars.Z[i],
                                Mat(Cx_i.transpose()), 1.0, true);
        // The coupling slack bounds the error-dynamics cross term, which the
        // true interaction drives; the deflation lives only in the state
        // block (both couplings agree on the physical manifold).
        for (const auto& [j, dAij] : a.coupling)
            omega.add_product_right(kStates * j, o5 + kStates * i, layout, vars.Z[j],
                                    Mat(dAij.transpose()), 1.0, true);
        omega.add_product(kStates * i, o7 + kStates * i, a.B, layout, vars.M1[i], 1.0, true);
    }

    // Row 2: estimation errors.
    add_observer_block(omega, o2, 1.0, sys, dec, layout, vars);
    for (int i = 0; i < sys.N; ++i) {
        const Mat Ce_i = out.Ce.block(kStates * i, kStates * i, kStates, kStates);
        omega.add_const(o2 + kStates * i, o4 + kStates * i, Mat(Ce_i.transpose()), true);
        omega.add_product_right(o2 + kStates * i, o6 + kStates * i, layout, vars.Q[i],
                                dec[i].Psi, 1.0, true);
        omega.add_const(o2 + kStates * i, o8 + kStates * i, Mat::Identity(kStates, kStates),
                        true);
    }

    // Diagonal tail: disturbance, output slack, coupling and feedback slacks.
    omega.add_const(o3, o3, -spec.gamma * spec.gamma * Mat::Identity(q, q), false);
    omega.add_const(o4, o4, -Mat::Identity(n, n), false);
    omega.add_const(o5, o5, -spec.eps1 * Mat::Identity(n, n), false);
    omega.add_const(o6, o6, -(1.0 / spec.eps1) * Mat::Identity(n, n), false);
    for (int i = 0; i < sys.N; ++i) {
        omega.add_scaled_var(o7 + kStates * i, o7 + kStates * i, layout, vars.Z[i],
                             -1.0 / spec.eps2, false);
        omega.add_scaled_var(o8 + kStates * i, o8 + kStates * i, layout, vars.Z[i], -spec.eps2,
                             false);
    }

    omega.finalize();
    problem.lmis.push_back(std::move(omega));
    problem.add_pd_floors(spec.pd_floor);
    return problem;
}

void append_strip_lmis(lmi::FeasibilityProblem& problem, const model::CompositeSystem& sys,
                       const DesignSpec& spec, const std::vector<Decoupler>& dec) {
    if (!spec.strips)
        throw ParameterError("strip assembly: spec carries no strip bounds");
    spec.strips->validate(sys.N);
    const auto& strips    = *spec.strips;
    const DesignVars vars = design_refs(problem.layout, sys.N);
    const auto& layout    = problem.layout;
    const int n           = sys.n();

    const Mat W = effective_coupling(sys, spec);

    lmi::AffineLmi control("strip:control", 2 * n, layout.scalar_count());
    add_control_block(control, 0, 1.0, sys, W, layout, vars);
    add_control_block(control, n, -1.0, sys, W, layout, vars);
    for (int i = 0; i < sys.N; ++i) {
        control.add_scaled_var(kStates * i, kStates * i, layout, vars.Z[i], -2.0 * strips.b1(i),
                               false);
        control.add_scaled_var(n + kStates * i, n + kStates * i, layout, vars.Z[i],
                               2.0 * strips.a1(i), false);
    }
    control.finalize();
    problem.lmis.push_back(std::move(control));

    lmi::AffineLmi observer("strip:observer", 2 * n, layout.scalar_count());
    add_observer_block(observer, 0, 1.0, sys, dec, layout, vars);
    add_observer_block(observer, n, -1.0, sys, dec, layout, vars);
    for (int i = 0; i < sys.N; ++i) {
        observer.add_scaled_var(kStates * i, kStates * i, layout, vars.Q[i],
                                -2.0 * strips.b2(i), false);
        observer.add_scaled_var(n + kStates * i, n + kStates * i, layout, vars.Q[i],
                                2.0 * strips.a2(i), false);
    }
    observer.finalize();
    problem.lmis.push_back(std::move(observer));
}

GainSet recover_gains(const lmi::LmiSolution& sol, const lmi::FeasibilityProblem& problem,
                      const model::CompositeSystem& sys, const std::vector<Decoupler>& dec) {
    if (!sol.feasible)
        throw Error("recover_gains: solution is not feasible");
    if (static_cast<int>(dec.size()) != sys.N)
        throw DimensionError("recover_gains: need one decoupler per area");
    const DesignVars vars = design_refs(problem.layout, sys.N);

    GainSet gains;
    for (int i = 0; i < sys.N; ++i) {
        const auto& a = sys.areas[i];
        AreaGains g;
        g.Z = problem.layout.value(vars.Z[i], sol.x);
        g.Q = problem.layout.value(vars.Q[i], sol.x);
        const Mat M1 = problem.layout.value(vars.M1[i], sol.x);
        const Mat M2 = problem.layout.value(vars.M2[i], sol.x);

        g.K   = linalg::solve_linear(g.Z, Mat(M1.transpose())).transpose();
        g.L1  = linalg::solve_linear(g.Q, M2);
        g.H   = dec[i].H;
        g.Psi = dec[i].Psi;
        g.Phi = g.Psi * a.A - g.L1 * a.C;
        g.G   = g.Psi * a.B;
        g.L2  = g.Phi * g.H;
        g.L   = g.L1 + g.L2;
        gains.areas.push_back(std::move(g));
    }
    return gains;
}

DesignResult design_integrated(const model::CompositeSystem& sys,
                               const model::OutputSelection& out, const DesignSpec& spec,
                               const lmi::SolveOptions& opts) {
    const auto dec = compute_decouplers(sys);
    auto problem   = assemble_hinf_problem(sys, out, spec, dec);
    if (spec.strips)
        append_strip_lmis(problem, sys, spec, dec);

    DesignResult result;
    result.certificate = lmi::solve_feasibility(problem, opts);
    if (result.certificate.feasible)
        result.gains = recover_gains(result.certificate, problem, sys, dec);
    return result;
}

bool SeparatedResult::feasible() const {
    if (certificates.empty())
        return false;
    for (const auto& c : certificates)
        if (!c.feasible)
            return false;
    return true;
}

SeparatedResult design_separated(const model::CompositeSystem& sys,
                                 const model::OutputSelection& out, const DesignSpec& spec,
                                 const lmi::SolveOptions& opts) {
    SeparatedResult result;
    for (int i = 0; i < sys.N; ++i) {
        // Single-area system with interactions dropped; they re-enter as an
        // extra disturbance column on the tie-line state.
        model::AreaMatrices area = sys.areas[i];
        area.coupling.clear();
        const auto single = model::build_composite({area}, model::TieLines::zero(1));

        model::OutputSelection out_i;
        out_i.Cx = out.Cx.block(kStates * i, kStates * i, kStates, kStates);
        out_i.Ce = out.Ce.block(kStates * i, kStates * i, kStates, kStates);

        DesignSpec spec_i = spec;
        if (spec.strips) {
            spec_i.strips = StripBounds::uniform(1, spec.strips->a1(i), spec.strips->b1(i),
                                                 spec.strips->a2(i), spec.strips->b2(i));
        }

        const std::vector<Decoupler> dec{compute_disturbance_decoupler(area.C, area.F)};

        Mat channel(kStates, 2);
        channel.col(0) = area.F.col(0);
        channel.col(1) = Vec::Unit(kStates, 3); // interactions act on the tie-line state
        const std::vector<Mat> dist{channel};

        auto problem = assemble_hinf_problem(single, out_i, spec_i, dec, &dist);
        if (spec_i.strips)
            append_strip_lmis(problem, single, spec_i, dec);

        auto cert = lmi::solve_feasibility(problem, opts);
        if (cert.feasible) {
            auto g = recover_gains(cert, problem, single, dec);
            result.gains.areas.push_back(std::move(g.areas[0]));
        }
        result.certificates.push_back(std::move(cert));
    }
    if (!result.feasible())
        result.gains.areas.clear();
    return result;
}

} // namespace lfc::synthesis
