#pragma once

#include "lfc/lmi.hpp"
#include "lfc/model.hpp"

#include <optional>
#include <vector>

namespace lfc::synthesis {

// Vertical-strip eigenvalue bounds per area, all negative with a < b.
// Index 1 bounds the control-system matrix, index 2 the observer matrix.
struct StripBounds {
    Vec a1, b1, a2, b2;

    static StripBounds uniform(int n_areas, double a1v, double b1v, double a2v, double b2v);
    void validate(int n_areas) const;
};

struct DesignSpec {
    double gamma = 0.0; // H-infinity bound
    double eps1  = 0.0;
    double eps2  = 0.0;
    std::optional<StripBounds> strips;
    double pd_floor = 1e-6;
    // Decay rate assigned, in the design model only, to the structurally
    // conserved tie-line sum (see tie_invariant below). 0 disables. Physical
    // trajectories keep that sum at zero, so the deflated and true closed
    // loops coincide on every trajectory the toolkit certifies or simulates.
    double invariant_decay = 5.0;

    void validate(int n_areas) const;
};

// With symmetric tie-line coefficients the composite rows of dA cancel the
// tie rows of A: w = sum_i e_tie,i satisfies w^T (A + dA) = 0, w^T B = 0,
// w^T F = 0. Sum_i dPtie_i is then conserved under any feedback and the
// closed loop always carries an eigenvalue at exactly 0. Returns the
// normalized invariant direction, or nullopt when the cancellation does not
// hold (single area, asymmetric couplings).
std::optional<Vec> tie_invariant(const model::CompositeSystem& sys);

// dA - invariant_decay * e_w e_w^T when the invariant exists, else dA.
Mat effective_coupling(const model::CompositeSystem& sys, const DesignSpec& spec);

// Output-injection pair making the estimation error immune to the load
// disturbance: Psi = I - H*C with Psi*F = 0.
struct Decoupler {
    Mat H;   // n_i x p_i
    Mat Psi; // n_i x n_i
};

// Closed-form H = F ((CF)^T (CF))^-1 (CF)^T via normal equations.
// F == 0 yields H = 0, Psi = I. Throws DecouplingError when
// rank(C F) = rank(F) = q fails numerically.
Decoupler compute_disturbance_decoupler(const Mat& C, const Mat& F);

std::vector<Decoupler> compute_decouplers(const model::CompositeSystem& sys);

// All recovered design matrices for one area.
struct AreaGains {
    Mat K;   // 1 x 5 state feedback
    Mat H;   // 5 x 3
    Mat Psi; // 5 x 5 (= I - H C)
    Mat Phi; // 5 x 5 observer system matrix
    Mat G;   // 5 x 1
    Mat L1;  // 5 x 3
    Mat L2;  // 5 x 3
    Mat L;   // 5 x 3 (= L1 + L2)
    Mat Z;   // 5 x 5 solved certificate block
    Mat Q;   // 5 x 5 solved certificate block
};

struct GainSet {
    std::vector<AreaGains> areas;

    int n_areas() const { return static_cast<int>(areas.size()); }

    // Composite block-diagonal forms.
    Mat K() const;
    Mat H() const;
    Mat Psi() const;
    Mat Phi() const;
    Mat G() const;
    Mat L1() const;
    Mat L() const;
    Mat Z() const;
    Mat Q() const;

    // Re-checks the defining identities (Psi*F = 0, Phi = Psi*A - L1*C,
    // G = Psi*B, L2 = Phi*H, L = L1 + L2) on a re-imported gain set.
    // Throws IncompatibilityError on violation.
    void validate(const model::CompositeSystem& sys, double tol = 1e-10) const;
};

// Canonical decision layout: Z_1..Z_N, Q_1..Q_N, M1_1..M1_N, M2_1..M2_N.
struct DesignVars {
    std::vector<lmi::BlockRef> Z, Q, M1, M2;
};
lmi::VariableLayout make_design_layout(int n_areas);
DesignVars design_refs(const lmi::VariableLayout& layout, int n_areas);

// Assembles the coupled H-infinity design LMI (block sizes
// [n n q n n n n n]) plus PD floors. dist_override replaces the per-area
// disturbance channel in the coupling row (used by the separated baseline).
lmi::FeasibilityProblem assemble_hinf_problem(const model::CompositeSystem& sys,
                                              const model::OutputSelection& out,
                                              const DesignSpec& spec,
                                              const std::vector<Decoupler>& dec,
                                              const std::vector<Mat>* dist_override = nullptr);

// Appends the two 2n-dimensional strip LMIs (control and observer blocks).
// Requires spec.strips.
void append_strip_lmis(lmi::FeasibilityProblem& problem, const model::CompositeSystem& sys,
                       const DesignSpec& spec, const std::vector<Decoupler>& dec);

// K_i = M1_i Z_i^-1, L1_i = Q_i^-1 M2_i, then Phi, G, L2, L from the
// decoupling identities.
GainSet recover_gains(const lmi::LmiSolution& sol, const lmi::FeasibilityProblem& problem,
                      const model::CompositeSystem& sys, const std::vector<Decoupler>& dec);

struct DesignResult {
    GainSet gains; // empty when infeasible
    lmi::LmiSolution certificate;
    bool feasible() const { return certificate.feasible; }
};

// One coupled problem over all areas; interactions and the
// observer/controller cross effects enter the same LMI.
DesignResult design_integrated(const model::CompositeSystem& sys,
                               const model::OutputSelection& out, const DesignSpec& spec,
                               const lmi::SolveOptions& opts = {});

struct SeparatedResult {
    GainSet gains;
    std::vector<lmi::LmiSolution> certificates; // one per area
    bool feasible() const;
};

// Conventional baseline: each area designed alone, interactions treated as
// an extra disturbance column entering the tie-line state.
SeparatedResult design_separated(const model::CompositeSystem& sys,
                                 const model::OutputSelection& out, const DesignSpec& spec,
                                 const lmi::SolveOptions& opts = {});

} // namespace lfc::synthesis
