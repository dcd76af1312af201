#pragma once

#include "lfc/model.hpp"
#include "lfc/synthesis.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace lfc::analysis {

// Composite closed loop over [x; e]:
//   Acl = [A - B K + dA,   B K        ]    Bcl = [F    ]    Ccl = [Cx  Ce]
//         [Psi dA,         Psi A - L1 C]          [Psi F]
// The lower Bcl block is numerically zero by the decoupling identity.
struct ClosedLoopRealization {
    Mat Acl; // 2n x 2n
    Mat Bcl; // 2n x q
    Mat Ccl; // n x 2n
    int n = 0;
};

ClosedLoopRealization build_closed_loop(const model::CompositeSystem& sys,
                                        const synthesis::GainSet& gains,
                                        const model::OutputSelection& out);

// Orthonormal basis of the complement of a unit direction (n x (n-1)).
Mat complement_basis(const Vec& unit_dir);

// Eigenvalues of M restricted to the complement of dir. Exact when
// dir^T M = 0 (the complement is then M-invariant and
// spec(M) = {0} u spec(restricted)).
std::vector<std::complex<double>> reduced_spectrum(const Mat& M, const Vec& dir);

// Eigenvalue strip membership for the two designed blocks. The control block
// is A - B K + dA; the observer block is Psi A - L1 C. When the system
// carries the structural tie-line invariant, the control block's exact-zero
// mode is excluded from the containment verdict and reported separately.
struct StripCheck {
    struct Entry {
        std::complex<double> lambda;
        double a = 0.0, b = 0.0; // target strip for this eigenvalue
        bool inside = false;
    };
    std::vector<Entry> control;
    std::vector<Entry> observer;
    // Conserved tie-line-sum mode of the control block (lambda = 0 exactly).
    std::optional<std::complex<double>> invariant_mode;
    bool pass = false;
};

StripCheck check_strips(const model::CompositeSystem& sys, const synthesis::GainSet& gains,
                        const synthesis::StripBounds& strips, double boundary_slack = 1e-6);

struct HinfGrid {
    double omega_lo = 1e-3; // rad/s
    double omega_hi = 1e3;
    int points       = 2000;
    int refine_iters = 60;
};

// Grid-based lower bound on the disturbance-to-output peak gain, with one
// golden-section refinement around the grid argmax.
struct HinfEstimate {
    double value      = 0.0;
    double peak_omega = 0.0;
    HinfGrid grid;
};

// Requires a Hurwitz Acl and throws Error otherwise. When invariant_x_dir is
// given (unit vector in the plant-state part), the realization is first
// restricted to its complement; the restriction carries the exact dynamics of
// every physical trajectory (which keep the invariant at zero).
HinfEstimate hinf_norm(const ClosedLoopRealization& r, const HinfGrid& grid = {},
                       const Vec* invariant_x_dir = nullptr);

// Largest eigenvalue of the closed-loop analysis condition evaluated at the
// recovered gains with P = Z^-1 and the solved Q, using the same (possibly
// deflated) coupling the design saw. Negative certifies stability with the
// H-infinity bound independently of the design path.
double hinf_analysis_residual(const model::CompositeSystem& sys,
                              const model::OutputSelection& out,
                              const synthesis::GainSet& gains,
                              const synthesis::DesignSpec& spec);

struct VerificationReport {
    // Full closed-loop spectrum over [x; e] (includes the structural zero
    // mode when the invariant is present).
    std::vector<std::complex<double>> closed_loop_spectrum;
    // Spectrum modulo the structural invariant; equals the full spectrum
    // when no invariant exists.
    std::vector<std::complex<double>> closed_loop_spectrum_reduced;
    bool invariant_present = false;
    double invariant_mode_real = 0.0; // computed real part of the excluded mode
    bool hurwitz = false;             // reduced spectrum strictly left-half-plane

    // Control-block spectrum both with and without interactions, labeled.
    std::vector<std::complex<double>> control_spectrum;           // A - B K + dA
    std::vector<std::complex<double>> control_spectrum_decoupled; // A - B K
    std::vector<std::complex<double>> observer_spectrum;          // Psi A - L1 C

    bool has_strips = false;
    StripCheck strips;

    HinfEstimate hinf;
    double gamma = 0.0;
    bool hinf_ok = false;

    double analysis_residual = 0.0;
    bool analysis_ok = false;

    bool pass() const {
        return hurwitz && hinf_ok && analysis_ok && (!has_strips || strips.pass);
    }
};

VerificationReport verify_design(const model::CompositeSystem& sys,
                                 const model::OutputSelection& out,
                                 const synthesis::GainSet& gains,
                                 const synthesis::DesignSpec& spec, const HinfGrid& grid = {});

} // namespace lfc::analysis
