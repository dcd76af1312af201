#pragma once

#include "lfc/linalg.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lfc::lmi {

// Handle to a decision block inside a VariableLayout.
struct BlockRef {
    enum class Kind { Sym, Rect };
    Kind kind = Kind::Sym;
    int id    = -1;
};

// Maps structured decision blocks (symmetric and rectangular matrices) to a
// flat scalar vector. Symmetric blocks store the upper triangle row-major;
// rectangular blocks are row-major.
class VariableLayout {
public:
    struct SymBlock {
        std::string name;
        int dim    = 0;
        int offset = 0;
    };
    struct RectBlock {
        std::string name;
        int rows   = 0;
        int cols   = 0;
        int offset = 0;
    };

    BlockRef add_sym(std::string name, int dim);
    BlockRef add_rect(std::string name, int rows, int cols);

    int scalar_count() const { return total_; }
    int block_dim_rows(BlockRef b) const;
    int block_dim_cols(BlockRef b) const;
    const std::string& block_name(BlockRef b) const;

    // Scalar index of entry (r, c). For symmetric blocks (r, c) and (c, r)
    // share one scalar.
    int index(BlockRef b, int r, int c) const;

    // Materialize a block from the flat vector.
    Mat value(BlockRef b, const Vec& x) const;
    // Write a block's entries into the flat vector.
    void set_value(BlockRef b, const Mat& M, Vec& x) const;

    // All symmetric blocks = identity, rectangular blocks = 0.
    Vec identity_start() const;

    const std::vector<SymBlock>& sym_blocks() const { return syms_; }
    const std::vector<RectBlock>& rect_blocks() const { return rects_; }

    // Human-readable name of one scalar variable, e.g. "Z1(0,2)".
    std::string scalar_name(int scalar_index) const;

private:
    std::vector<SymBlock> syms_;
    std::vector<RectBlock> rects_;
    int total_ = 0;
};

// One affine symmetric matrix expression F(x) = constant + sum_k x_k * basis_k,
// required negative definite. Basis matrices are stored sparsely.
class AffineLmi {
public:
    struct Entry {
        int r = 0, c = 0;
        double v = 0.0;
    };

    AffineLmi(std::string name, int dim, int scalar_count);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }

    // --- assembly -----------------------------------------------------
    // Each method adds its term at matrix offset (r0, c0); with mirror, the
    // transposed term is also added at (c0, r0). Use mirror=true for
    // off-diagonal blocks and for He(...) contributions on the diagonal;
    // use mirror=false for diagonal content that is already symmetric.

    void add_const(int r0, int c0, const Mat& M, bool mirror);
    // alpha * P * V
    void add_product(int r0, int c0, const Mat& P, const VariableLayout& L, BlockRef V,
                     double alpha, bool mirror);
    // alpha * V * Q
    void add_product_right(int r0, int c0, const VariableLayout& L, BlockRef V, const Mat& Q,
                           double alpha, bool mirror);
    // alpha * V
    void add_scaled_var(int r0, int c0, const VariableLayout& L, BlockRef V, double alpha,
                        bool mirror);

    // Merges duplicate entries and verifies that the constant and every
    // basis matrix are symmetric. Must be called once after assembly.
    void finalize();
    bool finalized() const { return finalized_; }

    // --- evaluation ---------------------------------------------------
    Mat evaluate(const Vec& x) const;
    const Mat& constant() const { return constant_; }
    const std::vector<int>& active_vars() const { return active_; }
    const std::vector<Entry>& coeff(int var) const { return coeff_[var]; }
    double max_abs_constant() const;
    double max_abs_coeff(int var) const;
    // True when no basis matrix touches diagonal position (d, d).
    bool diag_is_constant(int d) const;

private:
    void push(int r, int c, int var, double v); // var < 0: constant

    std::string name_;
    int dim_ = 0;
    Mat constant_;
    std::vector<std::vector<Entry>> coeff_;
    std::vector<int> active_;
    bool finalized_ = false;
};

// Find x with F_k(x) < 0 for every LMI and every symmetric block >= delta*I.
struct FeasibilityProblem {
    VariableLayout layout;
    std::vector<AffineLmi> lmis;
    double pd_floor = 0.0; // delta; 0 until floors are materialized

    // Appends one LMI "floor:<block>" per symmetric block encoding
    // delta*I - S < 0. Idempotent.
    void add_pd_floors(double delta);
    bool has_pd_floors() const { return pd_floor > 0.0; }
};

struct SolveOptions {
    // Absolute certificate threshold: every lambda_max(F_k(x)) must fall
    // below -max(eps_feas, noise_k), where noise_k is the symmetric-eigenvalue
    // backward-error floor 10*sqrt(dim)*eps_mach*max(1, ||F_k(x)||_max).
    // 0 keeps the noise floor alone.
    double eps_feas = 0.0;
    // PD floor applied via add_pd_floors when the problem carries none.
    double delta = 1e-6;
    int max_newton = 4000; // total Newton iteration budget
    int max_inner  = 80;   // Newton iterations per centering stage
    double mu_init   = 0.0; // <= 0: match the initial point (zero t-gradient)
    double mu_growth = 8.0;
    double mu_max    = 1e10;
    double newton_tol = 0.25; // decrement threshold declaring a point centered
    // Internal box |x_i| <= box_radius on the scaled variables. Keeps every
    // centering problem bounded (several problem families have unbounded
    // feasible directions along which the barrier decreases without limit).
    // Not part of the reported certificate.
    double box_radius = 1e5;
    bool verbose = false;
};

struct LmiSolution {
    bool feasible = false;
    Vec x;
    std::vector<std::string> lmi_names;
    std::vector<double> residuals; // lambda_max of each LMI at x
    double margin = 0.0;           // most positive residual
    std::string blocking;          // LMI attaining the margin
    int newton_iterations = 0;
    int outer_iterations  = 0;
    double final_step_norm = 0.0;
};

// Interior-point feasibility solver: minimizes the common shift t with
// F_k(x) < t*I through a log-det barrier and accepts the first centered
// point whose independently evaluated residuals clear the margin.
// Materializes PD floors into `p` when absent. Deterministic.
// Throws Error on numerical breakdown; an exhausted budget returns an
// infeasible-with-margin solution, never a silent success.
LmiSolution solve_feasibility(FeasibilityProblem& p, const SolveOptions& opts = {});

// lambda_max of every LMI at x, via dense evaluation and the symmetric
// eigensolver. Independent of solver internals.
std::vector<double> evaluate_residuals(const FeasibilityProblem& p, const Vec& x);

// Sparse text dump, one line per upper-triangle nonzero:
//   <lmi-index> <variable-index> <row> <col> <value>
// with variable-index 0 denoting the constant block; all indices 1-based.
void dump_problem(const FeasibilityProblem& p, std::ostream& os);

} // namespace lfc::lmi
