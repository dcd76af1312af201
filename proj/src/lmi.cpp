#include "lfc/lmi.hpp"

#include "lfc/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace lfc::lmi {

// ---------------------------------------------------------------------------
// VariableLayout
// ---------------------------------------------------------------------------

BlockRef VariableLayout::add_sym(std::string name, int dim) {
    if (dim <= 0)
        throw DimensionError("layout: symmetric block dimension must be positive");
    syms_.push_back({std::move(name), dim, total_});
    total_ += dim * (dim + 1) / 2;
    return {BlockRef::Kind::Sym, static_cast<int>(syms_.size()) - 1};
}

BlockRef VariableLayout::add_rect(std::string name, int rows, int cols) {
    if (rows <= 0 || cols <= 0)
        throw DimensionError("layout: rectangular block dimensions must be positive");
    rects_.push_back({std::move(name), rows, cols, total_});
    total_ += rows * cols;
    return {BlockRef::Kind::Rect, static_cast<int>(rects_.size()) - 1};
}

int VariableLayout::block_dim_rows(BlockRef b) const {
    return b.kind == BlockRef::Kind::Sym ? syms_.at(b.id).dim : rects_.at(b.id).rows;
}

int VariableLayout::block_dim_cols(BlockRef b) const {
    return b.kind == BlockRef::Kind::Sym ? syms_.at(b.id).dim : rects_.at(b.id).cols;
}

const std::string& VariableLayout::block_name(BlockRef b) const {
    return b.kind == BlockRef::Kind::Sym ? syms_.at(b.id).name : rects_.at(b.id).name;
}

int VariableLayout::index(BlockRef b, int r, int c) const {
    if (b.kind == BlockRef::Kind::Sym) {
        const auto& blk = syms_.at(b.id);
        if (r < 0 || c < 0 || r >= blk.dim || c >= blk.dim)
            throw DimensionError("layout: symmetric index out of range");
        const int lo = std::min(r, c), hi = std::max(r, c);
        return blk.offset + lo * blk.dim - lo * (lo - 1) / 2 + (hi - lo);
    }
    const auto& blk = rects_.at(b.id);
    if (r < 0 || c < 0 || r >= blk.rows || c >= blk.cols)
        throw DimensionError("layout: rectangular index out of range");
    return blk.offset + r * blk.cols + c;
}

Mat VariableLayout::value(BlockRef b, const Vec& x) const {
    if (x.size() != total_)
        throw DimensionError("layout: decision vector length mismatch");
    const int rows = block_dim_rows(b), cols = block_dim_cols(b);
    Mat M(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            M(r, c) = x(index(b, r, c));
    return M;
}

void VariableLayout::set_value(BlockRef b, const Mat& M, Vec& x) const {
    if (x.size() != total_)
        throw DimensionError("layout: decision vector length mismatch");
    const int rows = block_dim_rows(b), cols = block_dim_cols(b);
    if (M.rows() != rows || M.cols() != cols)
        throw DimensionError("layout: block value shape mismatch");
    if (b.kind == BlockRef::Kind::Sym) {
        for (int r = 0; r < rows; ++r)
            for (int c = r; c < cols; ++c)
                x(index(b, r, c)) = 0.5 * (M(r, c) + M(c, r));
    } else {
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                x(index(b, r, c)) = M(r, c);
    }
}

Vec VariableLayout::identity_start() const {
    Vec x = Vec::Zero(total_);
    for (std::size_t i = 0; i < syms_.size(); ++i) {
        BlockRef b{BlockRef::Kind::Sym, static_cast<int>(i)};
        for (int d = 0; d < syms_[i].dim; ++d)
            x(index(b, d, d)) = 1.0;
    }
    return x;
}

std::string VariableLayout::scalar_name(int scalar_index) const {
    for (std::size_t i = 0; i < syms_.size(); ++i) {
        const auto& blk = syms_[i];
        const int count = blk.dim * (blk.dim + 1) / 2;
        if (scalar_index >= blk.offset && scalar_index < blk.offset + count) {
            BlockRef b{BlockRef::Kind::Sym, static_cast<int>(i)};
            for (int r = 0; r < blk.dim; ++r)
                for (int c = r; c < blk.dim; ++c)
                    if (index(b, r, c) == scalar_index)
                        return blk.name + "(" + std::to_string(r) + "," + std::to_string(c) + ")";
        }
    }
    for (const auto& blk : rects_) {
        const int count = blk.rows * blk.cols;
        if (scalar_index >= blk.offset && scalar_index < blk.offset + count) {
            const int off = scalar_index - blk.offset;
            return blk.name + "(" + std::to_string(off / blk.cols) + ","
                 + std::to_string(off % blk.cols) + ")";
        }
    }
    return "x" + std::to_string(scalar_index);
}

// ---------------------------------------------------------------------------
// AffineLmi
// ---------------------------------------------------------------------------

AffineLmi::AffineLmi(std::string name, int dim, int scalar_count)
    : name_(std::move(name)), dim_(dim), constant_(Mat::Zero(dim, dim)), coeff_(scalar_count) {
    if (dim <= 0)
        throw DimensionError("lmi: dimension must be positive");
}

void AffineLmi::push(int r, int c, int var, double v) {
    if (r < 0 || c < 0 || r >= dim_ || c >= dim_)
        throw DimensionError("lmi '" + name_ + "': entry outside matrix");
    if (v == 0.0)
        return;
    if (var < 0)
        constant_(r, c) += v;
    else
        coeff_[var].push_back({r, c, v});
}

void AffineLmi::add_const(int r0, int c0, const Mat& M, bool mirror) {
    for (int r = 0; r < M.rows(); ++r) {
        for (int c = 0; c < M.cols(); ++c) {
            push(r0 + r, c0 + c, -1, M(r, c));
            if (mirror)
                push(c0 + c, r0 + r, -1, M(r, c));
        }
    }
}

void AffineLmi::add_product(int r0, int c0, const Mat& P, const VariableLayout& L, BlockRef V,
                            double alpha, bool mirror) {
    const int vr = L.block_dim_rows(V), vc = L.block_dim_cols(V);
    if (P.cols() != vr)
        throw DimensionError("lmi '" + name_ + "': product shape mismatch");
    for (int a = 0; a < P.rows(); ++a) {
        for (int k = 0; k < vr; ++k) {
            const double pak = P(a, k);
            if (pak == 0.0)
                continue;
            for (int l = 0; l < vc; ++l) {
                const int var = L.index(V, k, l);
                push(r0 + a, c0 + l, var, alpha * pak);
                if (mirror)
                    push(c0 + l, r0 + a, var, alpha * pak);
            }
        }
    }
}

void AffineLmi::add_product_right(int r0, int c0, const VariableLayout& L, BlockRef V,
                                  const Mat& Q, double alpha, bool mirror) {
    const int vr = L.block_dim_rows(V), vc = L.block_dim_cols(V);
    if (Q.rows() != vc)
        throw DimensionError("lmi '" + name_ + "': product shape mismatch");
    for (int k = 0; k < vr; ++k) {
        for (int l = 0; l < vc; ++l) {
            const int var = L.index(V, k, l);
            for (int b = 0; b < Q.cols(); ++b) {
                const double qlb = Q(l, b);
                if (qlb == 0.0)
                    continue;
                push(r0 + k, c0 + b, var, alpha * qlb);
                if (mirror)
                    push(c0 + b, r0 + k, var, alpha * qlb);
            }
        }
    }
}

void AffineLmi::add_scaled_var(int r0, int c0, const VariableLayout& L, BlockRef V, double alpha,
                               bool mirror) {
    const int vr = L.block_dim_rows(V), vc = L.block_dim_cols(V);
    for (int k = 0; k < vr; ++k) {
        for (int l = 0; l < vc; ++l) {
            const int var = L.index(V, k, l);
            push(r0 + k, c0 + l, var, alpha);
            if (mirror)
                push(c0 + l, r0 + k, var, alpha);
        }
    }
}

void AffineLmi::finalize() {
    const double cscale = std::max(1.0, constant_.cwiseAbs().maxCoeff());
    if ((constant_ - constant_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * cscale)
        throw InputError("lmi '" + name_ + "': constant block is not symmetric");

    active_.clear();
    for (std::size_t v = 0; v < coeff_.size(); ++v) {
        auto& entries = coeff_[v];
        if (entries.empty())
            continue;
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return a.r != b.r ? a.r < b.r : a.c < b.c;
        });
        std::vector<Entry> merged;
        for (const auto& e : entries) {
            if (!merged.empty() && merged.back().r == e.r && merged.back().c == e.c)
                merged.back().v += e.v;
            else
                merged.push_back(e);
        }
        std::erase_if(merged, [](const Entry& e) { return e.v == 0.0; });
        entries = std::move(merged);
        if (entries.empty())
            continue;

        double scale = 1.0;
        for (const auto& e : entries)
            scale = std::max(scale, std::abs(e.v));
        for (const auto& e : entries) {
            // basis symmetry: the mirrored entry must carry the same value
            double mirrored = 0.0;
            for (const auto& o : entries)
                if (o.r == e.c && o.c == e.r)
                    mirrored = o.v;
            if (std::abs(mirrored - e.v) > 1e-9 * scale)
                throw InputError("lmi '" + name_ + "': basis matrix for variable "
                                 + std::to_string(v) + " is not symmetric");
        }
        active_.push_back(static_cast<int>(v));
    }
    finalized_ = true;
}

Mat AffineLmi::evaluate(const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != coeff_.size())
        throw DimensionError("lmi '" + name_ + "': decision vector length mismatch");
    Mat F = constant_;
    for (int v : active_) {
        const double xv = x(v);
        if (xv == 0.0)
            continue;
        for (const auto& e : coeff_[v])
            F(e.r, e.c) += xv * e.v;
    }
    return F;
}

double AffineLmi::max_abs_constant() const {
    return constant_.size() == 0 ? 0.0 : constant_.cwiseAbs().maxCoeff();
}

double AffineLmi::max_abs_coeff(int var) const {
    double m = 0.0;
    for (const auto& e : coeff_.at(var))
        m = std::max(m, std::abs(e.v));
    return m;
}

bool AffineLmi::diag_is_constant(int d) const {
    for (int v : active_)
        for (const auto& e : coeff_[v])
            if (e.r == d && e.c == d)
                return false;
    return true;
}

// ---------------------------------------------------------------------------
// FeasibilityProblem
// ---------------------------------------------------------------------------

void FeasibilityProblem::add_pd_floors(double delta) {
    if (has_pd_floors())
        return;
    if (!(delta > 0.0))
        throw ParameterError("pd floor must be positive");
    for (std::size_t i = 0; i < layout.sym_blocks().size(); ++i) {
        const auto& blk = layout.sym_blocks()[i];
        AffineLmi floor("floor:" + blk.name, blk.dim, layout.scalar_count());
        floor.add_const(0, 0, delta * Mat::Identity(blk.dim, blk.dim), false);
        floor.add_scaled_var(0, 0, layout, {BlockRef::Kind::Sym, static_cast<int>(i)}, -1.0,
                             false);
        floor.finalize();
        lmis.push_back(std::move(floor));
    }
    pd_floor = delta;
}

std::vector<double> evaluate_residuals(const FeasibilityProblem& p, const Vec& x) {
    if (x.size() != p.layout.scalar_count())
        throw DimensionError("evaluate_residuals: decision vector length mismatch");
    std::vector<double> res;
    res.reserve(p.lmis.size());
    for (const auto& lmi : p.lmis)
        res.push_back(linalg::max_eig_sym(linalg::symmetrize(lmi.evaluate(x))));
    return res;
}

void dump_problem(const FeasibilityProblem& p, std::ostream& os) {
    os << "# lfckit-lmi v1\n";
    os << "# lmis " << p.lmis.size() << " scalars " << p.layout.scalar_count() << "\n";
    for (int v = 0; v < p.layout.scalar_count(); ++v)
        os << "# var " << (v + 1) << " " << p.layout.scalar_name(v) << "\n";
    for (std::size_t k = 0; k < p.lmis.size(); ++k)
        os << "# lmi " << (k + 1) << " " << p.lmis[k].name() << " dim " << p.lmis[k].dim()
           << "\n";
    os.precision(17);
    for (std::size_t k = 0; k < p.lmis.size(); ++k) {
        const auto& lmi = p.lmis[k];
        const Mat& C = lmi.constant();
        for (int r = 0; r < lmi.dim(); ++r)
            for (int c = r; c < lmi.dim(); ++c)
                if (C(r, c) != 0.0)
                    os << (k + 1) << " 0 " << (r + 1) << " " << (c + 1) << " " << C(r, c)
                       << "\n";
        for (int v : lmi.active_vars())
            for (const auto& e : lmi.coeff(v))
                if (e.r <= e.c)
                    os << (k + 1) << " " << (v + 1) << " " << (e.r + 1) << " " << (e.c + 1)
                       << " " << e.v << "\n";
    }
}

// ---------------------------------------------------------------------------
// Barrier feasibility solver
// ---------------------------------------------------------------------------

namespace {

struct ScaledEntry {
    int r, c;
    double v;
};

struct ScaledLmi {
    int dim = 0;
    Mat C;
    std::vector<int> vars;                        // global scalar ids
    std::vector<std::vector<ScaledEntry>> coef;   // aligned with vars
};

Mat eval_scaled(const ScaledLmi& s, const Vec& xs) {
    Mat F = s.C;
    for (std::size_t a = 0; a < s.vars.size(); ++a) {
        const double xv = xs(s.vars[a]);
        if (xv == 0.0)
            continue;
        for (const auto& e : s.coef[a])
            F(e.r, e.c) += xv * e.v;
    }
    return F;
}

// log det of the positive definite part; returns false when t*I - F is not PD.
bool barrier_logdet(const ScaledLmi& s, const Vec& xs, double t, double& logdet) {
    Mat S = -eval_scaled(s, xs);
    S.diagonal().array() += t;
    Eigen::LLT<Mat> llt(S);
    if (llt.info() != Eigen::Success)
        return false;
    double ld = 0.0;
    for (int i = 0; i < S.rows(); ++i) {
        const double lii = llt.matrixLLT()(i, i);
        if (!(lii > 0.0) || !std::isfinite(lii))
            return false;
        ld += std::log(lii);
    }
    logdet = 2.0 * ld;
    return true;
}

} // namespace

LmiSolution solve_feasibility(FeasibilityProblem& p, const SolveOptions& opts) {
    const int nv = p.layout.scalar_count();
    if (nv == 0)
        throw ParameterError("solve_feasibility: problem has no decision variables");
    if (p.lmis.empty())
        throw ParameterError("solve_feasibility: problem has no constraints");
    if (!p.has_pd_floors() && !p.layout.sym_blocks().empty())
        p.add_pd_floors(opts.delta);
    for (auto& lmi : p.lmis)
        if (!lmi.finalized())
            lmi.finalize();

    const int nl = static_cast<int>(p.lmis.size());

    // Per-LMI scaling.
    std::vector<double> alpha(nl);
    for (int k = 0; k < nl; ++k)
        alpha[k] = std::max(1.0, p.lmis[k].max_abs_constant());

    // Certificate threshold for one LMI, given the evaluated matrix norm.
    auto eps_for = [&](int k, double norm_max) {
        const double noise = 10.0 * std::sqrt(static_cast<double>(p.lmis[k].dim()))
                             * std::numeric_limits<double>::epsilon()
                             * std::max(1.0, norm_max);
        return std::max(opts.eps_feas, noise);
    };

    // Per-variable scaling from the scaled basis norms.
    Vec s = Vec::Zero(nv);
    for (int k = 0; k < nl; ++k)
        for (int v : p.lmis[k].active_vars())
            s(v) = std::max(s(v), p.lmis[k].max_abs_coeff(v) / alpha[k]);
    for (int v = 0; v < nv; ++v)
        if (s(v) == 0.0)
            throw ParameterError("solve_feasibility: variable " + p.layout.scalar_name(v)
                                 + " does not appear in any LMI");

    // Certificate evaluation in the original frame.
    struct CertState {
        std::vector<double> residuals;
        double margin = 0.0;
        int blocking  = 0;
        bool ok       = false;
    };
    auto evaluate_cert = [&](const Vec& x_orig) {
        CertState c;
        c.ok     = true;
        c.margin = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < nl; ++k) {
            const Mat F = linalg::symmetrize(p.lmis[k].evaluate(x_orig));
            const double r = linalg::max_eig_sym(F);
            c.residuals.push_back(r);
            if (r > c.margin) {
                c.margin   = r;
                c.blocking = k;
            }
            c.ok = c.ok && r <= -eps_for(k, F.cwiseAbs().maxCoeff());
        }
        return c;
    };

    auto make_solution = [&](const Vec& x_orig, bool feasible, int newton, int outer,
                             double step_norm) {
        const CertState c = evaluate_cert(x_orig);
        LmiSolution sol;
        sol.feasible  = feasible;
        sol.x         = x_orig;
        sol.residuals = c.residuals;
        sol.margin    = c.margin;
        sol.blocking  = p.lmis[c.blocking].name();
        for (int k = 0; k < nl; ++k)
            sol.lmi_names.push_back(p.lmis[k].name());
        sol.newton_iterations = newton;
        sol.outer_iterations  = outer;
        sol.final_step_norm   = step_norm;
        return sol;
    };

    // A diagonal position no variable can move must already clear its
    // threshold, otherwise no x can ever certify.
    for (int k = 0; k < nl; ++k) {
        const double bar = eps_for(k, p.lmis[k].max_abs_constant());
        for (int d = 0; d < p.lmis[k].dim(); ++d) {
            if (p.lmis[k].diag_is_constant(d) && p.lmis[k].constant()(d, d) > -bar) {
                auto sol = make_solution(p.layout.identity_start(), false, 0, 0, 0.0);
                sol.margin   = std::max(sol.margin, p.lmis[k].constant()(d, d));
                sol.blocking = p.lmis[k].name();
                return sol;
            }
        }
    }

    // Scaled problem data, plus an internal box keeping the barrier bounded.
    const int nsl = nl + 2 * nv;
    std::vector<ScaledLmi> sl(nsl);
    for (int k = 0; k < nl; ++k) {
        const auto& lmi = p.lmis[k];
        sl[k].dim = lmi.dim();
        sl[k].C   = lmi.constant() / alpha[k];
        for (int v : lmi.active_vars()) {
            std::vector<ScaledEntry> entries;
            for (const auto& e : lmi.coeff(v))
                entries.push_back({e.r, e.c, e.v / (alpha[k] * s(v))});
            sl[k].vars.push_back(v);
            sl[k].coef.push_back(std::move(entries));
        }
    }
    for (int v = 0; v < nv; ++v) {
        for (int side = 0; side < 2; ++side) {
            ScaledLmi& box = sl[nl + 2 * v + side];
            box.dim = 1;
            box.C   = Mat::Constant(1, 1, -opts.box_radius);
            box.vars.push_back(v);
            box.coef.push_back({{0, 0, side == 0 ? 1.0 : -1.0}});
        }
    }

    auto unscale = [&](const Vec& xs) { return Vec(xs.cwiseQuotient(s)); };

    // Start: identity on symmetric blocks, shift t above the largest eigenvalue.
    Vec xs = p.layout.identity_start().cwiseProduct(s);
    double t = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < nsl; ++k)
        t = std::max(t, linalg::max_eig_sym(linalg::symmetrize(eval_scaled(sl[k], xs))));
    t += std::max(1.0, 0.1 * std::abs(t));

    // Matching mu to the initial point zeroes the t-gradient, so the first
    // centering starts from (approximately) the central path.
    double mu_start = opts.mu_init;
    if (!(mu_start > 0.0)) {
        mu_start = 0.0;
        for (int k = 0; k < nsl; ++k) {
            Mat S = -eval_scaled(sl[k], xs);
            S.diagonal().array() += t;
            mu_start += S.llt().solve(Mat::Identity(sl[k].dim, sl[k].dim)).trace();
        }
        mu_start = std::max(1.0, mu_start);
    }

    // Total log det of the shifted slabs; false outside the domain.
    auto barrier_logdet_sum = [&](const Vec& x_, double t_, double& ld_sum) {
        ld_sum = 0.0;
        for (int k = 0; k < nsl; ++k) {
            double ld = 0.0;
            if (!barrier_logdet(sl[k], x_, t_, ld))
                return false;
            ld_sum += ld;
        }
        return true;
    };

    struct Best {
        bool valid = false;
        Vec x;
        double margin = std::numeric_limits<double>::infinity();
        bool feasible = false;
    } best;

    auto consider = [&](const Vec& xs_point) {
        const CertState c = evaluate_cert(unscale(xs_point));
        if (!best.valid || (c.ok && !best.feasible)
            || (c.ok == best.feasible && c.margin < best.margin)) {
            best.valid    = true;
            best.x        = xs_point;
            best.margin   = c.margin;
            best.feasible = c.ok;
        }
        return c.ok;
    };

    double mu = mu_start;
    int newton_total = 0;
    int outer        = 0;
    double last_step = 0.0;

    Vec g(nv + 1), dw(nv + 1);
    Mat H(nv + 1, nv + 1);
    std::vector<Mat> W(nsl), W2(nsl);

    while (true) {
        ++outer;
        bool centered = false;
        bool lost_domain = false;
        for (int inner = 0; inner < opts.max_inner && newton_total < opts.max_newton; ++inner) {
            ++newton_total;

            // Gradient and Hessian of mu*t - sum_k logdet(t I - F_k(x)).
            g.setZero();
            H.setZero();
            for (int k = 0; k < nsl && !lost_domain; ++k) {
                Mat S = -eval_scaled(sl[k], xs);
                S.diagonal().array() += t;
                Eigen::LLT<Mat> llt(linalg::symmetrize(S));
                if (llt.info() != Eigen::Success) {
                    // Marginal factorization flipped sign between the line
                    // search and this assembly; nudge t back into the domain.
                    lost_domain = true;
                    break;
                }
                W[k]  = llt.solve(Mat::Identity(sl[k].dim, sl[k].dim));
                W2[k] = W[k] * W[k];

                g(nv) -= W[k].trace();
                H(nv, nv) += W2[k].trace();

                const auto& vars = sl[k].vars;
                for (std::size_t a = 0; a < vars.size(); ++a) {
                    double gi = 0.0, hit = 0.0;
                    for (const auto& e : sl[k].coef[a]) {
                        gi += e.v * W[k](e.r, e.c);
                        hit -= e.v * W2[k](e.r, e.c);
                    }
                    g(vars[a]) += gi;
                    H(vars[a], nv) += hit;
                    H(nv, vars[a]) += hit;
                }
                for (std::size_t a = 0; a < vars.size(); ++a) {
                    for (std::size_t b = a; b < vars.size(); ++b) {
                        double h = 0.0;
                        for (const auto& e1 : sl[k].coef[a])
                            for (const auto& e2 : sl[k].coef[b])
                                h += e1.v * e2.v * W[k](e2.c, e1.r) * W[k](e1.c, e2.r);
                        H(vars[a], vars[b]) += h;
                        if (a != b)
                            H(vars[b], vars[a]) += h;
                    }
                }
            }
            if (lost_domain) {
                t += std::max(1e-12, 1e-12 * std::abs(t));
                break; // re-center at the next stage
            }
            g(nv) += mu;

            // Newton direction with a regularization fallback.
            double reg = 0.0;
            for (int attempt = 0;; ++attempt) {
                Mat Hr = H;
                if (reg > 0.0)
                    Hr.diagonal().array() += reg;
                Eigen::LDLT<Mat> ldlt(Hr);
                if (ldlt.info() == Eigen::Success) {
                    dw = ldlt.solve(-g);
                    if (dw.allFinite())
                        break;
                }
                if (attempt >= 6)
                    throw Error("lmi solver: Newton system could not be solved");
                reg = (reg == 0.0) ? 1e-12 * std::max(1.0, H.diagonal().maxCoeff()) : reg * 100.0;
            }

            const double lambda2 = std::max(0.0, dw.dot(H * dw));
            const double lambda  = std::sqrt(lambda2);
            if (lambda < opts.newton_tol) {
                centered = true;
                break;
            }

            double ld0 = 0.0;
            if (!barrier_logdet_sum(xs, t, ld0))
                throw Error("lmi solver: current iterate infeasible for its own barrier");

            // Try the full step first; the Armijo test plus the domain check
            // backs off to (and below) the damped step when needed. The
            // objective change is formed as a difference (mu*dt plus the
            // log-det change) so large mu*t magnitudes cannot swamp it.
            double step = 1.0;
            bool accepted = false;
            for (int bt = 0; bt < 60; ++bt) {
                const Vec xs_try = xs + step * dw.head(nv);
                const double t_try = t + step * dw(nv);
                double ld_try = 0.0;
                if (barrier_logdet_sum(xs_try, t_try, ld_try)) {
                    const double df = mu * (step * dw(nv)) - (ld_try - ld0);
                    if (df <= -1e-4 * step * lambda2) {
                        xs = xs_try;
                        t  = t_try;
                        last_step = step * dw.norm();
                        accepted  = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (opts.verbose)
                std::fprintf(stderr,
                             "[lmi] outer %d mu %.3e newton %d t %.6e lambda %.3e step %.3e%s\n",
                             outer, mu, newton_total, t, lambda, accepted ? step : 0.0,
                             accepted ? "" : " (stalled)");
            if (!accepted)
                break; // stalled; escalate mu

            // Certificates are evaluated in the original frame as soon as the
            // common shift turns negative; the first pass wins unless the
            // centering is still making large moves.
            if (t < 0.0) {
                if (consider(xs) && lambda >= 10.0)
                    return make_solution(unscale(best.x), true, newton_total, outer, last_step);
            }
        }

        if (consider(xs) || (best.valid && best.feasible))
            return make_solution(unscale(best.x), true, newton_total, outer, last_step);

        (void)centered; // an uncentered stage still escalates; budgets bound the loop
        mu *= opts.mu_growth;
        if (mu > opts.mu_max || newton_total >= opts.max_newton) {
            const Vec report = best.valid ? best.x : xs;
            return make_solution(unscale(report), false, newton_total, outer, last_step);
        }
    }
}

} // namespace lfc::lmi
