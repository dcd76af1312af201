#include "lfc/model.hpp"

#include "lfc/errors.hpp"

#include <cmath>
#include <numbers>

namespace lfc::model {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& msg) {
    if (!ok)
        throw ParameterError(msg);
}
} // namespace

void AreaParams::validate() const {
    const std::string who = name.empty() ? "area" : name;
    require(std::isfinite(M) && M > 0.0, who + ": inertia M must be > 0");
    require(std::isfinite(D) && D >= 0.0, who + ": damping D must be >= 0");
    require(std::isfinite(Tg) && Tg > 0.0, who + ": governor time constant Tg must be > 0");
    require(std::isfinite(Tch) && Tch > 0.0, who + ": turbine time constant Tch must be > 0");
    require(std::isfinite(R) && R > 0.0, who + ": speed droop R must be > 0");
    require(std::isfinite(beta) && beta > 0.0, who + ": frequency bias beta must be > 0");
}

void TieLines::validate() const {
    if (T.rows() != T.cols())
        throw ParameterError("tie-line matrix must be square");
    if (!linalg::all_finite(T))
        throw ParameterError("tie-line matrix has non-finite entries");
    for (int i = 0; i < T.rows(); ++i) {
        if (T(i, i) != 0.0)
            throw ParameterError("tie-line matrix must have zero diagonal");
        for (int j = 0; j < T.cols(); ++j) {
            if (T(i, j) < 0.0)
                throw ParameterError("tie-line coefficients must be >= 0");
            if (T(i, j) != T(j, i))
                throw ParameterError("tie-line matrix must be symmetric");
        }
    }
}

TieLines TieLines::zero(int n_areas) {
    return TieLines{Mat::Zero(n_areas, n_areas)};
}

AreaMatrices build_area(const AreaParams& p, const Vec& tie_row, int self) {
    p.validate();
    const int N = static_cast<int>(tie_row.size());
    if (self < 0 || self >= N)
        throw ParameterError("build_area: self index outside tie row");
    if (tie_row(self) != 0.0)
        throw ParameterError("build_area: self tie coefficient must be zero");
    for (int j = 0; j < N; ++j)
        if (!(tie_row(j) >= 0.0))
            throw ParameterError("build_area: tie coefficients must be >= 0");

    AreaMatrices am;
    am.A = Mat::Zero(kStates, kStates);
    am.B = Mat::Zero(kStates, kInputs);
    am.F = Mat::Zero(kStates, kDisturbances);
    am.C = Mat::Zero(kOutputs, kStates);

    const double tie_sum = tie_row.sum();

    am.A(0, 0) = -p.D / p.M;
    am.A(0, 1) = 1.0 / p.M;
    am.A(0, 3) = -1.0 / p.M;
    am.A(1, 1) = -1.0 / p.Tch;
    am.A(1, 2) = 1.0 / p.Tch;
    am.A(2, 0) = -1.0 / (p.R * p.Tg);
    am.A(2, 2) = -1.0 / p.Tg;
    am.A(3, 0) = kTwoPi * tie_sum;
    am.A(4, 0) = p.beta;
    am.A(4, 3) = 1.0;

    am.B(2, 0) = 1.0 / p.Tg;
    am.F(0, 0) = -1.0 / p.M;

    am.C(0, 0) = 1.0;
    am.C(1, 3) = 1.0;
    am.C(2, 4) = 1.0;

    for (int j = 0; j < N; ++j) {
        if (j == self || tie_row(j) == 0.0)
            continue;
        Mat dA = Mat::Zero(kStates, kStates);
        dA(3, 0) = -kTwoPi * tie_row(j);
        am.coupling.emplace(j, std::move(dA));
    }
    return am;
}

CompositeSystem build_composite(const std::vector<AreaMatrices>& areas, const TieLines& ties) {
    const int N = static_cast<int>(areas.size());
    if (N < 1)
        throw ParameterError("build_composite: need at least one area");
    ties.validate();
    if (ties.area_count() != N)
        throw DimensionError("build_composite: tie-line dimension does not match area count");

    CompositeSystem sys;
    sys.N     = N;
    sys.areas = areas;
    const int n = sys.n(), m = sys.m(), q = sys.q(), p = sys.p();
    sys.A  = Mat::Zero(n, n);
    sys.dA = Mat::Zero(n, n);
    sys.B  = Mat::Zero(n, m);
    sys.F  = Mat::Zero(n, q);
    sys.C  = Mat::Zero(p, n);

    for (int i = 0; i < N; ++i) {
        const auto& a = areas[i];
        if (a.A.rows() != kStates || a.A.cols() != kStates)
            throw DimensionError("build_composite: area state matrix must be 5x5");
        sys.A.block(i * kStates, i * kStates, kStates, kStates) = a.A;
        sys.B.block(i * kStates, i * kInputs, kStates, kInputs) = a.B;
        sys.F.block(i * kStates, i * kDisturbances, kStates, kDisturbances) = a.F;
        sys.C.block(i * kOutputs, i * kStates, kOutputs, kStates) = a.C;
        for (const auto& [j, dA] : a.coupling) {
            if (j < 0 || j >= N || j == i)
                throw DimensionError("build_composite: coupling index outside system");
            sys.dA.block(i * kStates, j * kStates, kStates, kStates) = dA;
        }
    }
    return sys;
}

CompositeSystem build_composite(const std::vector<AreaParams>& params, const TieLines& ties) {
    ties.validate();
    const int N = static_cast<int>(params.size());
    if (ties.area_count() != N)
        throw DimensionError("build_composite: tie-line dimension does not match area count");
    std::vector<AreaMatrices> areas;
    areas.reserve(params.size());
    for (int i = 0; i < N; ++i)
        areas.push_back(build_area(params[i], ties.T.row(i), i));
    return build_composite(areas, ties);
}

OutputSelection OutputSelection::identity(int n) {
    return OutputSelection{Mat::Identity(n, n), Mat::Identity(n, n)};
}

OutputSelection OutputSelection::from_diagonal(const Vec& state_weights, const Vec& error_weights) {
    if (state_weights.size() != error_weights.size())
        throw DimensionError("output selection: weight vectors differ in length");
    if (!state_weights.allFinite() || !error_weights.allFinite())
        throw InputError("output selection: non-finite weights");
    OutputSelection out;
    out.Cx = state_weights.asDiagonal();
    out.Ce = error_weights.asDiagonal();
    return out;
}

void OutputSelection::validate_block_diagonal(const CompositeSystem& sys) const {
    const int n = sys.n();
    if (Cx.rows() != n || Cx.cols() != n || Ce.rows() != n || Ce.cols() != n)
        throw DimensionError("output selection: maps must be n x n");
    if (!linalg::all_finite(Cx) || !linalg::all_finite(Ce))
        throw InputError("output selection: non-finite entries");
    for (const Mat* M : {&Cx, &Ce}) {
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                if (r / kStates != c / kStates && (*M)(r, c) != 0.0)
                    throw InputError("output selection: maps must be block-diagonal per area");
            }
        }
    }
}

OutputSelection default_output_selection(const CompositeSystem& sys) {
    return OutputSelection::identity(sys.n());
}

} // namespace lfc::model
