#include "lfc/model.hpp"

#include "lfc/errors.hpp"

#include <doctest.h>

#include <numbers>

using namespace lfc;
using namespace lfc::model;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<AreaParams> table1() {
    return {{"area1", 10.0, 1.0, 0.1, 0.3, 0.05, 1.0},
            {"area2", 12.0, 1.5, 0.17, 0.4, 0.05, 1.0},
            {"area3", 12.0, 1.8, 0.2, 0.35, 0.05, 1.0}};
}

TieLines table1_ties() {
    TieLines t = TieLines::zero(3);
    t.T(0, 1) = t.T(1, 0) = 0.1986;
    t.T(0, 2) = t.T(2, 0) = 0.2148;
    t.T(1, 2) = t.T(2, 1) = 0.1830;
    return t;
}

// The per-area realization written out entry by entry from the parameters.
Mat reference_A(const AreaParams& p, double tie_sum) {
    Mat A = Mat::Zero(5, 5);
    A(0, 0) = -p.D / p.M;
    A(0, 1) = 1.0 / p.M;
    A(0, 3) = -1.0 / p.M;
    A(1, 1) = -1.0 / p.Tch;
    A(1, 2) = 1.0 / p.Tch;
    A(2, 0) = -1.0 / (p.R * p.Tg);
    A(2, 2) = -1.0 / p.Tg;
    A(3, 0) = kTwoPi * tie_sum;
    A(4, 0) = p.beta;
    A(4, 3) = 1.0;
    return A;
}


bool exact_eq(const Mat& a, const Mat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols()
        && (a - b).cwiseAbs().maxCoeff() == 0.0;
}

} // namespace

TEST_CASE("area 1 realization matches the templates entry by entry") {
    const auto params = table1();
    Vec ties(3);
    ties << 0.0, 0.1986, 0.2148;
    const auto am = build_area(params[0], ties, 0);

    CHECK(exact_eq(am.A, reference_A(params[0], 0.1986 + 0.2148)));
    CHECK(am.A(0, 0) == doctest::Approx(-0.1));
    CHECK(am.A(1, 1) == doctest::Approx(-3.3333).epsilon(1e-4));
    CHECK(am.A(2, 0) == doctest::Approx(-200.0));
    CHECK(am.A(3, 0) == doctest::Approx(2.5975).epsilon(1e-3));
    CHECK(am.B(2, 0) == doctest::Approx(10.0));
    CHECK(am.F(0, 0) == doctest::Approx(-0.1));

    // C selects frequency, tie-line power and the ACE integral.
    Mat C = Mat::Zero(3, 5);
    C(0, 0) = C(1, 3) = C(2, 4) = 1.0;
    CHECK(exact_eq(am.C, C));
}

TEST_CASE("interaction blocks carry a single entry") {
    const auto params = table1();
    Vec ties(3);
    ties << 0.0, 0.1986, 0.2148;
    const auto am = build_area(params[0], ties, 0);

    REQUIRE(am.coupling.size() == 2);
    const Mat& d12 = am.coupling.at(1);
    CHECK(d12(3, 0) == doctest::Approx(-kTwoPi * 0.1986));
    CHECK(d12(3, 0) == doctest::Approx(-1.2479).epsilon(1e-3));
    Mat zeroed  = d12;
    zeroed(3, 0) = 0.0;
    CHECK(zeroed.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decoupled areas have no interactions") {
    const auto params = table1();
    const auto am     = build_area(params[0], Vec::Zero(3), 0);
    CHECK(am.A(3, 0) == 0.0);
    CHECK(am.coupling.empty());
}

TEST_CASE("composite bookkeeping for the three-area system") {
    const auto sys = build_composite(table1(), table1_ties());
    CHECK(sys.n() == 15);
    CHECK(sys.m() == 3);
    CHECK(sys.q() == 3);
    CHECK(sys.p() == 9);
    // interaction block (2,1) holds -2 pi T21
    CHECK(sys.dA(5 + 3, 0) == doctest::Approx(-kTwoPi * 0.1986));
    // diagonal blocks of dA are identically zero
    for (int i = 0; i < 3; ++i)
        CHECK(sys.dA.block(5 * i, 5 * i, 5, 5).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single area composite equals the area itself") {
    AreaParams p{"solo", 10.0, 1.0, 0.1, 0.3, 0.05, 1.0};
    const auto sys = build_composite({p}, TieLines::zero(1));
    CHECK(sys.dA.cwiseAbs().maxCoeff() == 0.0);
    CHECK(exact_eq(sys.A, sys.areas[0].A));
}

TEST_CASE("permuting areas permutes the block structure") {
    const auto params = table1();
    const auto ties   = table1_ties();
    const auto sys    = build_composite(params, ties);

    std::vector<AreaParams> perm{params[1], params[0], params[2]};
    TieLines pties = TieLines::zero(3);
    // swap areas 0 and 1 in the coupling table
    pties.T(0, 1) = pties.T(1, 0) = ties.T(1, 0);
    pties.T(0, 2) = pties.T(2, 0) = ties.T(1, 2);
    pties.T(1, 2) = pties.T(2, 1) = ties.T(0, 2);
    const auto psys = build_composite(perm, pties);

    CHECK(exact_eq(psys.A.block(0, 0, 5, 5), sys.A.block(5, 5, 5, 5)));
    CHECK(exact_eq(psys.A.block(5, 5, 5, 5), sys.A.block(0, 0, 5, 5)));
    CHECK(exact_eq(psys.dA.block(0, 5, 5, 5), sys.dA.block(5, 0, 5, 5)));
    CHECK(exact_eq(psys.dA.block(10, 0, 5, 5), sys.dA.block(10, 5, 5, 5)));
}

TEST_CASE("tie-line row sums balance the interaction blocks") {
    const auto sys = build_composite(table1(), table1_ties());
    for (int i = 0; i < 3; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 3; ++j)
            if (j != i)
                sum += sys.dA(5 * i + 3, 5 * j);
        CHECK(sum == doctest::Approx(-sys.areas[i].A(3, 0)).epsilon(1e-12));
    }
}

TEST_CASE("parameter validation names the offending field") {
    AreaParams p{"bad", -1.0, 1.0, 0.1, 0.3, 0.05, 1.0};
    CHECK_THROWS_WITH_AS(p.validate(), "bad: inertia M must be > 0", ParameterError);
    p.M  = 10.0;
    p.Tg = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), "bad: governor time constant Tg must be > 0",
                         ParameterError);
}

TEST_CASE("tie-line validation") {
    TieLines t = TieLines::zero(2);
    t.T(0, 1)  = 0.1;
    CHECK_THROWS_AS(t.validate(), ParameterError); // asymmetric
    t.T(1, 0) = 0.1;
    CHECK_NOTHROW(t.validate());
    t.T(0, 0) = 0.2;
    CHECK_THROWS_AS(t.validate(), ParameterError); // nonzero diagonal
    t.T(0, 0) = 0.0;
    t.T(0, 1) = t.T(1, 0) = -0.1;
    CHECK_THROWS_AS(t.validate(), ParameterError); // negative coefficient
}

TEST_CASE("output selection default, override and rejection") {
    const auto sys = build_composite(table1(), table1_ties());
    const auto def = default_output_selection(sys);
    CHECK(exact_eq(def.Cx, Mat::Identity(15, 15)));
    CHECK(exact_eq(def.Ce, Mat::Identity(15, 15)));
    def.validate_block_diagonal(sys);

    Vec w = Vec::LinSpaced(15, 0.0, 1.4);
    const auto sel = OutputSelection::from_diagonal(w, Vec::Ones(15));
    sel.validate_block_diagonal(sys);
    CHECK(sel.Cx(3, 3) == doctest::Approx(w(3)));

    OutputSelection bad = def;
    bad.Cx(0, 7)        = 0.5; // couples areas 1 and 2
    CHECK_THROWS_AS(bad.validate_block_diagonal(sys), InputError);
}
