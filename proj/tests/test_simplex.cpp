#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nneg/simplex.hpp"

using namespace nneg;
using nneg::lp::SolveStatus;

namespace {
lp::StandardForm<double> make_lp(int m, int n, std::initializer_list<double> A,
                                 std::initializer_list<double> b, std::initializer_list<double> c) {
    lp::StandardForm<double> sf;
    sf.A.resize(m, n);
    int i = 0;
    for (double v : A) {
        sf.A(i / n, i % n) = v;
        ++i;
    }
    sf.b.resize(m);
    i = 0;
    for (double v : b) sf.b[i++] = v;
    sf.c.resize(n);
    i = 0;
    for (double v : c) sf.c[i++] = v;
    return sf;
}
}  // namespace

TEST_CASE("two-variable optimum") {
    // min -x1 - 2 x2 s.t. x1 + x2 + s1 = 4, x1 + 3 x2 + s2 = 6
    const auto sf = make_lp(2, 4, {1, 1, 1, 0, 1, 3, 0, 1}, {4, 6}, {-1, -2, 0, 0});
    const auto res = lp::simplex_solve(sf);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(-5.0));  // x = (3, 1)
    CHECK(res.x[0] == doctest::Approx(3.0));
    CHECK(res.x[1] == doctest::Approx(1.0));
    // multipliers price the binding rows: c - A'y >= 0, y'b = objective
    CHECK((res.y.transpose() * sf.b).value() == doctest::Approx(res.objective));
    for (int j = 0; j < 4; ++j)
        CHECK(sf.c[j] - (sf.A.col(j).transpose() * res.y).value() >= -1e-9);
}

TEST_CASE("degenerate and redundant rows") {
    // duplicated constraint rows force a redundant-row basis in phase 1
    const auto sf = make_lp(3, 2, {1, 1, 1, 1, 1, 2}, {2, 2, 3}, {1, 1});
    const auto res = lp::simplex_solve(sf);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(2.0));
    CHECK(res.x[0] + res.x[1] == doctest::Approx(2.0));
}

TEST_CASE("infeasible system yields a Farkas certificate") {
    // x1 + x2 = 1, x1 + x2 = 3 cannot both hold
    const auto sf = make_lp(2, 2, {1, 1, 1, 1}, {1, 3}, {0, 0});
    const auto res = lp::simplex_solve(sf);
    REQUIRE(res.status == SolveStatus::Infeasible);
    REQUIRE(res.farkas.size() == 2);
    CHECK((res.farkas.transpose() * sf.b).value() > 1e-9);
    for (int j = 0; j < 2; ++j)
        CHECK((res.farkas.transpose() * sf.A.col(j)).value() <= 1e-9);
}

TEST_CASE("unbounded objective reports a ray") {
    // min -x1 with x1 - x2 = 0: x1 = x2 -> infinity
    const auto sf = make_lp(1, 2, {1, -1}, {0}, {-1, 0});
    const auto res = lp::simplex_solve(sf);
    REQUIRE(res.status == SolveStatus::Unbounded);
    REQUIRE(res.ray.size() == 2);
    CHECK((sf.A * res.ray).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((sf.c.transpose() * res.ray).value() < 0.0);
}

TEST_CASE("rejects malformed input") {
    auto sf = make_lp(1, 2, {1, 1}, {1}, {1, 1});
    sf.b[0] = -1.0;
    CHECK_THROWS_AS(lp::simplex_solve(sf), ValidationError);
    auto sf2 = make_lp(1, 2, {1, 1}, {1}, {1, 1});
    sf2.c.resize(3);
    CHECK_THROWS_AS(lp::simplex_solve(sf2), ValidationError);
}

TEST_CASE("solver is deterministic") {
    const auto sf = make_lp(3, 6,
                            {1, 2, 0, 1, 0, 0, 0, 1, 1, 0, 1, 0, 1, 0, 1, 0, 0, 1},
                            {4, 3, 5}, {-2, -3, -1, 0, 0, 0});
    const auto r1 = lp::simplex_solve(sf);
    const auto r2 = lp::simplex_solve(sf);
    REQUIRE(r1.status == SolveStatus::Optimal);
    CHECK(r1.objective == r2.objective);
    CHECK(r1.iterations == r2.iterations);
    CHECK((r1.x - r2.x).norm() == 0.0);
}

TEST_CASE("long double instantiation matches double on a small LP") {
    lp::StandardForm<long double> sf;
    sf.A.resize(2, 4);
    sf.A << 1, 1, 1, 0, 1, 3, 0, 1;
    sf.b.resize(2);
    sf.b << 4, 6;
    sf.c.resize(4);
    sf.c << -1, -2, 0, 0;
    const auto res = lp::SimplexSolver<long double>().solve(sf);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(static_cast<double>(res.objective) == doctest::Approx(-5.0));
}
