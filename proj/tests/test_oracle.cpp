#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dma/oracle.hpp"

using namespace dma;

namespace {

PreparedSystem prep(std::initializer_list<std::initializer_list<Rat>> rows) {
    return preprocess(InequalitySystem{Matrix(rows)});
}

bool in_ball(const Vec& a, const Vec& c, const Rat& r) { return norm_sq(a - c) <= r * r; }

}  // namespace

TEST_CASE("dense oracle basics") {
    DenseOracle oracle(prep({{Rat(1), Rat(0)}, {Rat(0), Rat(1)}, {Rat(1), Rat(-2)}}));
    auto basis = oracle.initial_basis();
    REQUIRE(basis.size() == 2);
    CHECK(basis[0].first == 0);
    CHECK(basis[1].first == 1);

    Vec x{Rat(1), Rat(1)};
    OracleResponse resp = oracle.find_violated(x);
    REQUIRE(resp);
    CHECK(resp->id == 2);
    CHECK(resp->row == Vec{Rat(1), Rat(-2)});
    CHECK(dot(resp->row, x) <= 0);

    DenseOracle clean(prep({{Rat(1), Rat(0)}, {Rat(0), Rat(1)}}));
    CHECK_FALSE(clean.find_violated(x));
}

TEST_CASE("dense oracle completeness and determinism") {
    DenseOracle oracle(prep({{Rat(2), Rat(1)}, {Rat(-1), Rat(3)}, {Rat(0), Rat(-1)}}));
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<long> e(-6, 6);
    for (int it = 0; it < 200; ++it) {
        Vec x{Rat(e(rng)), Rat(e(rng))};
        if (x.is_zero()) continue;
        OracleResponse a = oracle.find_violated(x);
        OracleResponse b = oracle.find_violated(x);
        if (a) {
            REQUIRE(b);
            CHECK(a->id == b->id);
            CHECK(a->row == b->row);
            CHECK(dot(a->row, x) <= 0);
        } else {
            CHECK_FALSE(b);
            for (ConstraintId k = 0; k < 3; ++k) CHECK(dot(oracle.row_of(k), x) > 0);
        }
    }
}

TEST_CASE("ball oracle initial basis") {
    Vec c{Rat(3), Rat(4)};
    BallOracle oracle(c, Rat(1));
    auto basis = oracle.initial_basis();
    REQUIRE(basis.size() == 2);
    Matrix stack(0, 2);
    for (const auto& [id, row] : basis) {
        CHECK(in_ball(row, c, Rat(1)));
        stack.append_row(row);
    }
    CHECK(det(stack) != 0);
}

TEST_CASE("ball oracle rank-deficient family") {
    // r = 0 in 2-D: the family is the single point c, spanning a line.
    BallOracle oracle(Vec{Rat(1), Rat(2)}, Rat(0));
    CHECK_THROWS_AS(oracle.initial_basis(), RankDeficientFamily);
}

TEST_CASE("ball oracle find_violated examples") {
    // c satisfies c.x <= 0, so the center itself is returned.
    BallOracle oracle(Vec{Rat(1), Rat(0)}, make_rat(1, 2));
    Vec x{Rat(-1), Rat(0)};
    OracleResponse resp = oracle.find_violated(x);
    REQUIRE(resp);
    CHECK(resp->row == Vec{Rat(1), Rat(0)});

    // Feasible direction: c.x - r|x| > 0.
    Vec good{Rat(1), Rat(0)};
    CHECK_FALSE(oracle.find_violated(good));
}

TEST_CASE("ball oracle soundness and completeness") {
    Vec c{Rat(3), Rat(4)};
    Rat r = make_rat(3, 2);
    BallOracle oracle(c, r);
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<long> e(-5, 5);
    for (int it = 0; it < 300; ++it) {
        Vec x{make_rat(e(rng), 1 + it % 3), Rat(e(rng))};
        if (x.is_zero()) continue;
        OracleResponse resp = oracle.find_violated(x);
        Rat cx = dot(c, x);
        if (resp) {
            CHECK(dot(resp->row, x) <= 0);
            CHECK(in_ball(resp->row, c, r));
        } else {
            // min over the family of a.x is c.x - r|x| > 0.
            CHECK(cx > 0);
            CHECK(cx * cx > r * r * norm_sq(x));
        }
        // Determinism with stable ids.
        OracleResponse again = oracle.find_violated(x);
        CHECK(resp.has_value() == again.has_value());
        if (resp) {
            CHECK(resp->id == again->id);
            CHECK(resp->row == again->row);
            CHECK(oracle.row_of(resp->id) == resp->row);
        }
    }
}

TEST_CASE("ball oracle exposes no bit parameters") {
    BallOracle oracle(Vec{Rat(3), Rat(4)}, Rat(1));
    CHECK_FALSE(oracle.bit_params());
    CHECK_FALSE(oracle.finite_m());
}
