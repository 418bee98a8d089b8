#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dma/core.hpp"
#include "dma/generator.hpp"

using namespace dma;

namespace {

std::vector<std::pair<ConstraintId, Vec>> basis_of(const Matrix& an) {
    std::vector<std::pair<ConstraintId, Vec>> out;
    for (std::size_t k = 0; k < an.rows(); ++k)
        out.emplace_back(static_cast<ConstraintId>(k), an.row(k));
    return out;
}

}  // namespace

TEST_CASE("init on simple bases") {
    DmaState st = init_state(basis_of(Matrix::identity(2)));
    CHECK(st.V == Matrix::identity(2));
    CHECK(st.d == Vec{Rat(1), Rat(1)});
    CHECK(st.absDetC == 1);
    Vertices v = vertices(st);
    CHECK(v.v[0] == Vec{Rat(1), Rat(0)});
    CHECK(v.v[1] == Vec{Rat(0), Rat(1)});

    st = init_state(basis_of(Matrix{{Rat(2), Rat(0)}, {Rat(0), Rat(3)}}));
    CHECK(st.V == Matrix{{make_rat(1, 2), Rat(0)}, {Rat(0), make_rat(1, 3)}});
    CHECK(st.u == Vec{Rat(2), Rat(3)});
    CHECK(st.d == Vec{Rat(1), Rat(1)});
    CHECK(st.absDetC == 6);

    st = init_state(basis_of(Matrix{{Rat(1), Rat(1)}, {Rat(0), Rat(1)}}));
    CHECK(st.d == Vec{Rat(1), Rat(1)});

    CHECK_THROWS_AS(init_state(basis_of(Matrix{{Rat(1), Rat(1)}, {Rat(2), Rat(2)}})),
                    SingularMatrix);
}

TEST_CASE("vertices and center") {
    DmaState st = init_state(basis_of(Matrix::identity(2)));
    Vertices v = vertices(st);
    CHECK(v.vbar == Vec{Rat(1), Rat(1)});
    CHECK(v.center == Vec{make_rat(1, 3), make_rat(1, 3)});
}

TEST_CASE("choose_pivot") {
    DmaState st = init_state(basis_of(Matrix::identity(2)));
    Vertices v = vertices(st);

    Vec a{Rat(1), Rat(-2)};
    auto j = choose_pivot(v, a);
    REQUIRE(j);
    CHECK(*j == 0);

    Vec b{Rat(-1), Rat(-1)};
    CHECK_FALSE(choose_pivot(v, b));

    // Tie between equal positives goes to the lowest index.
    Vec c{Rat(1), Rat(1)};
    j = choose_pivot(v, c);
    REQUIRE(j);
    CHECK(*j == 0);
}

TEST_CASE("choose_s") {
    CHECK(choose_s(2) == 2);
    CHECK(choose_s(3) == 2);
    CHECK(choose_s(5) == 4);
}

TEST_CASE("gain_bound values") {
    CHECK(gain_bound(2, 2) == make_rat(5, 4));
    CHECK(gain_bound(3, 2) == make_rat(9, 8));
    CHECK(gain_bound(4, 3) == make_rat(256, 243));
}

TEST_CASE("worked standard step") {
    // A = [[1,0],[0,1],[1,-2]]: first step with i = row 2, a = (1,-2), j = 0,
    // s = 2. Expected values recomputed from the definitions inline.
    DmaState st = init_state(basis_of(Matrix::identity(2)));
    Vec a{Rat(1), Rat(-2)};

    Vertices v0 = vertices(st);
    Rat av = dot(a, v0.v[0]);
    CHECK(av == 1);
    Rat tExpected = Rat(2 * 2 - 1) * av;
    CHECK(tExpected == 3);

    StepReport rep = standard_step(st, 2, a, 0, 2);
    CHECK(rep.t == 3);
    CHECK(st.B(0, st.columnOf.at(2)) == make_rat(1, 3));
    CHECK(rep.deltas == Vec{make_rat(3, 4), make_rat(3, 2)});
    CHECK(st.d == Vec{make_rat(3, 4), make_rat(3, 2)});
    CHECK(rep.lambda == make_rat(3, 2));
    CHECK(st.absDetC == make_rat(4, 3));
    CHECK(st.V == Matrix{{make_rat(3, 4), make_rat(1, 2)}, {Rat(0), Rat(1)}});

    // V' (B'A) = I exactly.
    check_invariants(st);
    Matrix c = st.B * st.rowsA;
    CHECK(c == Matrix{{make_rat(4, 3), make_rat(-2, 3)}, {Rat(0), Rat(1)}});

    // Vertices after the step.
    Vertices v1 = vertices(st);
    CHECK(v1.v[0] == Vec{Rat(1), Rat(0)});
    CHECK(v1.v[1] == Vec{make_rat(1, 3), make_rat(2, 3)});
    CHECK(v1.vbar == Vec{make_rat(4, 3), make_rat(2, 3)});

    // Valuation telescopes: init value 1, then * lambda.
    CHECK(valuation(st) == make_rat(3, 2));
}

TEST_CASE("valuation telescoping over two steps") {
    InequalitySystem sys{Matrix{{Rat(1), Rat(0)}, {Rat(0), Rat(1)}, {Rat(1), Rat(-2)}}};
    PreparedSystem prep = preprocess(sys);
    REQUIRE_FALSE(prep.degenerate());
    DenseOracle oracle(prep);
    DmaState st = init_state(oracle.initial_basis());
    Rat val = valuation(st);
    long s = choose_s(st.n);
    for (int step = 0; step < 2; ++step) {
        Vertices v = vertices(st);
        OracleResponse resp = oracle.find_violated(v.vbar);
        REQUIRE(resp);
        auto j = choose_pivot(v, resp->row);
        REQUIRE(j);
        StepReport rep = standard_step(st, resp->id, resp->row, *j, s);
        val *= rep.lambda;
        CHECK(valuation(st) == val);
    }
}

TEST_CASE("step properties on random instances") {
    // Exact-mode steps: invariants, delta consistency, det(sigma) identity,
    // the sum rule and the gain bound, checked with exact rationals.
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        GeneratedInstance inst =
            generate(seed % 2 ? GenKind::Random : GenKind::Infeasible, 2 + seed % 3, 7, 3, seed);
        PreparedSystem prep = preprocess(inst.system);
        if (prep.degenerate() || prep.projected) continue;
        DenseOracle oracle(prep);
        DmaState st = init_state(oracle.initial_basis());
        const std::size_t n = st.n;
        const long s = choose_s(n);
        const Rat bound = gain_bound(n, s);

        for (int step = 0; step < 12; ++step) {
            Vertices v = vertices(st);
            OracleResponse resp = oracle.find_violated(v.vbar);
            if (!resp) break;
            auto j = choose_pivot(v, resp->row);
            if (!j) break;

            Vec dBefore = st.d;
            Rat detBefore = st.absDetC;
            Rat av = dot(resp->row, v.v[*j]);
            Rat avbar = dot(resp->row, v.vbar);
            REQUIRE(avbar <= 0);

            StepReport rep = standard_step(st, resp->id, resp->row, *j, s);
            check_invariants(st);

            // delta consistency: closed form equals d'_k / d_k.
            for (std::size_t k = 0; k < n; ++k) {
                CHECK(st.d[k] == dBefore[k] * rep.deltas[k]);
                Rat closed;
                if (k == *j)
                    closed = 1 - make_rat(1, s * s);
                else
                    closed = 1 - dot(resp->row, v.v[k]) / (Rat(s * s) * av);
                CHECK(rep.deltas[k] == closed);
            }
            // det(sigma) identity.
            CHECK(st.absDetC / detBefore == 1 + make_rat(1, s * s - 1));
            // Sum rule.
            Rat sum = 0;
            for (std::size_t k = 0; k < n; ++k) sum += rep.deltas[k];
            CHECK(sum == Rat(static_cast<long>(n)) - avbar / (Rat(s * s) * av));
            CHECK(sum >= static_cast<long>(n));
            // Gain bound, exact.
            CHECK(rep.lambda >= bound);
        }
    }
}

TEST_CASE("gain bound beats 1/(2n^2) for s = n-1") {
    for (std::size_t n = 3; n <= 64; ++n) {
        Rat g = gain_bound(n, static_cast<long>(n) - 1);
        double lng = log2_abs_approx(g) * std::log(2.0);
        double target = 1.0 / (2.0 * static_cast<double>(n) * static_cast<double>(n));
        CHECK(lng > target + 1e-12);
    }
}
