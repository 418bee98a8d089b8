#include <catch2/catch_amalgamated.hpp>

#include "dma/deviations.hpp"
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

TEST_CASE("edge_direction worked values") {
    std::vector<Vec> vo{Vec{Rat(1), Rat(0)}, Vec{Rat(0), Rat(1)}};
    Vec u(2, Orient::Row);
    u[0] = 1;
    u[1] = 1;
    Vec w{Rat(0), Rat(4)};

    EdgeDirection e = edge_direction(w, Rat(20), vo, u, Rat(2));
    CHECK(e.M == 4);
    CHECK(e.spread == 4);
    CHECK(e.tPrime == 4);
    CHECK(e.tDev == make_rat(3, 32));
    CHECK(e.h == Vec{make_rat(3, 8), Rat(0)});

    // Extent inside the origin band: tPrime <= 1 clamps tDev to zero.
    e = edge_direction(w, Rat(6), vo, u, Rat(2));
    CHECK(e.tPrime == make_rat(1, 2));
    CHECK(e.tDev == 0);
    CHECK(e.h.is_zero());

    // Zero spread along w is degenerate.
    std::vector<Vec> flat{Vec{Rat(1), Rat(0)}, Vec{Rat(2), Rat(0)}};
    CHECK_THROWS_AS(edge_direction(w, Rat(20), flat, u, Rat(2)), DegenerateOrigin);
}

TEST_CASE("long_edge_trigger threshold and pair selection") {
    DmaState st = init_state(basis_of(Matrix::identity(3)));
    // Origin simplex: max vertex log2 = 0, so any positive threshold blocks.
    CHECK_FALSE(long_edge_trigger(st, 6, 1.0));
    // Zero threshold fires; the longest edge of the unit simplex is any of
    // the three, tie broken to (0,1).
    auto edge = long_edge_trigger(st, 6, 0.0);
    REQUIRE(edge);
    CHECK(edge->first == 0);
    CHECK(edge->second == 1);
}

TEST_CASE("reenclose on the origin simplex is a zero-shift rejection") {
    DmaState st = init_state(basis_of(Matrix::identity(2)));
    LongEdgeContext ctx = build_context(st, 0, 1);
    CHECK(ctx.fwd.tDev == 0);
    CHECK(ctx.rev.tDev == 0);
    Matrix bBefore = st.B;
    StepReport rep = reenclose(st, ctx);
    CHECK_FALSE(rep.accepted);
    CHECK(rep.note == "rejected:zero-shift");
    CHECK(st.B == bBefore);
    check_invariants(st);
}

TEST_CASE("reenclose preserves invariants and never loses valuation") {
    // Drive elongated states on stress instances, then re-enclose manually.
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        GeneratedInstance inst = generate(GenKind::StressEdge, 2, 4, 6 + unsigned(seed), seed);
        PreparedSystem prep = preprocess(inst.system);
        REQUIRE_FALSE(prep.degenerate());
        DenseOracle oracle(prep);
        DmaState st = init_state(oracle.initial_basis());
        long s = choose_s(st.n);
        bool sawAccept = false;
        for (int step = 0; step < 40; ++step) {
            Vertices v = vertices(st);
            OracleResponse resp = oracle.find_violated(v.vbar);
            if (!resp) break;
            auto j = choose_pivot(v, resp->row);
            if (!j) break;
            standard_step(st, resp->id, resp->row, *j, s);

            auto edge = long_edge_trigger(st, 1, -1e6);
            REQUIRE(edge);
            LongEdgeContext ctx = build_context(st, edge->first, edge->second);
            Rat before = valuation(st);
            DmaState copy = st;
            StepReport rep = reenclose(st, ctx);
            check_invariants(st);
            if (rep.accepted) {
                CHECK(valuation(st) > before);
                CHECK(rep.lambda > 1);
                sawAccept = true;
            } else {
                CHECK(st.B == copy.B);
                CHECK(st.V == copy.V);
                CHECK(valuation(st) == before);
            }
        }
        (void)sawAccept;
    }
}

TEST_CASE("reenclose accepts on an elongated state") {
    // Identity origin with B = [[1,5/4],[5/4,1]]: vertices (-4,5) and (5,-4)
    // stick far outside the origin simplex, tPrime = 4 in both directions,
    // and the shifted faces treble the valuation.
    DmaState st = init_state(basis_of(Matrix::identity(2)));
    st.B(0, 1) = make_rat(5, 4);
    st.B(1, 0) = make_rat(5, 4);
    Matrix c = st.B * st.rowsA;
    st.V = invert(c);
    st.d = st.u * st.V;
    st.absDetC = abs(det(c));
    check_invariants(st);
    CHECK(valuation(st) == make_rat(1, 9));

    LongEdgeContext ctx = build_context(st, 0, 1);
    CHECK(ctx.fwd.tPrime == 4);
    CHECK(ctx.fwd.tDev == make_rat(1, 24));
    CHECK(ctx.rev.tDev == make_rat(1, 24));

    Vec incI = detail::origin_increment(st, ctx.w, ctx.fwd.M, ctx.fwd.tDev);
    Vec incJ = detail::origin_increment(st, -ctx.w, ctx.rev.M, ctx.rev.tDev);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(incI[k] >= 0);
        CHECK(incJ[k] >= 0);
    }

    StepReport rep = reenclose(st, ctx);
    CHECK(rep.accepted);
    CHECK(rep.lambda == 3);
    CHECK(valuation(st) == make_rat(1, 3));
    check_invariants(st);
}

TEST_CASE("kernel elimination worked example") {
    // b = (1,2,1) against F = {(1,-1,0), (0,1,-1)}: first pivot kills
    // component 0 giving (0,3,1), the second kills component 1 giving
    // (0,0,4).
    Vec b{Rat(1), Rat(2), Rat(1)};
    b = Vec(b.data(), Orient::Row);
    std::vector<Vec> F;
    {
        Vec f1(3, Orient::Row), f2(3, Orient::Row);
        f1[0] = 1;
        f1[1] = -1;
        f2[1] = 1;
        f2[2] = -1;
        F = {f1, f2};
    }
    std::vector<std::size_t> active{0, 1, 2};
    detail::eliminate_with_kernel(b, F, active);
    CHECK(b[0] == 0);
    CHECK(b[1] == 0);
    CHECK(b[2] == 4);
    CHECK(active == std::vector<std::size_t>{2});
}

TEST_CASE("sparsify_row worked example") {
    // 2-D state whose first B row touches five columns; support must drop to
    // at most n with B*A unchanged.
    DmaState st = init_state(basis_of(Matrix::identity(2)));
    Vec extra[3] = {Vec{Rat(1), Rat(1)}, Vec{Rat(1), Rat(2)}, Vec{Rat(2), Rat(1)}};
    for (ConstraintId id = 2; id < 5; ++id) st.column_for(id, extra[id - 2]);
    for (std::size_t col = 0; col < 5; ++col) st.B(0, col) = 1;
    Vec bAold = st.B.row(0) * st.rowsA;
    CHECK(bAold == Vec{Rat(5), Rat(5)});

    StepReport rep = sparsify_row(st, 0);
    CHECK(rep.accepted);
    CHECK(st.row_support(0) <= 2);
    CHECK(st.B.row(0) * st.rowsA == bAold);
    for (std::size_t col = 0; col < 5; ++col) CHECK(st.B(0, col) >= 0);
    // Row 1 untouched.
    CHECK(st.B(1, 1) == 1);
    CHECK(st.row_support(1) == 1);
}

TEST_CASE("sparsify_row is a noop at small support") {
    DmaState st = init_state(basis_of(Matrix::identity(2)));
    StepReport rep = sparsify_row(st, 0);
    CHECK_FALSE(rep.accepted);
    CHECK(rep.note == "noop");
}

TEST_CASE("sparsify properties on random wide rows") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<long> e(-3, 3), pos(1, 5);
    for (int it = 0; it < 40; ++it) {
        const std::size_t n = 2 + it % 2;
        // Random invertible basis.
        Matrix an(n, n);
        do {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) an(i, j) = Rat(e(rng));
        } while (det(an) == 0);
        DmaState st = init_state(basis_of(an));
        const std::size_t wide = 2 * n + 2;
        for (ConstraintId id = static_cast<ConstraintId>(n); id < static_cast<ConstraintId>(wide);
             ++id) {
            Vec row(n, Orient::Row);
            do {
                for (std::size_t j = 0; j < n; ++j) row[j] = Rat(e(rng));
            } while (row.is_zero());
            st.column_for(id, row);
        }
        for (std::size_t col = 0; col < wide; ++col) st.B(0, col) = make_rat(pos(rng), pos(rng));

        Vec bAold = st.B.row(0) * st.rowsA;
        StepReport rep = sparsify_row(st, 0);
        CHECK(rep.accepted);
        CHECK(st.row_support(0) <= n);
        CHECK(st.B.row(0) * st.rowsA == bAold);
        for (std::size_t col = 0; col < wide; ++col) CHECK(st.B(0, col) >= 0);
    }
}
