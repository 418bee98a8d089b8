#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dma/oracle.hpp"

namespace dma {

struct InvariantBreach : std::runtime_error {
    explicit InvariantBreach(const std::string& what)
        : std::runtime_error("invariant breach: " + what) {}
};

// Thrown only by rounded steps whose measured gain misses the bound; the
// caller redoes the step exactly. State is untouched when this is thrown.
struct GainViolated : std::runtime_error {
    GainViolated() : std::runtime_error("rounded step missed the gain bound") {}
};

enum class StepType { Standard, LongEdge, Sparsify, RoundingFallback };

inline const char* step_type_name(StepType t) {
    switch (t) {
        case StepType::Standard: return "standard";
        case StepType::LongEdge: return "long_edge";
        case StepType::Sparsify: return "sparsify";
        case StepType::RoundingFallback: return "rounding_fallback";
    }
    return "?";
}

struct StepReport {
    StepType type = StepType::Standard;
    bool accepted = true;
    ConstraintId i = -1;   // oracle row id (standard) / B row index (deviations)
    long j = -1;           // pivot vertex index
    long s = 0;
    Rat t;                 // denominator parameter actually used (standard steps)
    Rat lambda = 1;        // valuation multiplier of the accepted operation
    Vec deltas;            // per-vertex scale factors d'_k / d_k (standard steps)
    Vec dBefore;           // d prior to the step (standard steps)
    Rat valuationExact;    // valuation after the operation
    double valuationLog2 = 0.0;
    std::size_t maxSupport = 0;
    std::string note;
};

// The dual matrix state. C = B*A = V^{-1}; d = u*V > 0; B >= 0. Columns of B
// (and rows of `rowsA`) are keyed by ConstraintId in `ids` order and grow as
// the oracle reveals rows. Single-writer: steps mutate exclusively.
struct DmaState {
    std::size_t n = 0;
    std::vector<ConstraintId> ids;
    std::map<ConstraintId, std::size_t> columnOf;
    Matrix B;      // n x ids.size(), nonnegative
    Matrix rowsA;  // ids.size() x n, the revealed rows
    Matrix V;      // n x n
    Vec d;         // positive row n-vector, d = u*V
    Vec u;         // sum of the n starting basis rows
    Rat absDetC;   // |det C|, maintained incrementally

    struct Origin {
        Matrix Bo;                      // identity over the basis columns
        Matrix Vo;
        std::vector<Vec> vo;            // starting simplex vertices
        std::vector<ConstraintId> basisIds;
    } origin;

    std::size_t column_for(ConstraintId id, const Vec& row) {
        auto it = columnOf.find(id);
        if (it != columnOf.end()) return it->second;
        std::size_t col = ids.size();
        ids.push_back(id);
        columnOf.emplace(id, col);
        B.append_zero_col();
        rowsA.append_row(row);
        return col;
    }

    std::size_t row_support(std::size_t row) const {
        std::size_t s = 0;
        for (std::size_t j = 0; j < B.cols(); ++j)
            if (B(row, j) != 0) ++s;
        return s;
    }
    std::size_t max_support() const {
        std::size_t s = 0;
        for (std::size_t i = 0; i < n; ++i) s = std::max(s, row_support(i));
        return s;
    }
};

struct Vertices {
    std::vector<Vec> v;  // v_k = V e_k / d_k
    Vec vbar;            // sum of vertices
    Vec center;          // vbar / (n+1)
};

inline Vertices vertices(const DmaState& st) {
    Vertices out;
    out.vbar = Vec(st.n, Orient::Col);
    for (std::size_t k = 0; k < st.n; ++k) {
        Vec vk = st.V.col(k);
        vk *= 1 / st.d[k];
        out.vbar += vk;
        out.v.push_back(std::move(vk));
    }
    out.center = out.vbar * make_rat(1, static_cast<long>(st.n) + 1);
    return out;
}

inline Rat valuation(const DmaState& st) {
    Rat val = st.absDetC;
    for (std::size_t k = 0; k < st.n; ++k) val *= st.d[k];
    return val;
}

inline double valuation_log2(const DmaState& st) { return log2_abs_approx(valuation(st)); }

inline double max_vertex_log2(const Vertices& verts) {
    Rat m = 0;
    for (const Vec& v : verts.v) {
        Rat a = max_abs(v);
        if (a > m) m = a;
    }
    return log2_abs_approx(m);
}

// B = identity on the basis columns, V = A_n^{-1}, d = u*V = (1,...,1).
inline DmaState init_state(const std::vector<std::pair<ConstraintId, Vec>>& basis) {
    const std::size_t n = basis.size();
    DmaState st;
    st.n = n;
    Matrix an(0, n);
    for (const auto& [id, row] : basis) {
        st.ids.push_back(id);
        st.columnOf.emplace(id, an.rows());
        an.append_row(row);
    }
    st.rowsA = an;
    st.B = Matrix::identity(n);
    st.V = invert(an);  // throws SingularMatrix when the basis is dependent
    st.u = Vec(n, Orient::Row);
    for (std::size_t k = 0; k < n; ++k) st.u += an.row(k);
    st.d = st.u * st.V;
    for (std::size_t k = 0; k < n; ++k)
        if (st.d[k] != 1) throw InvariantBreach("init: d != (1,...,1)");
    Rat dc = det(an);
    st.absDetC = abs(dc);

    st.origin.Bo = st.B;
    st.origin.Vo = st.V;
    st.origin.basisIds = st.ids;
    for (std::size_t k = 0; k < n; ++k) st.origin.vo.push_back(st.V.col(k));
    return st;
}

// s = n-1, except n = 2 where s = n-1 = 1 would make t = (s^2-1)av vanish.
inline long choose_s(std::size_t n) {
    if (n < 2) throw std::invalid_argument("choose_s: n must be >= 2");
    return n == 2 ? 2 : static_cast<long>(n) - 1;
}

// (1 - 1/s^2)^(n-1) * (1 + n/(s^2-1)), the per-step lower bound on lambda.
inline Rat gain_bound(std::size_t n, long s) {
    if (s < 2) throw std::invalid_argument("gain_bound: s must be >= 2");
    Rat base = make_rat(s * s - 1, s * s);
    Rat out = 1;
    for (std::size_t k = 1; k < n; ++k) out *= base;
    out *= 1 + make_rat(static_cast<long>(n), s * s - 1);
    return out;
}

// j = argmax_k a.v_k (ties to lowest k); nullopt when the maximum is <= 0,
// in which case the early infeasibility certificate applies.
inline std::optional<std::size_t> choose_pivot(const Vertices& verts, const Vec& a) {
    std::size_t best = 0;
    Rat bestVal = dot(a, verts.v[0]);
    for (std::size_t k = 1; k < verts.v.size(); ++k) {
        Rat val = dot(a, verts.v[k]);
        if (val > bestVal) {
            bestVal = val;
            best = k;
        }
    }
    if (bestVal <= 0) return std::nullopt;
    return best;
}

// One standard step: B_{j,i} += 1/(t d_j) with t = (s^2-1)av (optionally
// rounded), V updated by the matching Sherman-Morrison formula
// V' = V - v_j (aV) / (t + av), d and |det C| updated exactly.
inline StepReport standard_step(DmaState& st, ConstraintId i, const Vec& a, std::size_t j,
                                long s, std::optional<unsigned> roundBits = std::nullopt) {
    const std::size_t n = st.n;
    Vertices verts = vertices(st);
    Rat av = dot(a, verts.v[j]);
    if (av <= 0) throw InvariantBreach("standard_step: a.v_j <= 0");

    const bool rounded = roundBits.has_value();
    Rat t = Rat(s * s - 1) * av;
    if (rounded) t = round_sig(t, *roundBits);

    Vec aV = a * st.V;
    Rat denom = t + av;  // = s^2 av in exact mode
    Matrix vNew = st.V;
    for (std::size_t r = 0; r < n; ++r) {
        if (verts.v[j][r] == 0) continue;
        Rat f = verts.v[j][r] / denom;
        for (std::size_t c = 0; c < n; ++c) vNew(r, c) -= f * aV[c];
    }

    Rat detSigma = 1 + av / t;
    Vec deltas(n, Orient::Row);
    Vec dNew(n, Orient::Row);
    if (!rounded) {
        // Closed forms; delta_j is never recomputed by division so the
        // |det C| telescoping stays exact.
        Rat s2av = Rat(s * s) * av;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j)
                deltas[k] = 1 - make_rat(1, s * s);
            else
                deltas[k] = 1 - dot(a, verts.v[k]) / s2av;
        }
        for (std::size_t k = 0; k < n; ++k) dNew[k] = st.d[k] * deltas[k];
    } else {
        dNew = st.u * vNew;
        for (std::size_t k = 0; k < n; ++k) {
            if (dNew[k] <= 0) throw GainViolated();
            deltas[k] = dNew[k] / st.d[k];
        }
    }

    Rat lambda = detSigma;
    for (std::size_t k = 0; k < n; ++k) lambda *= deltas[k];

    Rat bound = gain_bound(n, s);
    if (lambda < bound) {
        if (rounded) throw GainViolated();
        throw InvariantBreach("standard_step: exact gain below bound");
    }
    for (std::size_t k = 0; k < n; ++k)
        if (dNew[k] <= 0) throw InvariantBreach("standard_step: d' not positive");

    // Commit.
    Rat dj = st.d[j];
    std::size_t col = st.column_for(i, a);
    st.B(j, col) += 1 / (t * dj);
    st.V = std::move(vNew);
    st.d = std::move(dNew);
    st.absDetC *= detSigma;

    StepReport rep;
    rep.type = StepType::Standard;
    rep.i = i;
    rep.j = static_cast<long>(j);
    rep.s = s;
    rep.t = t;
    rep.lambda = lambda;
    rep.deltas = deltas;
    rep.dBefore = Vec(n, Orient::Row);
    for (std::size_t k = 0; k < n; ++k) rep.dBefore[k] = st.d[k] / deltas[k];
    rep.valuationExact = valuation(st);
    rep.valuationLog2 = log2_abs_approx(rep.valuationExact);
    rep.maxSupport = st.max_support();
    return rep;
}

// Exact re-checks of every DmaState invariant; used by tests and the driver.
inline void check_invariants(const DmaState& st) {
    Matrix c = st.B * st.rowsA;
    if (!(st.V * c == Matrix::identity(st.n))) throw InvariantBreach("V(BA) != I");
    if (!(st.u * st.V == st.d)) throw InvariantBreach("d != uV");
    for (std::size_t k = 0; k < st.n; ++k)
        if (st.d[k] <= 0) throw InvariantBreach("d not positive");
    for (std::size_t i = 0; i < st.B.rows(); ++i)
        for (std::size_t j = 0; j < st.B.cols(); ++j)
            if (st.B(i, j) < 0) throw InvariantBreach("B has a negative entry");
    if (abs(det(c)) != st.absDetC) throw InvariantBreach("absDetC out of sync");
}

}  // namespace dma
