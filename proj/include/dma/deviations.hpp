#pragma once

#include "dma/core.hpp"

namespace dma {

struct DegenerateOrigin : std::runtime_error {
    DegenerateOrigin() : std::runtime_error("origin simplex has zero spread along the edge") {}
};

struct KernelDeficit : std::runtime_error {
    KernelDeficit() : std::runtime_error("fewer kernel vectors than expected; sparsify aborted") {}
};

// One direction of the long-edge construction: given the edge direction w,
// the current extent wv = w.v_edge, the origin vertices and the face scale
// d_edge, produces the shift halfspace h = (M u - w) t.
struct EdgeDirection {
    Rat M;       // max_k w . vo_k
    Rat spread;  // max_{k,k'} w . (vo_k - vo_{k'})
    Rat tPrime;  // (wv - M) / spread
    Rat tDev;    // max{0, tPrime - 1} / (|w|^2 d_edge)
    Vec h;
};

inline EdgeDirection edge_direction(const Vec& w, const Rat& wv, const std::vector<Vec>& vo,
                                    const Vec& u, const Rat& dEdge) {
    EdgeDirection out;
    Rat lo = dot(w, vo[0]);
    out.M = lo;
    for (std::size_t k = 1; k < vo.size(); ++k) {
        Rat x = dot(w, vo[k]);
        if (x > out.M) out.M = x;
        if (x < lo) lo = x;
    }
    out.spread = out.M - lo;
    if (out.spread == 0) throw DegenerateOrigin();
    out.tPrime = (wv - out.M) / out.spread;
    Rat num = out.tPrime - 1;
    if (num < 0) num = 0;
    out.tDev = num / (norm_sq(w) * dEdge);
    out.h = (out.M * u - w) * out.tDev;
    return out;
}

struct LongEdgeContext {
    std::size_t iEdge = 0, jEdge = 0;  // vertex indices of the longest edge
    Vec w;                             // v_j - v_i
    EdgeDirection fwd;                 // direction w, extent at v_j, scale d_i
    EdgeDirection rev;                 // direction -w, extent at v_i, scale d_j
};

// Fires iff log2(max_k |v_k|_inf) >= factor*L; returns the pair maximizing
// |v_j - v_i|^2 exactly, ties to the lexicographically smallest pair.
inline std::optional<std::pair<std::size_t, std::size_t>> long_edge_trigger(
    const DmaState& st, unsigned L, double factor) {
    Vertices verts = vertices(st);
    if (max_vertex_log2(verts) < factor * static_cast<double>(L)) return std::nullopt;
    std::size_t bi = 0, bj = 1;
    Rat best = -1;
    for (std::size_t i = 0; i + 1 < st.n; ++i)
        for (std::size_t j = i + 1; j < st.n; ++j) {
            Rat len = norm_sq(verts.v[j] - verts.v[i]);
            if (len > best) {
                best = len;
                bi = i;
                bj = j;
            }
        }
    return std::make_pair(bi, bj);
}

inline LongEdgeContext build_context(const DmaState& st, std::size_t iEdge, std::size_t jEdge) {
    Vertices verts = vertices(st);
    LongEdgeContext ctx;
    ctx.iEdge = iEdge;
    ctx.jEdge = jEdge;
    ctx.w = verts.v[jEdge] - verts.v[iEdge];
    if (ctx.w.is_zero()) throw DegenerateOrigin();
    ctx.fwd = edge_direction(ctx.w, dot(ctx.w, verts.v[jEdge]), st.origin.vo, st.u, st.d[iEdge]);
    Vec wNeg = -ctx.w;
    ctx.rev = edge_direction(wNeg, dot(wNeg, verts.v[iEdge]), st.origin.vo, st.u, st.d[jEdge]);
    return ctx;
}

namespace detail {

// B-row increment realizing h = b A: b = t (M 1 - w Vo) Bo over the origin
// basis columns. Nonnegative since M is the maximum of w.vo_k.
inline Vec origin_increment(const DmaState& st, const Vec& w, const Rat& M, const Rat& tDev) {
    Vec wVo = w * st.origin.Vo;
    Vec b(st.n, Orient::Row);
    for (std::size_t k = 0; k < st.n; ++k) b[k] = (M - wVo[k]) * tDev;
    Vec out = b * st.origin.Bo;
    for (std::size_t k = 0; k < st.n; ++k)
        if (out[k] < 0) throw InvariantBreach("reenclose: negative B increment");
    return out;
}

}  // namespace detail

// Replaces faces c_i, c_j with c_i + h_ij, c_j + h_ji by adding the matching
// nonnegative rows to B, then rebuilds V, d and |det C| from scratch. The
// deviation is accepted only if the valuation strictly increases; otherwise
// the state is left bit-identical and the report records the rejection.
inline StepReport reenclose(DmaState& st, const LongEdgeContext& ctx) {
    StepReport rep;
    rep.type = StepType::LongEdge;
    rep.i = static_cast<ConstraintId>(ctx.iEdge);
    rep.j = static_cast<long>(ctx.jEdge);

    Rat before = valuation(st);
    rep.valuationExact = before;
    rep.valuationLog2 = log2_abs_approx(before);
    rep.maxSupport = st.max_support();

    if (ctx.fwd.tDev == 0 && ctx.rev.tDev == 0) {
        rep.accepted = false;
        rep.note = "rejected:zero-shift";
        return rep;
    }

    Vec incI = detail::origin_increment(st, ctx.w, ctx.fwd.M, ctx.fwd.tDev);
    Vec incJ = detail::origin_increment(st, -ctx.w, ctx.rev.M, ctx.rev.tDev);

    Matrix oldB = st.B;
    for (std::size_t k = 0; k < st.n; ++k) {
        std::size_t col = st.columnOf.at(st.origin.basisIds[k]);
        st.B(ctx.iEdge, col) += incI[k];
        st.B(ctx.jEdge, col) += incJ[k];
    }

    auto reject = [&](const char* why) {
        st.B = oldB;
        rep.accepted = false;
        rep.note = std::string("rejected:") + why;
        return rep;
    };

    Matrix c = st.B * st.rowsA;
    Matrix vNew;
    try {
        vNew = invert(c);
    } catch (const SingularMatrix&) {
        return reject("singular");
    }
    Vec dNew = st.u * vNew;
    for (std::size_t k = 0; k < st.n; ++k)
        if (dNew[k] <= 0) return reject("nonpositive-d");
    Rat absDetNew = abs(det(c));
    Rat after = absDetNew;
    for (std::size_t k = 0; k < st.n; ++k) after *= dNew[k];
    if (after <= before) return reject("no-gain");

    st.V = std::move(vNew);
    st.d = std::move(dNew);
    st.absDetC = absDetNew;

    rep.accepted = true;
    rep.lambda = after / before;
    rep.valuationExact = after;
    rep.valuationLog2 = log2_abs_approx(after);
    rep.maxSupport = st.max_support();
    return rep;
}

namespace detail {

// Kernel-based support reduction of one nonnegative row. F holds vectors f
// (parallel to `cols`) with f A = 0 and support inside the row's support.
// Sign-normalized pivoting keeps every intermediate b nonnegative.
inline void eliminate_with_kernel(Vec& b, std::vector<Vec>& F, std::vector<std::size_t>& active) {
    auto pivot_with = [&](std::size_t fi, std::size_t p) {
        const Vec f = F[fi];
        Rat scale = b[p] / f[p];
        for (std::size_t q : active) {
            b[q] -= scale * f[q];
            if (b[q] < 0) throw InvariantBreach("sparsify: negative intermediate");
        }
        b[p] = 0;
        for (std::size_t gi = 0; gi < F.size(); ++gi) {
            if (gi == fi || F[gi][p] == 0) continue;
            Rat g = F[gi][p] / f[p];
            for (std::size_t q : active) F[gi][q] -= g * f[q];
        }
        F.erase(F.begin() + static_cast<long>(fi));
        std::erase(active, p);
    };

    while (!F.empty()) {
        // Drop kernel vectors that became zero on the active set.
        std::erase_if(F, [&](const Vec& f) {
            for (std::size_t p : active)
                if (f[p] != 0) return false;
            return true;
        });
        if (F.empty()) break;

        // Positions whose b entry already vanished: a degenerate pivot there
        // (scale 0) retires one kernel vector without moving b; positions no
        // kernel vector touches simply leave the active set.
        {
            bool degenerate = false;
            std::size_t idx = 0;
            while (idx < active.size()) {
                std::size_t p = active[idx];
                if (b[p] != 0) {
                    ++idx;
                    continue;
                }
                std::size_t fi = F.size();
                for (std::size_t gi = 0; gi < F.size(); ++gi)
                    if (F[gi][p] != 0) {
                        fi = gi;
                        break;
                    }
                if (fi == F.size()) {
                    active.erase(active.begin() + static_cast<long>(idx));
                    continue;
                }
                pivot_with(fi, p);
                degenerate = true;
                break;
            }
            if (degenerate) continue;
            if (active.empty()) break;
        }

        std::size_t bestF = 0, bestP = 0;
        Rat bestRatio;
        bool have = false;
        for (std::size_t fi = 0; fi < F.size(); ++fi) {
            // Normalize the sign so the maximal ratio f_p/b_p is positive.
            Rat fmax;
            bool fset = false;
            for (std::size_t p : active) {
                Rat ratio = F[fi][p] / b[p];
                if (!fset || ratio > fmax) {
                    fmax = ratio;
                    fset = true;
                }
            }
            if (fmax <= 0) {
                F[fi] = -F[fi];
            }
            for (std::size_t p : active) {
                Rat ratio = F[fi][p] / b[p];
                if (!have || ratio > bestRatio ||
                    (ratio == bestRatio && (p < bestP || (p == bestP && fi < bestF)))) {
                    bestRatio = ratio;
                    bestF = fi;
                    bestP = p;
                    have = true;
                }
            }
        }
        if (!have || bestRatio <= 0) throw KernelDeficit();
        pivot_with(bestF, bestP);
    }
}

}  // namespace detail

// When a B row's support exceeds 2n, reduce it to <= n without changing
// B*A (hence V, d and the valuation are untouched).
inline StepReport sparsify_row(DmaState& st, std::size_t rowIndex) {
    const std::size_t n = st.n;
    StepReport rep;
    rep.type = StepType::Sparsify;
    rep.i = static_cast<ConstraintId>(rowIndex);
    rep.valuationExact = valuation(st);
    rep.valuationLog2 = log2_abs_approx(rep.valuationExact);

    Vec b = st.B.row(rowIndex);
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < b.size(); ++j)
        if (b[j] != 0) support.push_back(j);
    if (support.size() <= 2 * n) {
        rep.accepted = false;
        rep.note = "noop";
        rep.maxSupport = st.max_support();
        return rep;
    }

    Matrix sub(0, n);
    for (std::size_t j : support) sub.append_row(st.rowsA.row(j));
    std::vector<Vec> kern = kernel_basis(sub);  // vectors over support positions
    if (kern.size() < support.size() - n) throw KernelDeficit();

    // Re-express kernel vectors over full column indices.
    std::vector<Vec> F;
    for (const Vec& k : kern) {
        Vec f(b.size(), Orient::Row);
        for (std::size_t p = 0; p < support.size(); ++p) f[support[p]] = k[p];
        F.push_back(std::move(f));
    }

    Vec bAold = b * st.rowsA;
    std::vector<std::size_t> active = support;
    detail::eliminate_with_kernel(b, F, active);
    if (!(b * st.rowsA == bAold)) throw InvariantBreach("sparsify changed bA");

    st.B.set_row(rowIndex, b);
    rep.note = "support=" + std::to_string(active.size());
    rep.maxSupport = st.max_support();
    return rep;
}

}  // namespace dma
