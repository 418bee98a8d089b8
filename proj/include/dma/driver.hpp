#pragma once

#include <cstdio>
#include <functional>

#include "dma/certify.hpp"
#include "dma/deviations.hpp"

namespace dma {

struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

enum class SolveMode { Exact, Rounded };

struct SolveConfig {
    SolveMode mode = SolveMode::Exact;
    unsigned sigBitsFactor = 2;     // t rounded to factor*l bits, B to factor*L bits
    unsigned maxStepsFactor = 20;   // budget = factor * n^3 * L
    double longEdgeFactor = 4.0;    // trigger at log2|v|_inf >= factor * L
    std::optional<long> sOverride;
    bool witnessCenter = false;     // return vbar/(n+1) instead of vbar
    bool checkInvariants = true;
    bool keepReports = false;       // retain exact per-operation StepReports
    // Optional per-operation hook (state after the operation, its report).
    std::function<void(const DmaState&, const StepReport&)> stepHook;
};

struct TraceRow {
    unsigned long step = 0;
    std::string type;
    long i = -1, j = -1;
    double lambdaLog2 = 0.0;
    double valuationLog2 = 0.0;
    double maxVertexLog2 = 0.0;
    std::size_t maxSupport = 0;
    std::string note;
};

struct RunStats {
    unsigned long standardSteps = 0;
    unsigned long roundingFallbacks = 0;
    unsigned long longEdgeAccepted = 0;
    unsigned long longEdgeRejected = 0;
    unsigned long sparsifies = 0;
    unsigned long budget = 0;
};

struct SolveResult {
    Outcome outcome;
    std::vector<TraceRow> trace;
    std::vector<StepReport> reports;  // filled when config.keepReports
    RunStats stats;
};

inline std::string format_log2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string trace_to_csv(const std::vector<TraceRow>& rows) {
    std::string out = "step,type,i,j,lambda_log2,valuation_log2,max_vertex_log2,max_support,note\n";
    for (const auto& r : rows) {
        out += std::to_string(r.step) + ',' + r.type + ',' + std::to_string(r.i) + ',' +
               std::to_string(r.j) + ',' + format_log2(r.lambdaLog2) + ',' +
               format_log2(r.valuationLog2) + ',' + format_log2(r.maxVertexLog2) + ',' +
               std::to_string(r.maxSupport) + ',' + r.note + '\n';
    }
    return out;
}

namespace driver_detail {

inline void push_trace(SolveResult& res, unsigned long step, const StepReport& rep,
                       double maxVertexLog2) {
    TraceRow row;
    row.step = step;
    row.type = step_type_name(rep.type);
    if (!rep.accepted) row.type += "_rejected";
    row.i = static_cast<long>(rep.i);
    row.j = rep.j;
    row.lambdaLog2 = log2_abs_approx(rep.lambda);
    row.valuationLog2 = rep.valuationLog2;
    row.maxVertexLog2 = maxVertexLog2;
    row.maxSupport = rep.maxSupport;
    row.note = rep.note;
    res.trace.push_back(std::move(row));
}

inline void record(SolveResult& res, const SolveConfig& cfg, const DmaState& st,
                   unsigned long step, const StepReport& rep) {
    double mv = max_vertex_log2(vertices(st));
    push_trace(res, step, rep, mv);
    if (cfg.keepReports) res.reports.push_back(rep);
    if (cfg.stepHook) cfg.stepHook(st, rep);
}

// Surrogate bit parameters for families that expose none (used only for step
// budgets and rounding widths, never for certificates).
inline BitParams surrogate_bits(const std::vector<std::pair<ConstraintId, Vec>>& basis,
                                std::size_t n) {
    std::size_t maxBits = bitlen(Int(static_cast<unsigned long>(n)));
    for (const auto& [id, row] : basis)
        for (std::size_t j = 0; j < n; ++j) {
            maxBits = std::max(maxBits, bitlen(row[j].get_num()));
            maxBits = std::max(maxBits, bitlen(row[j].get_den()));
        }
    BitParams bp;
    bp.l = static_cast<unsigned>(1 + maxBits);
    bp.L = static_cast<unsigned>(n) * bp.l;
    return bp;
}

// Rounds every B entry to `bits` significant bits and rebuilds V, d and
// |det C| exactly from the rounded B. Throws SingularMatrix or GainViolated
// (nonpositive d) when the rounded state is unusable.
inline void round_dual_matrix(DmaState& st, unsigned bits) {
    for (std::size_t i = 0; i < st.B.rows(); ++i)
        for (std::size_t j = 0; j < st.B.cols(); ++j)
            if (st.B(i, j) != 0) st.B(i, j) = round_sig(st.B(i, j), bits);
    Matrix c = st.B * st.rowsA;
    st.V = invert(c);
    st.d = st.u * st.V;
    for (std::size_t k = 0; k < st.n; ++k)
        if (st.d[k] <= 0) throw GainViolated();
    st.absDetC = abs(det(c));
}

// 1-D systems are solved by a direct sign scan: query +1 and -1; two
// opposite-sign violators combine into an exact Farkas certificate.
inline Outcome solve_one_dimensional(Oracle& oracle, const SolveConfig& cfg) {
    Outcome out;
    auto finishFeasible = [&](Rat x0) {
        out.status = OutcomeStatus::Feasible;
        Vec x(1, Orient::Col);
        x[0] = x0;
        out.witness = Witness{x, Rat(0)};
        return out;
    };
    Vec plus(1, Orient::Col), minus(1, Orient::Col);
    plus[0] = 1;
    minus[0] = -1;
    OracleResponse vPlus = oracle.find_violated(plus);
    if (!vPlus) return finishFeasible(1);
    OracleResponse vMinus = oracle.find_violated(minus);
    if (!vMinus) return finishFeasible(-1);

    Rat a1 = vPlus->row[0];   // <= 0
    Rat a2 = vMinus->row[0];  // >= 0
    InfeasibilityCertificate cert;
    cert.kind = CertKind::Exact;
    if (a1 == 0)
        cert.entries = {{vPlus->id, 1}};
    else if (a2 == 0)
        cert.entries = {{vMinus->id, 1}};
    else
        cert.entries = {{vPlus->id, a2}, {vMinus->id, -a1}};
    out.status = OutcomeStatus::Infeasible;
    out.certificate = std::move(cert);
    return out;
}

}  // namespace driver_detail

// The climbing loop over an oracle. `certBits` gates the approximate mass
// certificate; step budgets and rounding widths fall back to surrogate bit
// parameters when the oracle exposes none.
inline SolveResult solve_with_oracle(Oracle& oracle, const SolveConfig& cfg) {
    using namespace driver_detail;
    SolveResult res;
    const std::size_t n = oracle.dimension();

    if (n == 1) {
        res.outcome = solve_one_dimensional(oracle, cfg);
        return res;
    }

    auto basis = oracle.initial_basis();
    std::optional<BitParams> certBits = oracle.bit_params();
    BitParams bits = certBits ? *certBits : surrogate_bits(basis, n);

    DmaState st = init_state(basis);
    const long s = cfg.sOverride.value_or(choose_s(n));
    const unsigned long budget =
        static_cast<unsigned long>(cfg.maxStepsFactor) * n * n * n * bits.L;
    res.stats.budget = budget;
    const unsigned tBits = cfg.sigBitsFactor * bits.l;
    const unsigned bBits = cfg.sigBitsFactor * bits.L;
    Rat acceptedValuation = valuation(st);
    const Rat bound = gain_bound(n, s);

    for (unsigned long step = 0;; ++step) {
        Vertices verts = vertices(st);
        OracleResponse resp = oracle.find_violated(verts.vbar);
        if (!resp) {
            Vec x = cfg.witnessCenter ? verts.center : verts.vbar;
            WitnessCheck chk = verify_witness(oracle, x);
            if (!chk.ok) throw InvariantBreach("returned witness fails the oracle");
            res.outcome.status = OutcomeStatus::Feasible;
            res.outcome.witness = Witness{x, chk.margin};
            res.outcome.steps = res.stats.standardSteps;
            res.outcome.lastValuationLog2 = log2_abs_approx(acceptedValuation);
            return res;
        }

        std::optional<std::size_t> pivot = choose_pivot(verts, resp->row);
        if (!pivot) {
            InfeasibilityCertificate cert = early_certificate(st, resp->id, resp->row);
            res.outcome.status = OutcomeStatus::Infeasible;
            res.outcome.certificate = std::move(cert);
            res.outcome.steps = res.stats.standardSteps;
            res.outcome.lastValuationLog2 = log2_abs_approx(acceptedValuation);
            return res;
        }

        if (res.stats.standardSteps >= budget) {
            res.outcome.status = OutcomeStatus::BudgetExhausted;
            res.outcome.steps = res.stats.standardSteps;
            res.outcome.lastValuationLog2 = log2_abs_approx(acceptedValuation);
            return res;
        }

        StepReport rep;
        if (cfg.mode == SolveMode::Rounded) {
            DmaState snapshot = st;
            bool ok = true;
            try {
                rep = standard_step(st, resp->id, resp->row, *pivot, s, tBits);
                bool dueForRounding = (res.stats.standardSteps + 1) % n == 0 &&
                                      max_vertex_log2(vertices(st)) < 4.0 * bits.L;
                if (dueForRounding) {
                    round_dual_matrix(st, bBits);
                    rep.note = rep.note.empty() ? "b-rounded" : rep.note + ";b-rounded";
                }
                // The combined deviation must still clear the per-step bound.
                Rat lambdaEff = valuation(st) / acceptedValuation;
                if (lambdaEff < bound) throw GainViolated();
                rep.lambda = lambdaEff;
                rep.valuationExact = valuation(st);
                rep.valuationLog2 = log2_abs_approx(rep.valuationExact);
            } catch (const GainViolated&) {
                ok = false;
            } catch (const SingularMatrix&) {
                ok = false;
            }
            if (!ok) {
                st = std::move(snapshot);
                rep = standard_step(st, resp->id, resp->row, *pivot, s, std::nullopt);
                rep.type = StepType::RoundingFallback;
                ++res.stats.roundingFallbacks;
            }
        } else {
            rep = standard_step(st, resp->id, resp->row, *pivot, s, std::nullopt);
        }
        ++res.stats.standardSteps;
        acceptedValuation = rep.valuationExact;
        if (cfg.checkInvariants) check_invariants(st);
        record(res, cfg, st, res.stats.standardSteps, rep);

        // Lazy sparsity maintenance after the B mutation.
        for (std::size_t row = 0; row < n; ++row) {
            if (st.row_support(row) <= 2 * n) continue;
            StepReport srep = sparsify_row(st, row);
            ++res.stats.sparsifies;
            if (cfg.checkInvariants) check_invariants(st);
            record(res, cfg, st, res.stats.standardSteps, srep);
        }

        // Long-edge re-enclosure, guarded by the observable valuation.
        if (auto edge = long_edge_trigger(st, bits.L, cfg.longEdgeFactor)) {
            LongEdgeContext ctx = build_context(st, edge->first, edge->second);
            StepReport lrep = reenclose(st, ctx);
            double wLog2 = log2_abs_approx(norm_sq(ctx.w)) / 2.0;
            double target = wLog2 - 3.0 * bits.L;
            lrep.note += (lrep.note.empty() ? "" : ";");
            lrep.note += "gain_log2=" + format_log2(log2_abs_approx(lrep.lambda)) +
                         ";log2w_minus_3L=" + format_log2(target);
            if (lrep.accepted) {
                ++res.stats.longEdgeAccepted;
                acceptedValuation = lrep.valuationExact;
                if (cfg.checkInvariants) check_invariants(st);
            } else {
                ++res.stats.longEdgeRejected;
            }
            record(res, cfg, st, res.stats.standardSteps, lrep);
            if (lrep.accepted) {
                // The added B rows may have widened supports.
                for (std::size_t row = 0; row < n; ++row) {
                    if (st.row_support(row) <= 2 * n) continue;
                    StepReport srep = sparsify_row(st, row);
                    ++res.stats.sparsifies;
                    if (cfg.checkInvariants) check_invariants(st);
                    record(res, cfg, st, res.stats.standardSteps, srep);
                }
            }
        }

        if (certBits) {
            if (auto mass = mass_certificate_check(st, *certBits)) {
                res.outcome.status = OutcomeStatus::Infeasible;
                res.outcome.certificate = std::move(mass);
                res.outcome.steps = res.stats.standardSteps;
                res.outcome.lastValuationLog2 = log2_abs_approx(acceptedValuation);
                return res;
            }
        }
    }
}

// Full pipeline for a finite integer system: preprocess, solve in the
// prepared space, then map the witness (x = P y) or certificate row ids back
// to the original system and re-verify the outcome against it.
inline SolveResult solve_system(const InequalitySystem& sys, const SolveConfig& cfg) {
    if (sys.m() < 1 || sys.n() < 1) throw InputError("empty system");
    PreparedSystem prep = preprocess(sys);

    if (prep.degenerate()) {
        SolveResult res;
        res.outcome.status = OutcomeStatus::Infeasible;
        InfeasibilityCertificate cert;
        cert.kind = CertKind::Exact;
        cert.entries = {{static_cast<ConstraintId>(*prep.zeroRow), 1}};
        res.outcome.certificate = std::move(cert);
        if (!verify_certificate(sys, *res.outcome.certificate))
            throw InvariantBreach("zero-row certificate failed verification");
        return res;
    }

    DenseOracle oracle(prep);
    SolveResult res = solve_with_oracle(oracle, cfg);

    if (res.outcome.status == OutcomeStatus::Feasible) {
        Vec y = res.outcome.witness->x;
        Vec x = prep.projected ? prep.projector * y : y;
        WitnessCheck chk = verify_witness(sys, x);
        if (!chk.ok) throw InvariantBreach("mapped witness fails the original system");
        res.outcome.witness = Witness{std::move(x), chk.margin};
    } else if (res.outcome.status == OutcomeStatus::Infeasible) {
        InfeasibilityCertificate& cert = *res.outcome.certificate;
        for (auto& [id, val] : cert.entries)
            id = static_cast<ConstraintId>(prep.rowPermutation[static_cast<std::size_t>(id)]);
        std::sort(cert.entries.begin(), cert.entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::optional<BitParams> bp;
        if (cert.kind == CertKind::Approximate) bp = bit_params(prep.system);
        if (!verify_certificate(sys, cert, bp))
            throw InvariantBreach("mapped certificate failed verification");
    }
    return res;
}

}  // namespace dma
