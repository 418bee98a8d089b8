#pragma once

#include <variant>

#include "dma/core.hpp"

namespace dma {

struct VerificationFailed : std::runtime_error {
    explicit VerificationFailed(const std::string& what)
        : std::runtime_error("certificate verification failed: " + what) {}
};

enum class CertKind { Exact, Approximate };

// Farkas-style infeasibility certificate: b >= 0, b != 0, keyed by
// ConstraintId. Exact: b.A = 0. Approximate: |b.A| < b.1 / 4^L, checked in
// rationals as |b.A|^2 * 16^L < (b.1)^2.
struct InfeasibilityCertificate {
    CertKind kind = CertKind::Exact;
    std::vector<std::pair<ConstraintId, Rat>> entries;

    Rat mass() const {
        Rat s = 0;
        for (const auto& [id, v] : entries) s += v;
        return s;
    }
};

struct Witness {
    Vec x;
    Rat margin;  // min_k a_k . x over the checked rows
};

enum class OutcomeStatus { Feasible, Infeasible, BudgetExhausted };

struct Outcome {
    OutcomeStatus status = OutcomeStatus::BudgetExhausted;
    std::optional<Witness> witness;
    std::optional<InfeasibilityCertificate> certificate;
    unsigned long steps = 0;
    double lastValuationLog2 = 0.0;
};

// Exact early certificate b = e_i - (aV)B, applicable when every a.v_k <= 0:
// then (aV)_k = (a.v_k) d_k <= 0 and B >= 0 give b >= 0, while
// bA = a - aV(BA) = 0 and b_i >= 1. All three are re-verified exactly.
inline InfeasibilityCertificate early_certificate(const DmaState& st, ConstraintId i,
                                                  const Vec& a) {
    Vec aV = a * st.V;
    Vec coeff = aV * st.B;  // row over revealed columns

    std::vector<std::pair<ConstraintId, Rat>> entries;
    Vec bA = a;  // e_i contributes row a itself
    Rat bi = 1;
    for (std::size_t k = 0; k < st.ids.size(); ++k) {
        Rat val = -coeff[k];
        if (st.ids[k] == i) {
            bi += val;
            continue;
        }
        if (val == 0) continue;
        if (val < 0) throw VerificationFailed("early certificate has a negative entry");
        bA += val * st.rowsA.row(k);
        entries.emplace_back(st.ids[k], val);
    }
    if (bi < 1) throw VerificationFailed("early certificate: b_i < 1");
    bA += (bi - 1) * a;
    entries.emplace_back(i, bi);
    if (!bA.is_zero()) throw VerificationFailed("early certificate: bA != 0");

    InfeasibilityCertificate cert;
    cert.kind = CertKind::Exact;
    cert.entries = std::move(entries);
    std::sort(cert.entries.begin(), cert.entries.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return cert;
}

// b = dB has bA = u exactly, so the |bA| < b.1 / 4^L test reduces to
// watching b.1: fires iff |u|^2 16^L < (b.1)^2.
inline std::optional<InfeasibilityCertificate> mass_certificate_check(const DmaState& st,
                                                                      const BitParams& bp) {
    Vec b = st.d * st.B;
    Rat mass = 0;
    for (std::size_t k = 0; k < b.size(); ++k) mass += b[k];
    Rat lhs = norm_sq(st.u) * Rat(Int(1) << (4ul * bp.L));
    if (!(lhs < mass * mass)) return std::nullopt;

    InfeasibilityCertificate cert;
    cert.kind = CertKind::Approximate;
    for (std::size_t k = 0; k < b.size(); ++k)
        if (b[k] != 0) cert.entries.emplace_back(st.ids[k], b[k]);
    std::sort(cert.entries.begin(), cert.entries.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return cert;
}

struct WitnessCheck {
    bool ok = false;
    Rat margin;
    ConstraintId violatedRow = -1;
};

inline WitnessCheck verify_witness(const InequalitySystem& sys, const Vec& x) {
    WitnessCheck out;
    bool first = true;
    for (std::size_t k = 0; k < sys.m(); ++k) {
        Rat v = dot(sys.A.row(k), x);
        if (v <= 0) {
            out.ok = false;
            out.violatedRow = static_cast<ConstraintId>(k);
            return out;
        }
        if (first || v < out.margin) out.margin = v;
        first = false;
    }
    out.ok = !first;
    return out;
}

inline WitnessCheck verify_witness(Oracle& oracle, const Vec& x) {
    WitnessCheck out;
    OracleResponse resp = oracle.find_violated(x);
    if (resp) {
        out.violatedRow = resp->id;
        return out;
    }
    out.ok = true;
    out.margin = 0;  // no finite row set; margin is not meaningful here
    return out;
}

// Re-derives b >= 0, b != 0 and the kind-specific identity from scratch.
// `rowOf` maps a ConstraintId to its row.
template <typename RowFn>
inline bool verify_certificate_rows(RowFn&& rowOf, std::size_t n,
                                    const InfeasibilityCertificate& cert,
                                    const std::optional<BitParams>& bp) {
    if (cert.entries.empty()) return false;
    Vec bA(n, Orient::Row);
    Rat mass = 0;
    bool nonzero = false;
    for (const auto& [id, val] : cert.entries) {
        if (val < 0) return false;
        if (val > 0) nonzero = true;
        bA += val * rowOf(id);
        mass += val;
    }
    if (!nonzero) return false;
    if (cert.kind == CertKind::Exact) return bA.is_zero();
    if (!bp) return false;
    Rat lhs = norm_sq(bA) * Rat(Int(1) << (4ul * bp->L));
    return lhs < mass * mass;
}

inline bool verify_certificate(const InequalitySystem& sys, const InfeasibilityCertificate& cert,
                               const std::optional<BitParams>& bp = std::nullopt) {
    for (const auto& [id, val] : cert.entries)
        if (id < 0 || static_cast<std::size_t>(id) >= sys.m()) return false;
    return verify_certificate_rows(
        [&](ConstraintId id) { return sys.A.row(static_cast<std::size_t>(id)); }, sys.n(), cert,
        bp);
}

// JSON wire formats.
inline nlohmann::json certificate_to_json(const InfeasibilityCertificate& cert) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [id, val] : cert.entries)
        entries.push_back(nlohmann::json::array({id, rat_str(val)}));
    return nlohmann::json{{"kind", cert.kind == CertKind::Exact ? "exact" : "approximate"},
                          {"entries", std::move(entries)}};
}

inline InfeasibilityCertificate certificate_from_json(const nlohmann::json& j) {
    InfeasibilityCertificate cert;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "exact")
        cert.kind = CertKind::Exact;
    else if (kind == "approximate")
        cert.kind = CertKind::Approximate;
    else
        throw std::invalid_argument("certificate kind must be 'exact' or 'approximate'");
    for (const auto& e : j.at("entries"))
        cert.entries.emplace_back(e.at(0).get<ConstraintId>(), parse_rat(e.at(1).get<std::string>()));
    return cert;
}

inline nlohmann::json witness_to_json(const Vec& x) {
    nlohmann::json coords = nlohmann::json::array();
    for (std::size_t i = 0; i < x.size(); ++i) coords.push_back(rat_str(x[i]));
    return nlohmann::json{{"x", std::move(coords)}};
}

inline Vec witness_from_json(const nlohmann::json& j) {
    const auto& coords = j.at("x");
    Vec x(coords.size(), Orient::Col);
    for (std::size_t i = 0; i < coords.size(); ++i) x[i] = parse_rat(coords[i].get<std::string>());
    return x;
}

}  // namespace dma
