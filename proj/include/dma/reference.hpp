#pragma once

#include <set>

#include "dma/certify.hpp"

namespace dma {

struct BudgetExceeded : std::runtime_error {
    BudgetExceeded() : std::runtime_error("Fourier-Motzkin row budget exceeded") {}
};

struct FMVerdict {
    bool feasible = false;
    std::optional<Vec> witness;
};

namespace fm_detail {

// Scale to the canonical integer representative (content 1, kept sign) so
// duplicate inequalities collapse and coefficient growth stays tame.
inline std::vector<Rat> normalize(const Vec& row) {
    Int num = 0, den = 1;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] == 0) continue;
        mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), row[i].get_num().get_mpz_t());
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), row[i].get_den().get_mpz_t());
    }
    std::vector<Rat> out(row.size());
    if (num == 0) return out;
    Rat scale = make_rat(den, num);
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = row[i] * scale;
    return out;
}

// Strict homogeneous system over `vars` variables; rows may be rational.
inline std::optional<std::vector<Rat>> solve(std::vector<std::vector<Rat>> rows, std::size_t vars,
                                             std::size_t rowBudget) {
    if (rows.size() > rowBudget) throw BudgetExceeded();

    // A zero row is the contradiction 0 > 0.
    for (const auto& r : rows)
        if (std::all_of(r.begin(), r.end(), [](const Rat& x) { return x == 0; }))
            return std::nullopt;

    if (vars == 1) {
        bool pos = false, neg = false;
        for (const auto& r : rows) (r[0] > 0 ? pos : neg) = true;
        if (pos && neg) return std::nullopt;
        return std::vector<Rat>{Rat(neg ? -1 : 1)};
    }

    const std::size_t e = vars - 1;  // eliminate the last variable
    std::vector<std::vector<Rat>> pos, neg;
    std::set<std::vector<Rat>> reducedSet;
    auto addReduced = [&](const Vec& full) {
        Vec trunc(e, Orient::Row);
        for (std::size_t i = 0; i < e; ++i) trunc[i] = full[i];
        reducedSet.insert(normalize(trunc));
    };

    for (auto& r : rows) {
        if (r[e] > 0)
            pos.push_back(std::move(r));
        else if (r[e] < 0)
            neg.push_back(std::move(r));
        else
            addReduced(Vec(std::move(r)));
    }
    for (const auto& p : pos)
        for (const auto& q : neg) {
            // (-c_q) p + c_p q cancels x_e; positive multipliers keep strictness.
            Vec combo(vars, Orient::Row);
            for (std::size_t i = 0; i < vars; ++i) combo[i] = -q[e] * p[i] + p[e] * q[i];
            addReduced(combo);
            if (reducedSet.size() > rowBudget) throw BudgetExceeded();
        }

    std::vector<std::vector<Rat>> reduced(reducedSet.begin(), reducedSet.end());

    std::optional<std::vector<Rat>> sub;
    if (reduced.empty()) {
        // Possible only when pos or neg is empty, so x_e is one-sided below
        // and any partial point works.
        sub = std::vector<Rat>(e, Rat(1));
    } else {
        sub = solve(std::move(reduced), e, rowBudget);
        if (!sub) return std::nullopt;
    }

    // Back-substitute: strict open interval for x_e.
    std::optional<Rat> lower, upper;
    for (const auto& p : pos) {
        Rat rest = 0;
        for (std::size_t i = 0; i < e; ++i) rest += p[i] * (*sub)[i];
        Rat bound = -rest / p[e];
        if (!lower || bound > *lower) lower = bound;
    }
    for (const auto& q : neg) {
        Rat rest = 0;
        for (std::size_t i = 0; i < e; ++i) rest += q[i] * (*sub)[i];
        Rat bound = -rest / q[e];
        if (!upper || bound < *upper) upper = bound;
    }

    Rat x;
    if (lower && upper) {
        // The combined rows guarantee a nonempty open interval.
        if (!(*lower < *upper)) throw InvariantBreach("FM interval empty after elimination");
        x = (*lower + *upper) / 2;
    } else if (lower) {
        x = *lower + 1;
    } else if (upper) {
        x = *upper - 1;
    } else {
        x = 1;
    }
    sub->push_back(x);
    return sub;
}

}  // namespace fm_detail

// Independent brute-force feasibility oracle; exponential, desk-scale only.
// Never used on the solve path.
inline FMVerdict fm_feasible(const InequalitySystem& sys, std::size_t rowBudget = 4096) {
    std::vector<std::vector<Rat>> rows;
    for (std::size_t i = 0; i < sys.m(); ++i) rows.push_back(sys.A.row(i).data());
    auto sol = fm_detail::solve(std::move(rows), sys.n(), rowBudget);
    FMVerdict out;
    out.feasible = sol.has_value();
    if (sol) {
        Vec w(std::move(*sol), Orient::Col);
        WitnessCheck chk = verify_witness(sys, w);
        if (!chk.ok) throw InvariantBreach("FM witness fails its own system");
        out.witness = w;
    }
    return out;
}

}  // namespace dma
