#pragma once

#include <random>

#include "dma/certify.hpp"

namespace dma {

enum class GenKind { Feasible, Infeasible, Random, StressEdge };

inline GenKind gen_kind_from_string(const std::string& s) {
    if (s == "feasible") return GenKind::Feasible;
    if (s == "infeasible") return GenKind::Infeasible;
    if (s == "random") return GenKind::Random;
    if (s == "stress-edge") return GenKind::StressEdge;
    throw std::invalid_argument("unknown gen kind: " + s);
}

struct GeneratedInstance {
    InequalitySystem system;
    std::optional<Vec> plantedWitness;                    // feasible kind
    std::optional<InfeasibilityCertificate> plantedCert;  // infeasible kind
};

// Deterministic instance generator. Entries are bounded by 2^entryBits - 1
// except for the dependent row of infeasible instances (sum of two rows) and
// the crafted rows of stress-edge instances.
inline GeneratedInstance generate(GenKind kind, std::size_t n, std::size_t m, unsigned entryBits,
                                  std::uint64_t seed) {
    if (n < 1 || m < 1 || entryBits < 1)
        throw std::invalid_argument("generate: need n >= 1, m >= 1, entryBits >= 1");

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m),
                      static_cast<std::uint32_t>(entryBits), static_cast<std::uint32_t>(kind)};
    std::mt19937_64 rng(seq);
    const long bound = (1L << entryBits) - 1;
    std::uniform_int_distribution<long> entry(-bound, bound);

    auto randomRow = [&](bool nonzero) {
        Vec row(n, Orient::Row);
        do {
            for (std::size_t j = 0; j < n; ++j) row[j] = Rat(entry(rng));
        } while (nonzero && row.is_zero());
        return row;
    };

    GeneratedInstance out;
    Matrix a(0, n);

    switch (kind) {
        case GenKind::Feasible: {
            Vec target = randomRow(true);
            while (a.rows() < m) {
                Vec row = randomRow(true);
                Rat v = dot(row, target);
                if (v == 0) continue;
                if (v < 0) row = -row;
                a.append_row(row);
            }
            out.plantedWitness = Vec(target.data(), Orient::Col);
            break;
        }
        case GenKind::Infeasible: {
            if (m < 2) throw std::invalid_argument("infeasible kind needs m >= 2");
            if (m == 2) {
                Vec row = randomRow(true);
                a.append_row(row);
                a.append_row(-row);
                out.plantedCert = InfeasibilityCertificate{CertKind::Exact, {{0, 1}, {1, 1}}};
                break;
            }
            std::uniform_int_distribution<std::size_t> pick(0, m - 2);
            std::size_t p = 0, q = 0;
            Vec sum;
            // Draw row sets until some pair has a nonzero sum (almost always
            // the first set); prefer a random pair, fall back to a scan.
            for (;;) {
                while (a.rows() + 1 < m) a.append_row(randomRow(true));
                bool found = false;
                for (int tries = 0; tries < 32 && !found; ++tries) {
                    p = pick(rng);
                    q = pick(rng);
                    if (p == q) continue;
                    sum = a.row(p) + a.row(q);
                    found = !sum.is_zero();
                }
                for (std::size_t i = 0; i + 1 < m && !found; ++i)
                    for (std::size_t j = i + 1; j + 1 < m && !found; ++j) {
                        sum = a.row(i) + a.row(j);
                        if (!sum.is_zero()) {
                            p = i;
                            q = j;
                            found = true;
                        }
                    }
                if (found) break;
                a = Matrix(0, n);
            }
            a.append_row(-sum);
            InfeasibilityCertificate cert;
            cert.kind = CertKind::Exact;
            if (p > q) std::swap(p, q);
            cert.entries = {{static_cast<ConstraintId>(p), 1},
                            {static_cast<ConstraintId>(q), 1},
                            {static_cast<ConstraintId>(m - 1), 1}};
            out.plantedCert = std::move(cert);
            break;
        }
        case GenKind::Random: {
            for (std::size_t i = 0; i < m; ++i) a.append_row(randomRow(false));
            break;
        }
        case GenKind::StressEdge: {
            if (n < 2) throw std::invalid_argument("stress-edge kind needs n >= 2");
            const Rat big(Int(1) << entryBits);
            // Nearly-degenerate basis: identity with a huge subdiagonal entry,
            // so the starting simplex already has 2^entryBits-scale vertices.
            for (std::size_t i = 0; i < n; ++i) {
                Vec row(n, Orient::Row);
                row[i] = 1;
                if (i == 1) row[0] = big;
                a.append_row(row);
            }
            // A thin wedge in the first two coordinates keeps the solver
            // stretching the simplex long after the start.
            if (a.rows() < m) {
                Vec row(n, Orient::Row);
                row[0] = 1;
                row[1] = -big;
                a.append_row(row);
            }
            if (a.rows() < m) {
                Vec row(n, Orient::Row);
                row[0] = -1;
                row[1] = big + 1;
                a.append_row(row);
            }
            while (a.rows() < m) a.append_row(randomRow(true));
            break;
        }
    }

    out.system = InequalitySystem{std::move(a)};
    return out;
}

}  // namespace dma
