#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "dma/problem.hpp"

namespace dma {

using ConstraintId = std::int64_t;

struct Violation {
    ConstraintId id;
    Vec row;  // satisfies row . x <= 0 for the queried x
};

// nullopt = NoneViolated
using OracleResponse = std::optional<Violation>;

struct RankDeficientFamily : std::runtime_error {
    RankDeficientFamily() : std::runtime_error("constraint family spans fewer than n dimensions") {}
};

struct PrecisionExhausted : std::runtime_error {
    PrecisionExhausted() : std::runtime_error("ball oracle: bisection budget exhausted") {}
};

// Separation-oracle contract. Deterministic: identical query sequences yield
// identical responses. Queries are const; oracles may memoise internally only
// in ways that keep responses a function of the query.
class Oracle {
  public:
    virtual ~Oracle() = default;

    // n linearly independent member rows with their ids.
    virtual std::vector<std::pair<ConstraintId, Vec>> initial_basis() = 0;

    virtual OracleResponse find_violated(const Vec& x) = 0;

    virtual std::size_t dimension() const = 0;
    virtual std::optional<std::size_t> finite_m() const { return std::nullopt; }
    virtual std::optional<BitParams> bit_params() const { return std::nullopt; }

    virtual Vec row_of(ConstraintId id) const = 0;
};

// Dense scan over a prepared finite system; ids are row indices, the lowest
// violated index wins.
class DenseOracle final : public Oracle {
  public:
    explicit DenseOracle(const PreparedSystem& prep)
        : a_(prep.system.A), basisCount_(prep.basisCount), bp_(dma::bit_params(prep.system)) {
        // The 4^L mass-certificate threshold presumes the integer input matrix;
        // a projected system certifies only its own row space, so the
        // approximate certificate is disabled there.
        exposeBits_ = !prep.projected;
    }

    std::vector<std::pair<ConstraintId, Vec>> initial_basis() override {
        if (basisCount_ < a_.cols()) throw RankDeficientFamily();
        std::vector<std::pair<ConstraintId, Vec>> out;
        for (std::size_t k = 0; k < a_.cols(); ++k)
            out.emplace_back(static_cast<ConstraintId>(k), a_.row(k));
        return out;
    }

    OracleResponse find_violated(const Vec& x) override {
        for (std::size_t k = 0; k < a_.rows(); ++k) {
            Vec row = a_.row(k);
            if (dot(row, x) <= 0) return Violation{static_cast<ConstraintId>(k), std::move(row)};
        }
        return std::nullopt;
    }

    std::size_t dimension() const override { return a_.cols(); }
    std::optional<std::size_t> finite_m() const override { return a_.rows(); }
    std::optional<BitParams> bit_params() const override {
        return exposeBits_ ? std::optional<BitParams>(bp_) : std::nullopt;
    }
    Vec row_of(ConstraintId id) const override { return a_.row(static_cast<std::size_t>(id)); }

  private:
    Matrix a_;
    std::size_t basisCount_;
    BitParams bp_;
    bool exposeBits_ = true;
};

// Infinite family {a : |a - c| <= r} with rational center c and radius r >= 0.
// Feasibility of the whole family at x is min_a a.x = c.x - r|x|, decided
// exactly by comparing (c.x)^2 against r^2 |x|^2 with sign care. Violating
// members are returned as rational points; no bit parameters are exposed, so
// the approximate certificate stays disabled for this family.
class BallOracle final : public Oracle {
  public:
    BallOracle(Vec center, Rat radius, unsigned bisectionBudget = 32)
        : c_(std::move(center)), r_(std::move(radius)), budget_(bisectionBudget) {
        if (r_ < 0) throw std::invalid_argument("ball oracle: radius must be >= 0");
    }

    std::vector<std::pair<ConstraintId, Vec>> initial_basis() override {
        const std::size_t n = c_.size();
        std::vector<std::pair<ConstraintId, Vec>> out;
        std::vector<Vec> picked;
        auto tryAdd = [&](const Vec& cand) {
            if (out.size() == n) return;
            Matrix stack(0, n);
            for (const Vec& v : picked) stack.append_row(v);
            stack.append_row(cand);
            if (rank(stack) == stack.rows()) {
                picked.push_back(cand);
                out.emplace_back(id_for(cand), cand);
            }
        };
        if (!c_.is_zero()) tryAdd(c_);
        for (std::size_t k = 0; k < n && out.size() < n; ++k) {
            Vec cand = c_;
            cand[k] += r_;
            tryAdd(cand);
            cand[k] -= 2 * r_;
            tryAdd(cand);
        }
        if (out.size() < n) throw RankDeficientFamily();
        return out;
    }

    OracleResponse find_violated(const Vec& x) override {
        Rat cx = dot(c_, x);
        Rat xx = norm_sq(x);
        if (cx > 0 && cx * cx > r_ * r_ * xx) return std::nullopt;

        if (cx <= 0) {
            // The center itself violates.
            return Violation{id_for(c_), c_};
        }

        // Walk from the boundary point a(t0) = c - t0*x (which has a.x = 0 and
        // is a member by the violation condition) toward the interior of the
        // violating cap, as far as membership allows.
        Rat t0 = cx / xx;
        Rat t = t0;
        for (unsigned k = 1; k <= budget_; ++k) {
            Rat cand = t0 * (1 + Rat(1, Int(1) << k));
            if (cand * cand * xx <= r_ * r_) {
                t = cand;
                break;
            }
        }
        Vec a = c_ - t * x;
        // Exact re-checks of the response contract.
        if (!(dot(a, x) <= 0) || !(norm_sq(a - c_) <= r_ * r_)) throw PrecisionExhausted();
        return Violation{id_for(a), a};
    }

    std::size_t dimension() const override { return c_.size(); }
    Vec row_of(ConstraintId id) const override { return rows_.at(static_cast<std::size_t>(id)); }

  private:
    ConstraintId id_for(const Vec& row) {
        auto it = idOf_.find(row.data());
        if (it != idOf_.end()) return it->second;
        ConstraintId id = static_cast<ConstraintId>(rows_.size());
        rows_.push_back(row);
        idOf_.emplace(row.data(), id);
        return id;
    }

    Vec c_;
    Rat r_;
    unsigned budget_;
    std::vector<Vec> rows_;
    std::map<std::vector<Rat>, ConstraintId> idOf_;
};

}  // namespace dma
