#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dma/linalg.hpp"

#include "json.hpp"

namespace dma {

struct FormatError : std::runtime_error {
    std::size_t line, column;
    FormatError(std::size_t line_, std::size_t column_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ", col " +
                             std::to_string(column_) + ": " + what),
          line(line_),
          column(column_) {}
};

// The input model: integer system Ax > 0. Entries live in Rat cells but are
// integral by construction.
struct InequalitySystem {
    Matrix A;
    std::size_t m() const { return A.rows(); }
    std::size_t n() const { return A.cols(); }
};

struct BitParams {
    unsigned l = 0;  // bits per entry (also bounds bitlen(n))
    unsigned L = 0;  // bits per row, L = n*l
};

// l = 1 + max(bitlen(n), max_ij bitlen(|A_ij|)); the +1 absorbs the sign bit
// and makes the strict "< l bits" convention hold.
inline BitParams bit_params(const InequalitySystem& sys) {
    std::size_t maxBits = bitlen(Int(static_cast<unsigned long>(sys.n())));
    for (std::size_t i = 0; i < sys.m(); ++i)
        for (std::size_t j = 0; j < sys.n(); ++j) {
            Int num = sys.A(i, j).get_num();
            maxBits = std::max(maxBits, bitlen(num));
        }
    BitParams bp;
    bp.l = static_cast<unsigned>(1 + maxBits);
    bp.L = static_cast<unsigned>(sys.n()) * bp.l;
    return bp;
}

// Rank preprocessing. Afterwards the first `basisCount` rows of `system.A`
// are linearly independent and span the row space; feasibility is unchanged.
struct PreparedSystem {
    InequalitySystem system;               // possibly dimension-reduced (m x r)
    std::vector<std::size_t> rowPermutation;  // prepared row index -> original row index
    Matrix projector;                      // n x r; witness maps back as x = P*y
    std::size_t basisCount = 0;            // = system.n(); first rows are independent
    std::optional<std::size_t> zeroRow;    // original index of an all-zero row, if any
    bool projected = false;                // true when rank < n (projector != identity)

    bool degenerate() const { return zeroRow.has_value(); }
};

inline PreparedSystem preprocess(const InequalitySystem& sys) {
    const std::size_t m = sys.m(), n = sys.n();
    PreparedSystem out;
    out.projector = Matrix::identity(n);

    // An all-zero row a_k makes a_k x > 0 unsatisfiable; short-circuit with
    // certificate b = e_k (consumed by the driver).
    for (std::size_t i = 0; i < m; ++i) {
        if (sys.A.row(i).is_zero()) {
            out.system = sys;
            out.zeroRow = i;
            for (std::size_t k = 0; k < m; ++k) out.rowPermutation.push_back(k);
            return out;
        }
    }

    // Greedy scan for the lexicographically first independent row set,
    // maintaining a reduced copy of the selected rows.
    std::vector<std::size_t> basis;
    std::vector<Vec> reduced;
    for (std::size_t i = 0; i < m && basis.size() < n; ++i) {
        Vec row = sys.A.row(i);
        for (const Vec& r : reduced) {
            std::size_t lead = 0;
            while (lead < n && r[lead] == 0) ++lead;
            if (lead < n && row[lead] != 0) row -= (row[lead] / r[lead]) * r;
        }
        if (!row.is_zero()) {
            basis.push_back(i);
            // Keep `reduced` triangular: re-reduce so each kept row has a
            // distinct leading column.
            reduced.push_back(row);
            std::sort(reduced.begin(), reduced.end(), [n](const Vec& a, const Vec& b) {
                std::size_t la = 0, lb = 0;
                while (la < n && a[la] == 0) ++la;
                while (lb < n && b[lb] == 0) ++lb;
                return la < lb;
            });
        }
    }

    const std::size_t r = basis.size();
    out.rowPermutation = basis;
    std::vector<bool> inBasis(m, false);
    for (std::size_t b : basis) inBasis[b] = true;
    for (std::size_t i = 0; i < m; ++i)
        if (!inBasis[i]) out.rowPermutation.push_back(i);

    Matrix permuted(0, n);
    for (std::size_t idx : out.rowPermutation) permuted.append_row(sys.A.row(idx));

    if (r == n) {
        out.system = InequalitySystem{std::move(permuted)};
        out.basisCount = n;
        return out;
    }

    // Rank-deficient: project onto the row space. Columns of P are the
    // selected rows transposed; A' = A*P is m x r with full column rank
    // (its leading r x r block is the Gram matrix of the basis rows).
    Matrix p(n, r);
    for (std::size_t j = 0; j < r; ++j) {
        Vec basisRow = sys.A.row(basis[j]);
        for (std::size_t i = 0; i < n; ++i) p(i, j) = basisRow[i];
    }
    out.projector = p;
    out.projected = true;
    out.system = InequalitySystem{permuted * p};
    out.basisCount = r;
    return out;
}

// Text format: optional '#' comment lines; "m n"; m rows of n integers.
inline InequalitySystem parse_system(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineNo = 0;
    std::optional<std::pair<long, long>> header;
    Matrix a;
    long rowsRead = 0;

    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (!header) {
            long m = 0, n = 0;
            if (!(ls >> m >> n) || m < 1 || n < 1)
                throw FormatError(lineNo, 1, "expected header 'm n' with m,n >= 1");
            std::string extra;
            if (ls >> extra) throw FormatError(lineNo, 1, "trailing tokens after header");
            header = {m, n};
            a = Matrix(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
            continue;
        }
        if (rowsRead >= header->first) throw FormatError(lineNo, 1, "more rows than declared");
        for (long j = 0; j < header->second; ++j) {
            std::string tok;
            if (!(ls >> tok))
                throw FormatError(lineNo, static_cast<std::size_t>(j + 1), "row too short");
            Int v;
            if (v.set_str(tok, 10) != 0)
                throw FormatError(lineNo, static_cast<std::size_t>(j + 1),
                                  "not an integer: '" + tok + "'");
            a(static_cast<std::size_t>(rowsRead), static_cast<std::size_t>(j)) = Rat(v);
        }
        std::string extra;
        if (ls >> extra)
            throw FormatError(lineNo, static_cast<std::size_t>(header->second + 1),
                              "row too long");
        ++rowsRead;
    }
    if (!header) throw FormatError(lineNo, 1, "missing header");
    if (rowsRead < header->first) throw FormatError(lineNo + 1, 1, "fewer rows than declared");
    return InequalitySystem{std::move(a)};
}

inline std::string serialize_system(const InequalitySystem& sys) {
    std::ostringstream out;
    out << sys.m() << ' ' << sys.n() << '\n';
    for (std::size_t i = 0; i < sys.m(); ++i) {
        for (std::size_t j = 0; j < sys.n(); ++j) {
            if (j) out << ' ';
            out << sys.A(i, j).get_num().get_str();
        }
        out << '\n';
    }
    return out.str();
}

// JSON alternative; entries are strings so consumers need no big integers.
inline nlohmann::json system_to_json(const InequalitySystem& sys) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < sys.m(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < sys.n(); ++j) row.push_back(sys.A(i, j).get_num().get_str());
        rows.push_back(std::move(row));
    }
    return nlohmann::json{{"m", sys.m()}, {"n", sys.n()}, {"rows", std::move(rows)}};
}

inline InequalitySystem system_from_json(const nlohmann::json& j) {
    std::size_t m = j.at("m").get<std::size_t>();
    std::size_t n = j.at("n").get<std::size_t>();
    if (m < 1 || n < 1) throw FormatError(0, 0, "m and n must be >= 1");
    const auto& rows = j.at("rows");
    if (rows.size() != m) throw FormatError(0, 0, "row count mismatch");
    Matrix a(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].size() != n) throw FormatError(i + 1, 0, "row length mismatch");
        for (std::size_t k = 0; k < n; ++k) {
            Int v;
            if (v.set_str(rows[i][k].get<std::string>(), 10) != 0)
                throw FormatError(i + 1, k + 1, "not an integer");
            a(i, k) = Rat(v);
        }
    }
    return InequalitySystem{std::move(a)};
}

}  // namespace dma
