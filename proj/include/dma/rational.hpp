#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dma {

using Int = mpz_class;
using Rat = mpq_class;

// Number of bits in |x|; bitlen(0) = 0, bitlen(1) = 1, bitlen(100) = 7.
inline std::size_t bitlen(const Int& x) {
    if (x == 0) return 0;
    return mpz_sizeinbase(x.get_mpz_t(), 2);
}

inline Rat make_rat(long num, long den = 1) {
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline Rat make_rat(const Int& num, const Int& den) {
    Rat q(num, den);
    q.canonicalize();
    return q;
}

// Parses "7", "-3/4" or an exact decimal like "2.25".
inline Rat parse_rat(const std::string& text) {
    auto bad = [&] { throw std::invalid_argument("not a rational: '" + text + "'"); };
    if (text.empty()) bad();
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        Rat q;
        if (q.set_str(text, 10) != 0) bad();
        if (q.get_den() == 0) bad();
        q.canonicalize();
        return q;
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) {
        Int n;
        if (n.set_str(text, 10) != 0) bad();
        return Rat(n);
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac = text.size() - dot - 1;
    if (frac == 0 || digits.empty() || digits == "-" || digits == "+") bad();
    Int n;
    if (n.set_str(digits, 10) != 0) bad();
    Int den = 1;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(frac));
    return make_rat(n, den);
}

inline std::string rat_str(const Rat& q) { return q.get_str(); }

// Compares |q| against 2^e (e may be negative); returns <0, 0, >0.
inline int cmp_abs_pow2(const Rat& q, long e) {
    Int num = abs(q.get_num());
    Int den = q.get_den();
    if (e >= 0)
        den <<= static_cast<unsigned long>(e);
    else
        num <<= static_cast<unsigned long>(-e);
    return cmp(num, den);
}

// Nearest value k*2^e with |k| < 2^bits, ties to even. Sign-preserving; 0 -> 0.
inline Rat round_sig(const Rat& q, unsigned bits) {
    if (bits < 1) throw std::invalid_argument("round_sig: bits must be >= 1");
    if (q == 0) return Rat(0);

    Int num = abs(q.get_num());
    Int den = q.get_den();

    // Find E with 2^(E-1) <= |q| < 2^E, starting from the bit-length estimate.
    long e2 = static_cast<long>(bitlen(num)) - static_cast<long>(bitlen(den));
    while (cmp_abs_pow2(q, e2) >= 0) ++e2;
    while (cmp_abs_pow2(q, e2 - 1) < 0) --e2;

    long e = e2 - static_cast<long>(bits);

    // k = round(|q| / 2^e), ties to even.
    Int n = num, d = den;
    if (e >= 0)
        d <<= static_cast<unsigned long>(e);
    else
        n <<= static_cast<unsigned long>(-e);
    Int k, r;
    mpz_fdiv_qr(k.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    Int twice = 2 * r;
    if (twice > d || (twice == d && mpz_odd_p(k.get_mpz_t()))) k += 1;

    Int cap = Int(1) << bits;
    if (k == cap) {
        k >>= 1;
        e += 1;
    }

    Rat out;
    if (e >= 0) {
        out = Rat(k << static_cast<unsigned long>(e));
    } else {
        out = make_rat(k, Int(1) << static_cast<unsigned long>(-e));
    }
    if (q < 0) out = -out;
    return out;
}

// Approximate log2 of |q| for traces; exact math stays rational elsewhere.
inline double log2_abs_approx(const Rat& q) {
    if (q == 0) return -std::numeric_limits<double>::infinity();
    long en = 0, ed = 0;
    double mn = mpz_get_d_2exp(&en, q.get_num().get_mpz_t());
    double md = mpz_get_d_2exp(&ed, q.get_den().get_mpz_t());
    return std::log2(std::fabs(mn)) - std::log2(md) + static_cast<double>(en - ed);
}

}  // namespace dma
