#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "dma/rational.hpp"

namespace dma {

struct SingularMatrix : std::runtime_error {
    SingularMatrix() : std::runtime_error("matrix is singular") {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const char* what) {
    if (!ok) throw DimensionMismatch(what);
}

// Dense exact-rational vector. Orientation is a semantic tag only; it does not
// change storage. Row is the default (the algorithm mostly works with rows).
enum class Orient { Row, Col };

class Vec {
  public:
    Vec() = default;
    explicit Vec(std::size_t n, Orient o = Orient::Row) : v_(n), orient_(o) {}
    Vec(std::initializer_list<Rat> xs) : v_(xs) {}
    explicit Vec(std::vector<Rat> xs, Orient o = Orient::Row) : v_(std::move(xs)), orient_(o) {}

    std::size_t size() const { return v_.size(); }
    Orient orient() const { return orient_; }
    const Rat& operator[](std::size_t i) const { return v_[i]; }
    Rat& operator[](std::size_t i) { return v_[i]; }

    bool operator==(const Vec& o) const { return v_ == o.v_; }

    bool is_zero() const {
        return std::all_of(v_.begin(), v_.end(), [](const Rat& x) { return x == 0; });
    }

    Vec& operator+=(const Vec& o) {
        require(size() == o.size(), "Vec +=: size mismatch");
        for (std::size_t i = 0; i < size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        require(size() == o.size(), "Vec -=: size mismatch");
        for (std::size_t i = 0; i < size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(const Rat& c) {
        for (auto& x : v_) x *= c;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(Vec a, const Rat& c) { return a *= c; }
    friend Vec operator*(const Rat& c, Vec a) { return a *= c; }
    friend Vec operator-(Vec a) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = -a[i];
        return a;
    }

    const std::vector<Rat>& data() const { return v_; }

  private:
    std::vector<Rat> v_;
    Orient orient_ = Orient::Row;
};

inline Rat dot(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "dot: size mismatch");
    Rat s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Rat norm_sq(const Vec& a) { return dot(a, a); }

inline Rat max_abs(const Vec& a) {
    Rat m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        Rat x = abs(a[i]);
        if (x > m) m = x;
    }
    return m;
}

// Dense row-major exact-rational matrix. Dimensions are fixed at construction
// except for the explicit append_row/append_col used by the growing dual state.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : r_(rows), c_(cols), data_(rows * cols) {}
    Matrix(std::initializer_list<std::initializer_list<Rat>> rows) {
        r_ = rows.size();
        c_ = r_ ? rows.begin()->size() : 0;
        data_.reserve(r_ * c_);
        for (const auto& row : rows) {
            require(row.size() == c_, "Matrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }

    const Rat& operator()(std::size_t i, std::size_t j) const { return data_[i * c_ + j]; }
    Rat& operator()(std::size_t i, std::size_t j) { return data_[i * c_ + j]; }

    bool operator==(const Matrix& o) const {
        return r_ == o.r_ && c_ == o.c_ && data_ == o.data_;
    }

    Vec row(std::size_t i) const {
        Vec out(c_, Orient::Row);
        for (std::size_t j = 0; j < c_; ++j) out[j] = (*this)(i, j);
        return out;
    }
    Vec col(std::size_t j) const {
        Vec out(r_, Orient::Col);
        for (std::size_t i = 0; i < r_; ++i) out[i] = (*this)(i, j);
        return out;
    }
    void set_row(std::size_t i, const Vec& v) {
        require(v.size() == c_, "set_row: size mismatch");
        for (std::size_t j = 0; j < c_; ++j) (*this)(i, j) = v[j];
    }

    void append_row(const Vec& v) {
        require(c_ == 0 || v.size() == c_, "append_row: size mismatch");
        if (c_ == 0) c_ = v.size();
        for (std::size_t j = 0; j < c_; ++j) data_.push_back(v[j]);
        ++r_;
    }
    void append_zero_col() {
        std::vector<Rat> next((c_ + 1) * r_);
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < c_; ++j) next[i * (c_ + 1) + j] = data_[i * c_ + j];
        data_ = std::move(next);
        ++c_;
    }

    Matrix transpose() const {
        Matrix t(c_, r_);
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

  private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<Rat> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "Matrix *: inner dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Rat& aik = a(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

// Row vector times matrix.
inline Vec operator*(const Vec& v, const Matrix& m) {
    require(v.size() == m.rows(), "Vec*Matrix: dimension mismatch");
    Vec out(m.cols(), Orient::Row);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (v[i] == 0) continue;
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += v[i] * m(i, j);
    }
    return out;
}

// Matrix times column vector.
inline Vec operator*(const Matrix& m, const Vec& v) {
    require(v.size() == m.cols(), "Matrix*Vec: dimension mismatch");
    Vec out(m.rows(), Orient::Col);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
    return out;
}

namespace detail {

// Pivot choice shared by all eliminations: largest |value| in the column at or
// below `from`, ties to the lowest row index. Returns rows() when the column
// is all zero there.
inline std::size_t pivot_row(const Matrix& m, std::size_t col, std::size_t from) {
    std::size_t best = m.rows();
    Rat bestAbs = 0;
    for (std::size_t i = from; i < m.rows(); ++i) {
        Rat a = abs(m(i, col));
        if (a > bestAbs) {
            bestAbs = a;
            best = i;
        }
    }
    return best;
}

inline void swap_rows(Matrix& m, std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(a, j), m(b, j));
}

}  // namespace detail

// Exact inverse by Gauss-Jordan elimination with partial pivoting.
inline Matrix invert(const Matrix& m) {
    require(m.rows() == m.cols(), "invert: matrix not square");
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t p = detail::pivot_row(a, col, col);
        if (p == n) throw SingularMatrix();
        detail::swap_rows(a, col, p);
        detail::swap_rows(inv, col, p);
        Rat piv = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) /= piv;
            inv(col, j) /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || a(i, col) == 0) continue;
            Rat f = a(i, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(col, j);
                inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

// Exact determinant by pivoted rational elimination.
inline Rat det(const Matrix& m) {
    require(m.rows() == m.cols(), "det: matrix not square");
    const std::size_t n = m.rows();
    Matrix a = m;
    Rat d = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t p = detail::pivot_row(a, col, col);
        if (p == n) return Rat(0);
        if (p != col) {
            detail::swap_rows(a, col, p);
            d = -d;
        }
        d *= a(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            if (a(i, col) == 0) continue;
            Rat f = a(i, col) / a(col, col);
            for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
        }
    }
    return d;
}

// Basis of the left kernel of M (r x n): returns r - rank(M) independent row
// vectors f of length r with f*M = 0, deterministically (fixed pivot order).
inline std::vector<Vec> kernel_basis(const Matrix& m) {
    const std::size_t r = m.rows();
    Matrix work = m;
    Matrix trans = Matrix::identity(r);
    std::size_t pivotRow = 0;
    for (std::size_t col = 0; col < m.cols() && pivotRow < r; ++col) {
        std::size_t p = detail::pivot_row(work, col, pivotRow);
        if (p == r) continue;
        detail::swap_rows(work, pivotRow, p);
        detail::swap_rows(trans, pivotRow, p);
        for (std::size_t i = pivotRow + 1; i < r; ++i) {
            if (work(i, col) == 0) continue;
            Rat f = work(i, col) / work(pivotRow, col);
            for (std::size_t j = 0; j < m.cols(); ++j) work(i, j) -= f * work(pivotRow, j);
            for (std::size_t j = 0; j < r; ++j) trans(i, j) -= f * trans(pivotRow, j);
        }
        ++pivotRow;
    }
    std::vector<Vec> out;
    for (std::size_t i = pivotRow; i < r; ++i) out.push_back(trans.row(i));
    return out;
}

inline std::size_t rank(const Matrix& m) {
    return m.rows() - kernel_basis(m).size();
}

}  // namespace dma
