#pragma once

#include "lattheta/rational.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace lattheta {

// Dense matrix over the rationals. Small sizes only; everything is exact.
class RatMatrix {
public:
    RatMatrix() : rows_(0), cols_(0) {}
    RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, Rat(0)) {}

    static RatMatrix identity(std::size_t n) {
        RatMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rat& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const Rat& at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    bool is_square() const { return rows_ == cols_; }

    bool is_symmetric() const {
        if (!is_square()) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if (at(i, j) != at(j, i)) return false;
        return true;
    }

    RatMatrix transpose() const {
        RatMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t.at(j, i) = at(i, j);
        return t;
    }

    RatMatrix operator*(const RatMatrix& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("RatMatrix: dimension mismatch in product");
        RatMatrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const Rat& aik = at(i, k);
                if (aik == 0) continue;
                for (std::size_t j = 0; j < o.cols_; ++j)
                    if (o.at(k, j) != 0) r.at(i, j) += aik * o.at(k, j);
            }
        return r;
    }

    bool operator==(const RatMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }

    // Gaussian elimination with partial (first nonzero) pivoting.
    Rat det() const {
        if (!is_square()) throw std::invalid_argument("RatMatrix: det of non-square matrix");
        RatMatrix m = *this;
        Rat d = 1;
        for (std::size_t col = 0; col < cols_; ++col) {
            std::size_t piv = col;
            while (piv < rows_ && m.at(piv, col) == 0) ++piv;
            if (piv == rows_) return 0;
            if (piv != col) {
                for (std::size_t j = 0; j < cols_; ++j) std::swap(m.at(piv, j), m.at(col, j));
                d = -d;
            }
            d *= m.at(col, col);
            for (std::size_t i = col + 1; i < rows_; ++i) {
                if (m.at(i, col) == 0) continue;
                Rat f = m.at(i, col) / m.at(col, col);
                for (std::size_t j = col; j < cols_; ++j) m.at(i, j) -= f * m.at(col, j);
            }
        }
        return d;
    }

    RatMatrix inverse() const {
        if (!is_square()) throw std::invalid_argument("RatMatrix: inverse of non-square matrix");
        std::size_t n = rows_;
        RatMatrix m = *this, inv = identity(n);
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            while (piv < n && m.at(piv, col) == 0) ++piv;
            if (piv == n) throw std::domain_error("RatMatrix: singular matrix has no inverse");
            if (piv != col)
                for (std::size_t j = 0; j < n; ++j) {
                    std::swap(m.at(piv, j), m.at(col, j));
                    std::swap(inv.at(piv, j), inv.at(col, j));
                }
            Rat p = m.at(col, col);
            for (std::size_t j = 0; j < n; ++j) {
                m.at(col, j) /= p;
                inv.at(col, j) /= p;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (i == col || m.at(i, col) == 0) continue;
                Rat f = m.at(i, col);
                for (std::size_t j = 0; j < n; ++j) {
                    m.at(i, j) -= f * m.at(col, j);
                    inv.at(i, j) -= f * inv.at(col, j);
                }
            }
        }
        return inv;
    }

private:
    std::size_t rows_, cols_;
    std::vector<Rat> a_;
};

struct LdlFactorization {
    RatMatrix l;          // unit lower triangular
    std::vector<Rat> d;   // positive pivots
};

// G = L D L^T for symmetric positive definite G. A nonpositive pivot means G
// is not positive definite (pivot k equals minor_{k+1}/minor_k).
inline LdlFactorization ldl_decompose(const RatMatrix& g) {
    if (!g.is_symmetric()) throw std::invalid_argument("ldl_decompose: matrix not symmetric");
    std::size_t n = g.rows();
    LdlFactorization f{RatMatrix::identity(n), std::vector<Rat>(n)};
    RatMatrix a = g;
    for (std::size_t k = 0; k < n; ++k) {
        f.d[k] = a.at(k, k);
        if (f.d[k] <= 0) throw std::domain_error("ldl_decompose: matrix not positive definite");
        for (std::size_t i = k + 1; i < n; ++i) {
            if (a.at(i, k) == 0) continue;
            Rat lik = a.at(i, k) / f.d[k];
            f.l.at(i, k) = lik;
            for (std::size_t j = k; j < n; ++j) a.at(i, j) -= lik * a.at(k, j);
        }
    }
    return f;
}

inline bool is_positive_definite(const RatMatrix& g) {
    if (!g.is_symmetric()) return false;
    try {
        ldl_decompose(g);
        return true;
    } catch (const std::domain_error&) {
        return false;
    }
}

} // namespace lattheta
