#pragma once

#include "lattheta/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lattheta {

// Truncated formal series in a nome q with exact rational coefficients.
//
// Exponents live on the quarter-integer grid e = idx/4 (idx >= 0), which is
// the finest grid the classical theta expansions need: theta2 contributes
// exponents (n + 1/2)^2, everything else contributes integers. A series knows
// its coefficients for idx in [0, trunc_idx) and nothing beyond; every
// operation computes how far its result is still exact and refuses to report
// coefficients past that point. Multiplication extends trust using the
// valuations of the factors: the unknown part of `a` first pollutes a*b at
// exponent trunc(a) + val(b).
class QSeries {
public:
    QSeries() : c_() {}

    // Zero series trusted for exponents below `order`.
    explicit QSeries(const Rat& order) : c_(idx_ceil(order)) {}

    static QSeries monomial(const Rat& coeff, const Rat& exponent, const Rat& order) {
        QSeries s(order);
        s.set(exponent, coeff);
        return s;
    }

    static QSeries one(const Rat& order) { return monomial(1, 0, order); }

    long trunc_idx() const { return static_cast<long>(c_.size()); }
    Rat truncation_order() const { return Rat(trunc_idx(), 4); }

    // First index with a nonzero coefficient; trunc_idx() when none is known.
    long valuation_idx() const {
        for (long i = 0; i < trunc_idx(); ++i)
            if (c_[static_cast<std::size_t>(i)] != 0) return i;
        return trunc_idx();
    }

    bool known_zero() const { return valuation_idx() == trunc_idx(); }

    const Rat& coeff_idx(long idx) const {
        if (idx < 0 || idx >= trunc_idx())
            throw std::out_of_range("QSeries: coefficient at or beyond truncation order");
        return c_[static_cast<std::size_t>(idx)];
    }

    const Rat& coeff(const Rat& exponent) const { return coeff_idx(idx_exact(exponent)); }

    void set(const Rat& exponent, const Rat& value) {
        long idx = idx_exact(exponent);
        if (idx < 0 || idx >= trunc_idx())
            throw std::out_of_range("QSeries: exponent outside [0, truncation_order)");
        c_[static_cast<std::size_t>(idx)] = value;
    }

    QSeries truncated(const Rat& order) const {
        long idx = idx_ceil(order);
        if (idx > trunc_idx()) throw std::out_of_range("QSeries: cannot extend truncation order");
        QSeries r;
        r.c_.assign(c_.begin(), c_.begin() + idx);
        return r;
    }

    QSeries operator+(const QSeries& o) const {
        QSeries r;
        long n = std::min(trunc_idx(), o.trunc_idx());
        r.c_.resize(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) r.c_[i] = c_[i] + o.c_[i];
        return r;
    }

    QSeries operator-(const QSeries& o) const {
        QSeries r;
        long n = std::min(trunc_idx(), o.trunc_idx());
        r.c_.resize(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) r.c_[i] = c_[i] - o.c_[i];
        return r;
    }

    QSeries operator*(const QSeries& o) const {
        long n = std::min(trunc_idx() + o.valuation_idx(), o.trunc_idx() + valuation_idx());
        QSeries r;
        r.c_.assign(static_cast<std::size_t>(n), Rat(0));
        for (long i = valuation_idx(); i < trunc_idx() && i < n; ++i) {
            if (c_[static_cast<std::size_t>(i)] == 0) continue;
            long jmax = std::min(o.trunc_idx(), n - i);
            for (long j = o.valuation_idx(); j < jmax; ++j) {
                const Rat& oj = o.c_[static_cast<std::size_t>(j)];
                if (oj != 0) r.c_[static_cast<std::size_t>(i + j)] += c_[static_cast<std::size_t>(i)] * oj;
            }
        }
        return r;
    }

    QSeries operator*(const Rat& s) const {
        QSeries r = *this;
        for (auto& x : r.c_) x *= s;
        return r;
    }

    // Multiplicative inverse; needs a nonzero constant term (exponent 0).
    QSeries invert() const {
        if (trunc_idx() == 0 || c_[0] == 0)
            throw std::domain_error("QSeries: invert needs a nonzero constant term");
        QSeries r;
        r.c_.assign(c_.size(), Rat(0));
        r.c_[0] = Rat(1) / c_[0];
        for (long n = 1; n < trunc_idx(); ++n) {
            Rat acc = 0;
            for (long k = 1; k <= n; ++k)
                if (c_[static_cast<std::size_t>(k)] != 0)
                    acc += c_[static_cast<std::size_t>(k)] * r.c_[static_cast<std::size_t>(n - k)];
            r.c_[static_cast<std::size_t>(n)] = -acc / c_[0];
        }
        return r;
    }

    QSeries pow(unsigned long e) const {
        if (e == 0) {
            QSeries r;
            r.c_.assign(c_.size(), Rat(0));
            if (!r.c_.empty()) r.c_[0] = 1;
            return r;
        }
        QSeries result = *this, base = *this;
        --e;
        while (e != 0) {
            if (e & 1ul) result = result * base;
            e >>= 1;
            if (e != 0) base = base * base;
        }
        return result;
    }

    // q -> q^m for positive rational m; every surviving exponent must land
    // back on the quarter grid.
    QSeries compose_scale(const Rat& m) const {
        if (m <= 0) throw std::domain_error("QSeries: compose_scale needs positive scale");
        QSeries r;
        long new_trunc = ceil_rat(Rat(trunc_idx()) * m).convert_to<long>();
        r.c_.assign(static_cast<std::size_t>(new_trunc), Rat(0));
        for (long i = 0; i < trunc_idx(); ++i) {
            const Rat& v = c_[static_cast<std::size_t>(i)];
            if (v == 0) continue;
            Rat scaled = Rat(i) * m;
            if (rat_den(scaled) != 1)
                throw std::domain_error("QSeries: compose_scale leaves the quarter-integer grid");
            long idx = scaled.convert_to<long>();
            if (idx < r.trunc_idx()) r.c_[static_cast<std::size_t>(idx)] = v;
        }
        return r;
    }

    // Coefficientwise comparison through the smaller truncation order.
    bool operator==(const QSeries& o) const {
        long n = std::min(trunc_idx(), o.trunc_idx());
        for (long i = 0; i < n; ++i) if (c_[static_cast<std::size_t>(i)] != o.c_[static_cast<std::size_t>(i)]) return false;
        return true;
    }

    std::string str(std::size_t max_terms = 12) const {
        std::string out;
        std::size_t shown = 0;
        for (long i = 0; i < trunc_idx() && shown < max_terms; ++i) {
            const Rat& v = c_[static_cast<std::size_t>(i)];
            if (v == 0) continue;
            if (!out.empty()) out += " + ";
            out += "(" + lattheta::to_string(v) + ")q^" + lattheta::to_string(Rat(i, 4));
            ++shown;
        }
        if (out.empty()) out = "0";
        return out + " [O(q^" + lattheta::to_string(truncation_order()) + ")]";
    }

private:
    static long idx_ceil(const Rat& order) {
        Int i = ceil_rat(order * 4);
        if (i < 0) throw std::domain_error("QSeries: negative exponent bound");
        return i.convert_to<long>();
    }

    static long idx_exact(const Rat& exponent) {
        Rat scaled = exponent * 4;
        if (rat_den(scaled) != 1)
            throw std::domain_error("QSeries: exponent off the quarter-integer grid");
        return scaled.convert_to<long>();
    }

    std::vector<Rat> c_;
};

inline QSeries operator*(const Rat& s, const QSeries& a) { return a * s; }

// Exact expansions of the classical null theta constants in q = e^{-pi y}:
//   theta2 = sum 2 q^{(n+1/2)^2}, theta3 = 1 + sum 2 q^{n^2},
//   theta4 = 1 + sum 2 (-1)^n q^{n^2}.
inline QSeries theta_series(int kind, const Rat& order) {
    QSeries s(order);
    if (s.trunc_idx() == 0) return s;
    switch (kind) {
    case 2:
        for (long n = 0;; ++n) {
            Rat e = Rat((2 * n + 1) * (2 * n + 1), 4);
            if (e >= s.truncation_order()) break;
            s.set(e, 2);
        }
        break;
    case 3:
    case 4:
        s.set(0, 1);
        for (long n = 1;; ++n) {
            Rat e(n * n);
            if (e >= s.truncation_order()) break;
            s.set(e, (kind == 4 && n % 2 != 0) ? -2 : 2);
        }
        break;
    default:
        throw std::invalid_argument("theta_series: kind must be 2, 3 or 4");
    }
    return s;
}

} // namespace lattheta
