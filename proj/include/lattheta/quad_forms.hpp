#pragma once

#include "lattheta/rational.hpp"
#include "lattheta/rational_matrix.hpp"

#include <boost/multiprecision/miller_rabin.hpp>

#include <cctype>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lattheta {

// Rational quadratic forms and their equivalence invariants. A nondegenerate
// symmetric matrix over Q is classified up to congruence S^T A S (invertible
// rational S) by dimension, signature, determinant modulo squares, and the
// Hasse-Witt invariant at every place. Everything here is exact rational
// arithmetic. Diagonalization is symmetric Gaussian elimination with the
// e_i + e_j pivot rescue when no usable diagonal entry exists; the local
// variant keeps every step inside the integers localized at an odd prime p,
// producing a p-unit diagonal through a basis change of determinant +-1 --
// the construction showing that invariants at odd primes away from the
// determinant are trivial.

class SymmetricForm {
public:
    explicit SymmetricForm(RatMatrix m) : m_(std::move(m)) {
        if (!m_.is_square() || m_.rows() == 0)
            throw std::invalid_argument("SymmetricForm: matrix must be square and nonempty");
        if (!m_.is_symmetric())
            throw std::invalid_argument("SymmetricForm: matrix must be symmetric");
        det_ = m_.det();
    }

    const RatMatrix& matrix() const { return m_; }
    std::size_t dimension() const { return m_.rows(); }
    const Rat& det() const { return det_; }

private:
    RatMatrix m_;
    Rat det_;
};

struct CongruenceResult {
    RatMatrix D;      // diagonal
    RatMatrix S;      // exact witness: S^T A S = D
    std::string mode; // "global" or "local(p)"

    std::vector<Rat> diagonal() const {
        std::vector<Rat> d(D.rows());
        for (std::size_t i = 0; i < D.rows(); ++i) d[i] = D.at(i, i);
        return d;
    }
};

namespace detail {

inline bool is_prime(const Int& n) {
    if (n < 2) return false;
    if (n < 4) return true;
    if (n % 2 == 0) return false;
    return boost::multiprecision::miller_rabin_test(n, 25);
}

// Trial division with a Miller-Rabin backstop; gives up honestly on hard
// composite cofactors rather than returning a wrong table.
inline std::map<Int, long> factor(Int n) {
    if (n <= 0) throw std::invalid_argument("factor: need a positive integer");
    std::map<Int, long> out;
    auto strip = [&](const Int& p) {
        while (n % p == 0) {
            n /= p;
            ++out[p];
        }
    };
    strip(2);
    strip(3);
    const Int bound = 1000000;
    Int d = 5;
    while (d * d <= n && d <= bound) {
        strip(d);
        strip(d + 2);
        d += 6;
    }
    if (n == 1) return out;
    if (d * d > n || is_prime(n)) {
        ++out[n];
        return out;
    }
    Int r = boost::multiprecision::sqrt(n);
    if (r * r == n && is_prime(r)) {
        out[r] += 2;
        return out;
    }
    throw std::runtime_error("factor: composite cofactor beyond trial-division reach");
}

// x = p^v u with u a p-adic unit; v may be negative for denominators.
inline std::pair<long, Rat> split_valuation(const Rat& x, const Int& p) {
    Int num = rat_num(x), den = rat_den(x);
    long v = 0;
    while (num % p == 0) {
        num /= p;
        ++v;
    }
    while (den % p == 0) {
        den /= p;
        --v;
    }
    return {v, Rat(num, den)};
}

inline int mod8(const Int& n) {
    Int r = n % 8;
    if (r < 0) r += 8;
    return r.convert_to<int>();
}

// Residue mod 8 of an odd rational unit x/y; odd y is its own inverse mod 8.
inline int odd_unit_mod8(const Rat& u) { return (mod8(rat_num(u)) * mod8(rat_den(u))) % 8; }

inline int eps2(int r8) { return r8 % 4 == 3 ? 1 : 0; }     // (u-1)/2 mod 2
inline int omega2(int r8) { return (r8 == 3 || r8 == 5) ? 1 : 0; } // (u^2-1)/8 mod 2

inline void apply_congruence(RatMatrix& m, RatMatrix& s, const RatMatrix& t) {
    m = t.transpose() * m * t;
    s = s * t;
}

inline CongruenceResult diagonalize_impl(const SymmetricForm& form, const Int* p) {
    if (form.det() == 0) throw std::domain_error("diagonalize: form is degenerate");
    const std::size_t n = form.dimension();
    if (p) {
        if (*p < 3 || !is_prime(*p))
            throw std::invalid_argument("diagonalize: local mode needs an odd prime");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (rat_den(form.matrix().at(i, j)) % *p == 0)
                    throw std::invalid_argument("diagonalize: entries must be p-integral");
        if (rat_num(form.det()) % *p == 0)
            throw std::invalid_argument("diagonalize: p divides the determinant");
    }
    // A pivot is usable when it is nonzero (global) or a p-unit (local);
    // local entries stay p-integral throughout because every division is by
    // a p-unit pivot.
    auto usable = [&](const Rat& v) {
        if (v == 0) return false;
        return p == nullptr || rat_num(v) % *p != 0;
    };
    RatMatrix m = form.matrix();
    RatMatrix s = RatMatrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t found = n;
        for (std::size_t i = col; i < n; ++i)
            if (usable(m.at(i, i))) {
                found = i;
                break;
            }
        if (found < n) {
            if (found != col) {
                RatMatrix t = RatMatrix::identity(n);
                t.at(col, col) = 0;
                t.at(found, found) = 0;
                t.at(col, found) = 1;
                t.at(found, col) = 1;
                apply_congruence(m, s, t);
            }
        } else {
            // No usable diagonal entry: pick a usable off-diagonal one and
            // pivot on e_i + e_j, whose norm m_ii + 2 m_ij + m_jj is usable
            // because the diagonal terms are not and 2 m_ij is.
            std::size_t bi = n, bj = n;
            for (std::size_t i = col; i < n && bi == n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (usable(m.at(i, j))) {
                        bi = i;
                        bj = j;
                        break;
                    }
            if (bi == n) throw std::logic_error("diagonalize: no pivot despite nonzero determinant");
            RatMatrix t = RatMatrix::identity(n);
            if (bi == col) {
                t.at(bj, col) = 1;
            } else {
                t.at(col, col) = 0;
                t.at(bi, col) = 1;
                t.at(bj, col) = 1;
                t.at(col, bi) = 1;
                t.at(bi, bi) = 0;
            }
            apply_congruence(m, s, t);
        }
        const Rat piv = m.at(col, col);
        RatMatrix t = RatMatrix::identity(n);
        bool any = false;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (m.at(col, r) == 0) continue;
            t.at(col, r) = -m.at(col, r) / piv;
            any = true;
        }
        if (any) apply_congruence(m, s, t);
    }
    return CongruenceResult{std::move(m), std::move(s),
                            p ? "local(" + p->str() + ")" : "global"};
}

} // namespace detail

inline CongruenceResult diagonalize(const SymmetricForm& form) {
    return detail::diagonalize_impl(form, nullptr);
}

// Local mode at an odd prime p: requires p-integral entries and p not
// dividing the determinant; yields a p-unit diagonal with |det S| = 1.
inline CongruenceResult diagonalize(const SymmetricForm& form, const Int& p) {
    return detail::diagonalize_impl(form, &p);
}

// Euler's criterion: u^((p-1)/2) is +1 exactly on the nonzero squares mod p.
inline int legendre(const Int& u, const Int& p) {
    if (p < 3 || !detail::is_prime(p))
        throw std::invalid_argument("legendre: p must be an odd prime");
    Int r = u % p;
    if (r < 0) r += p;
    if (r == 0) throw std::invalid_argument("legendre: u must be a unit modulo p");
    return boost::multiprecision::powm(r, (p - 1) / 2, p) == 1 ? 1 : -1;
}

namespace detail {

// Legendre symbol of a p-adic unit rational x/y: an odd inverse has the same
// symbol as the number itself.
inline int legendre_unit(const Rat& u, const Int& p) {
    return legendre(rat_num(u), p) * legendre(rat_den(u), p);
}

} // namespace detail

// Hilbert symbol (a, b)_v: +1 exactly when z^2 = a x^2 + b y^2 has a
// nontrivial solution over the completion at v. The place v is an odd prime,
// 2, or 0 for the infinite (real) place. With a = v^alpha u, b = v^beta w
// for unit u, w:
//   odd p:  (-1)^(alpha beta (p-1)/2) (u/p)^beta (w/p)^alpha,
//   p = 2:  (-1)^(eps(u) eps(w) + alpha omega(w) + beta omega(u)),
//   real:   -1 iff both arguments are negative.
inline int hilbert(const Rat& a, const Rat& b, const Int& v) {
    if (a == 0 || b == 0) throw std::invalid_argument("hilbert: arguments must be nonzero");
    if (v == 0) return (a < 0 && b < 0) ? -1 : 1;
    if (v == 2) {
        auto [alpha, u] = detail::split_valuation(a, v);
        auto [beta, w] = detail::split_valuation(b, v);
        int u8 = detail::odd_unit_mod8(u), w8 = detail::odd_unit_mod8(w);
        int e = detail::eps2(u8) * detail::eps2(w8);
        if (alpha % 2 != 0) e += detail::omega2(w8);
        if (beta % 2 != 0) e += detail::omega2(u8);
        return e % 2 == 0 ? 1 : -1;
    }
    if (v < 0 || !detail::is_prime(v))
        throw std::invalid_argument("hilbert: place must be 0 (infinity), 2, or an odd prime");
    auto [alpha, u] = detail::split_valuation(a, v);
    auto [beta, w] = detail::split_valuation(b, v);
    int s = 1;
    if (alpha % 2 != 0 && beta % 2 != 0 && v % 4 == 3) s = -s;
    if (beta % 2 != 0) s *= detail::legendre_unit(u, v);
    if (alpha % 2 != 0) s *= detail::legendre_unit(w, v);
    return s;
}

namespace detail {

inline int hasse_from_diagonal(const std::vector<Rat>& d, const Int& v) {
    int s = 1;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) s *= hilbert(d[i], d[j], v);
    return s;
}

} // namespace detail

// Product of pairwise Hilbert symbols of any diagonalization; independent of
// the diagonalization chosen.
inline int hasse_witt(const SymmetricForm& form, const Int& v) {
    return detail::hasse_from_diagonal(diagonalize(form).diagonal(), v);
}

// Squarefree integer representing x modulo nonzero rational squares;
// num * den lies in the class of num / den.
inline Int squarefree_class(const Rat& x) {
    if (x == 0) throw std::invalid_argument("squarefree_class: zero has no square class");
    Int n = rat_num(x) * rat_den(x);
    Int out = n < 0 ? -1 : 1;
    for (const auto& [p, e] : detail::factor(boost::multiprecision::abs(n)))
        if (e % 2 != 0) out *= p;
    return out;
}

struct QFormInvariants {
    std::size_t dim = 0;
    long signature = 0;  // positive minus negative diagonal entries
    Int disc_class;      // squarefree representative of det modulo squares
    std::map<Int, int> hasse; // place (0 = infinity) -> +-1 over the relevant set
};

// Complete invariant triple plus Hasse-Witt values over the relevant places:
// the infinite place, 2, and every odd prime dividing a numerator or
// denominator of the diagonalized entries (symbols elsewhere are +1 since
// all arguments are units there).
inline QFormInvariants form_invariants(const SymmetricForm& form) {
    if (form.det() == 0) throw std::domain_error("form_invariants: form is degenerate");
    std::vector<Rat> d = diagonalize(form).diagonal();
    QFormInvariants inv;
    inv.dim = form.dimension();
    for (const Rat& x : d) inv.signature += x > 0 ? 1 : -1;
    inv.disc_class = squarefree_class(form.det());
    std::set<Int> places{Int(0), Int(2)};
    for (const Rat& x : d) {
        for (const auto& [p, e] : detail::factor(boost::multiprecision::abs(rat_num(x))))
            if (p != 2) places.insert(p);
        for (const auto& [p, e] : detail::factor(rat_den(x)))
            if (p != 2) places.insert(p);
    }
    for (const Int& v : places) inv.hasse[v] = detail::hasse_from_diagonal(d, v);
    return inv;
}

struct EquivalenceReport {
    bool equivalent = false;
    std::string reason; // empty when equivalent
    QFormInvariants first, second;
};

// Decision through the classification: equivalent over Q exactly when
// dimension, signature, discriminant class, and every local invariant agree
// (places recorded for only one side count as +1 on the other).
inline EquivalenceReport rationally_equivalent(const SymmetricForm& a, const SymmetricForm& b) {
    EquivalenceReport rep{false, "", form_invariants(a), form_invariants(b)};
    if (rep.first.dim != rep.second.dim) {
        rep.reason = "dimension mismatch";
        return rep;
    }
    if (rep.first.signature != rep.second.signature) {
        rep.reason = "signature mismatch";
        return rep;
    }
    if (rep.first.disc_class != rep.second.disc_class) {
        rep.reason = "discriminant class mismatch";
        return rep;
    }
    std::set<Int> places;
    for (const auto& [v, s] : rep.first.hasse) places.insert(v);
    for (const auto& [v, s] : rep.second.hasse) places.insert(v);
    for (const Int& v : places) {
        auto ia = rep.first.hasse.find(v);
        auto ib = rep.second.hasse.find(v);
        int sa = ia == rep.first.hasse.end() ? 1 : ia->second;
        int sb = ib == rep.second.hasse.end() ? 1 : ib->second;
        if (sa != sb) {
            rep.reason = "local invariant mismatch at " + (v == 0 ? std::string("infinity") : v.str());
            return rep;
        }
    }
    rep.equivalent = true;
    return rep;
}

// Matrix literal "[a, b; c, d]" with rational entries, rows split by ';',
// optionally wrapped as gram([...]); whitespace free-form.
inline SymmetricForm parse_symmetric_form(const std::string& text) {
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto expect = [&](char c, const char* what) {
        skip();
        if (i >= text.size() || text[i] != c)
            throw std::invalid_argument(std::string("parse_symmetric_form: expected ") + what);
        ++i;
    };
    skip();
    bool wrapped = false;
    if (text.compare(i, 4, "gram") == 0) {
        i += 4;
        expect('(', "'(' after gram");
        wrapped = true;
    }
    expect('[', "'['");
    std::vector<std::vector<Rat>> rows(1);
    for (;;) {
        skip();
        std::size_t start = i;
        while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) ||
                                   text[i] == '-' || text[i] == '+' || text[i] == '/'))
            ++i;
        if (i == start) throw std::invalid_argument("parse_symmetric_form: expected a rational entry");
        rows.back().push_back(parse_rational(text.substr(start, i - start)));
        skip();
        if (i < text.size() && text[i] == ',') {
            ++i;
            continue;
        }
        if (i < text.size() && text[i] == ';') {
            ++i;
            rows.emplace_back();
            continue;
        }
        break;
    }
    expect(']', "']'");
    if (wrapped) expect(')', "')'");
    skip();
    if (i != text.size()) throw std::invalid_argument("parse_symmetric_form: trailing characters");
    RatMatrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols())
            throw std::invalid_argument("parse_symmetric_form: rows differ in length");
        for (std::size_t c = 0; c < rows[r].size(); ++c) m.at(r, c) = rows[r][c];
    }
    return SymmetricForm(std::move(m));
}

} // namespace lattheta
