#pragma once

#include "lattheta/rational.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lattheta {

// Dense univariate polynomial over Q; coefficient i multiplies x^i. The zero
// polynomial is the empty coefficient vector (degree -1).
class RationalPoly {
public:
    RationalPoly() = default;
    explicit RationalPoly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { trim(); }
    static RationalPoly constant(const Rat& v) { return RationalPoly(std::vector<Rat>{v}); }

    long degree() const { return static_cast<long>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Rat>& coeffs() const { return c_; }

    Rat coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Rat(0); }
    const Rat& leading() const {
        if (is_zero()) throw std::domain_error("RationalPoly: zero polynomial has no leading coefficient");
        return c_.back();
    }

    Rat operator()(const Rat& x) const {
        Rat acc = 0;
        for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
        return acc;
    }

    double eval_double(double x) const {
        double acc = 0;
        for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + to_double(c_[i]);
        return acc;
    }

    RationalPoly derivative() const {
        if (c_.size() <= 1) return RationalPoly();
        std::vector<Rat> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * Rat(static_cast<long>(i));
        return RationalPoly(std::move(d));
    }

    RationalPoly operator+(const RationalPoly& o) const {
        std::vector<Rat> r(std::max(c_.size(), o.c_.size()), Rat(0));
        for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
        for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
        return RationalPoly(std::move(r));
    }

    RationalPoly operator-(const RationalPoly& o) const { return *this + (o * Rat(-1)); }

    RationalPoly operator*(const RationalPoly& o) const {
        if (is_zero() || o.is_zero()) return RationalPoly();
        std::vector<Rat> r(c_.size() + o.c_.size() - 1, Rat(0));
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == 0) continue;
            for (std::size_t j = 0; j < o.c_.size(); ++j)
                if (o.c_[j] != 0) r[i + j] += c_[i] * o.c_[j];
        }
        return RationalPoly(std::move(r));
    }

    RationalPoly operator*(const Rat& s) const {
        std::vector<Rat> r = c_;
        for (auto& x : r) x *= s;
        return RationalPoly(std::move(r));
    }

    // Euclidean division; divisor must be nonzero.
    std::pair<RationalPoly, RationalPoly> divmod(const RationalPoly& d) const {
        if (d.is_zero()) throw std::domain_error("RationalPoly: division by zero polynomial");
        std::vector<Rat> rem = c_;
        std::vector<Rat> quo;
        long dd = d.degree();
        if (degree() >= dd) quo.assign(static_cast<std::size_t>(degree() - dd) + 1, Rat(0));
        for (long k = degree(); k >= dd; --k) {
            Rat f = rem[static_cast<std::size_t>(k)] / d.leading();
            if (f == 0) continue;
            quo[static_cast<std::size_t>(k - dd)] = f;
            for (long j = 0; j <= dd; ++j) rem[static_cast<std::size_t>(k - dd + j)] -= f * d.c_[static_cast<std::size_t>(j)];
        }
        return {RationalPoly(std::move(quo)), RationalPoly(std::move(rem))};
    }

    RationalPoly monic() const {
        if (is_zero()) return *this;
        return *this * (Rat(1) / leading());
    }

    bool operator==(const RationalPoly& o) const { return c_ == o.c_; }

    std::string str() const {
        if (is_zero()) return "0";
        std::string out;
        for (std::size_t i = c_.size(); i-- > 0;) {
            if (c_[i] == 0) continue;
            if (!out.empty()) out += " + ";
            out += "(" + lattheta::to_string(c_[i]) + ")";
            if (i > 0) out += "x^" + std::to_string(i);
        }
        return out;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Rat> c_;
};

inline RationalPoly poly_gcd(RationalPoly a, RationalPoly b) {
    while (!b.is_zero()) {
        RationalPoly r = a.divmod(b).second;
        a = std::move(b);
        b = r.monic();
    }
    return a.monic();
}

inline RationalPoly squarefree_part(const RationalPoly& p) {
    if (p.degree() <= 1) return p;
    RationalPoly g = poly_gcd(p, p.derivative());
    if (g.degree() <= 0) return p;
    auto [q, r] = p.divmod(g);
    if (!r.is_zero()) throw std::logic_error("squarefree_part: inexact division");
    return q;
}

// Sturm chain of a squarefree polynomial: s0 = p, s1 = p', then negated
// Euclidean remainders until zero. Members are normalized to monic times the
// original sign to keep coefficient growth down without flipping any sign.
inline std::vector<RationalPoly> sturm_chain(const RationalPoly& squarefree) {
    std::vector<RationalPoly> chain{squarefree};
    RationalPoly d = squarefree.derivative();
    while (!d.is_zero()) {
        chain.push_back(d);
        RationalPoly r = chain[chain.size() - 2].divmod(d).second * Rat(-1);
        if (!r.is_zero()) r = r * (Rat(1) / abs_rat(r.leading()));
        d = std::move(r);
    }
    return chain;
}

inline long sign_variations(const std::vector<RationalPoly>& chain, const Rat& x) {
    long variations = 0;
    int prev = 0;
    for (const auto& p : chain) {
        int s = sign(p(x));
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++variations;
        prev = s;
    }
    return variations;
}

// Root-counting certificate over a half-open interval (lo, hi]: exact count
// of distinct real roots plus the sign of p at hi.
struct SturmCertificate {
    RationalPoly polynomial;
    Rat lo, hi;
    long root_count;
    int endpoint_sign; // sign of polynomial(hi); 0 only when hi is a root
};

inline SturmCertificate sturm_root_count(const RationalPoly& p, const Rat& lo, const Rat& hi) {
    if (p.is_zero()) throw std::invalid_argument("sturm_root_count: zero polynomial");
    if (!(lo < hi)) throw std::invalid_argument("sturm_root_count: need lo < hi");
    auto chain = sturm_chain(squarefree_part(p));
    long count = sign_variations(chain, lo) - sign_variations(chain, hi);
    return SturmCertificate{p, lo, hi, count, sign(p(hi))};
}

// Disjoint half-open intervals (a, b] inside (lo, hi], each holding exactly
// one distinct root of p.
inline std::vector<std::pair<Rat, Rat>> isolate_roots(const RationalPoly& p, const Rat& lo, const Rat& hi) {
    if (p.is_zero()) throw std::invalid_argument("isolate_roots: zero polynomial");
    if (!(lo < hi)) throw std::invalid_argument("isolate_roots: need lo < hi");
    RationalPoly sf = squarefree_part(p);
    auto chain = sturm_chain(sf);
    std::vector<std::pair<Rat, Rat>> out;
    struct Frame { Rat a, b; long va, vb; };
    std::vector<Frame> stack{{lo, hi, sign_variations(chain, lo), sign_variations(chain, hi)}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        long n = f.va - f.vb;
        if (n <= 0) continue;
        if (n == 1) {
            out.emplace_back(f.a, f.b);
            continue;
        }
        Rat mid = (f.a + f.b) / 2;
        long vm = sign_variations(chain, mid);
        stack.push_back({mid, f.b, vm, f.vb});
        stack.push_back({f.a, mid, f.va, vm});
    }
    return out;
}

// Sign of g at the unique root of d inside (lo, hi]. Exact: refines the
// isolating interval until g has no root in it, and reports 0 via gcd when g
// shares the root. Preconditions: d has exactly one distinct root there.
inline int sign_at_root(const RationalPoly& g, const RationalPoly& d, Rat lo, Rat hi) {
    if (d(hi) == 0) return sign(g(hi));
    if (g.is_zero()) return 0;
    if (g.degree() == 0) return sign(g.leading());
    RationalPoly h = poly_gcd(d, g);
    for (;;) {
        if (h.degree() >= 1 && sturm_root_count(h, lo, hi).root_count > 0) return 0;
        if (sturm_root_count(g, lo, hi).root_count == 0) return sign(g(hi));
        Rat mid = (lo + hi) / 2;
        if (sturm_root_count(d, lo, mid).root_count == 1)
            hi = mid;
        else
            lo = mid;
        if (d(hi) == 0) return sign(g(hi));
    }
}

} // namespace lattheta
