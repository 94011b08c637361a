#pragma once

#include "lattheta/qseries.hpp"
#include "lattheta/rational_matrix.hpp"
#include "lattheta/theta_kernel.hpp"

#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lattheta {

// Lattices are described by a tiny direct-sum language:
//
//   spec   := term ("+" term)*
//   term   := [coef "*"] base ["^" INT]
//   base   := "Z" | "gram(" "[" row (";" row)* "]" ")"
//   coef   := "sqrt(" RATIONAL ")" | RATIONAL
//
// "c*Z" scales lengths by c (Gram entry c^2), "base^k" repeats the summand.
// Example: "Z + sqrt(2)*Z + 2*Z" is the rank-3 lattice with Gram diag(1,2,4).

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(const std::string& what, std::size_t off)
        : std::runtime_error(what + " at offset " + std::to_string(off)), offset(off) {}
};

struct LatticeBlock {
    Rat scale_sq;    // multiplies the block Gram
    RatMatrix gram;  // unscaled base Gram; 1x1 [1] for Z
    bool is_z;
};

class LatticeSpec {
public:
    static LatticeSpec parse(const std::string& text);

    const std::string& text() const { return text_; }
    const std::vector<LatticeBlock>& blocks() const { return blocks_; }
    std::size_t dimension() const { return dim_; }
    const RatMatrix& gram() const { return gram_; }
    const Rat& det() const { return det_; }
    double volume() const { return std::sqrt(to_double(det_)); }

    bool direct_sum_of_scaled_z() const {
        for (const auto& b : blocks_)
            if (!b.is_z) return false;
        return true;
    }

private:
    std::string text_;
    std::vector<LatticeBlock> blocks_;
    std::size_t dim_ = 0;
    RatMatrix gram_;
    Rat det_ = 1;

    void assemble() {
        dim_ = 0;
        for (const auto& b : blocks_) dim_ += b.gram.rows();
        gram_ = RatMatrix(dim_, dim_);
        det_ = 1;
        std::size_t off = 0;
        for (const auto& b : blocks_) {
            std::size_t m = b.gram.rows();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    gram_.at(off + i, off + j) = b.scale_sq * b.gram.at(i, j);
            det_ *= pow_rat(b.scale_sq, static_cast<long>(m)) * b.gram.det();
            off += m;
        }
    }
};

namespace detail {

class SpecParser {
public:
    explicit SpecParser(const std::string& text) : text_(text) {}

    std::vector<LatticeBlock> run() {
        std::vector<LatticeBlock> blocks;
        parse_term(blocks);
        while (!at_end()) {
            expect_char('+', "expected '+' between summands");
            parse_term(blocks);
        }
        return blocks;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    [[noreturn]] void fail(const std::string& what, std::size_t off) { throw ParseError(what, off); }

    void expect_char(char c, const std::string& what, std::size_t anchor = std::string::npos) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            fail(what, pos_ < text_.size() || anchor == std::string::npos ? pos_ : anchor);
        ++pos_;
    }

    bool try_char(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool number_ahead() {
        char c = peek();
        return std::isdigit(static_cast<unsigned char>(c)) || c == '-';
    }

    Rat parse_number(std::size_t anchor = std::string::npos) {
        skip_ws();
        if (pos_ >= text_.size())
            fail("expected number", anchor == std::string::npos ? pos_ : anchor);
        std::size_t start = pos_;
        if (text_[pos_] == '-') ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start || (pos_ == start + 1 && text_[start] == '-'))
            fail("expected number", start);
        if (pos_ < text_.size() && text_[pos_] == '/') {
            ++pos_;
            std::size_t dstart = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == dstart) fail("expected denominator digits", dstart);
        }
        try {
            return parse_rational(text_.substr(start, pos_ - start));
        } catch (const std::invalid_argument& e) {
            fail(e.what(), start);
        }
    }

    std::string parse_ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected 'Z', 'gram' or 'sqrt'", start);
        return text_.substr(start, pos_ - start);
    }

    void parse_term(std::vector<LatticeBlock>& blocks) {
        Rat scale_sq = 1;
        skip_ws();
        std::size_t term_start = pos_;
        if (number_ahead()) {
            Rat c = parse_number();
            if (c == 0) fail("zero scale makes a degenerate summand", term_start);
            scale_sq = c * c;
            expect_char('*', "expected '*' after scale");
        } else {
            std::size_t save = pos_;
            std::string id = parse_ident();
            if (id == "sqrt") {
                skip_ws();
                std::size_t paren = pos_;
                expect_char('(', "expected '(' after sqrt");
                Rat r = parse_number(paren);
                if (r <= 0) fail("sqrt scale must be positive", paren);
                expect_char(')', "unterminated sqrt", paren);
                expect_char('*', "expected '*' after scale");
                scale_sq = r;
            } else {
                pos_ = save; // base keyword; reparse below
            }
        }

        LatticeBlock block;
        block.scale_sq = scale_sq;
        skip_ws();
        std::size_t base_start = pos_;
        std::string id = parse_ident();
        if (id == "Z") {
            block.is_z = true;
            block.gram = RatMatrix(1, 1);
            block.gram.at(0, 0) = 1;
        } else if (id == "gram") {
            block.is_z = false;
            block.gram = parse_gram_matrix();
        } else {
            fail("expected 'Z' or 'gram'", base_start);
        }

        long repeat = 1;
        if (try_char('^')) {
            skip_ws();
            std::size_t rep_start = pos_;
            Rat k = parse_number();
            if (rat_den(k) != 1 || k <= 0) fail("repeat count must be a positive integer", rep_start);
            repeat = rat_num(k).convert_to<long>();
        }
        for (long i = 0; i < repeat; ++i) blocks.push_back(block);
    }

    RatMatrix parse_gram_matrix() {
        skip_ws();
        std::size_t paren = pos_;
        expect_char('(', "expected '(' after gram");
        expect_char('[', "expected '[' opening matrix", paren);
        std::vector<std::vector<Rat>> rows(1);
        for (;;) {
            rows.back().push_back(parse_number(paren));
            if (try_char(',')) continue;
            if (try_char(';')) {
                rows.emplace_back();
                continue;
            }
            break;
        }
        expect_char(']', "unterminated matrix", paren);
        expect_char(')', "unterminated gram", paren);

        std::size_t n = rows.size();
        RatMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            if (rows[i].size() != n)
                fail("gram matrix must be square (row " + std::to_string(i + 1) + " has " +
                         std::to_string(rows[i].size()) + " of " + std::to_string(n) + " entries)",
                     paren);
            for (std::size_t j = 0; j < n; ++j) m.at(i, j) = rows[i][j];
        }
        if (!m.is_symmetric()) throw std::domain_error("lattice spec: gram block is not symmetric");
        if (!is_positive_definite(m)) throw std::domain_error("lattice spec: gram block is not positive definite");
        return m;
    }
};

} // namespace detail

inline LatticeSpec LatticeSpec::parse(const std::string& text) {
    LatticeSpec spec;
    spec.text_ = text;
    spec.blocks_ = detail::SpecParser(text).run();
    spec.assemble();
    return spec;
}

inline LatticeSpec parse_spec(const std::string& text) { return LatticeSpec::parse(text); }

// Exact vector counts per norm, norms on the quarter-integer grid.
struct ThetaCoeffs {
    Rat max_norm;
    std::map<Rat, Int> counts;

    Int count(const Rat& norm) const {
        auto it = counts.find(norm);
        return it == counts.end() ? Int(0) : it->second;
    }
};

// Enumerated counts as a q-series; every exponent up to and including the
// enumeration bound is exact, so trust extends a quarter step past it.
inline QSeries qseries_from_counts(const ThetaCoeffs& counts) {
    QSeries s(counts.max_norm + Rat(1, 4));
    for (const auto& [norm, c] : counts.counts) s.set(norm, Rat(c));
    return s;
}

namespace detail {

// Depth-first enumeration of all integer vectors with v^T G v <= cap, using
// the exact rational factorization G = L D L^T: with w = L^T v the norm is
// sum d_i w_i^2, so level i ranges over d_i (v_i + c_i)^2 <= remaining where
// c_i collects the already-fixed higher coordinates. Integer bounds come from
// a double estimate repaired by exact rational comparisons, so no boundary
// vector is ever missed or double-counted.
class GramEnumerator {
public:
    GramEnumerator(const LdlFactorization& f, const Rat& cap, std::map<Rat, Int>& out)
        : l_(f.l), d_(f.d), n_(static_cast<long>(f.d.size())), cap_(cap), out_(out) {}

    void run() {
        std::vector<Rat> c(static_cast<std::size_t>(n_), Rat(0));
        descend(n_ - 1, cap_, Rat(0), c);
    }

private:
    const RatMatrix& l_;
    const std::vector<Rat>& d_;
    long n_;
    Rat cap_;
    std::map<Rat, Int>& out_;

    void descend(long i, const Rat& rem, const Rat& used, const std::vector<Rat>& c) {
        const Rat& di = d_[static_cast<std::size_t>(i)];
        const Rat& ci = c[static_cast<std::size_t>(i)];
        // v is admissible iff (v + c)^2 <= t, i.e. v lies in [-c-sqrt(t), -c+sqrt(t)].
        // Each endpoint predicate below is monotone and exact, so the double
        // estimate only has to land within a few steps of the truth.
        Rat t = rem / di;
        auto below_upper = [&](long m) {
            Rat w = ci + m;
            return w <= 0 || w * w <= t;
        };
        auto above_lower = [&](long m) {
            Rat w = ci + m;
            return w >= 0 || w * w <= t;
        };
        double cd = to_double(ci);
        double rd = std::sqrt(std::max(0.0, to_double(t)));
        long hi = static_cast<long>(std::floor(-cd + rd));
        while (below_upper(hi + 1)) ++hi;
        while (!below_upper(hi)) --hi;
        long lo = static_cast<long>(std::ceil(-cd - rd));
        while (above_lower(lo - 1)) --lo;
        while (!above_lower(lo)) ++lo;

        for (long v = lo; v <= hi; ++v) {
            Rat w = ci + v;
            Rat norm_here = used + di * w * w;
            if (i == 0) {
                out_[norm_here] += 1;
                continue;
            }
            std::vector<Rat> cnext(c.begin(), c.begin() + i);
            for (long j = 0; j < i; ++j)
                if (l_.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) != 0)
                    cnext[static_cast<std::size_t>(j)] += l_.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * v;
            descend(i - 1, cap_ - norm_here, norm_here, cnext);
        }
    }
};

inline void require_quarter_grid(const RatMatrix& g) {
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
            if (rat_den(Rat(4) * g.at(i, j)) != 1)
                throw std::domain_error(
                    "theta_coeffs: norms leave the quarter-integer grid (4G is not integral)");
}

} // namespace detail

inline ThetaCoeffs theta_coeffs(const LatticeSpec& spec, const Rat& max_norm) {
    if (max_norm <= 0) throw std::invalid_argument("theta_coeffs: max_norm must be positive");
    detail::require_quarter_grid(spec.gram());
    LdlFactorization f = ldl_decompose(spec.gram());
    ThetaCoeffs tc;
    tc.max_norm = max_norm;
    detail::GramEnumerator(f, max_norm, tc.counts).run();
    return tc;
}

// Independent exact route for direct sums of scaled Z: the theta series is
// the product of theta3(q^{c^2}) over the summands.
inline QSeries product_theta_qseries(const LatticeSpec& spec, const Rat& order) {
    if (!spec.direct_sum_of_scaled_z())
        throw std::domain_error("product_theta_qseries: spec is not a direct sum of scaled Z");
    QSeries acc = QSeries::one(order);
    for (const auto& b : spec.blocks()) {
        Rat base_order = Rat(ceil_rat(order / b.scale_sq)) + 1;
        QSeries factor = theta_series(3, base_order).compose_scale(b.scale_sq);
        acc = acc * factor.truncated(order);
    }
    return acc;
}

// Numeric theta-series evaluation with a certified truncation bound. Direct
// sums multiply certified theta3 values. Gram specs enumerate counts up to a
// cutoff M and bound the tail through the smallest-eigenvalue estimate mu:
// splitting Q(v) >= (1-s)M + s mu |v|^2 gives
//   tail <= e^{-pi (1-s) M y} * theta3(s mu y)^n,
// minimized over a few dyadic s. The enumerator memoizes counts, so repeated
// evaluations on one lattice pay enumeration once.
class ThetaEvaluator {
public:
    explicit ThetaEvaluator(LatticeSpec spec) : spec_(std::move(spec)) {
        if (!spec_.direct_sum_of_scaled_z()) {
            detail::require_quarter_grid(spec_.gram());
            ldl_ = ldl_decompose(spec_.gram());
            mu_ = eigenvalue_lower_bound(spec_.gram());
        }
    }

    const LatticeSpec& spec() const { return spec_; }

    CertifiedValue evaluate(const EvalPoint& pt, double tol = 1e-12) const {
        if (!(tol > 0) || !std::isfinite(tol))
            throw std::invalid_argument("theta_eval_numeric: tolerance must be positive");
        return spec_.direct_sum_of_scaled_z() ? eval_product(pt, tol) : eval_enumerated(pt, tol);
    }

    // |Theta(1/(l y)) - l^{n/4} y^{n/2} Theta(y)|; near zero iff the lattice
    // behaves l-modularly at this point.
    double modularity_residual(long l, double y, double tol = 1e-12) const {
        if (l < 1) throw std::invalid_argument("modularity_residual: l must be a positive integer");
        if (!(y > 0)) throw std::domain_error("modularity_residual: y must be positive");
        double n = static_cast<double>(spec_.dimension());
        CertifiedValue lhs = evaluate(EvalPoint(1.0 / (l * y)), tol / 2);
        CertifiedValue rhs = evaluate(EvalPoint(y), tol / 2);
        double factor = std::pow(static_cast<double>(l), n / 4.0) * std::pow(y, n / 2.0);
        return std::abs(lhs.value - factor * rhs.value);
    }

private:
    LatticeSpec spec_;
    LdlFactorization ldl_;
    Rat mu_ = 0;
    mutable ThetaCoeffs cache_{Rat(0), {}};

    // max(Gershgorin, 1/||G^{-1}||_inf); the inverse-norm part is positive
    // for every positive definite G, Gershgorin alone need not be.
    static Rat eigenvalue_lower_bound(const RatMatrix& g) {
        Rat gersh;
        bool first = true;
        for (std::size_t i = 0; i < g.rows(); ++i) {
            Rat row = g.at(i, i);
            for (std::size_t j = 0; j < g.cols(); ++j)
                if (j != i) row -= abs_rat(g.at(i, j));
            if (first || row < gersh) gersh = row;
            first = false;
        }
        RatMatrix inv = g.inverse();
        Rat norm = 0;
        for (std::size_t i = 0; i < inv.rows(); ++i) {
            Rat row = 0;
            for (std::size_t j = 0; j < inv.cols(); ++j) row += abs_rat(inv.at(i, j));
            if (row > norm) norm = row;
        }
        Rat bound = Rat(1) / norm;
        return gersh > bound ? gersh : bound;
    }

    CertifiedValue eval_product(const EvalPoint& pt, double tol) const {
        std::size_t n = spec_.blocks().size();
        double sub = tol / (4.0 * static_cast<double>(n));
        for (int attempt = 0; attempt < 4; ++attempt) {
            double value = 1.0, upper = 1.0;
            for (const auto& b : spec_.blocks()) {
                CertifiedValue t = theta_eval(3, EvalPoint(to_double(b.scale_sq) * pt.y), sub);
                value *= t.value;
                upper *= t.value + t.err_bound;
            }
            double err = upper - value;
            if (err <= tol) return {value, err};
            sub *= 0.25 * tol / err;
        }
        throw std::runtime_error("theta_eval_numeric: tolerance unreachable");
    }

    CertifiedValue eval_enumerated(const EvalPoint& pt, double tol) const {
        const double pi = std::numbers::pi;
        const double y = pt.y;
        const double n = static_cast<double>(spec_.dimension());
        const double mu = to_double(mu_);

        double best_m = 0, best_tail = 0;
        bool have = false;
        for (double s : {0.5, 0.25, 0.125, 0.0625, 0.03125}) {
            CertifiedValue t3 = theta_eval(3, EvalPoint(s * mu * y), 1e-6);
            double logu = n * std::log(t3.value + t3.err_bound);
            double m = (logu - std::log(tol / 2)) / (pi * (1.0 - s) * y);
            m = std::max(1.0, std::ceil(m));
            double tail = std::exp(n * std::log(t3.value + t3.err_bound) - pi * (1.0 - s) * m * y);
            if (!have || m < best_m) {
                best_m = m;
                best_tail = tail;
                have = true;
            }
        }

        Rat cutoff(static_cast<long>(best_m));
        if (cache_.max_norm < cutoff) {
            cache_.counts.clear();
            cache_.max_norm = cutoff;
            detail::GramEnumerator(ldl_, cutoff, cache_.counts).run();
        }

        // Kahan summation keeps rounding far below the certified tail.
        double sum = 0.0, comp = 0.0;
        for (const auto& [norm, count] : cache_.counts) {
            if (norm > cutoff) break;
            double term = count.convert_to<double>() * std::exp(-pi * to_double(norm) * y);
            double t = sum + (term - comp);
            comp = (t - sum) - (term - comp);
            sum = t;
        }
        return {sum, best_tail};
    }
};

inline CertifiedValue theta_eval_numeric(const LatticeSpec& spec, const EvalPoint& pt, double tol = 1e-12) {
    return ThetaEvaluator(spec).evaluate(pt, tol);
}

inline double modularity_residual(const LatticeSpec& spec, long l, double y, double tol = 1e-12) {
    return ThetaEvaluator(spec).modularity_residual(l, y, tol);
}

} // namespace lattheta
