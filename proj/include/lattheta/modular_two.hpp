#pragma once

#include "lattheta/lattice.hpp"
#include "lattheta/qseries.hpp"
#include "lattheta/rational_poly.hpp"
#include "lattheta/secrecy.hpp"
#include "lattheta/theta_kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lattheta {

// Theta series of 2-modular lattices in dimension n = 2k factor through two
// building blocks,
//
//   f1(y) = theta3(y) theta3(2y)                (theta series of Z + sqrt(2)*Z),
//   f2(y) = theta2(2y)^2 theta4(y)^2 / (4 theta3(y)^2 theta3(2y)^2),
//
// as Theta = f1^k (a_0 + a_1 f2 + a_2 f2^2 + ...) with rational a_i, so the
// modular secrecy quotient collapses to 1 / P(f2(y)) for a polynomial P. As
// y sweeps (0, inf), f2 sweeps (0, beta] with beta = (3 - 2 sqrt(2))/4, the
// peak being attained only at y = 1/sqrt(2). Whether the quotient peaks
// there is thus a question about P on (0, beta], and Sturm chains settle it
// exactly: P strictly decreasing is sufficient, P minimal at the right
// endpoint is the precise criterion. Certificates run on (0, 43/1000], a
// rational hair above beta, keeping every Sturm endpoint exact.

// Exact peak of f2, an element of Q(sqrt(2)) recorded as (p + q sqrt(2)) / r.
struct BetaConstant {
    Int p, q, r;
    double value;
};

inline const BetaConstant& beta_constant() {
    static const BetaConstant b{Int(3), Int(-2), Int(4), (3.0 - 2.0 * std::sqrt(2.0)) / 4.0};
    return b;
}

// Rational cap just above the peak; certificates cover (0, cap] so that the
// statement on (0, beta] follows while endpoints stay in Q.
inline const Rat& beta_cap() {
    static const Rat cap(43, 1000);
    return cap;
}

inline QSeries f1_series(const Rat& order) {
    if (order <= 0) throw std::invalid_argument("f1_series: order must be positive");
    QSeries t3 = theta_series(3, order);
    return (t3 * t3.compose_scale(2)).truncated(order);
}

inline QSeries f2_series(const Rat& order) {
    if (order <= 0) throw std::invalid_argument("f2_series: order must be positive");
    QSeries t3 = theta_series(3, order);
    QSeries t4 = theta_series(4, order);
    QSeries t2_2y = theta_series(2, order).compose_scale(2);
    QSeries t3_2y = theta_series(3, order).compose_scale(2);
    QSeries num = (t2_2y * t2_2y) * (t4 * t4);
    QSeries den = (t3 * t3) * (t3_2y * t3_2y) * Rat(4);
    return (num * den.invert()).truncated(order);
}

inline QSeries delta4_series(const Rat& order) {
    if (order <= 0) throw std::invalid_argument("delta4_series: order must be positive");
    QSeries f1 = f1_series(order);
    return (f1 * f1 * f2_series(order)).truncated(order);
}

// Certified evaluation of f2 with alpha = theta4^2 / theta3^2 expressed
// through the gap g = (theta3 - theta4) / theta3, which stays accurate where
// the plain ratio saturates at 1 in doubles: alpha = (1 - g)^2 exactly, so
//
//   f2 = (1 - alpha) alpha / (4 (1 + alpha))
//      = g (2 - g) (1 - g)^2 / (4 (1 + (1 - g)^2)),
//
// a product of well-conditioned factors. The map has slope at most 1/2 on
// g in [0, 1], so a gap interval of width w pins f2 to width w/2.
inline CertifiedValue f2_eval(double y, double tol = 1e-12) {
    if (!(tol > 0)) throw std::invalid_argument("f2_eval: tol must be positive");
    EvalPoint pt(y);
    auto shape = [](double g) {
        double r = 1.0 - g;
        return g * (2.0 - g) * r * r / (4.0 * (1.0 + r * r));
    };
    double rel = tol / 2;
    for (int attempt = 0; attempt < 4; ++attempt) {
        CertifiedValue gap = theta43_gap(pt, rel);
        double glo = std::max(0.0, gap.value - gap.err_bound);
        double ghi = std::min(1.0, gap.value + gap.err_bound);
        double err = 0.5 * (ghi - glo);
        if (err <= tol) return {shape(std::min(std::max(gap.value, glo), ghi)), err};
        rel *= 0.0625;
    }
    throw std::runtime_error("f2_eval: could not certify the requested tolerance");
}

// A 2-modular theta series divided by f1^k, i.e. the polynomial P in f2.
struct TwoModularPoly {
    std::string name;    // row label used in tables and reports
    long k;              // half-dimension n/2
    RationalPoly coeffs; // a_0 + a_1 f2 + ..., degree at most floor(k/2)
    std::string source;  // "fitted-from-theta", "tabulated", or "converted-even"
};

inline void validate_poly(const TwoModularPoly& row) {
    if (row.k < 1) throw std::invalid_argument("TwoModularPoly: k must be positive");
    if (row.coeffs.coeff(0) != 1)
        throw std::invalid_argument("TwoModularPoly: constant coefficient must be 1");
    if (row.coeffs.degree() > row.k / 2)
        throw std::invalid_argument("TwoModularPoly: degree exceeds floor(k/2)");
}

// Exact fit of a theta series against the basis f1^(k-2i) Delta4^i. Member i
// has q-valuation i, so peeling coefficients of Theta / f1^k in order of
// exponent is triangular; whatever remains afterwards must vanish through
// the input's whole trusted range.
inline TwoModularPoly fit_f2_polynomial(const QSeries& theta, long k) {
    if (k < 1) throw std::invalid_argument("fit_f2_polynomial: k must be positive");
    long m = k / 2;
    if (theta.truncation_order() < Rat(m + 1))
        throw std::invalid_argument("fit_f2_polynomial: theta series truncated below floor(k/2)+1");
    Rat order = theta.truncation_order();
    QSeries f2 = f2_series(order);
    QSeries residual = theta * f1_series(order).pow(static_cast<unsigned long>(k)).invert();
    std::vector<Rat> a(static_cast<std::size_t>(m) + 1, Rat(0));
    QSeries power = QSeries::one(order);
    for (long i = 0; i <= m; ++i) {
        if (i > 0) power = power * f2;
        a[static_cast<std::size_t>(i)] = residual.coeff(Rat(i));
        if (a[static_cast<std::size_t>(i)] != 0)
            residual = residual - power * a[static_cast<std::size_t>(i)];
    }
    if (!residual.known_zero())
        throw std::domain_error(
            "fit_f2_polynomial: series is not representable in the f1/Delta4 basis");
    TwoModularPoly row{"", k, RationalPoly(std::move(a)), "fitted-from-theta"};
    validate_poly(row);
    return row;
}

inline TwoModularPoly fit_f2_polynomial(const ThetaCoeffs& counts, long k) {
    return fit_f2_polynomial(qseries_from_counts(counts), k);
}

// Inverse of the fit: the exact q-expansion f1^k sum a_i f2^i.
inline QSeries theta_series_from_poly(const TwoModularPoly& row, const Rat& order) {
    validate_poly(row);
    if (order <= 0) throw std::invalid_argument("theta_series_from_poly: order must be positive");
    QSeries f2 = f2_series(order);
    QSeries sum = QSeries::one(order);
    QSeries power = QSeries::one(order);
    for (long i = 1; i <= row.coeffs.degree(); ++i) {
        power = power * f2;
        sum = sum + power * row.coeffs.coeff(static_cast<std::size_t>(i));
    }
    QSeries f1k = f1_series(order).pow(static_cast<unsigned long>(row.k));
    return (f1k * sum).truncated(order);
}

// Known 2-modular theta polynomials, published per lattice; the odd rows are
// labeled by ambient dimension, the even ones by the lattice's common name.
inline const std::vector<TwoModularPoly>& tabulated_polynomials() {
    static const std::vector<TwoModularPoly> rows = [] {
        auto mk = [](const char* name, long k, std::vector<long> a) {
            std::vector<Rat> c(a.begin(), a.end());
            return TwoModularPoly{name, k, RationalPoly(std::move(c)), "tabulated"};
        };
        return std::vector<TwoModularPoly>{
            mk("dim8", 4, {1, -8}),
            mk("dim12", 6, {1, -12}),
            mk("dim16", 8, {1, -16}),
            mk("dim18", 9, {1, -18, 18}),
            mk("dim20", 10, {1, -20, 40}),
            mk("dim22", 11, {1, -22, 66, -4}),
            mk("dim24", 12, {1, -24, 96, -28}),
            mk("dim26", 13, {1, -26, 130, -80}),
            mk("dim28", 14, {1, -28, 168, -176, 32}),
            mk("dim30", 15, {1, -30, 210, -282, 112}),
            mk("d4", 2, {1, -4}),
            mk("bw16", 8, {1, -16, 0, -256, 256}),
            mk("hs20", 10, {1, -20, 40, -160, 1280, -1024}),
        };
    }();
    return rows;
}

inline const TwoModularPoly& tabulated_polynomial(const std::string& name) {
    for (const auto& row : tabulated_polynomials())
        if (row.name == name) return row;
    throw std::invalid_argument("tabulated_polynomial: unknown row name: " + name);
}

// Sturm certificate for P' on (0, cap]. Zero roots plus a negative endpoint
// sign make P' negative on the whole interval, hence P strictly decreasing.
// A constant P has a zero derivative; the degenerate certificate (count 0,
// endpoint sign 0) never passes.
inline SturmCertificate negativity_certificate(const TwoModularPoly& row) {
    validate_poly(row);
    RationalPoly d = row.coeffs.derivative();
    if (d.is_zero()) return SturmCertificate{d, Rat(0), beta_cap(), 0, 0};
    return sturm_root_count(d, Rat(0), beta_cap());
}

// Full success test: decreasing on (0, cap] and positive at cap, which keeps
// the denominator of the secrecy quotient positive on the whole range.
inline bool certificate_passes(const TwoModularPoly& row, const SturmCertificate& cert) {
    return cert.root_count == 0 && cert.endpoint_sign < 0 && row.coeffs(beta_cap()) > 0;
}

enum class ConjectureVerdict { holds_decreasing, holds_global_min, fails, inconclusive };

inline const char* verdict_name(ConjectureVerdict v) {
    switch (v) {
    case ConjectureVerdict::holds_decreasing: return "holds_decreasing";
    case ConjectureVerdict::holds_global_min: return "holds_global_min";
    case ConjectureVerdict::fails: return "fails";
    case ConjectureVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

// Decides whether P attains its minimum over (0, cap] at the right endpoint.
// The decreasing certificate settles the common case; otherwise the minimum
// of P over [0, cap] sits at a boundary or a critical point, so it suffices
// to compare P(cap) against the constant term (the limit from the left
// boundary, approached but not attained) and against P at every root of P'
// in the interval, each comparison exact via Sturm isolation.
inline ConjectureVerdict conjecture_verdict(const TwoModularPoly& row) {
    validate_poly(row);
    const Rat& cap = beta_cap();
    Rat at_cap = row.coeffs(cap);
    if (at_cap <= 0) return ConjectureVerdict::inconclusive;
    if (certificate_passes(row, negativity_certificate(row)))
        return ConjectureVerdict::holds_decreasing;
    if (row.coeffs.coeff(0) < at_cap) return ConjectureVerdict::fails;
    RationalPoly d = row.coeffs.derivative();
    if (d.is_zero()) return ConjectureVerdict::holds_global_min;
    RationalPoly gap = row.coeffs - RationalPoly::constant(at_cap);
    for (const auto& [lo, hi] : isolate_roots(d, Rat(0), cap))
        if (sign_at_root(gap, d, lo, hi) < 0) return ConjectureVerdict::fails;
    return ConjectureVerdict::holds_global_min;
}

struct ConjectureReport {
    TwoModularPoly row;
    SturmCertificate certificate;
    ConjectureVerdict verdict;
};

inline ConjectureReport conjecture_report(const TwoModularPoly& row) {
    return ConjectureReport{row, negativity_certificate(row), conjecture_verdict(row)};
}

// Certified secrecy quotient 1 / P(f2(y)) for a lattice known only through
// its polynomial. P is evaluated exactly at the certified f2 estimate; the
// uncertainty transfers through a slope bound for P on [0, 0.045], a hair
// beyond the full f2 range.
inline CertifiedValue xi2_from_poly(const TwoModularPoly& row, double y, double tol = 1e-12) {
    validate_poly(row);
    if (!(tol > 0)) throw std::invalid_argument("xi2_from_poly: tol must be positive");
    Rat reach(45, 1000);
    Rat slope = 0;
    for (long i = 1; i <= row.coeffs.degree(); ++i)
        slope += abs_rat(row.coeffs.coeff(static_cast<std::size_t>(i))) * Rat(i) *
                 pow_rat(reach, i - 1);
    double slope_bound = to_double(slope) + 1.0;
    double sub = tol / (4.0 * slope_bound);
    for (int attempt = 0; attempt < 4; ++attempt) {
        CertifiedValue f2 = f2_eval(y, sub);
        if (Rat(f2.value) + Rat(f2.err_bound) <= reach) {
            double den = to_double(row.coeffs(Rat(f2.value)));
            if (!(den > 0))
                throw std::domain_error("xi2_from_poly: polynomial is not positive at f2(y)");
            double den_err = slope_bound * f2.err_bound;
            if (den - den_err > 0) {
                double value = 1.0 / den;
                double err = std::max(1.0 / (den - den_err) - value,
                                      value - 1.0 / (den + den_err));
                if (err <= tol) return {value, err};
            }
        }
        sub *= 0.0625;
    }
    throw std::runtime_error("xi2_from_poly: could not certify the requested tolerance");
}

// Coarse log-grid argmax of the secrecy quotient followed by golden-section
// refinement; returns the refined peak location.
inline double xi2_peak_location(const TwoModularPoly& row, double y_lo = 0.2, double y_hi = 2.5,
                                int grid_points = 200) {
    validate_poly(row);
    if (!(y_lo > 0) || !(y_hi > y_lo))
        throw std::invalid_argument("xi2_peak_location: need 0 < y_lo < y_hi");
    if (grid_points < 8) throw std::invalid_argument("xi2_peak_location: need at least 8 points");
    auto objective = [&](double y) { return -xi2_from_poly(row, y, 1e-13).value; };
    std::vector<double> ys(static_cast<std::size_t>(grid_points));
    double step = std::log(y_hi / y_lo) / (grid_points - 1);
    std::size_t best = 0;
    double best_val = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        ys[i] = y_lo * std::exp(step * static_cast<double>(i));
        double v = objective(ys[i]);
        if (i == 0 || v < best_val) {
            best = i;
            best_val = v;
        }
    }
    std::size_t left = best > 0 ? best - 1 : 0;
    std::size_t right = best + 1 < ys.size() ? best + 1 : ys.size() - 1;
    return detail::golden_section_min(objective, ys[left], ys[right], 1e-8).x;
}

} // namespace lattheta
