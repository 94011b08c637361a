#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lattheta {

// Numeric evaluation of the null theta constants
//
//   theta2(y) = sum_n q^{(n+1/2)^2},  theta3(y) = sum_n q^{n^2},
//   theta4(y) = sum_n (-1)^n q^{n^2},   q = e^{-pi y},  y > 0,
//
// summed over all integers n. Every value is returned together with a bound
// on the truncation error, so downstream consumers can certify their own
// tolerances instead of trusting "enough terms" folklore.
//
// For y >= 1 the series converge brutally fast (q <= e^{-pi}) and the tail
// after the n = N term is bounded by the geometric estimate
//   2 q^{(N+1)^2} / (1 - q)        (theta3, theta4)
//   2 q^{(N+3/2)^2} / (1 - q)      (theta2)
// using (m+1)^2 - (N+1)^2 >= m - N. For y < 1 the series would need many
// terms, so the evaluation point is first reflected by the imaginary
// transformation
//   theta3(1/y) = sqrt(y) theta3(y),
//   theta4(1/y) = sqrt(y) theta2(y),
//   theta2(1/y) = sqrt(y) theta4(y),
// which swaps kinds 2 and 4 and turns y < 1 into 1/y > 1. The reflection
// multiplies the inner truncation bound by sqrt(1/y), which is accounted for.
//
// err_bound is a truncation bound; double rounding (a few ulps) rides on top
// and is far below every tolerance used in this library.

struct EvalPoint {
    double y;
    double q;

    explicit EvalPoint(double y_) : y(y_), q(0) {
        if (!(y > 0) || !std::isfinite(y)) throw std::domain_error("EvalPoint: y must be finite and positive");
        q = std::exp(-std::numbers::pi * y);
    }
};

struct CertifiedValue {
    double value;
    double err_bound;
};

namespace detail {

inline constexpr int theta_max_terms = 256;

// Direct summation; requires y >= 1 so that q <= e^{-pi}.
inline CertifiedValue theta_sum_direct(int kind, double y, double tol) {
    const double pi = std::numbers::pi;
    const double q = std::exp(-pi * y);
    const double geom = 2.0 / (1.0 - q);
    if (kind == 2) {
        double s = 0.0;
        for (int n = 0; n < theta_max_terms; ++n) {
            double bound = geom * std::exp(-pi * y * (n + 0.5) * (n + 0.5));
            if (bound <= tol) return {s, bound};
            s += 2.0 * std::exp(-pi * y * (n + 0.5) * (n + 0.5));
        }
    } else {
        double s = 1.0;
        for (int n = 1; n < theta_max_terms; ++n) {
            double bound = geom * std::exp(-pi * y * n * n);
            if (bound <= tol) return {s, bound};
            double t = 2.0 * std::exp(-pi * y * n * n);
            s += (kind == 4 && (n & 1)) ? -t : t;
        }
    }
    throw std::runtime_error("theta_eval: tolerance unreachable within term cap");
}

} // namespace detail

inline CertifiedValue theta_eval(int kind, const EvalPoint& pt, double tol = 1e-12) {
    if (kind < 2 || kind > 4) throw std::invalid_argument("theta_eval: kind must be 2, 3 or 4");
    if (!(tol > 0) || !std::isfinite(tol)) throw std::invalid_argument("theta_eval: tolerance must be positive");
    if (pt.y >= 1.0) return detail::theta_sum_direct(kind, pt.y, tol);
    double reflected = 1.0 / pt.y;
    double factor = std::sqrt(reflected);
    int mapped = (kind == 3) ? 3 : (kind == 4 ? 2 : 4);
    CertifiedValue inner = detail::theta_sum_direct(mapped, reflected, tol / factor);
    return {factor * inner.value, factor * inner.err_bound};
}

// (theta3 - theta4)/theta3 with a relative error bound of rel_tol. The plain
// ratio theta4/theta3 saturates at 1 in doubles once 4q drops below machine
// epsilon, so monotonicity checks use this gap instead (ratio = 1 - gap
// exactly). For y >= 1 the numerator is summed directly,
// theta3 - theta4 = 4 sum_{k>=0} q^{(2k+1)^2}, with the geometric tail bound;
// under reflection the sqrt factors cancel and the gap equals
// (theta3 - theta2)/theta3 at 1/y.
inline CertifiedValue theta43_gap(const EvalPoint& pt, double rel_tol = 1e-12) {
    if (!(rel_tol > 0) || !std::isfinite(rel_tol)) throw std::invalid_argument("theta43_gap: tolerance must be positive");
    if (pt.y < 1.0) {
        EvalPoint reflected(1.0 / pt.y);
        CertifiedValue t3 = theta_eval(3, reflected, rel_tol / 32);
        CertifiedValue t2 = theta_eval(2, reflected, rel_tol / 32);
        double gap = (t3.value - t2.value) / t3.value;
        double err = (t3.err_bound + t2.err_bound + gap * t3.err_bound) / t3.value;
        return {gap, err};
    }
    const double pi = std::numbers::pi;
    const double q = pt.q;
    const double geom = 4.0 / (1.0 - q);
    double s = 0.0, tail = geom;
    for (int k = 0; k < detail::theta_max_terms; ++k) {
        tail = geom * std::exp(-pi * pt.y * (2 * k + 1) * (2 * k + 1));
        if (s > 0 && tail <= 0.25 * rel_tol * s) break;
        s += 4.0 * std::exp(-pi * pt.y * (2 * k + 1) * (2 * k + 1));
    }
    CertifiedValue t3 = theta_eval(3, pt, 0.25 * rel_tol);
    double gap = s / t3.value;
    double err = (tail + gap * t3.err_bound) / t3.value;
    return {gap, err};
}

// Modular quantities at nome q = e^{-pi y} and its square root (y/2):
//   k = theta2^2/theta3^2, k' = theta4^2/theta3^2 at q,
//   l, l' the same at sqrt(q), and m2 = theta3^2(q)/theta3^2(sqrt(q)).
struct ModularQuantities {
    double k;
    double kprime;
    double l;
    double lprime;
    double m2;
};

inline ModularQuantities modular_quantities(const EvalPoint& pt, double tol = 1e-12) {
    if (!(tol > 0)) throw std::invalid_argument("modular_quantities: tolerance must be positive");
    const double sub = tol / 32; // all outputs are smooth O(1) ratios of these
    EvalPoint half(pt.y / 2);
    auto sq = [](double v) { return v * v; };
    double t2 = theta_eval(2, pt, sub).value;
    double t3 = theta_eval(3, pt, sub).value;
    double t4 = theta_eval(4, pt, sub).value;
    double h2 = theta_eval(2, half, sub).value;
    double h3 = theta_eval(3, half, sub).value;
    double h4 = theta_eval(4, half, sub).value;
    return ModularQuantities{sq(t2 / t3), sq(t4 / t3), sq(h2 / h3), sq(h4 / h3), sq(t3 / h3)};
}

// Arithmetic-geometric mean; both arguments positive. The iteration gains
// quadratically, so the 4 eps stopping rule costs a handful of rounds.
inline double agm(double a, double b) {
    if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b))
        throw std::domain_error("agm: arguments must be finite and positive");
    const double eps = std::numeric_limits<double>::epsilon();
    for (int i = 0; i < 64; ++i) {
        if (std::abs(a - b) <= 4 * eps * a) break;
        double am = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = am;
    }
    return 0.5 * (a + b);
}

// Complete elliptic integral of the first kind, K(k) = pi/(2 AGM(1, k')),
// for modulus 0 <= k < 1.
inline double elliptic_K(double k) {
    if (!(k >= 0) || k >= 1) throw std::domain_error("elliptic_K: modulus must lie in [0, 1)");
    double kp = std::sqrt((1.0 - k) * (1.0 + k));
    return std::numbers::pi / (2.0 * agm(1.0, kp));
}

// Complementary integral K'(k) = K(sqrt(1 - k^2)) for 0 < k <= 1.
inline double elliptic_Kprime(double k) {
    if (!(k > 0) || k > 1) throw std::domain_error("elliptic_Kprime: modulus must lie in (0, 1]");
    return std::numbers::pi / (2.0 * agm(1.0, k));
}

} // namespace lattheta
