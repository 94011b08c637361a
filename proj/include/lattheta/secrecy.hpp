#pragma once

#include "lattheta/lattice.hpp"
#include "lattheta/theta_kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lattheta {

// Secrecy functions compare a lattice's theta series against a reference of
// equal volume. The classic variant references the scaled cubic lattice,
//
//   Xi(y) = theta3(sqrt(l) y)^n / Theta(y),
//
// the modular variant references the k-th power of the two-dimensional
// l-modular lattice Z + sqrt(l)*Z (plain Z when l = 1),
//
//   Xi_l(y) = (theta3(y) theta3(l y))^k / Theta(y),   k = n/2,
//
// where k may be half-integral when l is a square and n is odd; the power is
// applied to the positive theta value, not to the lattice. Both variants are
// multiplicatively symmetric about y = 1/sqrt(l) for l-modular lattices.

enum class CurveVariant { classic, modular };

class SecrecyCurve {
public:
    SecrecyCurve(LatticeSpec spec, long l, CurveVariant variant)
        : theta_(std::move(spec)), l_(l), variant_(variant) {
        if (l_ < 1) throw std::invalid_argument("SecrecyCurve: l must be a positive integer");
        const LatticeSpec& s = theta_.spec();
        long n = static_cast<long>(s.dimension());
        // An l-modular lattice has determinant l^(n/2); compare squares to
        // stay rational when n is odd.
        if (s.det() * s.det() != pow_rat(Rat(l_), n))
            throw std::domain_error("SecrecyCurve: determinant does not match an l-modular lattice");
        k_ = l_ == 1 ? Rat(n) : Rat(n, 2);
    }

    const LatticeSpec& spec() const { return theta_.spec(); }
    long l() const { return l_; }
    CurveVariant variant() const { return variant_; }
    const Rat& reference_power() const { return k_; }

    CertifiedValue xi(double y, double tol = 1e-12) const {
        if (!(y > 0)) throw std::domain_error("SecrecyCurve: y must be positive");
        if (!(tol > 0)) throw std::invalid_argument("SecrecyCurve: tolerance must be positive");
        double n = static_cast<double>(spec().dimension());
        double sub = tol / (8.0 * std::max(1.0, n));
        for (int attempt = 0; attempt < 4; ++attempt) {
            double num_lo, num_hi;
            numerator_bounds(y, sub, num_lo, num_hi);
            CertifiedValue den = theta_.evaluate(EvalPoint(y), sub);
            double value = 0.5 * (num_lo + num_hi) / den.value;
            double hi = num_hi / (den.value - den.err_bound);
            double lo = num_lo / (den.value + den.err_bound);
            double err = std::max(hi - value, value - lo);
            if (err <= tol) return {value, err};
            sub *= 0.25 * tol / err;
        }
        throw std::runtime_error("SecrecyCurve: tolerance unreachable");
    }

    // |Xi(a) - Xi(1/(l a))|, which vanishes up to evaluation error for
    // l-modular lattices.
    double symmetry_residual(double a, double tol = 1e-12) const {
        if (!(a > 0)) throw std::domain_error("SecrecyCurve: a must be positive");
        CertifiedValue at_a = xi(a, tol / 2);
        CertifiedValue mirrored = xi(1.0 / (static_cast<double>(l_) * a), tol / 2);
        return std::abs(at_a.value - mirrored.value);
    }

private:
    ThetaEvaluator theta_;
    long l_;
    CurveVariant variant_;
    Rat k_;

    void numerator_bounds(double y, double sub, double& lo, double& hi) const {
        double n = static_cast<double>(spec().dimension());
        if (variant_ == CurveVariant::classic) {
            CertifiedValue t = theta_eval(3, EvalPoint(std::sqrt(static_cast<double>(l_)) * y), sub);
            lo = std::pow(t.value - t.err_bound, n);
            hi = std::pow(t.value + t.err_bound, n);
            return;
        }
        double power = to_double(k_);
        if (l_ == 1) {
            CertifiedValue t = theta_eval(3, EvalPoint(y), sub);
            lo = std::pow(t.value - t.err_bound, power);
            hi = std::pow(t.value + t.err_bound, power);
            return;
        }
        CertifiedValue a = theta_eval(3, EvalPoint(y), sub);
        CertifiedValue b = theta_eval(3, EvalPoint(static_cast<double>(l_) * y), sub);
        lo = std::pow((a.value - a.err_bound) * (b.value - b.err_bound), power);
        hi = std::pow((a.value + a.err_bound) * (b.value + b.err_bound), power);
    }
};

inline CertifiedValue xi_classic(const SecrecyCurve& curve, double y, double tol = 1e-12) {
    if (curve.variant() != CurveVariant::classic)
        throw std::invalid_argument("xi_classic: curve is not the classic variant");
    return curve.xi(y, tol);
}

inline CertifiedValue xi_modular(const SecrecyCurve& curve, double y, double tol = 1e-12) {
    if (curve.variant() != CurveVariant::modular)
        throw std::invalid_argument("xi_modular: curve is not the modular variant");
    return curve.xi(y, tol);
}

inline double symmetry_residual(const SecrecyCurve& curve, double a, double tol = 1e-12) {
    return curve.symmetry_residual(a, tol);
}

struct MonotoneSegment {
    double y_lo, y_hi;
    int direction; // +1 increasing, -1 decreasing
};

enum class ExtremumKind { minimum, maximum };

struct ExtremumReport {
    bool found = false;          // false: curve is monotone on the window
    ExtremumKind kind = ExtremumKind::minimum;
    double location = 0;
    double value = 0;
    double bracket_width = 0;
    bool ambiguous = false;      // a competing grid cell tied within error bounds
    std::vector<MonotoneSegment> segments;
};

namespace detail {

struct GoldenResult {
    double x;
    double width;
};

template <typename F>
GoldenResult golden_section_min(F&& f, double a, double b, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return {0.5 * (a + b), b - a};
}

} // namespace detail

// Coarse scan on a logarithmic grid followed by golden-section refinement.
// The grid is logarithmic because the symmetry of these curves is
// multiplicative; refinement is derivative-free since the curves are smooth
// and unimodal near the extremum but derivatives are not cheaply certified.
inline ExtremumReport scan_extremum(const SecrecyCurve& curve, double y_lo, double y_hi,
                                    int grid_points, double refine_tol) {
    if (!(y_lo > 0) || !(y_hi > y_lo)) throw std::invalid_argument("scan_extremum: need 0 < y_lo < y_hi");
    if (grid_points < 16) throw std::invalid_argument("scan_extremum: need at least 16 grid points");
    if (!(refine_tol > 0)) throw std::invalid_argument("scan_extremum: refine_tol must be positive");

    const double grid_tol = 1e-12;
    std::vector<double> ys(static_cast<std::size_t>(grid_points));
    std::vector<CertifiedValue> vals(ys.size());
    double ratio = std::log(y_hi / y_lo);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        ys[i] = y_lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(grid_points - 1));
        vals[i] = curve.xi(ys[i], grid_tol);
    }

    ExtremumReport report;
    // Monotone segments from the grid sign pattern. Steps smaller than the
    // combined error bounds are flat (the curve saturates at 1 far from the
    // pivot) and extend the current segment instead of flipping it.
    int dir = 0;
    double seg_start = ys.front();
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
        double diff = vals[i + 1].value - vals[i].value;
        double eps = vals[i + 1].err_bound + vals[i].err_bound;
        int step = diff > eps ? 1 : diff < -eps ? -1 : 0;
        if (step == 0) continue;
        if (dir == 0) {
            dir = step;
            continue;
        }
        if (step != dir) {
            report.segments.push_back({seg_start, ys[i], dir});
            seg_start = ys[i];
            dir = step;
        }
    }
    report.segments.push_back({seg_start, ys.back(), dir});

    // Global interior extrema. Value comparison rather than a strict local
    // shape test: a grid symmetric about the pivot puts two mirror points at
    // bitwise-equal values around the extremum, a plateau no strict test sees.
    std::size_t gmin = 1, gmax = 1;
    for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
        if (vals[i].value < vals[gmin].value) gmin = i;
        if (vals[i].value > vals[gmax].value) gmax = i;
    }

    // An interior extremum only counts if it beats both endpoints by more
    // than the error bounds, otherwise the window is monotone and we report
    // that instead of fabricating a point out of saturation noise.
    double end_err = std::max(vals.front().err_bound, vals.back().err_bound);
    double end_lo = std::min(vals.front().value, vals.back().value);
    double end_hi = std::max(vals.front().value, vals.back().value);
    bool take_min = vals[gmin].value < end_lo - (vals[gmin].err_bound + end_err);
    bool take_max = vals[gmax].value > end_hi + (vals[gmax].err_bound + end_err);
    if (!take_min && !take_max) return report;

    std::size_t center;
    if (take_min && take_max)
        center = end_lo - vals[gmin].value > vals[gmax].value - end_hi ? gmin : gmax;
    else
        center = take_min ? gmin : gmax;
    bool minimizing = take_min && center == gmin;
    report.found = true;
    report.kind = minimizing ? ExtremumKind::minimum : ExtremumKind::maximum;

    // Tie-break: a non-adjacent cell within evaluation error of the chosen one
    // is ambiguous; prefer the cell whose bracket contains 1/sqrt(l).
    double pivot = 1.0 / std::sqrt(static_cast<double>(curve.l()));
    for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
        if (i + 1 >= center && i <= center + 1) continue;
        if (std::abs(vals[i].value - vals[center].value) >
            vals[i].err_bound + vals[center].err_bound)
            continue;
        report.ambiguous = true;
        if (ys[i - 1] <= pivot && pivot <= ys[i + 1] &&
            !(ys[center - 1] <= pivot && pivot <= ys[center + 1]))
            center = i;
    }

    // Extend the bracket across any plateau of equal values so the true
    // extremum cannot sit outside it.
    std::size_t left = center, right = center;
    while (right + 2 < ys.size() && vals[right + 1].value == vals[center].value) ++right;
    while (left > 1 && vals[left - 1].value == vals[center].value) --left;

    const double refine_eval_tol = 1e-14;
    auto objective = [&](double y) {
        double v = curve.xi(y, refine_eval_tol).value;
        return minimizing ? v : -v;
    };
    detail::GoldenResult refined =
        detail::golden_section_min(objective, ys[left - 1], ys[right + 1], refine_tol);
    report.location = refined.x;
    report.value = curve.xi(refined.x, grid_tol).value;
    report.bracket_width = refined.width;
    return report;
}

} // namespace lattheta
