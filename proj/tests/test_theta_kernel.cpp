#include "lattheta/theta_kernel.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace lattheta;
using std::numbers::pi;

namespace {

// Direct summation oracle, no reflection. Adequate in double down to y ~ 0.05
// where ~25 terms still reach machine precision.
double theta_oracle(int kind, double y) {
    double s = (kind == 2) ? 0.0 : 1.0;
    for (int n = (kind == 2) ? 0 : 1; n < 80; ++n) {
        double e = (kind == 2) ? (n + 0.5) * (n + 0.5) : double(n) * n;
        double t = 2.0 * std::exp(-pi * y * e);
        if (kind == 4 && (n & 1)) t = -t;
        s += t;
        if (std::abs(t) < 1e-19 * std::abs(s)) break;
    }
    return s;
}

// Adaptive Simpson quadrature for K(k) = int_0^{pi/2} dphi/sqrt(1-k^2 sin^2 phi).
double simpson(double (*f)(double, double), double k, double a, double b, double fa, double fm, double fb,
               double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm, k), frm = f(rm, k);
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15 * tol) return left + right + (left + right - whole) / 15.0;
    return simpson(f, k, a, m, fa, flm, fm, tol / 2, depth - 1) +
           simpson(f, k, m, b, fm, frm, fb, tol / 2, depth - 1);
}

double elliptic_integrand(double phi, double k) {
    double s = std::sin(phi);
    return 1.0 / std::sqrt(1.0 - k * k * s * s);
}

double elliptic_K_quadrature(double k) {
    double a = 0.0, b = pi / 2;
    return simpson(elliptic_integrand, k, a, b, elliptic_integrand(a, k), elliptic_integrand(0.5 * (a + b), k),
                   elliptic_integrand(b, k), 1e-13, 40);
}

} // namespace

TEST_CASE("theta values against direct-summation oracle") {
    CHECK(theta_eval(3, EvalPoint(1.0)).value == Catch::Approx(1.086434811213).margin(1e-12));
    CHECK(theta_eval(3, EvalPoint(1.0)).value == Catch::Approx(theta_oracle(3, 1.0)).margin(1e-14));
    CHECK(theta_eval(2, EvalPoint(1.0)).value == Catch::Approx(0.913579).margin(1e-6));
    // The reflection fixes y = 1, so kinds 2 and 4 coincide there.
    CHECK(theta_eval(2, EvalPoint(1.0)).value == Catch::Approx(theta_eval(4, EvalPoint(1.0)).value).margin(1e-14));

    std::vector<double> ys{0.05, 0.1, 0.25, 0.5, 0.9, 1.0, 1.5, 3.0, 7.0, 20.0};
    for (double y : ys)
        for (int kind : {2, 3, 4}) {
            CertifiedValue v = theta_eval(kind, EvalPoint(y), 1e-12);
            CHECK(v.err_bound <= 1e-12);
            CHECK(std::abs(v.value - theta_oracle(kind, y)) <= 1e-12 + 1e-13 * std::abs(v.value));
        }
}

TEST_CASE("theta at extreme y degenerates to 1 with a tiny certified tail") {
    CertifiedValue v = theta_eval(3, EvalPoint(50.0), 1e-12);
    CHECK(std::abs(v.value - 1.0) <= 2e-68);
    CHECK(v.err_bound <= 2e-68);
}

TEST_CASE("theta input validation") {
    CHECK_THROWS_AS(EvalPoint(0.0), std::domain_error);
    CHECK_THROWS_AS(EvalPoint(-1.0), std::domain_error);
    CHECK_THROWS_AS(EvalPoint(std::nan("")), std::domain_error);
    CHECK_THROWS_AS(theta_eval(5, EvalPoint(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(theta_eval(3, EvalPoint(1.0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(theta_eval(3, EvalPoint(1.0), -1e-9), std::invalid_argument);
}

TEST_CASE("modular quantities satisfy the classical relations") {
    for (double y : {0.3, 0.5, 1.0, 2.0, 4.0}) {
        ModularQuantities m = modular_quantities(EvalPoint(y), 1e-14);
        CHECK(m.k * m.k + m.kprime * m.kprime == Catch::Approx(1.0).margin(1e-12));
        CHECK(m.l * m.l + m.lprime * m.lprime == Catch::Approx(1.0).margin(1e-12));
        // Nome-halving relations for the degree-2 quantities.
        CHECK(m.m2 == Catch::Approx(1.0 / (1.0 + m.k)).margin(1e-12));
        CHECK(m.m2 == Catch::Approx((1.0 + m.lprime) / 2.0).margin(1e-12));
        CHECK(m.l == Catch::Approx(2.0 * std::sqrt(m.k) / (1.0 + m.k)).margin(1e-12));
        CHECK(m.k == Catch::Approx((1.0 - m.lprime) / (1.0 + m.lprime)).margin(1e-12));
    }
}

TEST_CASE("self-complementary points of the modulus") {
    ModularQuantities at1 = modular_quantities(EvalPoint(1.0), 1e-14);
    CHECK(at1.k == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    CHECK(at1.kprime == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));

    ModularQuantities athalf = modular_quantities(EvalPoint(1.0 / std::sqrt(2.0)), 1e-14);
    CHECK(athalf.kprime == Catch::Approx(std::sqrt(2.0) - 1.0).margin(1e-12));
}

TEST_CASE("theta4/theta3 ratio bounds and monotonicity") {
    // Sandwich bounds valid for q < 1/2, i.e. y > ln(2)/pi. Direct double
    // comparisons resolve the strict inequalities only while the next series
    // term clears machine epsilon, so keep them to moderate y.
    for (double y : {0.3, 0.5, 1.0, 2.0}) {
        EvalPoint pt(y);
        double t3 = theta_eval(3, pt, 1e-14).value;
        double t4 = theta_eval(4, pt, 1e-14).value;
        double q = pt.q;
        CHECK(t4 > 1.0 - 2 * q);
        CHECK(t4 < 1.0 - 2 * q + 2 * q / (1.0 - q));
        CHECK(t3 > 1.0);
        CHECK(t3 < 1.0 + 2 * q / (1.0 - q));
    }
    // At large y the bounds stay strict with margin to spare; check the
    // residuals, which have positive leading terms q^2 and q^4 and never
    // suffer cancellation.
    for (double y : {5.0, 15.0}) {
        double q = EvalPoint(y).q;
        double lower4 = 0, upper4 = 0, lower3 = 0, upper3 = 0;
        for (int n = 9; n >= 2; --n) {
            double qn2 = std::pow(q, n * n);
            double sgn = (n & 1) ? -1.0 : 1.0;
            lower4 += sgn * qn2;                    // theta4 - (1 - 2q) = 2 * lower4
            upper4 += std::pow(q, n) - sgn * qn2;   // upper bound - theta4 = 2 * upper4
            upper3 += std::pow(q, n) - qn2;         // upper bound - theta3 = 2 * upper3
        }
        lower3 = q; // theta3 - 1 >= 2q
        CHECK(lower4 > 0);
        CHECK(upper4 > 0);
        CHECK(lower3 > 0);
        CHECK(upper3 > 0);
    }
    // Strict monotonicity via the cancellation-free gap: theta4/theta3 =
    // 1 - gap, so the ratio increases exactly when the gap decreases.
    double prev_gap = 2.0;
    for (int i = 0; i <= 40; ++i) {
        double y = 0.05 * std::pow(400.0, i / 40.0);
        EvalPoint pt(y);
        CertifiedValue gap = theta43_gap(pt, 1e-12);
        CHECK(gap.value < prev_gap);
        CHECK(gap.value > 0.0);
        CHECK(gap.err_bound <= 1e-12 * gap.value);
        prev_gap = gap.value;
    }
    // Consistency with the direct ratio where doubles can still resolve it.
    for (double y : {0.1, 0.7, 1.0, 3.0}) {
        EvalPoint pt(y);
        double ratio = theta_eval(4, pt, 1e-14).value / theta_eval(3, pt, 1e-14).value;
        CHECK(1.0 - theta43_gap(pt, 1e-13).value == Catch::Approx(ratio).margin(1e-12));
    }
}

TEST_CASE("agm and the complete elliptic integral") {
    CHECK(agm(1.0, 1.0) == Catch::Approx(1.0).margin(0));
    CHECK(agm(24.0, 6.0) == Catch::Approx(13.458171481725615).epsilon(1e-14));
    CHECK(elliptic_K(0.0) == Catch::Approx(pi / 2).epsilon(1e-15));
    for (double k : {0.1, 0.5, 0.9})
        CHECK(elliptic_K(k) == Catch::Approx(elliptic_K_quadrature(k)).margin(1e-10));

    CHECK_THROWS_AS(elliptic_K(1.0), std::domain_error);
    CHECK_THROWS_AS(elliptic_K(-0.1), std::domain_error);
    CHECK_THROWS_AS(agm(0.0, 1.0), std::domain_error);
}

TEST_CASE("elliptic ratio recovers the nome") {
    // pi K'(k)/K(k) = -log q when k is the modulus attached to q.
    for (double y : {0.5, 1.0, 2.0}) {
        ModularQuantities m = modular_quantities(EvalPoint(y), 1e-14);
        double ratio = elliptic_Kprime(m.k) / elliptic_K(m.k);
        CHECK(pi * ratio == Catch::Approx(pi * y).margin(1e-10));
    }
    // Singular value: K'/K = sqrt(2) at k = sqrt(2) - 1.
    double k = std::sqrt(2.0) - 1.0;
    CHECK(elliptic_Kprime(k) / elliptic_K(k) == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
}
