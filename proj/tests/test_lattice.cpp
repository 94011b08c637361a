#include <catch2/catch_amalgamated.hpp>

#include "lattheta/lattice.hpp"

#include <cmath>
#include <map>

using namespace lattheta;

namespace {

const char* kRankThree = "Z + sqrt(2)*Z + 2*Z";
const char* kDFour = "gram([2,-1,0,0; -1,2,-1,-1; 0,-1,2,0; 0,-1,0,2])";

std::size_t offset_of(const std::string& text) {
    try {
        LatticeSpec::parse(text);
    } catch (const ParseError& e) {
        return e.offset;
    }
    FAIL("expected a parse error for: " << text);
    return 0;
}

// Box-search oracle for small Gram lattices: walk every integer vector in a
// cube wide enough to contain the norm ball and tally norms directly.
std::map<Rat, Int> box_counts(const RatMatrix& g, const Rat& max_norm, long box) {
    std::map<Rat, Int> counts;
    std::size_t n = g.rows();
    std::vector<long> v(n, -box);
    for (;;) {
        Rat norm = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) norm += g.at(i, j) * v[i] * v[j];
        if (norm <= max_norm) counts[norm] += 1;
        std::size_t k = 0;
        while (k < n && v[k] == box) v[k++] = -box;
        if (k == n) break;
        ++v[k];
    }
    return counts;
}

} // namespace

TEST_CASE("lattice spec parsing") {
    SECTION("scaled direct sum of Z") {
        LatticeSpec spec = LatticeSpec::parse(kRankThree);
        REQUIRE(spec.dimension() == 3);
        REQUIRE(spec.direct_sum_of_scaled_z());
        CHECK(spec.gram().at(0, 0) == 1);
        CHECK(spec.gram().at(1, 1) == 2);
        CHECK(spec.gram().at(2, 2) == 4);
        CHECK(spec.gram().at(0, 1) == 0);
        CHECK(spec.det() == 8);
        CHECK(std::abs(spec.volume() - std::sqrt(8.0)) < 1e-15);
    }

    SECTION("gram block") {
        LatticeSpec spec = LatticeSpec::parse(kDFour);
        REQUIRE(spec.dimension() == 4);
        CHECK_FALSE(spec.direct_sum_of_scaled_z());
        CHECK(spec.det() == 4);
        CHECK(spec.gram().at(1, 3) == -1);
    }

    SECTION("coefficient forms") {
        CHECK(LatticeSpec::parse("3/2*Z").gram().at(0, 0) == Rat(9, 4));
        CHECK(LatticeSpec::parse("-2*Z").gram().at(0, 0) == 4);
        CHECK(LatticeSpec::parse("sqrt(1/2)*Z").gram().at(0, 0) == Rat(1, 2));
        CHECK(LatticeSpec::parse("Z + sqrt(5)*Z").det() == 5);
    }

    SECTION("repetition") {
        LatticeSpec cubed = LatticeSpec::parse("Z^3");
        REQUIRE(cubed.dimension() == 3);
        CHECK(cubed.det() == 1);

        LatticeSpec scaled = LatticeSpec::parse("sqrt(2)*Z^2");
        REQUIRE(scaled.dimension() == 2);
        CHECK(scaled.gram().at(0, 0) == 2);
        CHECK(scaled.gram().at(1, 1) == 2);

        LatticeSpec block = LatticeSpec::parse("gram([2,-1; -1,2])^2");
        REQUIRE(block.dimension() == 4);
        CHECK(block.det() == 9);
        CHECK(block.gram().at(2, 3) == -1);
        CHECK(block.gram().at(1, 2) == 0);
    }

    SECTION("whitespace is free") {
        LatticeSpec spec = LatticeSpec::parse("  Z+sqrt( 2 ) * Z ");
        CHECK(spec.dimension() == 2);
        CHECK(spec.det() == 2);
    }

    SECTION("syntax errors carry offsets") {
        CHECK(offset_of("Z + sqrt(") == 8);
        CHECK(offset_of("") == 0);
        CHECK(offset_of("Z +") == 3);
        CHECK(offset_of("sqrt(2)Z") == 7);
        CHECK(offset_of("Z ^ 0") == 4);
        CHECK(offset_of("Z ^ 1/2") == 4);
        CHECK(offset_of("0*Z") == 0);
        CHECK(offset_of("Q") == 0);
        CHECK(offset_of("Z Z") == 2);
        CHECK(offset_of("gram([1,2; 3])") == 4);
        CHECK(offset_of("1/0*Z") == 0);
    }

    SECTION("semantic errors") {
        CHECK_THROWS_AS(LatticeSpec::parse("gram([1,2; 3,1])"), std::domain_error);
        CHECK_THROWS_AS(LatticeSpec::parse("gram([1,2; 2,1])"), std::domain_error);
        CHECK_THROWS_AS(LatticeSpec::parse("gram([0,0; 0,1])"), std::domain_error);
        CHECK_THROWS_AS(LatticeSpec::parse("sqrt(-2)*Z"), ParseError);
    }
}

TEST_CASE("exact theta coefficients") {
    SECTION("rank-one lattices") {
        ThetaCoeffs z = theta_coeffs(LatticeSpec::parse("Z"), 9);
        REQUIRE(z.counts.size() == 4);
        CHECK(z.count(0) == 1);
        CHECK(z.count(1) == 2);
        CHECK(z.count(4) == 2);
        CHECK(z.count(9) == 2);

        ThetaCoeffs doubled = theta_coeffs(LatticeSpec::parse("2*Z"), 16);
        REQUIRE(doubled.counts.size() == 3);
        CHECK(doubled.count(4) == 2);
        CHECK(doubled.count(16) == 2);

        ThetaCoeffs half = theta_coeffs(LatticeSpec::parse("sqrt(1/2)*Z"), 2);
        CHECK(half.count(Rat(1, 2)) == 2);
        CHECK(half.count(2) == 2);
        CHECK(half.count(1) == 0);
    }

    SECTION("scaled diagonal sum") {
        ThetaCoeffs tc = theta_coeffs(LatticeSpec::parse(kRankThree), 4);
        REQUIRE(tc.counts.size() == 5);
        CHECK(tc.count(0) == 1);
        CHECK(tc.count(1) == 2);
        CHECK(tc.count(2) == 2);
        CHECK(tc.count(3) == 4);
        CHECK(tc.count(4) == 4);
    }

    SECTION("root lattice counts") {
        ThetaCoeffs tc = theta_coeffs(LatticeSpec::parse(kDFour), 4);
        REQUIRE(tc.counts.size() == 3);
        CHECK(tc.count(0) == 1);
        CHECK(tc.count(2) == 24);
        CHECK(tc.count(4) == 24);
    }

    SECTION("gram enumeration matches a box search oracle") {
        LatticeSpec hex = LatticeSpec::parse("gram([2,1; 1,2])");
        ThetaCoeffs tc = theta_coeffs(hex, 30);
        CHECK(tc.count(2) == 6); // hexagonal kissing number
        CHECK(tc.counts == box_counts(hex.gram(), 30, 8));

        LatticeSpec d4 = LatticeSpec::parse(kDFour);
        CHECK(theta_coeffs(d4, 12).counts == box_counts(d4.gram(), 12, 6));

        LatticeSpec fractional = LatticeSpec::parse("gram([1/2,1/4; 1/4,1/2])");
        CHECK(theta_coeffs(fractional, 10).counts == box_counts(fractional.gram(), 10, 8));
    }

    SECTION("nonzero norms have even counts") {
        for (const char* text : {kRankThree, kDFour, "gram([2,1; 1,2])"}) {
            ThetaCoeffs tc = theta_coeffs(LatticeSpec::parse(text), 20);
            for (const auto& [norm, count] : tc.counts) {
                if (norm == 0) continue;
                INFO(text << " norm " << to_string(norm));
                CHECK(count % 2 == 0);
            }
        }
    }

    SECTION("enumeration agrees with the series product for direct sums") {
        for (const char* text : {kRankThree, "Z + sqrt(2)*Z", "Z^3 + sqrt(2)*Z^3"}) {
            LatticeSpec spec = LatticeSpec::parse(text);
            ThetaCoeffs tc = theta_coeffs(spec, 50);
            QSeries series = product_theta_qseries(spec, Rat(201, 4));
            for (long idx = 0; idx <= 200; ++idx) {
                INFO(text << " at norm " << idx << "/4");
                CHECK(series.coeff_idx(idx) == Rat(tc.count(Rat(idx, 4))));
            }
        }
    }

    SECTION("series route for the checkerboard lattice") {
        // The D4 Gram above is isometric to {x in Z^4 : sum x_i even}, whose
        // theta series is (theta3^4 + theta4^4)/2.
        QSeries reference = (theta_series(3, 13).pow(4) + theta_series(4, 13).pow(4)) * Rat(1, 2);
        ThetaCoeffs tc = theta_coeffs(LatticeSpec::parse(kDFour), 12);
        for (long m = 0; m <= 12; ++m) CHECK(reference.coeff(Rat(m)) == Rat(tc.count(m)));
    }

    SECTION("input guards") {
        CHECK_THROWS_AS(theta_coeffs(LatticeSpec::parse("Z"), 0), std::invalid_argument);
        CHECK_THROWS_AS(theta_coeffs(LatticeSpec::parse("sqrt(1/3)*Z"), 4), std::domain_error);
        CHECK_THROWS_AS(theta_coeffs(LatticeSpec::parse("gram([1/3,0; 0,3])"), 4), std::domain_error);
        CHECK_THROWS_AS(product_theta_qseries(LatticeSpec::parse(kDFour), 10), std::domain_error);
    }
}

TEST_CASE("certified numeric theta evaluation") {
    SECTION("direct sums multiply certified factors") {
        CertifiedValue v = theta_eval_numeric(LatticeSpec::parse(kRankThree), EvalPoint(1.0));
        double expected = theta_eval(3, EvalPoint(1.0)).value * theta_eval(3, EvalPoint(2.0)).value *
                          theta_eval(3, EvalPoint(4.0)).value;
        CHECK(v.err_bound <= 1e-12);
        CHECK(std::abs(v.value - expected) <= 1e-12);
    }

    SECTION("enumeration route agrees with the product route") {
        LatticeSpec diag = LatticeSpec::parse("gram([1,0,0; 0,2,0; 0,0,4])");
        LatticeSpec sum = LatticeSpec::parse(kRankThree);
        for (double y : {0.4, 1.0, 2.5}) {
            CertifiedValue a = theta_eval_numeric(diag, EvalPoint(y), 1e-12);
            CertifiedValue b = theta_eval_numeric(sum, EvalPoint(y), 1e-12);
            INFO("y = " << y);
            CHECK(std::abs(a.value - b.value) <= a.err_bound + b.err_bound + 1e-13);
        }
    }

    SECTION("root lattice against its closed form") {
        ThetaEvaluator d4(LatticeSpec::parse(kDFour));
        for (double y : {0.6, 1.0, 1.7}) {
            double t3 = theta_eval(3, EvalPoint(y)).value;
            double t4 = theta_eval(4, EvalPoint(y)).value;
            double expected = (std::pow(t3, 4) + std::pow(t4, 4)) / 2.0;
            CertifiedValue v = d4.evaluate(EvalPoint(y), 1e-10);
            INFO("y = " << y);
            CHECK(v.err_bound <= 1e-10);
            CHECK(std::abs(v.value - expected) <= 1e-10);
        }
    }

    SECTION("distant tail collapses to the zero vector") {
        CertifiedValue v = theta_eval_numeric(LatticeSpec::parse(kDFour), EvalPoint(30.0));
        CHECK(std::abs(v.value - 1.0) <= 1e-12);
        CHECK(v.err_bound <= 1e-12);
    }

    SECTION("strictly decreasing in y") {
        for (const char* text : {kRankThree, kDFour}) {
            ThetaEvaluator eval{LatticeSpec::parse(text)};
            double prev = 0;
            bool first = true;
            for (double y : {0.5, 0.8, 1.0, 1.6, 2.4}) {
                CertifiedValue v = eval.evaluate(EvalPoint(y), 1e-12);
                if (!first) CHECK(v.value + v.err_bound < prev);
                prev = v.value - v.err_bound;
                first = false;
            }
        }
    }

    SECTION("requested tolerance is honoured") {
        CertifiedValue tight = theta_eval_numeric(LatticeSpec::parse(kDFour), EvalPoint(0.5), 1e-11);
        CHECK(tight.err_bound <= 1e-11);
        CHECK_THROWS_AS(theta_eval_numeric(LatticeSpec::parse("Z"), EvalPoint(1.0), 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("modularity residuals") {
    SECTION("modular lattices have vanishing residual") {
        CHECK(modularity_residual(LatticeSpec::parse(kRankThree), 4, 0.7) < 1e-8);
        CHECK(modularity_residual(LatticeSpec::parse("Z + sqrt(2)*Z"), 2, 1.3) < 1e-8);
        CHECK(modularity_residual(LatticeSpec::parse(kDFour), 2, 0.9) < 1e-8);
        CHECK(modularity_residual(LatticeSpec::parse("Z"), 1, 0.35) < 1e-8);
    }

    SECTION("non-modular pairs are detected") {
        CHECK(modularity_residual(LatticeSpec::parse("Z^3"), 4, 1.0) > 0.1);
        CHECK(modularity_residual(LatticeSpec::parse("Z + sqrt(2)*Z"), 4, 1.0) > 0.1);
    }

    SECTION("input guards") {
        CHECK_THROWS_AS(modularity_residual(LatticeSpec::parse("Z"), 0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(modularity_residual(LatticeSpec::parse("Z"), 2, -1.0), std::domain_error);
    }

    SECTION("evaluator reuse matches fresh evaluations") {
        ThetaEvaluator shared(LatticeSpec::parse(kDFour));
        // Coarse first call seeds the cache; finer later calls must still meet
        // their own tolerance rather than inherit the coarse cutoff.
        CertifiedValue coarse = shared.evaluate(EvalPoint(2.0), 1e-6);
        CertifiedValue fine = shared.evaluate(EvalPoint(0.3), 1e-12);
        CertifiedValue fresh = theta_eval_numeric(LatticeSpec::parse(kDFour), EvalPoint(0.3), 1e-12);
        CHECK(coarse.err_bound <= 1e-6);
        CHECK(fine.err_bound <= 1e-12);
        CHECK(std::abs(fine.value - fresh.value) <= 1e-13);
    }
}
