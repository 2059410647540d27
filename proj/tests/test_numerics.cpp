#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nextjump/cavity.hpp"
#include "nextjump/numerics.hpp"

#include <cmath>
#include <numeric>

using namespace nextjump;

namespace {

// erf by its Taylor series, independent of the library routine
double erfc_series(double x) {
    double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        sum += term / (2 * n + 1);
        if (std::abs(term) < 1e-20) break;
    }
    return 1.0 - 2.0 / std::sqrt(pi) * sum;
}

}  // namespace

TEST_CASE("ladder operators") {
    SUBCASE("annihilate vacuum gives zero") {
        auto v = FockVector::basis(1, 10, 0, 0);
        CHECK(apply_ladder(v, Ladder::annihilate).amps.norm() == 0.0);
    }
    SUBCASE("number eigenstate") {
        auto v = FockVector::basis(1, 10, 0, 3);
        auto w = apply_ladder(v, Ladder::number);
        CHECK(std::abs(w.at(0, 3) - Complex(3.0)) < 1e-15);
        CHECK(std::abs(w.amps.norm() - 3.0) < 1e-15);
    }
    SUBCASE("coherent eigenrelation") {
        const int nmax = 30;
        FockVector v(1, nmax);
        double f = 1.0;  // alpha^n / sqrt(n!) built term by term
        for (int n = 0; n <= nmax; ++n) {
            if (n > 0) f *= 0.5 / std::sqrt(static_cast<double>(n));
            v.at(0, n) = f;
        }
        auto w = apply_ladder(v, Ladder::annihilate);
        for (int n = 0; n < nmax; ++n) CHECK(std::abs(w.at(0, n) - 0.5 * v.at(0, n)) <= 1e-12 * std::abs(v.at(0, n)));
    }
    SUBCASE("level mask zeroes unselected levels") {
        FockVector v(2, 5);
        v.at(0, 2) = 1.0;
        v.at(1, 2) = 1.0;
        auto w = apply_ladder(v, Ladder::number, 0b10u);
        CHECK(w.at(0, 2) == Complex(0.0));
        CHECK(w.at(1, 2) == Complex(2.0));
    }
    SUBCASE("create past the edge throws") {
        auto v = FockVector::basis(1, 4, 0, 4);
        CHECK_THROWS_AS(apply_ladder(v, Ladder::create), TruncationOverflow);
    }
    SUBCASE("default truncation") { CHECK(default_nmax(4.0) == 44); }
}

TEST_CASE("dopri5") {
    SUBCASE("pure exponential decay of |1>") {
        const double kappa = 1.0;
        FockRhs rhs = [&](double, const FockVector& in, FockVector& out) {
            out.amps.setZero();
            add_number(in.amps.data(), out.amps.data(), in.nmax, -kappa / 2);
        };
        OdeOptions o{1e-12, 1e-14};
        auto r = integrate_ode(rhs, FockVector::basis(1, 5, 0, 1), 0.0, 2.0, o);
        CHECK(std::abs(r.at(0, 1) - Complex(std::exp(-1.0))) < 1e-11);
    }
    SUBCASE("zero rhs leaves the state unchanged") {
        FockRhs rhs = [](double, const FockVector&, FockVector& out) { out.amps.setZero(); };
        auto s = FockVector::coherent(1, 20, 0, {0.3, -0.4});
        auto r = integrate_ode(rhs, s, 0.0, 5.0);
        CHECK((r.amps - s.amps).norm() == 0.0);
    }
    SUBCASE("rotation against exp, dense output included") {
        OdeRhs rhs = [](double, const CVec& y, CVec& dy) { dy = Complex(-0.1, 2.0) * y; };
        CVec y0(1);
        y0[0] = 1.0;
        OdeOptions o{1e-12, 1e-14};
        Dopri5 d(rhs, y0, 0.0, o);
        double worst = 0.0;
        while (d.step(10.0)) {
            const double tm = 0.5 * (d.t_prev() + d.t());
            // the dense interpolant is fourth order, so allow a looser bound than the step error
            worst = std::max(worst, std::abs(d.dense(tm)[0] - std::exp(Complex(-0.1, 2.0) * tm)));
        }
        CHECK(std::abs(d.y()[0] - std::exp(Complex(-0.1, 2.0) * 10.0)) < 1e-9);
        CHECK(worst < 1e-8);
    }
    SUBCASE("sampled times") {
        OdeRhs rhs = [](double, const CVec& y, CVec& dy) { dy = -y; };
        CVec y0(1);
        y0[0] = 1.0;
        auto ys = integrate_ode_at(rhs, y0, 0.0, {0.5, 1.0, 3.0}, {1e-12, 1e-14});
        REQUIRE(ys.size() == 3);
        CHECK(std::abs(ys[2][0].real() - std::exp(-3.0)) < 1e-11);
    }
    SUBCASE("W of the driven cavity from the Fock rhs") {
        const auto p = cavity::CavityParams::from_nbar(1.0, 0.0, 4.0);
        auto psi = integrate_ode(cavity::fock_rhs(p, false), FockVector::basis(1, 44, 0, 0), 0.0, 2.0, {1e-12, 1e-14});
        // alpha and beta from the closed form, evaluated here by hand
        const double a = 2.0 * (1.0 - std::exp(-1.0));
        const double b = -2.0 * (2.0 - 2.0 * (1.0 - std::exp(-1.0)));
        CHECK(std::abs(psi.norm2() - std::exp(2 * b + a * a)) < 1e-6);
        CHECK(std::abs(psi.norm2() - 0.2606) < 1e-4);
    }
}

TEST_CASE("philox") {
    SUBCASE("known-answer vectors") {
        auto z = Philox::block({0, 0, 0, 0}, {0, 0});
        CHECK(z == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
        auto f = Philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
        CHECK(f == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
        auto d = Philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
        CHECK(d == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
    }
    SUBCASE("uniform stays in the open interval") {
        Philox g({1, 2});
        for (int i = 0; i < 100000; ++i) {
            const double u = g.uniform();
            REQUIRE(u > 0.0);
            REQUIRE(u < 1.0);
        }
    }
    SUBCASE("streams differ") {
        Philox a({5, 0}), b({5, 1});
        CHECK(a.next_u32() != b.next_u32());
    }
}

TEST_CASE("gaussian increments") {
    SUBCASE("variance within the 4 sigma chi-squared band") {
        const auto x = gaussian_increments({11, 0}, 1000000, 1.0);
        const double n = static_cast<double>(x.size());
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
        double v = 0.0;
        for (double e : x) v += (e - mean) * (e - mean);
        v /= n - 1;
        CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
        CHECK(v > 0.994);
        CHECK(v < 1.006);
    }
    SUBCASE("zero variance is rejected") { CHECK_THROWS_AS(gaussian_increments({0, 0}, 10, 0.0), std::invalid_argument); }
    SUBCASE("deterministic per seed and stream") {
        CHECK(gaussian_increments({3, 4}, 1000, 2.0) == gaussian_increments({3, 4}, 1000, 2.0));
        CHECK(gaussian_increments({3, 4}, 1000, 2.0) != gaussian_increments({3, 5}, 1000, 2.0));
    }
}

TEST_CASE("erfc") {
    CHECK(nextjump::erfc(0.0) == 1.0);
    for (double x : {0.1, 0.589255, 1.3, 2.7})
        CHECK(std::abs(nextjump::erfc(-x) + nextjump::erfc(x) - 2.0) < 1e-15);
    CHECK(std::abs(nextjump::erfc(1.0) - 0.157299207) < 1e-9);
    for (double x : {0.05, 0.5, 1.0, 1.5, 2.0})
        CHECK(std::abs(nextjump::erfc(x) - erfc_series(x)) < 1e-13);
}
