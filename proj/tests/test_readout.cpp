#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nextjump/readout.hpp"

#include <cmath>

using namespace nextjump;
using namespace nextjump::readout;
using cavity::CavityParams;

namespace {

const CavityParams pj = CavityParams::from_nbar(1.0, 20.0, 100.0);

// |1 - e^{-tau/2} e^{i chi tau}|^2 for kappa = 1
double y_oracle(double chi, double tau) {
    return std::norm(1.0 - std::exp(Complex(-0.5 * tau, chi * tau)));
}

}  // namespace

TEST_CASE("next-jump error") {
    const auto p0 = CavityParams::from_nbar(1.0, 0.0, 100.0);
    for (double t : {0.01, 0.3, 2.0, 20.0}) CHECK(error_next_jump(p0, t) == 0.5);
    CHECK(error_next_jump(pj, 0.0) == 0.5);
    CHECK(error_next_jump(pj, 200.0) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK_THROWS_AS(error_next_jump(pj, -1.0), std::invalid_argument);
    SUBCASE("probabilities from the survival functions") {
        const double t = 0.4;
        const double pg = 1.0 - cavity::survival_W(cavity::detuned_trajectory(pj, 0.0, t));
        const double pb = 1.0 - cavity::survival_W(cavity::resonant_trajectory(pj, t));
        CHECK(error_next_jump(pj, t) == doctest::Approx(pg / (pg + pb)).epsilon(1e-12));
    }
    SUBCASE("invariant under rescaling kappa, chi and t together") {
        for (double lam : {0.5, 3.0}) {
            const auto q = CavityParams::from_nbar(lam, 20.0 * lam, 100.0);
            for (double t : {0.2, 0.7, 3.0})
                CHECK(error_next_jump(q, t / lam) == doctest::Approx(error_next_jump(pj, t)).epsilon(1e-10));
        }
    }
    SUBCASE("interior minimum") {
        const auto m = next_jump_error_minimum(pj);
        CHECK(m.tau > 0.0);
        CHECK(m.tau < 12.0);
        CHECK(m.chi_t > 1.0);
        CHECK(m.ratio > 0.1);
        CHECK(m.ratio < 10.0);
        CHECK(error_next_jump(pj, 0.9 * m.tau) >= m.eps);
        CHECK(error_next_jump(pj, 1.1 * m.tau) >= m.eps);
        CHECK(error_next_jump(pj, 0.5 / 20.0) > 5.0 * m.eps);
    }
}

TEST_CASE("dispersive readout") {
    CHECK(snr_heterodyne(pj, 0.0) == 0.0);
    CHECK(snr_heterodyne(pj, 1.0) == doctest::Approx(5.0 / std::sqrt(18.0)).epsilon(1e-14));
    CHECK(snr_heterodyne(pj, 1.0) == doctest::Approx(1.17851).epsilon(1e-5));
    CHECK(snr_heterodyne(pj, 2.6) / snr_heterodyne(pj, 1.3) == doctest::Approx(std::pow(2.0, 2.5)));
    CHECK(error_dispersive(0.0) == 0.5);
    CHECK(error_dispersive(1.17851) == doctest::Approx(0.2024).epsilon(1e-3));
    CHECK(error_dispersive(80.0) < 1e-300);
    CHECK_THROWS_AS(error_dispersive(-1.0), std::invalid_argument);
    SUBCASE("strictly decreasing in tau") {
        const auto pd = CavityParams::from_nbar(1.0, 0.5, 100.0);
        double prev = 0.5;
        for (int k = 1; k <= 300; ++k) {
            const double e = error_dispersive(snr_heterodyne(pd, 0.01 * k));
            CHECK(e < prev);
            prev = e;
        }
    }
    SUBCASE("crossing of the 1e-3 level") {
        const auto pd = CavityParams::from_nbar(1.0, 0.5, 100.0);
        const double c = dispersive_crossing(pd);
        CHECK(error_dispersive(snr_heterodyne(pd, c)) == doctest::Approx(1e-3).epsilon(1e-6));
        CHECK(c > 1.0);
        CHECK(c < 2.0);
    }
    SUBCASE("substituted erfc is honoured") {
        auto zero = [](double) { return 0.0; };
        CHECK(error_dispersive(1.0, zero) == 0.0);
    }
}

TEST_CASE("log decrement Y") {
    CHECK(log_decrement_Y(pj, 0.0) == 0.0);
    for (double tau : {0.05, 0.4, 1.7, 6.0}) CHECK(log_decrement_Y(pj, tau) == doctest::Approx(y_oracle(20.0, tau)).epsilon(1e-10));
    CHECK(log_decrement_Y(pj, 60.0) == doctest::Approx(1.0).epsilon(1e-12));
    SUBCASE("integral of Y recovers log W") {
        const double tau = 3.0;
        const int n = 60000;
        const double h = tau / n;
        double s = log_decrement_Y(pj, 0.0) + log_decrement_Y(pj, tau);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * log_decrement_Y(pj, i * h);
        s *= h / 3.0;
        const double logw = cavity::log_survival_W(cavity::detuned_trajectory(pj, 0.0, tau));
        CHECK(-logw * (1.0 + 1600.0) / 100.0 == doctest::Approx(s).epsilon(1e-9));
    }
    SUBCASE("oscillation frequency") {
        CHECK(y_oscillation_frequency(pj) == doctest::Approx(20.0 / (2.0 * pi)).epsilon(0.05));
    }
}

TEST_CASE("readout curve dataset") {
    const auto c = figure1_dataset();
    REQUIRE(c.tau.size() == 1201);
    CHECK(c.eps_nextjump.size() == c.tau.size());
    CHECK(c.eps_dispersive.size() == c.tau.size());
    CHECK(c.Y.size() == c.tau.size());
    CHECK(c.tau.front() == 0.0);
    CHECK(c.tau.back() == doctest::Approx(12.0));
    CHECK(c.eps_dispersive.front() == 0.5);
    const auto broken = figure1_dataset({}, [](double x) { return nextjump::erfc(x) + 0.25; });
    CHECK(broken.eps_dispersive.back() > 0.1);
    CHECK(broken.eps_nextjump == c.eps_nextjump);
}
