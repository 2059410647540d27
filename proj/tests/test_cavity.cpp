#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nextjump/cavity.hpp"

#include <cmath>

using namespace nextjump;
using namespace nextjump::cavity;

namespace {

const CavityParams p4 = CavityParams::from_nbar(1.0, 0.0, 4.0);

}  // namespace

TEST_CASE("resonant trajectory") {
    const auto z = resonant_trajectory(p4, 0.0);
    CHECK(z.alpha == Complex(0.0));
    CHECK(z.beta == Complex(0.0));
    const auto c = resonant_trajectory(p4, 2.0);
    CHECK(c.alpha.real() == doctest::Approx(1.264241).epsilon(1e-6));
    CHECK(c.beta.real() == doctest::Approx(-1.471518).epsilon(1e-6));
    // exp(2 beta + alpha^2) evaluates to 0.260610, within 1e-4 of the rounded value 0.26057
    CHECK(survival_W(c) == doctest::Approx(std::exp(2 * -1.471518 + 1.264241 * 1.264241)).epsilon(1e-5));
    CHECK(std::abs(survival_W(c) - 0.26057) < 1e-4);
    CHECK(resonant_trajectory(p4, 60.0).alpha.real() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("survival and jump density") {
    CHECK(survival_W(resonant_trajectory(p4, 0.0)) == 1.0);
    SUBCASE("exponential regime slope") {
        const double l1 = log_survival_W(resonant_trajectory(p4, 40.0));
        const double l2 = log_survival_W(resonant_trajectory(p4, 50.0));
        CHECK((l2 - l1) / 10.0 == doctest::Approx(-4.0).epsilon(1e-8));
    }
    CHECK(jump_density_D(resonant_trajectory(p4, 0.0), p4) == 0.0);
    SUBCASE("D integrates to one and equals -dW/dt") {
        double acc = 0.0;
        const double h = 1e-3;
        for (int k = 0; k < 20000; ++k) {
            const double t = h * (k + 0.5);
            acc += h * jump_density_D(resonant_trajectory(p4, t), p4);
        }
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
        const double t = 1.3, e = 1e-5;
        const double dw = (survival_W(resonant_trajectory(p4, t + e)) - survival_W(resonant_trajectory(p4, t - e))) / (2 * e);
        CHECK(-dw == doctest::Approx(jump_density_D(resonant_trajectory(p4, t), p4)).epsilon(1e-7));
    }
}

TEST_CASE("short-time law") {
    CHECK(short_time_W(p4, 0.0) == 1.0);
    CHECK(short_time_W(p4, 0.1) == doctest::Approx(0.999667).epsilon(1e-6));
    // exact exponent at kappa t = 0.1 is about 3% smaller
    const double exact = log_survival_W(resonant_trajectory(p4, 0.1));
    CHECK(exact == doctest::Approx(-3.22e-4).epsilon(0.01));
    SUBCASE("regression slope against t^3") {
        for (double nbar : {4.0, 100.0}) {
            const auto p = CavityParams::from_nbar(1.0, 0.0, nbar);
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            const int n = 41;
            for (int i = 0; i < n; ++i) {
                const double t = 0.01 + 0.04 * i / (n - 1);
                const double x = t * t * t, y = log_survival_W(resonant_trajectory(p, t));
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            CHECK(slope == doctest::Approx(-nbar / 12.0).epsilon(0.02));
        }
    }
}

TEST_CASE("detuned trajectory") {
    const auto p = CavityParams::from_nbar(1.0, 20.0, 100.0);
    SUBCASE("relaxes to the driven steady amplitude") {
        const auto c = detuned_trajectory(p, 10.0, 80.0);
        // Gamma / |kappa/2 - i chi| with Gamma = kappa sqrt(nbar) / 2 = 5
        CHECK(std::abs(c.alpha) == doctest::Approx(5.0 / std::sqrt(400.25)).epsilon(1e-9));
        CHECK(std::abs(c.alpha) == doctest::Approx(0.24992).epsilon(1e-5));
    }
    SUBCASE("fixed point") {
        const Complex g = gamma_L_drive(p);
        for (double t : {0.0, 0.3, 5.0}) CHECK(std::abs(detuned_trajectory(p, g, t).alpha - g) < 1e-13);
    }
    SUBCASE("exponential approach in both directions") {
        const Complex g = gamma_L_drive(p);
        for (Complex a0 : {Complex(10.0), Complex(0.0), Complex(-3.0, 4.0)})
            for (int k = 0; k <= 200; ++k) {
                const double t = 0.05 * k;
                CHECK(std::abs(detuned_trajectory(p, a0, t).alpha - g) <=
                      std::exp(-0.5 * t) * std::abs(a0 - g) + 1e-12);
            }
    }
    SUBCASE("matches the Fock oracle") {
        const auto q = CavityParams::from_nbar(1.0, 2.0, 4.0);
        const int nmax = 40;
        const auto psi = evolve_fock_oracle(q, FockVector::basis(1, nmax, 0, 0), 1.5, true, {1e-12, 1e-14});
        const auto c = detuned_trajectory(q, 0.0, 1.5);
        CHECK(psi.norm2() == doctest::Approx(survival_W(c)).epsilon(1e-8));
        CHECK(coherent_fidelity(psi, c) > 1.0 - 1e-10);
    }
}

TEST_CASE("low-field amplitude") {
    CHECK(std::abs(gamma_L_shifted(CavityParams::from_nbar(1.0, 0.0, 100.0)) - Complex(10.0)) < 1e-12);
    CHECK(std::abs(gamma_L_shifted(CavityParams::from_nbar(1.0, 20.0, 100.0))) ==
          doctest::Approx(10.0 / std::sqrt(1601.0)).epsilon(1e-12));
    CHECK(std::abs(gamma_L_shifted(CavityParams::from_nbar(1.0, 20.0, 100.0))) == doctest::Approx(0.24992).epsilon(1e-5));
    CHECK(std::abs(gamma_L_shifted(CavityParams::from_nbar(1.0, 1.5, 100.0))) == doctest::Approx(10.0 / std::sqrt(10.0)));
}

TEST_CASE("Fock oracle") {
    SUBCASE("undriven vacuum is stationary") {
        auto p = p4;
        p.gamma_drive = 0.0;
        const auto v = FockVector::basis(1, 10, 0, 0);
        CHECK((evolve_fock_oracle(p, v, 3.0).amps - v.amps).norm() == 0.0);
    }
    SUBCASE("norm and coherent fidelity") {
        const auto psi = evolve_fock_oracle(p4, FockVector::basis(1, 44, 0, 0), 2.0, false, {1e-12, 1e-14});
        CHECK(std::abs(psi.norm2() - survival_W(resonant_trajectory(p4, 2.0))) < 1e-6);
        CHECK(coherent_fidelity(psi, resonant_trajectory(p4, 2.0)) > 1.0 - 1e-8);
    }
    SUBCASE("too small a truncation is reported") {
        const auto p = CavityParams::from_nbar(1.0, 0.0, 100.0);
        CHECK_THROWS_AS(evolve_fock_oracle(p, FockVector::basis(1, 8, 0, 0), 0.5), TruncationOverflow);
    }
}

TEST_CASE("shifted basis") {
    const auto r = shifted_basis_check(p4);
    CHECK(r.max_norm_drift < 1e-8);
    CHECK(r.unshifted_W_error < 1e-7);
    CHECK(r.fitted_rate == doctest::Approx(r.predicted_rate).epsilon(0.05));
    CHECK(r.predicted_rate == doctest::Approx(1e-4 * 4.0).epsilon(1e-9));
}

TEST_CASE("mean jump time scale") {
    // (3 / (kappa Gamma^2))^(1/3) from the cubic law
    CHECK(mean_jump_time(p4) == doctest::Approx(std::cbrt(3.0)).epsilon(1e-12));
}
