#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nextjump/heterodyne.hpp"

#include <cmath>

using namespace nextjump;
using namespace nextjump::heterodyne;

namespace {

const Complex i1{0.0, 1.0};

}  // namespace

TEST_CASE("parameters") {
    const auto p = HeterodyneParams::from_nbar(1.0, 4.0);
    CHECK(p.gamma_drive == doctest::Approx(1.0));
    CHECK(p.nbar() == doctest::Approx(4.0));
    CHECK(p.alpha_steady() == doctest::Approx(2.0));
    CHECK_NOTHROW(p.check_step(1e-3));
    CHECK_THROWS_AS(p.check_step(2e-3), std::invalid_argument);
    auto h = p;
    h.omega = 0.0;
    CHECK_NOTHROW(h.check_step(0.01));
    CHECK_THROWS_AS(h.check_step(0.02), std::invalid_argument);
    CHECK_THROWS_AS(integrate_sse_coherent(p, zero_path(p, 5e-3, 10), 0.0), std::invalid_argument);
}

TEST_CASE("coherent SSE solution") {
    const auto p = HeterodyneParams::from_nbar(1.0, 4.0);
    SUBCASE("silent record relaxes exponentially") {
        const Complex a0{0.7, -0.3};
        const auto s = integrate_sse_coherent(p, zero_path(p, 1e-3, 3000), a0);
        const double e = std::exp(-0.5 * 3.0);
        CHECK(std::abs(s.alpha - (2.0 * (1.0 - e) + a0 * e)) < 1e-12);
    }
    SUBCASE("amplitude does not depend on the record") {
        const auto a = integrate_sse_coherent(p, make_noise_path(p, 1e-3, 2000, {1, 0}), 0.0);
        const auto b = integrate_sse_coherent(p, make_noise_path(p, 1e-3, 2000, {1, 1}), 0.0);
        CHECK(a.alpha == b.alpha);
        CHECK(a.beta != b.beta);
    }
    SUBCASE("beta follows the record integrals") {
        const Complex a0{0.5, 0.2};
        const auto s = integrate_sse_coherent(p, make_noise_path(p, 1e-3, 4000, {3, 0}), a0);
        const double k = p.kappa, G = p.gamma_drive, t = s.t;
        const double a = 2.0 * G / k;
        const Complex beta = -a * (G * t - s.T) + a * (a0 - a) * (std::exp(-0.5 * k * t) - 1.0) + (a0 - a) * s.S;
        CHECK(std::abs(s.beta - beta) < 1e-10 * std::max(1.0, std::abs(beta)));
        const auto c = closed_form(p, a0, t, s.T, s.S);
        CHECK(std::abs(c.beta - beta) < 1e-10 * std::max(1.0, std::abs(beta)));
        CHECK(std::abs(c.alpha - s.alpha) < 1e-12);
    }
    SUBCASE("record integrals of a constant-rate record") {
        auto path = zero_path(p, 1e-3, 1000);
        auto q = p;
        q.omega = 0.0;
        for (auto& d : path.increments) d = 1e-3;  // zeta' = 1
        const auto s = integrate_sse_coherent(q, path, 0.0);
        CHECK(std::abs(s.T - Complex(1.0)) < 1e-12);
        CHECK(std::abs(s.S - Complex(2.0 * (1.0 - std::exp(-0.5)))) < 1e-12);
    }
    SUBCASE("Fock Euler oracle on the same record") {
        const auto path = make_noise_path(p, 1e-4, 20000, {8, 0});
        const auto c = integrate_sse_coherent(p, path, 0.0);
        const auto f = integrate_sse_fock(p, path, FockVector::basis(1, 40, 0, 0));
        CHECK(ray_fidelity(f.psi.amps, coherent_amplitudes(c.alpha, c.beta, 40)) > 1.0 - 1e-4);
        CHECK(std::abs(f.T - c.T) < 1e-10);
    }
    SUBCASE("coherent amplitudes") {
        const CVec v = coherent_amplitudes(Complex(0.5), Complex(0.0), 30);
        CHECK(v[0] == Complex(1.0));
        CHECK(std::abs(v[2] - Complex(0.25 / std::sqrt(2.0))) < 1e-15);
        CHECK(std::log(v.squaredNorm()) == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("current statistics") {
    SUBCASE("raw current is a centred complex Gaussian of variance 1/t") {
        const auto p = HeterodyneParams::from_nbar(1.0, 100.0);
        EnsembleOptions o;
        o.t = 5.0;
        o.npaths = 4000;
        o.importance = false;
        o.seed = 21;
        const auto st = current_statistics(current_ensemble(p, o));
        const double sd = (1.0 / o.t) / std::sqrt(static_cast<double>(o.npaths));
        CHECK(std::abs(st.raw_var - 1.0 / o.t) < 4.0 * sd);
        CHECK(std::abs(st.raw_mean) < 4.0 * std::sqrt(1.0 / o.t / o.npaths));
    }
    SUBCASE("raw width scales as 1/sqrt(t)") {
        const auto p = HeterodyneParams::from_nbar(1.0, 100.0);
        EnsembleOptions o;
        o.npaths = 3000;
        o.importance = false;
        o.t = 2.0;
        const double v2 = current_statistics(current_ensemble(p, o)).raw_var;
        o.t = 8.0;
        o.seed = 1;
        const double v8 = current_statistics(current_ensemble(p, o)).raw_var;
        CHECK(std::sqrt(v2 / v8) == doctest::Approx(2.0).epsilon(0.1));
    }
    SUBCASE("weighted current peaks at sqrt(kappa nbar)") {
        const auto p = HeterodyneParams::from_nbar(1.0, 100.0);
        EnsembleOptions o;
        o.npaths = 2000;
        o.seed = 5;
        o.alpha0 = p.alpha_steady();
        const auto st = current_statistics(current_ensemble(p, o));
        CHECK(st.peak_abs == doctest::Approx(10.0).epsilon(0.03));
        CHECK(st.log_weight_spread < 1e-6);
    }
    SUBCASE("measurement duration for relative precision delta") {
        // kappa t = 4 / (delta^2 nbar) with delta = 0.2 and nbar = 100
        const double delta = 0.2;
        const auto p = HeterodyneParams::from_nbar(1.0, 100.0);
        EnsembleOptions o;
        o.t = 4.0 / (delta * delta * 100.0);
        o.npaths = 4000;
        o.seed = 9;
        o.alpha0 = p.alpha_steady();
        const auto st = current_statistics(current_ensemble(p, o));
        CHECK(st.relative_width < delta / std::sqrt(2.0));
    }
}

TEST_CASE("null-measurement correspondence") {
    const auto p = HeterodyneParams::from_nbar(1.0, 4.0);
    SUBCASE("vacuum start") {
        const auto r = null_correspondence(p, 0.0, 5.0);
        CHECK(r.max_elementwise < 1e-8);
        CHECK(r.max_relative_norm_factor < 1e-10);
    }
    SUBCASE("steady start stays fixed") {
        const auto r = null_correspondence(p, p.alpha_steady(), 5.0);
        CHECK(r.max_elementwise < 1e-8);
    }
}

TEST_CASE("gauge equivalence") {
    const auto p = HeterodyneParams::from_nbar(1.0, 4.0, 1.0);
    SUBCASE("silent record") {
        const auto g = gauge_equivalence(p, zero_path(p, 1e-3, 3000), 0.0);
        CHECK(g.max_quadrature_diff < 1e-8);
        CHECK(1.0 - g.min_ray_fidelity < 1e-8);
    }
    SUBCASE("random record") {
        const auto g = gauge_equivalence(p, make_noise_path(p, 1e-3, 3000, {4, 2}), 0.0);
        CHECK(g.max_quadrature_diff < 1e-8);
        CHECK(1.0 - g.min_ray_fidelity < 1e-8);
    }
    SUBCASE("requires unit kappa and beam") {
        auto q = p;
        q.B = 2.0;
        CHECK_THROWS_AS(gauge_equivalence(q, zero_path(q, 1e-3, 10), 0.0), std::invalid_argument);
    }
}
