#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nextjump/trajectories.hpp"

#include <algorithm>
#include <cmath>

using namespace nextjump;
using namespace nextjump::trajectories;

namespace {

// asymptotic Kolmogorov p-value for sqrt(n) D
double ks_pvalue(double d, std::size_t n) {
    const double lam = std::sqrt(static_cast<double>(n)) * d;
    double p = 0.0;
    for (int k = 1; k < 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    return std::clamp(p, 0.0, 1.0);
}

JumpRecord hand_record(std::vector<double> times, std::vector<int> channels, double tmax) {
    JumpRecord r;
    r.times = std::move(times);
    r.channels = std::move(channels);
    r.tmax = tmax;
    return r;
}

}  // namespace

TEST_CASE("next-jump sampling") {
    SUBCASE("free decay is exponential") {
        const double beta = 2.0;
        auto t = sample_first_jumps(decay_model(beta), 100000, 50.0, 17);
        std::sort(t.begin(), t.end());
        double d = 0.0;
        const double n = static_cast<double>(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double F = -std::expm1(-beta * t[i]);
            d = std::max({d, (i + 1) / n - F, F - i / n});
        }
        CHECK(ks_pvalue(d, t.size()) > 0.01);
    }
    SUBCASE("jump time is located on the survival curve") {
        const auto m = decay_model(1.0);
        Philox rng({5, 0});
        Philox copy({5, 0});
        const double u = copy.uniform();
        const auto j = sample_next_jump(m, m.initial, rng, 0.0, 100.0);
        REQUIRE(j.jumped);
        CHECK(std::abs(j.state_at_jump.squaredNorm() - u) < 1e-9);
        CHECK(j.t == doctest::Approx(-std::log(u)).epsilon(1e-8));
        CHECK(std::abs(j.post_state[0]) == doctest::Approx(1.0));
    }
    SUBCASE("zero jump operator never fires") {
        const auto m = decay_model(0.0);
        Philox rng({1, 1});
        for (int k = 0; k < 100; ++k) CHECK_FALSE(sample_next_jump(m, m.initial, rng, 0.0, 10.0).jumped);
    }
    SUBCASE("empty horizon") {
        const auto m = decay_model(1.0);
        Philox rng({1, 1});
        const auto j = sample_next_jump(m, m.initial, rng, 3.0, 3.0);
        CHECK_FALSE(j.jumped);
    }
    SUBCASE("channel branching follows the populations") {
        // channel one carries |c1|^2 = 0.2 of the eventual jumps
        const auto m = two_channel_model(1.0, 3.0, std::sqrt(0.2), std::sqrt(0.8));
        const int n = 20000;
        int ones = 0;
        for (int k = 0; k < n; ++k) {
            Philox rng({9, static_cast<std::uint64_t>(k)});
            const auto j = sample_next_jump(m, m.initial, rng, 0.0, 200.0);
            REQUIRE(j.jumped);
            ones += j.channel == 0;
        }
        const double f = static_cast<double>(ones) / n;
        CHECK(std::abs(f - 0.2) < 4.0 * std::sqrt(0.2 * 0.8 / n));
    }
}

TEST_CASE("trajectories") {
    const auto m = atom3_model(atom3::Atom3Params::from_epsilon(0.05));
    SUBCASE("zero horizon gives an empty record") {
        const auto r = run_trajectory(m, 0.0, {1, 0});
        CHECK(r.times.empty());
        CHECK(r.channels.empty());
    }
    SUBCASE("identical seeds give identical records") {
        const auto a = run_trajectory(m, 200.0, {42, 3});
        const auto b = run_trajectory(m, 200.0, {42, 3});
        CHECK(a.times == b.times);
        CHECK(a.channels == b.channels);
        CHECK(a.final_state == b.final_state);
        const auto c = run_trajectory(m, 200.0, {42, 4});
        CHECK(a.times != c.times);
    }
    SUBCASE("times increase and the final state is normalized") {
        const auto r = run_trajectory(m, 300.0, {2, 0});
        CHECK(std::is_sorted(r.times.begin(), r.times.end()));
        CHECK(r.final_state.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("reset normalizes and rejects annihilated states") {
        const auto d = decay_model(1.0);
        CVec psi(2);
        psi << 0.0, 0.5;
        CHECK(d.reset(0, psi).norm() == doctest::Approx(1.0));
        psi << 1.0, 0.0;
        CHECK_THROWS_AS(d.reset(0, psi), NumericalError);
    }
}

TEST_CASE("telegraph statistics") {
    SUBCASE("no long gaps means no dark time") {
        const auto s = telegraph_stats(hand_record({1, 2, 3, 4, 5}, {0, 0, 0, 0, 0}, 6.0), 5.0);
        CHECK(s.p_D == 0.0);
        CHECK(s.n_dark == 0);
    }
    SUBCASE("hand-built record") {
        const auto s = telegraph_stats(hand_record({1, 10, 11, 30}, {0, 1, 0, 0}, 40.0), 5.0, 0, true);
        // dark gaps: 1->10 (9), 11->30 (19) and the horizon-cut 30->40 (10)
        CHECK(s.dark_time == doctest::Approx(38.0));
        CHECK(s.p_D == doctest::Approx(38.0 / 40.0));
        CHECK(s.n_dark == 3);
        CHECK(s.n_dark_complete == 2);
        CHECK(s.branch_fraction_strong == doctest::Approx(0.5));
        CHECK(s.tail_rate == doctest::Approx(2.0 / (4.0 + 14.0)));
        CHECK(s.segments.size() == 5);
    }
    SUBCASE("dark fraction of the weakly driven atom") {
        const auto p = atom3::Atom3Params::from_epsilon(0.05);
        const auto m = atom3_model(p);
        const auto r = run_trajectory(m, 2e5, {123, 0});
        const auto s = telegraph_stats(r, 20.0);
        // finite-eps correction shifts the long-run fraction a little below 1/3
        CHECK(std::abs(s.p_D - 1.0 / 3.0) < 3.0 * s.sigma_binomial + 0.01);
        CHECK(s.branch_fraction_strong == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(telegraph_stats(hand_record({}, {}, 1.0), 0.0), std::invalid_argument);
}

TEST_CASE("density-matrix consistency") {
    SUBCASE("exact decay of the excited population") {
        const auto m = decay_model(0.7);
        const CMat rho0 = m.initial * m.initial.adjoint();
        const CMat r = lindblad_evolve(m, rho0, 2.0, {1e-12, 1e-14});
        CHECK(r(1, 1).real() == doctest::Approx(std::exp(-1.4)).epsilon(1e-10));
        CHECK(r.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("no jump operators gives exact agreement") {
        const auto rep = lindblad_consistency(decay_model(0.0), 50, 3.0, 0);
        CHECK(rep.max_deviation < 1e-12);
    }
    SUBCASE("trajectory average matches the master equation") {
        const auto m = two_channel_model(1.0, 0.3, std::sqrt(0.5), Complex(0.0, std::sqrt(0.5)));
        const auto rep = lindblad_consistency(m, 4000, 1.5, 77);
        CHECK(rep.max_deviation < rep.bound);
        CHECK(rep.pass);
        CHECK(rep.trace_identity_error < 1e-6);
    }
    SUBCASE("trace identity for the atom") {
        CHECK(trace_identity_error(atom3_model(atom3::Atom3Params::from_epsilon(0.05, 1.0, 10.0, 0.1)), 4.0) < 1e-6);
    }
}
