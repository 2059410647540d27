#include "nextjump/atom3.hpp"

#include <cmath>

namespace nextjump::atom3 {

namespace {
const Complex I{0.0, 1.0};
}

Atom3Params Atom3Params::from_epsilon(double eps, double beta1, double drive_ratio, double beta2) {
    Atom3Params p;
    p.beta1 = beta1;
    p.beta2 = beta2;
    p.omega1 = drive_ratio * beta1;
    p.omega2 = eps * beta1;
    p.delta2 = std::abs(p.omega1);
    return p;
}

CVec Atom3State::to_vec() const {
    CVec v(3);
    v << c0, c1, c2;
    return v;
}

Atom3State Atom3State::from_vec(const CVec& v) { return {v[0], v[1], v[2]}; }

CMat generator(const Atom3Params& p) {
    CMat m = CMat::Zero(3, 3);
    m(0, 1) = I * std::conj(p.omega1);
    m(0, 2) = I * std::conj(p.omega2);
    m(1, 0) = I * p.omega1;
    m(1, 1) = -0.5 * p.beta1;
    m(2, 0) = I * p.omega2;
    m(2, 2) = I * p.delta2 - 0.5 * p.beta2;
    return m;
}

OdeRhs null_rhs(const Atom3Params& p) {
    const CMat m = generator(p);
    return [m](double, const CVec& y, CVec& dy) { dy.noalias() = m * y; };
}

NullEvolution evolve_null(const Atom3Params& p, const Atom3State& s, double t, const OdeOptions& opts) {
    if (t < 0) throw std::invalid_argument("evolve_null: t must be >= 0");
    CVec y = integrate_ode(null_rhs(p), s.to_vec(), 0.0, t, opts);
    NullEvolution r;
    r.state = Atom3State::from_vec(y);
    r.W = y.squaredNorm();
    return r;
}

std::vector<NullEvolution> evolve_null_series(const Atom3Params& p, const Atom3State& s,
                                              const std::vector<double>& times, const OdeOptions& opts) {
    auto ys = integrate_ode_at(null_rhs(p), s.to_vec(), 0.0, times, opts);
    std::vector<NullEvolution> out;
    out.reserve(ys.size());
    for (const auto& y : ys) out.push_back({Atom3State::from_vec(y), y.squaredNorm()});
    return out;
}

double beta_ell(const Atom3Params& p) {
    if (!(p.beta1 > 0)) throw std::invalid_argument("beta_ell: beta1 must be positive");
    return 0.5 * p.beta2 + 2.0 * std::norm(p.omega2) / p.beta1;
}

Complex amplitude_c1_closed(const Atom3Params& p, double t) {
    const double w1 = std::abs(p.omega1);
    const double bl = beta_ell(p);
    const double pref = 4.0 * std::norm(p.omega2) / (p.beta1 * p.beta1);
    return I * std::sin(w1 * t) * std::exp(-p.beta1 * t / 4.0) +
           pref * std::exp(I * w1 * t) * (std::exp(-p.beta1 * t / 4.0) - std::exp(-bl * t));
}

DarkFraction dark_fraction(const Atom3Params& p) {
    const double o2 = std::norm(p.omega2);
    if (o2 == 0.0) return {0.0, 0.0};
    const double g = 1.0 / (1.0 + p.beta1 * p.beta2 / (4.0 * o2));
    return {g / (2.0 + g), g};
}

Atom3State project_slow(const Atom3Params& p, double T, double t) {
    if (t < T) throw std::invalid_argument("project_slow: requires t >= T");
    const double eps = p.epsilon();
    const double f = 1.0 / std::sqrt(1.0 + 8.0 * eps * eps);
    const Complex ph = std::exp(I * std::abs(p.omega1) * t) * std::exp(-beta_ell(p) * (t - T));
    const Complex a = 2.0 * I * eps * f * ph;
    return {a, a, f * ph};
}

Complex unitary_c1(const Atom3Params& p, double t) {
    const double w1 = std::abs(p.omega1);
    const double w2 = std::abs(p.omega2);
    return 0.5 * (std::exp(I * w1 * t) * std::cos(w2 * t / std::sqrt(2.0)) - std::exp(-I * w1 * t));
}

double scenario_a_log_dark_probability(const Atom3Params& p, double T) { return -0.5 * p.beta1 * T; }

std::vector<RegimeFlag> regime_flags(const Atom3Params& p, double T) {
    std::vector<RegimeFlag> f;
    const double eps = p.epsilon();
    f.push_back({"weak_drive_eps", eps, 0.1, eps > 0.1});
    const double ratio = std::abs(p.omega1) / p.beta1;
    f.push_back({"strong_drive_ratio", ratio, 1.0, ratio < 1.0});
    const double det = std::abs(p.delta2 - std::abs(p.omega1));
    f.push_back({"detuning_matches_omega1", det, 1e-12 * std::max(1.0, std::abs(p.omega1)),
                 det > 1e-12 * std::max(1.0, std::abs(p.omega1))});
    if (T > 0) f.push_back({"projection_window_beta1T", p.beta1 * T, 20.0, p.beta1 * T < 20.0});
    return f;
}

}  // namespace nextjump::atom3
