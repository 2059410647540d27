#include "nextjump/transmon.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nextjump::transmon {

namespace {
const Complex I{0.0, 1.0};

CMat propagator(const CMat& H, double dt) {
    CMat A = (-I * dt) * H;
    return A.exp();
}
}  // namespace

double TransmonParams::gamma_drive() const { return 0.5 * kappa * std::sqrt(nbar); }

Complex TransmonParams::gamma_L() const { return I * std::sqrt(nbar) * kappa / (2.0 * chi + I * kappa); }

std::string to_string(BetaMethod m) {
    switch (m) {
        case BetaMethod::quadrature: return "quadrature";
        case BetaMethod::steepest_descent: return "steepest_descent";
        case BetaMethod::drive_formula: return "drive_formula";
    }
    return "unknown";
}

BetaMethod beta_method_from_string(const std::string& s) {
    if (s == "quadrature") return BetaMethod::quadrature;
    if (s == "steepest_descent") return BetaMethod::steepest_descent;
    if (s == "drive_formula") return BetaMethod::drive_formula;
    throw std::invalid_argument("unknown beta_B method: " + s);
}

double beta_B(const TransmonParams& p, BetaMethod method) {
    if (!(p.nbar > 0)) throw std::invalid_argument("beta_B: nbar must be positive");
    if (!(p.kappa > 0)) throw std::invalid_argument("beta_B: kappa must be positive");
    const double k = p.kappa;
    const double d = std::abs(p.gamma_L() - std::sqrt(p.nbar));
    switch (method) {
        case BetaMethod::steepest_descent: return 2.0 * k * d / std::sqrt(2.0 * pi);
        case BetaMethod::drive_formula: return 2.0 * std::sqrt(2.0 / pi) * p.gamma_drive();
        case BetaMethod::quadrature: break;
    }
    const double d2 = d * d;
    auto f = [k, d2](double t) { return std::exp(-0.5 * k * d2 * (t + (2.0 / k) * std::expm1(-0.5 * k * t))); };
    double err = 0.0;
    // split at the Gaussian-to-exponential crossover to keep both pieces smooth
    const double tc = 2.0 / k;
    const double a = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, tc, 15, 1e-13, &err);
    double err2 = 0.0;
    const double b = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, tc, std::numeric_limits<double>::infinity(), 15, 1e-13, &err2);
    const double total = a + b;
    if (!(total > 0) || err + err2 > 1e-8 * total) throw NumericalError("beta_B: quadrature did not converge");
    return 2.0 / total;
}

DarkSpectrum dark_eigenvalues_with_width(const TransmonParams& p, double bb) {
    DarkSpectrum s;
    s.beta_b = bb;
    const double ob2 = std::norm(p.omega_b);
    const double od2 = std::norm(p.omega_d);
    s.epsilon = std::sqrt(ob2) / bb;
    s.eta = ob2 > 0 ? std::sqrt(od2 / ob2) : std::numeric_limits<double>::infinity();
    const double a = ob2 / bb;
    if (a > 0) {
        const Complex root = std::sqrt(Complex{1.0 - od2 / (a * a), 0.0});
        s.ie_plus = a * (1.0 + root);
        s.ie_minus = od2 / s.ie_plus;  // a (1 - root) without cancellation
    } else {
        s.ie_plus = I * std::sqrt(od2);
        s.ie_minus = -I * std::sqrt(od2);
    }
    s.e_plus = -I * s.ie_plus;
    s.e_minus = -I * s.ie_minus;
    s.ie_plus_asymptotic = 2.0 * bb * s.epsilon * s.epsilon;
    s.ie_minus_asymptotic = 0.5 * bb * s.eta * s.eta;
    s.validity_ratio = ob2 / (bb * p.kappa);
    s.asymptotics_reliable = s.epsilon < 1.0 && s.eta < s.epsilon;
    s.hierarchy_holds = bb > std::abs(s.ie_plus) && std::abs(s.ie_plus) > std::abs(s.ie_minus);
    s.flags.push_back({"epsilon_small", s.epsilon, 1.0, !(s.epsilon < 1.0)});
    s.flags.push_back({"eta_below_epsilon", s.eta, s.epsilon, !(s.eta < s.epsilon)});
    s.flags.push_back({"perturbative_validity", s.validity_ratio, 0.1, !(s.validity_ratio < 0.1)});
    return s;
}

DarkSpectrum dark_eigenvalues(const TransmonParams& p, BetaMethod method) {
    return dark_eigenvalues_with_width(p, beta_B(p, method));
}

CMat dark_hamiltonian(const TransmonParams& p, int nmax) {
    const int N = nmax + 1;
    const CMat a = annihilation_matrix(nmax);
    const CMat ad = a.adjoint();
    const CMat n = ad * a;
    const Complex d = p.gamma_L() - std::sqrt(p.nbar);
    const CMat HB = (-0.5 * I * p.kappa) * n + (0.5 * I * p.kappa) * (std::conj(d) * a - d * ad);
    const CMat HN = (-0.5 * I * p.kappa - p.chi) * n;
    const CMat Id = CMat::Identity(N, N);
    CMat H = CMat::Zero(3 * N, 3 * N);
    H.block(0, 0, N, N) = HB;
    H.block(0, N, N, N) = p.omega_b * Id;
    H.block(N, 0, N, N) = std::conj(p.omega_b) * Id;
    H.block(N, N, N, N) = HN;
    H.block(N, 2 * N, N, N) = p.omega_d * Id;
    H.block(2 * N, N, N, N) = std::conj(p.omega_d) * Id;
    H.block(2 * N, 2 * N, N, N) = HN;
    return H;
}

NormSeries dark_norm_series(const TransmonParams& p, double dt, int nsteps, int nmax, Complex a0_g, Complex a0_d) {
    if (nmax <= 0) nmax = default_nmax(p.nbar);
    const int N = nmax + 1;
    const CMat U = propagator(dark_hamiltonian(p, nmax), dt);
    CVec psi = CVec::Zero(3 * N), tmp(3 * N);
    psi[N] = a0_g;
    psi[2 * N] = a0_d;
    NormSeries out;
    out.t.reserve(nsteps + 1);
    out.norm2.reserve(nsteps + 1);
    out.t.push_back(0.0);
    out.norm2.push_back(psi.squaredNorm());
    for (int k = 1; k <= nsteps; ++k) {
        tmp.noalias() = U * psi;
        psi.swap(tmp);
        const double nn = psi.squaredNorm();
        out.t.push_back(k * dt);
        out.norm2.push_back(nn);
        for (int l = 0; l < 3; ++l)
            out.edge_weight = std::max(out.edge_weight, std::norm(psi[l * N + nmax]) / std::max(nn, 1e-300));
    }
    return out;
}

double dark_norm_oracle(const TransmonParams& p, double t, int nmax) {
    if (t <= 0) return 1.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(t)));
    auto s = dark_norm_series(p, t / steps, steps, nmax);
    if (s.edge_weight > default_tail_tolerance) throw TruncationOverflow("dark_norm_oracle: raise nmax");
    return s.norm2.back();
}

double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi || !(y[i] > 0)) continue;
        const double ly = std::log(y[i]);
        sx += t[i];
        sy += ly;
        sxx += t[i] * t[i];
        sxy += t[i] * ly;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("fit_log_slope: fewer than two points in window");
    const double den = n * sxx - sx * sx;
    return -(n * sxy - sx * sy) / den;
}

DarkFit fit_dark_rate(const TransmonParams& p, int nmax, double dt, BetaMethod method) {
    DarkFit f;
    f.spectrum = dark_eigenvalues(p, method);
    const double ip = f.spectrum.ie_plus.real();
    const double im = f.spectrum.ie_minus.real();
    if (!(ip > 0) || !(im > 0)) throw std::invalid_argument("fit_dark_rate: needs decaying dark eigenvalues");
    f.t_lo = 5.0 / ip;
    f.t_hi = 2.0 / im;
    const int steps = static_cast<int>(std::ceil(f.t_hi / dt));
    auto s = dark_norm_series(p, dt, steps, nmax);
    f.edge_weight = s.edge_weight;
    f.fitted_rate = fit_log_slope(s.t, s.norm2, f.t_lo, f.t_hi);
    f.predicted_rate = 2.0 * im;
    return f;
}

OdeRhs reduced_rhs(const TransmonParams& p) {
    const double bb = beta_B(p, BetaMethod::drive_formula);
    const double G = p.gamma_drive();
    const Complex om = p.omega_b;
    const Complex lam = 0.5 * p.kappa - I * p.chi;
    return [=](double, const CVec& y, CVec& dy) {
        dy[0] = I * om * y[1] - 0.5 * bb * y[0];
        dy[1] = I * std::conj(om) * y[0] - G * y[2];
        dy[2] = -lam * y[2] + G * y[1];
    };
}

ReducedState reduced_two_level(const TransmonParams& p, const ReducedState& s0, double t, const OdeOptions& opts) {
    CVec y(3);
    y << s0.c_b0, s0.c_g0, s0.c_g1;
    CVec r = integrate_ode(reduced_rhs(p), y, 0.0, t, opts);
    return {r[0], r[1], r[2]};
}

std::vector<RegimeFlag> reduced_regime_flags(const TransmonParams& p) {
    const double G = p.gamma_drive();
    const double r = G * G / (p.chi * p.chi);
    return {{"drive_over_dispersion_sq", r, 0.1, !(r < 0.1)}};
}

double slow_rate_gamma(const TransmonParams& p, BetaMethod method) {
    return 2.0 * std::norm(p.omega_b) / beta_B(p, method);
}

CMat two_level_hamiltonian(const TransmonParams& p, int nmax, Frame frame) {
    const int N = nmax + 1;
    const CMat a = annihilation_matrix(nmax);
    const CMat ad = a.adjoint();
    const CMat n = ad * a;
    const double s = std::sqrt(p.nbar);
    const CMat HB = (-0.5 * I * p.kappa) * n + (-0.5 * I * p.kappa * s) * (a - ad);
    CMat HN = (-0.5 * I * p.kappa - p.chi) * n;
    if (frame == Frame::unshifted) HN = -p.chi * n + HB;
    CMat H = CMat::Zero(2 * N, 2 * N);
    H.block(0, 0, N, N) = HB;
    H.block(0, N, N, N) = p.omega_b * CMat::Identity(N, N);
    H.block(N, 0, N, N) = std::conj(p.omega_b) * CMat::Identity(N, N);
    H.block(N, N, N, N) = HN;
    return H;
}

std::vector<Complex> two_level_cg0(const TransmonParams& p, double dt, int nsteps, int nmax, Frame frame) {
    if (nmax <= 0) nmax = default_nmax(p.nbar);
    const int N = nmax + 1;
    const CMat U = propagator(two_level_hamiltonian(p, nmax, frame), dt);
    CVec psi = CVec::Zero(2 * N), tmp(2 * N);
    psi[N] = 1.0;
    std::vector<Complex> out;
    out.reserve(nsteps + 1);
    out.push_back(psi[N]);
    for (int k = 1; k <= nsteps; ++k) {
        tmp.noalias() = U * psi;
        psi.swap(tmp);
        out.push_back(psi[N]);
    }
    if (std::norm(psi[2 * N - 1]) > default_tail_tolerance * std::max(psi.squaredNorm(), 1e-300) ||
        std::norm(psi[N - 1]) > default_tail_tolerance * std::max(psi.squaredNorm(), 1e-300))
        throw TruncationOverflow("two_level_cg0: raise nmax");
    return out;
}

double volterra_kernel(const TransmonParams& p, double s) {
    const double k = p.kappa;
    return std::exp(-0.5 * k * p.nbar * (s + (2.0 / k) * std::expm1(-0.5 * k * s)));
}

namespace {

// trapezoid in both the memory integral and the time step, solved implicitly for C_i
std::vector<double> solve_volterra(const TransmonParams& p, double tmax, double dt) {
    const double w2 = std::norm(p.omega_b);
    const long nst = static_cast<long>(std::llround(tmax / dt));
    long m = 1;
    while (volterra_kernel(p, m * dt) > 1e-18 && m * dt < tmax) ++m;
    std::vector<double> K(m + 1);
    for (long j = 0; j <= m; ++j) K[j] = volterra_kernel(p, j * dt);

    std::vector<double> c(nst + 1, 0.0);
    c[0] = 1.0;
    double dc_prev = 0.0;
    for (long i = 1; i <= nst; ++i) {
        const long j0 = std::max(0L, i - m);
        double S = 0.0;
        for (long j = j0; j < i; ++j) S += K[i - j] * c[j];
        if (j0 == 0) S -= 0.5 * K[i] * c[0];
        const double A = c[i - 1] + 0.5 * dt * dc_prev;
        c[i] = (A - 0.5 * dt * dt * w2 * S) / (1.0 + 0.25 * dt * dt * w2 * K[0]);
        dc_prev = -w2 * dt * (S + 0.5 * K[0] * c[i]);
    }
    return c;
}

}  // namespace

VolterraResult multiscale_volterra(const TransmonParams& p, double tmax, double dt, bool check_halving) {
    if (!(tmax > 0)) throw std::invalid_argument("multiscale_volterra: tmax must be positive");
    const double dt_max = 0.02 / (p.kappa * std::sqrt(std::max(p.nbar, 1.0)));
    if (dt <= 0) dt = dt_max;
    VolterraResult r;
    r.dt = dt;
    r.c = solve_volterra(p, tmax, dt);
    for (std::size_t i = 1; i < r.c.size(); ++i)
        if (r.c[i] > r.c[i - 1]) r.monotone = false;
    if (check_halving) {
        auto c2 = solve_volterra(p, tmax, 0.5 * dt);
        double md = 0.0;
        for (std::size_t i = 0; i < r.c.size() && 2 * i < c2.size(); ++i) md = std::max(md, std::abs(r.c[i] - c2[2 * i]));
        r.halved_dt_max_diff = md;
    }
    if (std::norm(p.omega_b) > 0) {
        std::vector<double> t(r.c.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = i * dt;
        r.fitted_rate = fit_log_slope(t, r.c, 0.1 * tmax, tmax);
    }
    return r;
}

MultiscaleNorm norm_evolution_multiscale(const TransmonParams& p, double t) {
    if (t < 0) throw std::invalid_argument("norm_evolution_multiscale: t must be >= 0");
    const double g = slow_rate_gamma(p, BetaMethod::drive_formula);
    const double c3 = p.kappa * p.kappa * p.kappa * p.nbar / 12.0;
    auto f = [g, c3](double x) { return std::exp(2.0 * g * x - c3 * x * x * x); };
    const double integral =
        t > 0 ? boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, t, 12, 1e-14) : 0.0;
    MultiscaleNorm r;
    const double e = std::exp(-2.0 * g * t);
    r.norm = e * (1.0 + 2.0 * g * integral);
    // 2g [e^{-c t^3} - e^{-2 g t}(1 + 2 g I)] arranged to avoid cancellation at small t
    r.dnorm_dt = 2.0 * g * (std::expm1(-c3 * t * t * t) - std::expm1(-2.0 * g * t) - 2.0 * g * integral * e);
    return r;
}

Complex unshifted_rate(const TransmonParams& p) {
    const double k = p.kappa;
    return -I * (k * k * p.nbar / 4.0) / (p.chi + 0.5 * I * k) - unshifted_rabi_decay(p);
}

double unshifted_rabi_decay(const TransmonParams& p) {
    return std::sqrt(2.0 * pi / (p.kappa * p.kappa * p.nbar)) * std::norm(p.omega_b);
}

double diffusion_overlap(double C, double t) {
    if (C < 0) throw std::invalid_argument("diffusion_overlap: C must be >= 0");
    return std::exp(-C * C * t * t / 8.0);
}

CoherentAB bright_collapse_trajectory(const TransmonParams& p, double t) {
    const double k = p.kappa;
    const double s = std::sqrt(p.nbar);
    const Complex gl = p.gamma_L();
    CoherentAB r;
    r.alpha = (s - gl) * (-std::expm1(-0.5 * k * t));
    r.beta = -I * k * s * gl.imag() * t - 0.5 * k * std::norm(gl - s) * (t + (2.0 / k) * std::expm1(-0.5 * k * t));
    return r;
}

}  // namespace nextjump::transmon
