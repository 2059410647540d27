#include "nextjump/readout.hpp"

#include "nextjump/parallel.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nextjump::readout {

namespace {

cavity::CavityParams without_shift(cavity::CavityParams p) {
    p.chi = 0.0;
    return p;
}

// 1 - W from vacuum, accurate for small t
double click_probability(const cavity::CavityParams& p, double t) {
    const auto c = cavity::detuned_trajectory(p, Complex{0.0, 0.0}, t);
    return -std::expm1(cavity::log_survival_W(c));
}

}  // namespace

double error_next_jump(const cavity::CavityParams& p, double t) {
    if (t < 0) throw std::invalid_argument("error_next_jump: t must be >= 0");
    if (p.chi == 0.0 || t == 0.0) return 0.5;
    const double pg = click_probability(p, t);
    const double pb = click_probability(without_shift(p), t);
    const double s = pg + pb;
    if (!(s > 0)) return 0.5;
    return std::clamp(pg / s, 0.0, 1.0);
}

double snr_heterodyne(const cavity::CavityParams& p, double t) {
    if (t < 0) throw std::invalid_argument("snr_heterodyne: t must be >= 0");
    const double tau = p.kappa * t;
    return (p.gamma_drive / p.kappa) * std::pow(tau, 2.5) / std::sqrt(18.0);
}

double error_dispersive(double snr, ErfcFn erfc_fn) {
    if (snr < 0) throw std::invalid_argument("error_dispersive: snr must be >= 0");
    return 0.5 * erfc_fn(0.5 * snr);
}

double log_decrement_Y(const cavity::CavityParams& p, double tau) {
    if (tau < 0) throw std::invalid_argument("log_decrement_Y: tau must be >= 0");
    const auto c = cavity::detuned_trajectory(p, Complex{0.0, 0.0}, tau / p.kappa);
    const double W = cavity::survival_W(c);
    const double dW_dtau = -cavity::jump_density_D(c, p) / p.kappa;
    const double r = 2.0 * p.chi / p.kappa;
    return -(1.0 + r * r) / (p.nbar * W) * dW_dtau;
}

ErrorMinimum next_jump_error_minimum(const cavity::CavityParams& p, double tau_max) {
    if (p.chi == 0.0) throw std::invalid_argument("next_jump_error_minimum: chi must be nonzero");
    // coarse scan then Brent on the bracketing cell
    const int n = 2000;
    int best = 1;
    double best_eps = 1.0;
    for (int i = 1; i <= n; ++i) {
        const double tau = tau_max * i / n;
        const double e = error_next_jump(p, tau / p.kappa);
        if (e < best_eps) {
            best_eps = e;
            best = i;
        }
    }
    const double lo = tau_max * (best - 1) / n, hi = tau_max * std::min(best + 1, n) / n;
    auto f = [&](double tau) { return error_next_jump(p, tau / p.kappa); };
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, 50);
    ErrorMinimum m;
    m.tau = r.first;
    m.eps = r.second;
    m.chi_t = std::abs(p.chi) * m.tau / p.kappa;
    m.scale = std::pow(p.kappa * std::cbrt(p.nbar) / p.chi, 2);
    m.ratio = m.eps / m.scale;
    return m;
}

double dispersive_crossing(const cavity::CavityParams& p, double level, double tau_max, ErfcFn erfc_fn) {
    auto g = [&](double tau) { return error_dispersive(snr_heterodyne(p, tau / p.kappa), erfc_fn) - level; };
    if (g(0.0) <= 0) return 0.0;
    // bracket by scanning, then bisect
    const int n = 5000;
    double prev = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double tau = tau_max * i / n;
        if (g(tau) <= 0) {
            boost::math::tools::eps_tolerance<double> tol(50);
            std::uintmax_t it = 200;
            const auto br = boost::math::tools::bisect(g, prev, tau, tol, it);
            return 0.5 * (br.first + br.second);
        }
        prev = tau;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double y_oscillation_frequency(const cavity::CavityParams& p, double tau_max, int npoints, int pad_factor) {
    if (npoints < 16 || pad_factor < 1) throw std::invalid_argument("y_oscillation_frequency: grid too small");
    const double dtau = tau_max / npoints;
    std::vector<double> y(npoints);
    for (int i = 0; i < npoints; ++i) y[i] = log_decrement_Y(p, i * dtau);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= npoints;
    const std::size_t nfft = static_cast<std::size_t>(npoints) * static_cast<std::size_t>(pad_factor);
    std::vector<double> buf(nfft, 0.0);
    for (int i = 0; i < npoints; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * pi * i / (npoints - 1));
        buf[i] = (y[i] - mean) * w;
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, buf);
    std::size_t best = 1;
    for (std::size_t k = 1; k < nfft / 2; ++k)
        if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
    return static_cast<double>(best) / (static_cast<double>(nfft) * dtau);
}

ReadoutCurves figure1_dataset(const Figure1Defaults& d, ErfcFn erfc_fn) {
    if (d.npoints < 2 || !(d.tau_max > 0)) throw std::invalid_argument("figure1_dataset: bad grid");
    ReadoutCurves c;
    c.kappa = d.kappa;
    c.nbar = d.nbar;
    c.chi_nextjump = d.chi_nextjump;
    c.chi_dispersive = d.chi_dispersive;
    const auto pj = cavity::CavityParams::from_nbar(d.kappa, d.chi_nextjump * d.kappa, d.nbar);
    const auto pd = cavity::CavityParams::from_nbar(d.kappa, d.chi_dispersive * d.kappa, d.nbar);
    const auto n = static_cast<std::size_t>(d.npoints);
    c.tau.resize(n);
    c.eps_nextjump.resize(n);
    c.eps_dispersive.resize(n);
    c.snr.resize(n);
    c.Y.resize(n);
    parallel_for(n, [&](std::size_t i) {
        const double tau = d.tau_max * static_cast<double>(i) / static_cast<double>(n - 1);
        const double t = tau / d.kappa;
        c.tau[i] = tau;
        c.eps_nextjump[i] = error_next_jump(pj, t);
        c.snr[i] = snr_heterodyne(pd, t);
        c.eps_dispersive[i] = error_dispersive(c.snr[i], erfc_fn);
        c.Y[i] = log_decrement_Y(pj, tau);
    });
    return c;
}

}  // namespace nextjump::readout
