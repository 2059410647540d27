#include "nextjump/heterodyne.hpp"

#include "nextjump/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nextjump::heterodyne {

namespace {

const Complex I{0.0, 1.0};

// (e^z - 1) / z
Complex phi1(Complex z) {
    if (std::abs(z) < 0.1) {
        Complex term = 1.0, sum = 1.0;
        for (int k = 2; k <= 12; ++k) {
            term *= z / static_cast<double>(k);
            sum += term;
        }
        return sum;
    }
    return (std::exp(z) - 1.0) / z;
}

// per-step constants for a fixed h
struct StepConsts {
    double h = 0.0;
    double decay = 0.0;  // e^{-kappa h / 2}
    Complex e_omega, e_kappa, e_both;  // int_0^h e^{-lambda u} du for lambda = i omega, kappa/2, kappa/2 + i omega

    StepConsts(const HeterodyneParams& p, double h_) : h(h_) {
        const double l = 0.5 * p.kappa;
        decay = std::exp(-l * h);
        e_omega = h * phi1(-I * p.omega * h);
        e_kappa = h * phi1(Complex(-l * h, 0.0));
        e_both = h * phi1(-(l + I * p.omega) * h);
    }
};

void step_with(const HeterodyneParams& p, const StepConsts& k, CoherentSSE& s, double dzeta) {
    const double ainf = 2.0 * p.gamma_drive / p.kappa;
    const Complex c0 = s.alpha - ainf;
    const Complex rot = std::polar(1.0, -p.phase(s.t));
    const Complex xi = (std::sqrt(p.kappa) / p.B) * (dzeta / k.h) * rot;
    s.beta += -p.gamma_drive * (ainf * k.h + c0 * k.e_kappa) + xi * (ainf * k.e_omega + c0 * k.e_both);
    s.T += xi * k.e_omega;
    s.S += xi * std::exp(-0.5 * p.kappa * s.t) * k.e_both;
    s.alpha = ainf + c0 * k.decay;
    s.t += k.h;
}

int pick_nmax(const HeterodyneParams& p, Complex alpha0, int nmax) {
    if (nmax > 0) return nmax;
    return default_nmax(std::max(p.nbar(), std::norm(alpha0)));
}

// out += [Gamma (c^dag - c) - kappa/2 N] in
void add_generator(const HeterodyneParams& p, const Complex* in, Complex* out, int nmax) {
    add_create(in, out, nmax, p.gamma_drive);
    add_annihilate(in, out, nmax, -p.gamma_drive);
    add_number(in, out, nmax, -0.5 * p.kappa);
}

}  // namespace

HeterodyneParams HeterodyneParams::from_nbar(double kappa, double nbar, double B, double omega_over_kappa) {
    if (!(kappa > 0) || nbar < 0 || !(B > 0) || omega_over_kappa < 0)
        throw std::invalid_argument("HeterodyneParams: kappa, B must be positive and nbar, omega >= 0");
    HeterodyneParams p;
    p.kappa = kappa;
    p.gamma_drive = 0.5 * kappa * std::sqrt(nbar);
    p.B = B;
    p.omega = omega_over_kappa * kappa;
    return p;
}

double HeterodyneParams::nbar() const { return std::pow(alpha_steady(), 2); }
double HeterodyneParams::alpha_steady() const { return 2.0 * gamma_drive / kappa; }

void HeterodyneParams::check_step(double dt) const {
    const double slack = 1.0 + 1e-12;
    double limit = 0.01 / kappa;
    if (omega > 0) limit = std::min(limit, 0.05 / omega);
    if (!(dt > 0) || dt > limit * slack)
        throw std::invalid_argument("heterodyne: step-size violation, dt = " + std::to_string(dt) +
                                    " exceeds " + std::to_string(limit));
}

NoisePath make_noise_path(const HeterodyneParams& p, double dt, std::size_t nsteps, RngStream stream) {
    p.check_step(dt);
    NoisePath path;
    path.dt = dt;
    path.B = p.B;
    path.increments = gaussian_increments(stream, nsteps, p.B * p.B * dt);
    return path;
}

NoisePath zero_path(const HeterodyneParams& p, double dt, std::size_t nsteps) {
    p.check_step(dt);
    NoisePath path;
    path.dt = dt;
    path.B = p.B;
    path.increments.assign(nsteps, 0.0);
    return path;
}

void coherent_step(const HeterodyneParams& p, CoherentSSE& s, double dzeta, double h) {
    step_with(p, StepConsts(p, h), s, dzeta);
}

CoherentSSE integrate_sse_coherent(const HeterodyneParams& p, const NoisePath& path, Complex alpha0, Complex beta0) {
    p.check_step(path.dt);
    const StepConsts k(p, path.dt);
    CoherentSSE s;
    s.alpha = alpha0;
    s.beta = beta0;
    for (double dz : path.increments) step_with(p, k, s, dz);
    return s;
}

FockSSE integrate_sse_fock(const HeterodyneParams& p, const NoisePath& path, const FockVector& psi0) {
    p.check_step(path.dt);
    if (psi0.levels != 1) throw std::invalid_argument("integrate_sse_fock: single-mode state expected");
    const StepConsts k(p, path.dt);
    const int nmax = psi0.nmax;
    FockSSE s;
    s.psi = psi0;
    CVec d(psi0.dim());
    std::size_t n = 0;
    for (double dz : path.increments) {
        const Complex rot = std::polar(1.0, -p.phase(s.t));
        const Complex xi = (std::sqrt(p.kappa) / p.B) * (dz / k.h) * rot;
        const Complex dT = xi * k.e_omega;
        d.setZero();
        add_generator(p, s.psi.amps.data(), d.data(), nmax);
        d *= k.h;
        add_annihilate(s.psi.amps.data(), d.data(), nmax, dT);
        s.psi.amps += d;
        s.T += dT;
        s.S += xi * std::exp(-0.5 * p.kappa * s.t) * k.e_both;
        s.t += k.h;
        if (++n % 1000 == 0 || n == path.increments.size()) {
            const double nn = s.psi.norm2();
            if (!std::isfinite(nn)) throw NumericalError("integrate_sse_fock: state diverged");
            if (s.psi.edge_weight() > default_tail_tolerance * nn)
                throw TruncationOverflow("integrate_sse_fock: population reached nmax = " + std::to_string(nmax));
        }
    }
    return s;
}

ClosedForm closed_form(const HeterodyneParams& p, Complex alpha0, double t, Complex T, Complex S) {
    const double a = 2.0 * p.gamma_drive / p.kappa;
    const double e = std::exp(-0.5 * p.kappa * t);
    ClosedForm c;
    c.alpha = a * (1.0 - e) + alpha0 * e;
    c.beta = -a * (p.gamma_drive * t - T) + a * (alpha0 - a) * (e - 1.0) + (alpha0 - a) * S;
    return c;
}

CVec coherent_amplitudes(Complex alpha, Complex beta, int nmax) {
    CVec v(nmax + 1);
    v[0] = std::exp(beta);
    for (int n = 1; n <= nmax; ++n) v[n] = v[n - 1] * alpha / std::sqrt(static_cast<double>(n));
    return v;
}

double ray_fidelity(const CVec& a, const CVec& b) {
    const double na = a.squaredNorm(), nb = b.squaredNorm();
    if (!(na > 0) || !(nb > 0)) return 0.0;
    return std::norm(a.dot(b)) / (na * nb);
}

// ---------------------------------------------------------------------------

std::vector<CurrentSample> current_ensemble(const HeterodyneParams& p, const EnsembleOptions& o) {
    p.check_step(o.dt);
    if (!(o.t > 0)) throw std::invalid_argument("current_ensemble: t must be positive");
    const auto nsteps = static_cast<std::size_t>(std::llround(o.t / o.dt));
    if (nsteps == 0) throw std::invalid_argument("current_ensemble: t shorter than one step");
    const double h = o.t / static_cast<double>(nsteps);
    const StepConsts k(p, h);
    const double sk = std::sqrt(p.kappa);
    const double sd = p.B * std::sqrt(h);
    const double ainf = p.alpha_steady();
    const double log_norm0 = 2.0 * o.beta0.real() + std::norm(o.alpha0);
    std::vector<CurrentSample> out(o.npaths);
    parallel_for(o.npaths, [&](std::size_t i) {
        Philox rng({o.seed, i});
        CoherentSSE s;
        s.alpha = o.alpha0;
        s.beta = o.beta0;
        double log_ratio = 0.0;  // log P[zeta] - log Q[zeta]
        for (std::size_t n = 0; n < nsteps; ++n) {
            const double noise = sd * rng.normal();
            double dz = noise;
            if (o.importance) {
                // record mean given the current field, 2 B sqrt(kappa) Re(alpha e^{-i phi}), averaged over the step
                const Complex c0 = s.alpha - ainf;
                const Complex avg = std::polar(1.0, -p.phase(s.t)) * (ainf * k.e_omega + c0 * k.e_both) / h;
                const double mu = 2.0 * p.B * sk * avg.real();
                dz += mu * h;
                log_ratio += (noise * noise - dz * dz) / (2.0 * sd * sd);
            }
            step_with(p, k, s, dz);
        }
        CurrentSample cs;
        cs.current_k = s.T / o.t;
        cs.current_B = cs.current_k / sk;
        cs.log_weight = s.log_norm2() - log_norm0 + log_ratio;
        out[i] = cs;
    });
    return out;
}

CurrentStats current_statistics(const std::vector<CurrentSample>& samples, double bin_width) {
    CurrentStats st;
    st.n = samples.size();
    if (samples.empty()) return st;
    if (!(bin_width > 0)) throw std::invalid_argument("current_statistics: bin width must be positive");
    double lmax = -std::numeric_limits<double>::infinity(), lmin = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        lmax = std::max(lmax, s.log_weight);
        lmin = std::min(lmin, s.log_weight);
    }
    st.log_weight_spread = lmax - lmin;
    std::vector<double> w(samples.size()), x(samples.size());
    double sw = 0.0, sw2 = 0.0, amax = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        w[i] = std::exp(samples[i].log_weight - lmax);
        x[i] = std::abs(samples[i].current_B);
        sw += w[i];
        sw2 += w[i] * w[i];
        amax = std::max(amax, x[i]);
        st.raw_mean += samples[i].current_B;
        st.raw_var += std::norm(samples[i].current_B);
    }
    const double n = static_cast<double>(samples.size());
    st.raw_mean /= n;
    st.raw_var /= n;
    st.effective_samples = sw * sw / sw2;
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m += w[i] * x[i];
    m /= sw;
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) v += w[i] * (x[i] - m) * (x[i] - m);
    v /= sw;
    st.weighted_mean_abs = m;
    st.weighted_std_abs = std::sqrt(v);
    st.relative_width = m > 0 ? st.weighted_std_abs / m : 0.0;

    // weighted histogram, 5-bin moving average, then the fullest bin
    const auto nb = static_cast<std::size_t>(amax / bin_width) + 1;
    std::vector<double> hist(nb, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        hist[std::min(nb - 1, static_cast<std::size_t>(x[i] / bin_width))] += w[i];
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t b = 0; b < nb; ++b) {
        double acc = 0.0;
        for (std::size_t j = (b >= 2 ? b - 2 : 0); j <= std::min(nb - 1, b + 2); ++j) acc += hist[j];
        if (acc > best_val) {
            best_val = acc;
            best = b;
        }
    }
    st.peak_abs = (static_cast<double>(best) + 0.5) * bin_width;
    return st;
}

// ---------------------------------------------------------------------------

NullReport null_correspondence(const HeterodyneParams& p, Complex alpha0, double tmax, int npoints, int nmax) {
    if (npoints < 2 || !(tmax > 0)) throw std::invalid_argument("null_correspondence: need tmax > 0, npoints >= 2");
    NullReport rep;
    nmax = pick_nmax(p, alpha0, nmax);
    rep.nmax = nmax;
    const double G = p.gamma_drive;
    const double ainf = 2.0 * G / p.kappa;
    const double Imax = 2.0 * G;  // maximum-likelihood current
    const Complex beta0 = -0.5 * std::norm(alpha0);

    // -i H_eff with kappa gamma = 2 Gamma: Gamma (c^dag - c) - kappa/2 N - 2 Gamma^2 / kappa + 2 Gamma c
    const double shift = -0.5 * p.kappa * ainf * ainf;
    OdeRhs rhs = [&](double, const CVec& y, CVec& dy) {
        dy = shift * y;
        add_generator(p, y.data(), dy.data(), nmax);
        add_annihilate(y.data(), dy.data(), nmax, p.kappa * ainf);
    };
    std::vector<double> times(npoints);
    for (int i = 0; i < npoints; ++i) times[i] = tmax * i / (npoints - 1);
    const CVec y0 = coherent_amplitudes(alpha0, beta0, nmax);
    OdeOptions o{1e-12, 1e-15};
    const auto ys = integrate_ode_at(rhs, y0, 0.0, times, o);

    for (int i = 0; i < npoints; ++i) {
        const double t = times[i];
        const double e = std::exp(-0.5 * p.kappa * t);
        const Complex c0 = alpha0 - ainf;
        // SSE on the constant record xi = 2 Gamma: alpha' = Gamma - kappa alpha / 2, beta' = (xi - Gamma) alpha
        const Complex alpha = ainf + c0 * e;
        const Complex beta = beta0 + (Imax - G) * (ainf * t + c0 * (2.0 / p.kappa) * (1.0 - e));
        const double rescale = -t * Imax * Imax / (2.0 * p.kappa);
        const CVec phi_sse = coherent_amplitudes(alpha, beta + rescale, nmax);
        rep.max_elementwise = std::max(rep.max_elementwise, (phi_sse - ys[i]).cwiseAbs().maxCoeff());
        const double norm_psi = std::exp(beta.real() + 0.5 * std::norm(alpha));
        const double lhs = norm_psi * std::exp(rescale);
        const double rhs_norm = ys[i].norm();
        rep.max_norm_factor = std::max(rep.max_norm_factor, std::abs(lhs - rhs_norm));
        rep.max_relative_norm_factor = std::max(rep.max_relative_norm_factor, std::abs(lhs - rhs_norm) / rhs_norm);
    }
    return rep;
}

GaugeReport gauge_equivalence(const HeterodyneParams& p, const NoisePath& path, Complex alpha0, int nmax) {
    if (std::abs(p.kappa - 1.0) > 1e-15 || std::abs(p.B - 1.0) > 1e-15)
        throw std::invalid_argument("gauge_equivalence: the drift form is stated for kappa = B = 1");
    p.check_step(path.dt);
    GaugeReport rep;
    nmax = pick_nmax(p, alpha0, nmax);
    rep.nmax = nmax;
    const double h = path.dt;
    const StepConsts k(p, h);

    CoherentSSE s;
    s.alpha = alpha0;
    s.beta = -0.5 * std::norm(alpha0);
    CVec chi = coherent_amplitudes(alpha0, s.beta, nmax);
    chi.normalize();

    OdeOptions o{1e-12, 1e-14};
    double zeta_rate = 0.0;
    OdeRhs rhs = [&](double t, const CVec& y, CVec& dy) {
        const Complex xi = zeta_rate * std::polar(1.0, -p.phase(t));
        // I = (chi, (c + c^dag) chi) / (chi, chi)
        Complex ac = 0.0;
        for (int n = 0; n < nmax; ++n) ac += std::conj(y[n]) * std::sqrt(n + 1.0) * y[n + 1];
        const double quad = 2.0 * ac.real() / y.squaredNorm();
        dy.setZero();
        add_generator(p, y.data(), dy.data(), nmax);
        add_annihilate(y.data(), dy.data(), nmax, xi + quad);
    };

    std::size_t n = 0;
    for (double dz : path.increments) {
        zeta_rate = dz / h;  // kappa = B = 1
        Dopri5 solver(rhs, chi, s.t, o);
        solver.advance_to(s.t + h);
        chi = solver.y();
        chi.normalize();
        step_with(p, k, s, dz);
        ++n;

        Complex ac = 0.0;
        for (int m = 0; m < nmax; ++m) ac += std::conj(chi[m]) * std::sqrt(m + 1.0) * chi[m + 1];
        const double quad_drift = 2.0 * ac.real();
        const double quad_free = 2.0 * s.alpha.real();  // <c + c^dag> on exp(alpha c^dag + beta)|0>
        rep.max_quadrature_diff = std::max(rep.max_quadrature_diff, std::abs(quad_drift - quad_free));
        rep.final_quadrature = quad_free;
        if (n % 100 == 0 || n == path.increments.size())
            rep.min_ray_fidelity = std::min(rep.min_ray_fidelity, ray_fidelity(chi, coherent_amplitudes(s.alpha, 0.0, nmax)));
    }
    return rep;
}

}  // namespace nextjump::heterodyne
