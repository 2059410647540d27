#include "nextjump/cavity.hpp"

#include <cmath>

namespace nextjump::cavity {

namespace {
const Complex I{0.0, 1.0};
}

CavityParams CavityParams::from_nbar(double kappa, double chi, double nbar, DriveTuning tuning) {
    if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
    if (!(nbar >= 0)) throw std::invalid_argument("nbar must be non-negative");
    CavityParams p;
    p.kappa = kappa;
    p.chi = chi;
    p.nbar = nbar;
    p.gamma_drive = 0.5 * kappa * std::sqrt(nbar);
    p.tuning = tuning;
    p.gamma_shift = std::sqrt(nbar);
    return p;
}

CoherentPoint resonant_trajectory(const CavityParams& p, double t) {
    const double k = p.kappa;
    const double e = std::exp(-0.5 * k * t);
    const double a = std::sqrt(p.nbar) * (1.0 - e);
    const double b = -0.5 * k * p.nbar * (t + (2.0 / k) * std::expm1(-0.5 * k * t));
    return {a, b};
}

CoherentPoint detuned_trajectory(const CavityParams& p, Complex alpha0, Complex beta0, double t) {
    const Complex lam = I * p.chi - 0.5 * p.kappa;
    const Complex gl = gamma_L_drive(p);
    // expm1 keeps (e^{lam t} - 1)/lam accurate for small t
    const Complex z = lam * t;
    const Complex em1 = std::abs(z) < 1e-5 ? z * (1.0 + z * (0.5 + z / 6.0)) : std::exp(z) - 1.0;
    const Complex alpha = gl + (alpha0 - gl) * (em1 + 1.0);
    const Complex beta = beta0 - p.gamma_drive * (gl * t + (alpha0 - gl) * em1 / lam);
    return {alpha, beta};
}

CoherentPoint detuned_trajectory(const CavityParams& p, Complex alpha0, double t) {
    return detuned_trajectory(p, alpha0, -0.5 * std::norm(alpha0), t);
}

double log_survival_W(const CoherentPoint& c) { return 2.0 * c.beta.real() + std::norm(c.alpha); }

double survival_W(const CoherentPoint& c) { return std::exp(log_survival_W(c)); }

double jump_density_D(const CoherentPoint& c, const CavityParams& p) {
    return p.kappa * std::norm(c.alpha) * survival_W(c);
}

double short_time_W(const CavityParams& p, double t) {
    return std::exp(-p.nbar * p.kappa * p.kappa * p.kappa * t * t * t / 12.0);
}

double mean_jump_time(const CavityParams& p) {
    return std::cbrt(3.0 / (p.kappa * p.gamma_drive * p.gamma_drive));
}

Complex gamma_L_drive(const CavityParams& p) { return p.gamma_drive / (0.5 * p.kappa - I * p.chi); }

Complex gamma_L_shifted(const CavityParams& p) {
    return I * std::sqrt(p.nbar) * p.kappa / (2.0 * p.chi + I * p.kappa);
}

FockRhs fock_rhs(const CavityParams& p, bool detuned) {
    const Complex diag = (detuned ? I * p.chi : Complex{0.0}) - 0.5 * p.kappa;
    const double g = p.gamma_drive;
    return [diag, g](double, const FockVector& in, FockVector& out) {
        out.amps.setZero();
        const int stride = in.nmax + 1;
        for (int l = 0; l < in.levels; ++l) {
            const Complex* x = in.amps.data() + l * stride;
            Complex* y = out.amps.data() + l * stride;
            add_number(x, y, in.nmax, diag);
            add_create(x, y, in.nmax, g);
            add_annihilate(x, y, in.nmax, -g);
        }
    };
}

FockVector evolve_fock_oracle(const CavityParams& p, const FockVector& state0, double t, bool detuned,
                              const OdeOptions& opts) {
    FockVector r = integrate_ode(fock_rhs(p, detuned), state0, 0.0, t, opts);
    // relative to the surviving norm, which can be far below one
    if (!(r.edge_weight() <= default_tail_tolerance * r.norm2()))
        throw TruncationOverflow("evolve_fock_oracle: truncation edge populated, raise nmax");
    return r;
}

double coherent_fidelity(const FockVector& psi, const CoherentPoint& c) {
    FockVector phi = FockVector::coherent(psi.levels, psi.nmax, 0, c.alpha, true);
    const Complex ov = phi.amps.dot(psi.amps);
    return std::norm(ov) / psi.norm2();
}

FockRhs shifted_rhs(const CavityParams& p, Complex g) {
    const double k = p.kappa;
    const double G = p.gamma_drive;
    const Complex cst = -0.5 * k * std::norm(g);
    const Complex cg = k * std::conj(g);
    return [=](double, const FockVector& in, FockVector& out) {
        out.amps = cst * in.amps;
        const int stride = in.nmax + 1;
        for (int l = 0; l < in.levels; ++l) {
            const Complex* x = in.amps.data() + l * stride;
            Complex* y = out.amps.data() + l * stride;
            add_number(x, y, in.nmax, -0.5 * k);
            add_create(x, y, in.nmax, G);
            add_annihilate(x, y, in.nmax, cg - G);
        }
    };
}

ShiftedBasisReport shifted_basis_check(const CavityParams& p, double rel_perturbation, double tmax) {
    ShiftedBasisReport rep;
    const double s = std::sqrt(p.nbar);
    const int nmax = default_nmax(p.nbar);
    const FockVector start = FockVector::coherent(1, nmax, 0, s, true);
    OdeOptions opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-13;

    std::vector<double> times;
    const int npts = 40;
    for (int i = 1; i <= npts; ++i) times.push_back(tmax * i / npts);

    auto run = [&](Complex g, const FockVector& init) {
        FockVector buf_in(init.levels, init.nmax), buf_out(init.levels, init.nmax);
        FockRhs f = shifted_rhs(p, g);
        OdeRhs r = [&](double t, const CVec& y, CVec& dy) {
            buf_in.amps = y;
            f(t, buf_in, buf_out);
            dy = buf_out.amps;
        };
        return integrate_ode_at(r, init.amps, 0.0, times, opts);
    };

    rep.gamma_ref = s;
    for (const auto& y : run(s, start)) rep.max_norm_drift = std::max(rep.max_norm_drift, std::abs(y.squaredNorm() - 1.0));

    const double gp = s * (1.0 + rel_perturbation);
    auto ys = run(gp, start);
    // least-squares slope of ln norm^2 through the origin (norm^2(0) = 1)
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        sxy += times[i] * std::log(ys[i].squaredNorm());
        sxx += times[i] * times[i];
    }
    rep.fitted_rate = -sxy / sxx;
    rep.predicted_rate = p.kappa * (gp - s) * (gp - s);

    // g = 0 from vacuum recovers the resonant survival probability
    const FockVector vac = FockVector::basis(1, nmax, 0, 0);
    auto y0 = run(0.0, vac);
    for (std::size_t i = 0; i < times.size(); ++i) {
        double w = survival_W(resonant_trajectory(p, times[i]));
        rep.unshifted_W_error = std::max(rep.unshifted_W_error, std::abs(y0[i].squaredNorm() - w) / w);
    }
    return rep;
}

}  // namespace nextjump::cavity
