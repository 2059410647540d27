#include "nextjump/validation.hpp"

#include "nextjump/atom3.hpp"
#include "nextjump/cavity.hpp"
#include "nextjump/heterodyne.hpp"
#include "nextjump/parallel.hpp"
#include "nextjump/scenarios.hpp"
#include "nextjump/trajectories.hpp"
#include "nextjump/transmon.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace nextjump::validation {

namespace {

// pinned tolerances
constexpr double tol_w_oracle = 1e-6;
constexpr double tol_w_spot = 1e-4;
constexpr double w_spot_target = 0.26057;
constexpr double tol_cubic = 0.02;
constexpr double tol_ks = 0.005;
constexpr double telegraph_sigmas = 3.0;
constexpr double tol_tail = 0.10;
constexpr double tol_beta_spread = 0.05;
constexpr double beta_drive_target = 7.97885;
constexpr double tol_beta_drive = 5e-6;
constexpr double tol_dark_fit = 0.10;
constexpr double tol_multiscale = 0.05;
constexpr double tol_multiscale_fock = 1e-3;
constexpr double tol_peak = 0.03;
constexpr double tol_null = 1e-8;
constexpr double tol_null_norm = 1e-10;
constexpr double tol_gauge = 1e-8;
constexpr double tol_y_freq = 0.05;
constexpr double eps_dr_level = 1e-3;

using clock_type = std::chrono::steady_clock;

std::string fmt(const char* f, double a) {
    char b[128];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

struct Detail {
    std::ostringstream os;
    template <class T>
    Detail& add(const std::string& k, const T& v) {
        if (os.tellp() > 0) os << "; ";
        os << k << "=" << v;
        return *this;
    }
    std::string str() const { return os.str(); }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

bool full(const Options& o) { return o.level == Level::full; }

CriterionResult make_result(int id, const std::string& title) {
    CriterionResult r;
    r.id = id;
    r.title = title;
    return r;
}

// ---------------------------------------------------------------------------

CriterionResult c1_closed_form_w(const Options&) {
    CriterionResult r = make_result(1, "closed-form W vs Fock oracle");
    const auto t0 = clock_type::now();
    const auto p = cavity::CavityParams::from_nbar(1.0, 0.0, 4.0);
    const int nmax = default_nmax(p.nbar);
    double worst = 0.0;
    FockVector psi = FockVector::basis(1, nmax, 0, 0);
    OdeOptions opts{1e-12, 1e-14};
    double t_prev = 0.0;
    for (int i = 1; i <= 60; ++i) {
        const double t = 0.1 * i;
        psi = cavity::evolve_fock_oracle(p, psi, t - t_prev, false, opts);
        t_prev = t;
        const double w_fock = psi.norm2();
        const double w_closed = cavity::survival_W(cavity::resonant_trajectory(p, t));
        worst = std::max(worst, rel(w_fock, w_closed));
    }
    const double w2 = cavity::survival_W(cavity::resonant_trajectory(p, 2.0));
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "max relative |W_fock - W_closed| on kappa t in [0,6]";
    r.measured = worst;
    r.tolerance = tol_w_oracle;
    const bool spot_ok = std::abs(w2 - w_spot_target) <= tol_w_spot;
    r.pass = worst < tol_w_oracle && spot_ok && r.seconds < 1.0;
    r.detail = Detail()
                   .add("W(2)", fmt("%.6f", w2))
                   .add("W(2)-0.26057", fmt("%.2e", w2 - w_spot_target))
                   .add("spot_tol", tol_w_spot)
                   .add("runtime_s", fmt("%.3f", r.seconds))
                   .str();
    return r;
}

CriterionResult c2_cubic(const Options&) {
    CriterionResult r = make_result(2, "cubic short-time law");
    const auto t0 = clock_type::now();
    double worst = 0.0;
    Detail d;
    for (double nbar : {4.0, 100.0}) {
        const auto p = cavity::CavityParams::from_nbar(1.0, 0.0, nbar);
        const int n = 41;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < n; ++i) {
            const double t = 0.01 + 0.04 * i / (n - 1);
            const double x = t * t * t;
            const double y = cavity::log_survival_W(cavity::resonant_trajectory(p, t));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double target = -nbar / 12.0;
        worst = std::max(worst, rel(slope, target));
        d.add("slope(nbar=" + fmt("%g", nbar) + ")", fmt("%.5f", slope)).add("target", fmt("%.5f", target));
    }
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "max relative slope deviation";
    r.measured = worst;
    r.tolerance = tol_cubic;
    r.pass = worst < tol_cubic && r.seconds < 1.0;
    r.detail = d.str();
    return r;
}

CriterionResult c3_jump_sampling(const Options& o) {
    CriterionResult r = make_result(3, "next-jump sampling vs 1 - W");
    const auto t0 = clock_type::now();
    const auto p = cavity::CavityParams::from_nbar(1.0, 0.0, 4.0);
    const auto m = trajectories::cavity_model(p, 0);
    const std::size_t n = 100000;
    auto times = trajectories::sample_first_jumps(m, n, 60.0, o.seed + 3);
    const auto missing = std::count_if(times.begin(), times.end(), [](double t) { return std::isnan(t); });
    std::sort(times.begin(), times.end());
    // one-sample Kolmogorov-Smirnov distance against the exact CDF
    double D = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double F = -std::expm1(cavity::log_survival_W(cavity::resonant_trajectory(p, times[i])));
        D = std::max({D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "KS distance (1e5 samples, exact CDF)";
    r.measured = D;
    r.tolerance = tol_ks;
    r.pass = D < tol_ks && missing == 0 && r.seconds < 60.0;
    r.detail = Detail().add("samples", n).add("no_jump", missing).add("runtime_s", fmt("%.2f", r.seconds)).str();
    return r;
}

// dark fraction of the renewal process with inter-jump survival W: [theta W(theta) + int_theta^inf W] / int_0^inf W
double renewal_dark_fraction(const atom3::Atom3Params& p, double theta, double tail_rate) {
    const double h = 0.01, tend = 1500.0;
    const auto n = static_cast<std::size_t>(tend / h);
    std::vector<double> times(n + 1);
    for (std::size_t i = 0; i <= n; ++i) times[i] = h * static_cast<double>(i);
    const auto s = atom3::evolve_null_series(p, atom3::Atom3State::reset(), times, OdeOptions{1e-11, 1e-13});
    double total = 0.0, beyond = 0.0, w_theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double seg = 0.5 * h * (s[i].W + s[i + 1].W);
        total += seg;
        if (times[i] >= theta) beyond += seg;
        if (times[i] <= theta) w_theta = s[i].W;
    }
    const double tail = s[n].W / tail_rate;
    return (theta * w_theta + beyond + tail) / (total + tail);
}

CriterionResult c4_telegraph(const Options& o) {
    CriterionResult r = make_result(4, "telegraph dark fraction and tail rate");
    const auto t0 = clock_type::now();
    const auto p = atom3::Atom3Params::from_epsilon(0.05, 1.0, 10.0, 0.0);
    const auto m = trajectories::atom3_model(p);
    const double lifetimes = full(o) ? 1e6 : 2e5;
    const std::size_t ntraj = 50;
    const double tmax = lifetimes / p.beta1 / ntraj;
    const double theta = 20.0 / p.beta1;
    std::vector<trajectories::TelegraphStats> st(ntraj);
    parallel_for(ntraj, [&](std::size_t i) {
        st[i] = trajectories::telegraph_stats(trajectories::run_trajectory(m, tmax, {o.seed + 4, i}), theta, 0);
    });
    double dark = 0, total = 0, excess = 0;
    std::size_t n_dark = 0, n_complete = 0, strong = 0;
    for (const auto& s : st) {
        dark += s.dark_time;
        total += s.total_time;
        n_dark += s.n_dark;
        n_complete += s.n_dark_complete;
        if (!s.branch_counts.empty()) strong += s.branch_counts[0];
        for (double L : s.dark_durations) excess += L - theta;
    }
    const double pd = dark / total;
    const double sigma = std::sqrt(pd * (1 - pd) / static_cast<double>(n_dark));
    const double tail = static_cast<double>(n_complete) / excess;
    const double bl = atom3::beta_ell(p);
    const double tail_target = 2.0 * bl;  // norm decay rate |C|^2 ~ e^{-2 beta_ell t}
    const double pd_renewal = renewal_dark_fraction(p, theta, tail_target);
    const double z_third = std::abs(pd - 1.0 / 3.0) / sigma;
    const double z_renewal = std::abs(pd - pd_renewal) / sigma;
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "|p_D - 1/3| / sigma_binomial";
    r.measured = z_third;
    r.tolerance = telegraph_sigmas;
    r.pass = z_third < telegraph_sigmas && z_renewal < telegraph_sigmas && rel(tail, tail_target) < tol_tail;
    r.detail = Detail()
                   .add("p_D", fmt("%.4f", pd))
                   .add("sigma", fmt("%.4f", sigma))
                   .add("p_D_renewal(theta)", fmt("%.4f", pd_renewal))
                   .add("z_renewal", fmt("%.2f", z_renewal))
                   .add("n_dark", n_dark)
                   .add("branch_strong", fmt("%.4f", n_complete ? double(strong) / n_complete : 0.0))
                   .add("tail_rate", fmt("%.5f", tail))
                   .add("2*beta_ell", fmt("%.5f", tail_target))
                   .add("tail_rel_dev", fmt("%.3f", rel(tail, tail_target)))
                   .add("tail_vs_beta_ell", fmt("%.3f", tail / bl))
                   .add("lifetimes", lifetimes)
                   .add("theta", theta)
                   .str();
    return r;
}

CriterionResult c5_scenario_a(const Options&) {
    CriterionResult r = make_result(5, "scenario-a log dark probability");
    const auto t0 = clock_type::now();
    atom3::Atom3Params p;
    p.beta1 = 1e9;
    p.omega1 = 1e10;
    p.omega2 = 0.0;
    const double logw = atom3::scenario_a_log_dark_probability(p, 1.0);
    // the 1/2 comes from the unitary average of |c1|^2 = sin^2(|Omega1| t)
    const int n = 200000;
    const double period = pi / std::abs(p.omega1);
    double avg = 0.0;
    for (int i = 0; i < n; ++i) avg += std::norm(atom3::unitary_c1(p, period * 50.0 * (i + 0.5) / n));
    avg /= n;
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "|log W + 5e8|";
    r.measured = std::abs(logw + 5e8);
    r.tolerance = 0.0;
    r.pass = logw == -5e8 && std::abs(avg - 0.5) < 1e-6;
    r.detail = Detail().add("logW", fmt("%.10g", logw)).add("unitary_avg_|c1|^2", fmt("%.9f", avg)).str();
    return r;
}

CriterionResult c6_beta_b(const Options&) {
    CriterionResult r = make_result(6, "beta_B triple agreement");
    const auto t0 = clock_type::now();
    Detail d;
    double worst = 0.0;
    double drive = 0.0;
    for (double chi : {5.0, 20.0}) {
        transmon::TransmonParams p;
        p.kappa = 1.0;
        p.chi = chi;
        p.nbar = 100.0;
        const double q = transmon::beta_B(p, transmon::BetaMethod::quadrature);
        const double s = transmon::beta_B(p, transmon::BetaMethod::steepest_descent);
        drive = transmon::beta_B(p, transmon::BetaMethod::drive_formula);
        const double lo = std::min({q, s, drive}), hi = std::max({q, s, drive});
        worst = std::max(worst, (hi - lo) / lo);
        d.add("chi=" + fmt("%g", chi) + " quad", fmt("%.5f", q)).add("steep", fmt("%.5f", s)).add("drive", fmt("%.5f", drive));
    }
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "max relative spread (max-min)/min";
    r.measured = worst;
    r.tolerance = tol_beta_spread;
    r.pass = worst < tol_beta_spread && std::abs(drive - beta_drive_target) < tol_beta_drive && r.seconds < 1.0;
    d.add("runtime_s", fmt("%.3f", r.seconds));
    r.detail = d.str();
    return r;
}

CriterionResult c7_dark_spectrum(const Options& o) {
    CriterionResult r = make_result(7, "dark-period spectrum fit");
    const auto t0 = clock_type::now();
    transmon::TransmonParams p;
    p.kappa = 1.0;
    p.chi = 20.0;
    p.nbar = 100.0;
    p.omega_b = 0.1 * transmon::beta_B(p, transmon::BetaMethod::drive_formula);
    p.omega_d = 0.01 * p.omega_b;
    const int nmax = full(o) ? 200 : 160;
    const auto fit = transmon::fit_dark_rate(p, nmax, 1.0, transmon::BetaMethod::quadrature);
    const auto alt = transmon::dark_eigenvalues(p, transmon::BetaMethod::drive_formula);
    const double dev = rel(fit.fitted_rate, fit.predicted_rate);
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "relative |fit - 2 Re iE_-|";
    r.measured = dev;
    r.tolerance = tol_dark_fit;
    r.pass = dev < tol_dark_fit && r.seconds < 300.0;
    r.detail = Detail()
                   .add("fitted", fmt("%.5e", fit.fitted_rate))
                   .add("predicted(quadrature)", fmt("%.5e", fit.predicted_rate))
                   .add("predicted(drive_formula)", fmt("%.5e", 2.0 * alt.ie_minus.real()))
                   .add("window", fmt("[%.1f", fit.t_lo) + fmt(", %.1f]", fit.t_hi))
                   .add("nmax", nmax)
                   .add("edge_weight", fmt("%.1e", fit.edge_weight))
                   .add("runtime_s", fmt("%.1f", r.seconds))
                   .str();
    return r;
}

CriterionResult c8_multiscale(const Options& o) {
    CriterionResult r = make_result(8, "multiscale Volterra rate");
    const auto t0 = clock_type::now();
    transmon::TransmonParams p;
    p.kappa = 1.0;
    p.chi = 20.0;
    p.nbar = 100.0;
    p.omega_b = 0.1;
    const auto v = transmon::multiscale_volterra(p, 1200.0, 0.002, false);
    const double g = transmon::slow_rate_gamma(p, transmon::BetaMethod::drive_formula);
    const double u = transmon::unshifted_rabi_decay(p);
    const double dev_g = rel(v.fitted_rate, g);
    const double dev_u = rel(v.fitted_rate, u);
    // ground truth: two-level Fock model in the shifted frame on a common grid
    const double dt_f = 1.0;
    const int nsteps = full(o) ? 400 : 200;
    const auto cf = transmon::two_level_cg0(p, dt_f, nsteps, 160, transmon::Frame::shifted);
    const auto stride = static_cast<std::size_t>(std::llround(dt_f / v.dt));
    double fock_dev = 0.0;
    for (int k = 1; k <= nsteps; ++k) {
        const double cv = v.c[static_cast<std::size_t>(k) * stride];
        fock_dev = std::max(fock_dev, std::abs(cv - std::abs(cf[k])) / std::abs(cf[k]));
    }
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "relative |rate - gamma|";
    r.measured = dev_g;
    r.tolerance = tol_multiscale;
    r.pass = dev_g < tol_multiscale && dev_u < tol_multiscale && fock_dev < tol_multiscale_fock;
    r.detail = Detail()
                   .add("fitted", fmt("%.5e", v.fitted_rate))
                   .add("gamma", fmt("%.5e", g))
                   .add("unshifted_decay", fmt("%.5e", u))
                   .add("dev_unshifted", fmt("%.4f", dev_u))
                   .add("max_rel_dev_vs_fock", fmt("%.2e", fock_dev))
                   .add("monotone", v.monotone ? "yes" : "no")
                   .str();
    return r;
}

CriterionResult c9_monotone(const Options&) {
    CriterionResult r = make_result(9, "norm monotonicity across regimes");
    const auto t0 = clock_type::now();
    std::size_t points = 0, violations = 0;
    double worst_positive = -std::numeric_limits<double>::infinity();
    double at_zero = 0.0;
    for (double nbar : {25.0, 100.0, 400.0})
        for (double chi : {20.0, 100.0})
            for (double omega : {0.05, 0.1, 0.2}) {
                transmon::TransmonParams p;
                p.kappa = 1.0;
                p.chi = chi;
                p.nbar = nbar;
                p.omega_b = omega;
                const double g = transmon::slow_rate_gamma(p, transmon::BetaMethod::drive_formula);
                const double tmax = 5.0 / g;
                const int n = 400;
                for (int k = 0; k <= n; ++k) {
                    const double x = static_cast<double>(k) / n;
                    const double t = tmax * x * x;
                    const double d = transmon::norm_evolution_multiscale(p, t).dnorm_dt;
                    ++points;
                    if (k == 0) {
                        at_zero = std::max(at_zero, std::abs(d));
                        if (d != 0.0) ++violations;
                    } else {
                        worst_positive = std::max(worst_positive, d);
                        if (!(d < 0.0)) ++violations;
                    }
                }
            }
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "grid points violating d/dt norm < 0 (t > 0), = 0 (t = 0)";
    r.measured = static_cast<double>(violations);
    r.tolerance = 0.0;
    r.pass = violations == 0;
    r.detail = Detail()
                   .add("points", points)
                   .add("max_dnorm_t>0", fmt("%.3e", worst_positive))
                   .add("|dnorm(0)|", fmt("%.1e", at_zero))
                   .str();
    return r;
}

CriterionResult c10_heterodyne_peak(const Options& o) {
    CriterionResult r = make_result(10, "heterodyne current peak");
    const auto t0 = clock_type::now();
    const auto p = heterodyne::HeterodyneParams::from_nbar(1.0, 100.0, 1.0, 50.0);
    heterodyne::EnsembleOptions e;
    e.t = 20.0;
    e.dt = 1e-3;
    e.npaths = full(o) ? 10000 : 2000;
    e.seed = o.seed + 10;
    e.alpha0 = p.alpha_steady();
    e.beta0 = -0.5 * p.nbar();
    const auto st = heterodyne::current_statistics(heterodyne::current_ensemble(p, e));
    const double target = std::sqrt(p.kappa * p.nbar());
    const double dev = rel(st.peak_abs, target);
    // alpha does not depend on the record
    const auto pa = heterodyne::make_noise_path(p, 1e-3, 5000, {o.seed + 10, 1u << 20});
    const auto pb = heterodyne::make_noise_path(p, 1e-3, 5000, {o.seed + 11, 1u << 20});
    const auto sa = heterodyne::integrate_sse_coherent(p, pa, 0.0);
    const auto sb = heterodyne::integrate_sse_coherent(p, pb, 0.0);
    const bool alpha_exact = sa.alpha == sb.alpha && sa.beta != sb.beta;
    const auto cf = heterodyne::closed_form(p, 0.0, sa.t, sa.T, sa.S);
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "relative |peak |I/B| - sqrt(kappa nbar)|";
    r.measured = dev;
    r.tolerance = tol_peak;
    r.pass = dev < tol_peak && alpha_exact;
    r.detail = Detail()
                   .add("peak", fmt("%.4f", st.peak_abs))
                   .add("weighted_mean", fmt("%.4f", st.weighted_mean_abs))
                   .add("weighted_std", fmt("%.4f", st.weighted_std_abs))
                   .add("paths", e.npaths)
                   .add("ess", fmt("%.1f", st.effective_samples))
                   .add("alpha_path_independent", alpha_exact ? "exact" : "NO")
                   .add("closed_form_alpha_diff", fmt("%.1e", std::abs(cf.alpha - sa.alpha)))
                   .str();
    return r;
}

CriterionResult c11_null(const Options&) {
    CriterionResult r = make_result(11, "null correspondence");
    const auto t0 = clock_type::now();
    const auto p = heterodyne::HeterodyneParams::from_nbar(1.0, 4.0, 1.0, 50.0);
    const auto a = heterodyne::null_correspondence(p, 0.0, 5.0);
    const auto s = heterodyne::null_correspondence(p, p.alpha_steady(), 5.0);
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "max elementwise |phi_sse - phi_heff|";
    r.measured = std::max(a.max_elementwise, s.max_elementwise);
    r.tolerance = tol_null;
    r.pass = r.measured < tol_null && a.max_norm_factor < tol_null_norm && s.max_norm_factor < tol_null_norm;
    r.detail = Detail()
                   .add("vacuum_start", fmt("%.2e", a.max_elementwise))
                   .add("steady_start", fmt("%.2e", s.max_elementwise))
                   .add("norm_factor", fmt("%.2e", std::max(a.max_norm_factor, s.max_norm_factor)))
                   .add("nmax", a.nmax)
                   .str();
    return r;
}

CriterionResult c12_gauge(const Options& o) {
    CriterionResult r = make_result(12, "gauge equivalence of SSE forms");
    const auto t0 = clock_type::now();
    const auto p = heterodyne::HeterodyneParams::from_nbar(1.0, 4.0, 1.0, 50.0);
    const auto path = heterodyne::make_noise_path(p, 1e-3, 3000, {o.seed + 12, 0});
    const auto g = heterodyne::gauge_equivalence(p, path, 0.0);
    const auto z = heterodyne::gauge_equivalence(p, heterodyne::zero_path(p, 1e-3, 3000), 0.0);
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "max |I_drift - I_free| on a random record";
    r.measured = g.max_quadrature_diff;
    r.tolerance = tol_gauge;
    r.pass = g.max_quadrature_diff < tol_gauge && z.max_quadrature_diff < tol_gauge &&
             1.0 - g.min_ray_fidelity < tol_gauge;
    r.detail = Detail()
                   .add("zero_record", fmt("%.2e", z.max_quadrature_diff))
                   .add("ray_infidelity", fmt("%.2e", 1.0 - g.min_ray_fidelity))
                   .add("final_quadrature", fmt("%.5f", g.final_quadrature))
                   .str();
    return r;
}

CriterionResult c13_figure1(const Options& o) {
    CriterionResult r = make_result(13, "readout-curve shape properties");
    const auto t0 = clock_type::now();
    readout::Figure1Defaults d;
    const auto curves = readout::figure1_dataset(d, o.erfc_fn);
    const auto pj = cavity::CavityParams::from_nbar(1.0, 20.0, 100.0);
    const auto pd = cavity::CavityParams::from_nbar(1.0, 0.5, 100.0);

    bool dr_monotone = true, dr_range = true, dr_small = true;
    for (std::size_t i = 0; i < curves.tau.size(); ++i) {
        const double e = curves.eps_dispersive[i];
        if (!(e >= 0.0 && e <= 1.0)) dr_range = false;
        if (i > 0) {
            const double prev = curves.eps_dispersive[i - 1];
            if (e > prev || (prev > 0.0 && e == prev)) dr_monotone = false;
        }
        if (curves.tau[i] >= 2.0 && !(e < eps_dr_level)) dr_small = false;
    }
    const double crossing = readout::dispersive_crossing(pd, eps_dr_level, 50.0, o.erfc_fn);
    const bool crossing_ok = crossing > 1.0 && crossing < 2.0;

    const auto m = readout::next_jump_error_minimum(pj, d.tau_max);
    const bool interior = m.tau > 0.0 && m.tau < d.tau_max && m.chi_t > 1.0;
    const bool scaling = m.ratio > 0.1 && m.ratio < 10.0;
    const double eps_short = readout::error_next_jump(pj, 0.5 / pj.chi);  // chi t = 1/2
    const double eps_late = readout::error_next_jump(pj, 200.0);
    // large: above half the chance level and well above the minimum
    const bool short_large = eps_short > 0.25 && eps_short > 5.0 * m.eps;
    const double eps_end = readout::error_next_jump(pj, d.tau_max);
    const bool rises = eps_end > m.eps;
    const bool late_half = std::abs(eps_late - 0.5) < 1e-3;

    const double f = readout::y_oscillation_frequency(pj, 10.0);
    const double f_target = pj.chi / (2.0 * pi * pj.kappa);
    const double f_dev = rel(f, f_target);

    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "relative |FFT frequency of Y - chi/(2 pi kappa)|";
    r.measured = f_dev;
    r.tolerance = tol_y_freq;
    r.pass = dr_monotone && dr_range && dr_small && crossing_ok && interior && scaling && short_large && rises &&
             late_half && f_dev < tol_y_freq;
    r.detail = Detail()
                   .add("eps_dr_monotone", dr_monotone ? "yes" : "no")
                   .add("eps_dr_in_[0,1]", dr_range ? "yes" : "no")
                   .add("eps_dr<1e-3_for_tau>=2", dr_small ? "yes" : "no")
                   .add("eps_dr_crossing_tau", fmt("%.4f", crossing))
                   .add("eps_min", fmt("%.4f", m.eps))
                   .add("tau_min", fmt("%.4f", m.tau))
                   .add("chi_t_min", fmt("%.2f", m.chi_t))
                   .add("eps_min/(nbar^(1/3)/chi)^2", fmt("%.3f", m.ratio))
                   .add("eps(chi_t=0.5)", fmt("%.4f", eps_short))
                   .add("eps(tau_max)", fmt("%.4f", eps_end))
                   .add("eps(tau=200)", fmt("%.6f", eps_late))
                   .add("checks", std::string(interior ? "I" : "i") + (scaling ? "S" : "s") + (short_large ? "L" : "l") +
                                      (rises ? "R" : "r") + (late_half ? "H" : "h") + (crossing_ok ? "C" : "c"))
                   .add("Y_freq", fmt("%.4f", f))
                   .add("chi/(2pi)", fmt("%.4f", f_target))
                   .str();
    return r;
}

CriterionResult c14_lindblad(const Options& o) {
    CriterionResult r = make_result(14, "Lindblad consistency");
    const auto t0 = clock_type::now();
    const std::size_t ntraj = 10000;
    const auto pa = atom3::Atom3Params::from_epsilon(0.05, 1.0, 10.0, 0.1);
    const auto ra = trajectories::lindblad_consistency(trajectories::atom3_model(pa), ntraj, 4.0, o.seed + 14);
    const auto pc = cavity::CavityParams::from_nbar(1.0, 0.0, 2.0);
    const auto rc = trajectories::lindblad_consistency(trajectories::cavity_model(pc, 20), ntraj, 2.0, o.seed + 15);
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "max elementwise |rho_mc - rho_exact| (atom, cavity)";
    r.measured = std::max(ra.max_deviation, rc.max_deviation);
    r.tolerance = ra.bound;
    r.pass = ra.pass && rc.pass;
    r.detail = Detail()
                   .add("atom3", fmt("%.4f", ra.max_deviation))
                   .add("cavity(nmax=20)", fmt("%.4f", rc.max_deviation))
                   .add("bound", fmt("%.4f", ra.bound))
                   .add("trace_identity_atom3", fmt("%.1e", ra.trace_identity_error))
                   .add("trace_identity_cavity", fmt("%.1e", rc.trace_identity_error))
                   .str();
    return r;
}

// Sets NEXTJUMP_THREADS for the lifetime of the object.
class ThreadEnv {
public:
    explicit ThreadEnv(const std::string& v) {
        const char* old = std::getenv("NEXTJUMP_THREADS");
        had_ = old != nullptr;
        if (had_) old_ = old;
        ::setenv("NEXTJUMP_THREADS", v.c_str(), 1);
    }
    ~ThreadEnv() {
        if (had_) ::setenv("NEXTJUMP_THREADS", old_.c_str(), 1);
        else ::unsetenv("NEXTJUMP_THREADS");
    }

private:
    bool had_ = false;
    std::string old_;
};

CriterionResult c15_determinism(const Options& o) {
    CriterionResult r = make_result(15, "byte-identical reruns");
    const auto t0 = clock_type::now();
    std::vector<scenarios::RunConfig> configs;
    {
        scenarios::RunConfig c;
        c.scenario = "telegraph";
        c.params = {{"epsilon", 0.05}, {"ntraj", 200}, {"tmax", full(o) ? 500.0 : 100.0}};
        c.seed = 7;
        configs.push_back(c);
    }
    {
        scenarios::RunConfig c;
        c.scenario = "heterodyne-current";
        c.params = {{"npaths", 200}, {"t", 2.0}};
        c.seed = 7;
        configs.push_back(c);
    }
    {
        scenarios::RunConfig c;
        c.scenario = "heterodyne-sse";
        c.seed = 7;
        configs.push_back(c);
    }
    {
        scenarios::RunConfig c;
        c.scenario = "figure1";
        configs.push_back(c);
    }
    std::size_t mismatches = 0;
    Detail d;
    for (const auto& c : configs) {
        std::string a, b, e;
        {
            ThreadEnv env("1");
            a = scenarios::to_csv(scenarios::run_scenario(c).table);
        }
        {
            ThreadEnv env("4");
            b = scenarios::to_csv(scenarios::run_scenario(c).table);
            e = scenarios::to_csv(scenarios::run_scenario(c).table);
        }
        const bool same = a == b && b == e;
        if (!same) ++mismatches;
        d.add(c.scenario, same ? "identical" : "DIFFERENT").add("bytes", a.size());
    }
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    r.metric = "scenarios with differing CSV bytes (threads 1 vs 4, repeated)";
    r.measured = static_cast<double>(mismatches);
    r.tolerance = 0.0;
    r.pass = mismatches == 0;
    r.detail = d.str();
    return r;
}

}  // namespace

CriterionResult run_criterion(int id, const Options& o) {
    const auto t0 = clock_type::now();
    try {
        switch (id) {
            case 1: return c1_closed_form_w(o);
            case 2: return c2_cubic(o);
            case 3: return c3_jump_sampling(o);
            case 4: return c4_telegraph(o);
            case 5: return c5_scenario_a(o);
            case 6: return c6_beta_b(o);
            case 7: return c7_dark_spectrum(o);
            case 8: return c8_multiscale(o);
            case 9: return c9_monotone(o);
            case 10: return c10_heterodyne_peak(o);
            case 11: return c11_null(o);
            case 12: return c12_gauge(o);
            case 13: return c13_figure1(o);
            case 14: return c14_lindblad(o);
            case 15: return c15_determinism(o);
            default: break;
        }
    } catch (const std::exception& e) {
        CriterionResult r = make_result(id, "exception");
        r.pass = false;
        r.detail = e.what();
        r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
        return r;
    }
    throw std::invalid_argument("unknown criterion " + std::to_string(id));
}

std::vector<CriterionResult> run_all(const Options& o, const std::vector<int>& ids) {
    std::vector<CriterionResult> out;
    if (ids.empty()) {
        for (int i = 1; i <= criterion_count; ++i) out.push_back(run_criterion(i, o));
    } else {
        for (int i : ids) out.push_back(run_criterion(i, o));
    }
    return out;
}

std::string format_line(const CriterionResult& r) {
    char head[160];
    std::snprintf(head, sizeof head, "[%s] criterion %2d: %-38s measured=%.4g tol=%.3g (%.2fs)",
                  r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(), r.measured, r.tolerance, r.seconds);
    return std::string(head) + " | " + r.detail;
}

nlohmann::json to_json(const std::vector<CriterionResult>& rs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rs)
        arr.push_back({{"id", r.id},
                       {"title", r.title},
                       {"pass", r.pass},
                       {"metric", r.metric},
                       {"measured", r.measured},
                       {"tolerance", r.tolerance},
                       {"detail", r.detail},
                       {"seconds", r.seconds}});
    return arr;
}

}  // namespace nextjump::validation
