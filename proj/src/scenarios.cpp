#include "nextjump/scenarios.hpp"

#include "nextjump/atom3.hpp"
#include "nextjump/cavity.hpp"
#include "nextjump/heterodyne.hpp"
#include "nextjump/parallel.hpp"
#include "nextjump/readout.hpp"
#include "nextjump/trajectories.hpp"
#include "nextjump/transmon.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace nextjump::scenarios {

namespace {

const std::vector<ScenarioSpec> kRegistry = {
    {"atom3-null",
     {},
     "no-emission evolution of the driven three-level atom after a reset",
     {{"omega1", 10.0}, {"omega2", 0.05}, {"delta2", 10.0}, {"beta1", 1.0}, {"beta2", 0.0}, {"tmax", 50.0},
      {"npoints", 501}},
     {"t", "W", "abs_c0", "abs_c1", "abs_c2", "abs_c1_closed"},
     "atom3_null.csv"},
    {"atom3-telegraph",
     {"telegraph"},
     "jump record of the three-level atom and its bright/dark statistics",
     {{"epsilon", 0.05}, {"beta1", 1.0}, {"beta2", 0.0}, {"drive_ratio", 10.0}, {"ntraj", 64}, {"tmax", 2000.0},
      {"threshold", 10.0}},
     {"t", "trajectory", "channel", "gap", "dark"},
     "telegraph.csv"},
    {"cavity-w",
     {},
     "no-click probability W and next-jump density D of the driven cavity",
     {{"nbar", 4.0}, {"kappa", 1.0}, {"chi", 0.0}, {"tmax", 6.0}, {"npoints", 601}},
     {"t", "W", "D"},
     "w.csv"},
    {"cavity-detuned",
     {},
     "cavity driven off resonance by the dispersive shift",
     {{"nbar", 100.0}, {"kappa", 1.0}, {"chi", 20.0}, {"tmax", 6.0}, {"npoints", 601}},
     {"t", "W", "D", "re_alpha", "im_alpha"},
     "detuned.csv"},
    {"transmon-dark",
     {},
     "full Fock-space norm decay during a dark period",
     {{"kappa", 1.0}, {"chi", 20.0}, {"nbar", 100.0}, {"epsilon", 0.1}, {"eta", 0.01}, {"nmax", 160}, {"dt", 1.0},
      {"method", 0}},
     {"t", "norm2"},
     "transmon_dark.csv"},
    {"transmon-multiscale",
     {},
     "multiscale Volterra solution for the ground amplitude",
     {{"kappa", 1.0}, {"chi", 20.0}, {"nbar", 100.0}, {"omega", 0.1}, {"tmax", 1200.0}, {"dt", 0.002},
      {"output_every", 500}, {"check_halving", 0}},
     {"t", "c_g0"},
     "multiscale.csv"},
    {"heterodyne-sse",
     {},
     "conditioned coherent-state evolution along one heterodyne record",
     {{"nbar", 4.0}, {"kappa", 1.0}, {"B", 1.0}, {"omega", 50.0}, {"tmax", 2.0}, {"dt", 1e-4}, {"re_alpha0", 0.0},
      {"im_alpha0", 0.0}, {"output_every", 100}, {"fock_check", 0}},
     {"t", "re_alpha", "im_alpha", "re_beta", "im_beta", "re_T", "im_T", "log_norm2"},
     "sse.csv"},
    {"heterodyne-current",
     {},
     "ensemble of time-averaged heterodyne currents with their weights",
     {{"nbar", 100.0}, {"kappa", 1.0}, {"B", 1.0}, {"omega", 50.0}, {"t", 20.0}, {"dt", 1e-3}, {"npaths", 1000},
      {"importance", 1}, {"steady_start", 1}},
     {"path", "re_I", "im_I", "abs_I", "log_weight"},
     "current.csv"},
    {"readout-figure1",
     {"figure1"},
     "next-jump and dispersive readout errors with the log-decrement inset",
     {{"nbar", 100.0}, {"kappa", 1.0}, {"chi_nextjump", 20.0}, {"chi_dispersive", 0.5}, {"tau_max", 12.0},
      {"npoints", 1201}},
     {"tau", "eps", "eps_dr", "Y"},
     "fig1.csv"},
};

const std::set<std::string> kPositive = {"kappa", "beta1", "tmax", "dt", "B", "t", "tau_max", "omega1", "drive_ratio",
                                         "threshold", "epsilon"};
const std::set<std::string> kNonNegative = {"nbar", "beta2", "omega", "eta", "omega2", "delta2"};
const std::set<std::string> kCounts = {"npoints", "ntraj", "nmax", "npaths", "output_every"};
const std::set<std::string> kFlags = {"check_halving", "fock_check", "importance", "steady_start"};

void need(bool ok, const std::string& msg) {
    if (!ok) throw InvalidConfig(msg);
}

std::size_t count(const RunConfig& c, const std::string& k) {
    return static_cast<std::size_t>(std::llround(c.params.at(k)));
}

json flags_json(const std::vector<RegimeFlag>& flags) {
    json j = json::object();
    for (const auto& f : flags) j[f.name] = {{"value", f.value}, {"limit", f.limit}, {"violated", f.violated}};
    return j;
}

ScenarioResult run_atom3_null(const RunConfig& c) {
    const auto& q = c.params;
    atom3::Atom3Params p;
    p.omega1 = q.at("omega1");
    p.omega2 = q.at("omega2");
    p.delta2 = q.at("delta2");
    p.beta1 = q.at("beta1");
    p.beta2 = q.at("beta2");
    const std::size_t n = count(c, "npoints");
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) times[i] = q.at("tmax") * static_cast<double>(i) / static_cast<double>(n - 1);
    const auto series = atom3::evolve_null_series(p, atom3::Atom3State::reset(), times);
    ScenarioResult r;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = series[i].state;
        r.table.rows.push_back({times[i], series[i].W, std::abs(s.c0), std::abs(s.c1), std::abs(s.c2),
                                std::abs(atom3::amplitude_c1_closed(p, times[i]))});
    }
    r.summary = {{"epsilon", p.epsilon()}, {"beta_ell", atom3::beta_ell(p)}, {"W_final", series.back().W}};
    r.flags = flags_json(atom3::regime_flags(p, q.at("tmax")));
    return r;
}

ScenarioResult run_atom3_telegraph(const RunConfig& c) {
    const auto& q = c.params;
    const auto p = atom3::Atom3Params::from_epsilon(q.at("epsilon"), q.at("beta1"), q.at("drive_ratio"), q.at("beta2"));
    const auto m = trajectories::atom3_model(p);
    const std::size_t ntraj = count(c, "ntraj");
    const double tmax = q.at("tmax");
    const double theta = q.at("threshold") / p.beta1;
    std::vector<trajectories::JumpRecord> recs(ntraj);
    parallel_for(ntraj, [&](std::size_t i) { recs[i] = trajectories::run_trajectory(m, tmax, {c.seed, i}); });

    ScenarioResult r;
    double dark = 0.0, total = 0.0, excess = 0.0;
    std::size_t n_dark = 0, n_complete = 0, strong = 0;
    for (std::size_t i = 0; i < ntraj; ++i) {
        const auto& rec = recs[i];
        double prev = 0.0;
        for (std::size_t k = 0; k < rec.times.size(); ++k) {
            const double gap = rec.times[k] - prev;
            r.table.rows.push_back({rec.times[k], static_cast<double>(i), static_cast<double>(rec.channels[k]), gap,
                                    gap > theta ? 1.0 : 0.0});
            prev = rec.times[k];
        }
        const auto st = trajectories::telegraph_stats(rec, theta, 0);
        dark += st.dark_time;
        total += st.total_time;
        n_dark += st.n_dark;
        n_complete += st.n_dark_complete;
        if (!st.branch_counts.empty()) strong += st.branch_counts[0];
        for (double L : st.dark_durations) excess += L - theta;
    }
    const double pd = total > 0 ? dark / total : 0.0;
    const auto df = atom3::dark_fraction(p);
    r.summary = {{"p_D", pd},
                 {"sigma_binomial", n_dark > 0 ? std::sqrt(pd * (1 - pd) / static_cast<double>(n_dark)) : 0.0},
                 {"n_dark", n_dark},
                 {"n_dark_complete", n_complete},
                 {"branch_fraction_strong",
                  n_complete > 0 ? static_cast<double>(strong) / static_cast<double>(n_complete) : 0.0},
                 {"tail_rate", excess > 0 ? static_cast<double>(n_complete) / excess : 0.0},
                 {"p_D_closed", df.p_D},
                 {"branch_Gamma_closed", df.branch_Gamma},
                 {"beta_ell", atom3::beta_ell(p)},
                 {"threshold", theta},
                 {"total_time", total}};
    r.flags = flags_json(atom3::regime_flags(p));
    return r;
}

ScenarioResult run_cavity(const RunConfig& c, bool detuned_columns) {
    const auto& q = c.params;
    const auto p = cavity::CavityParams::from_nbar(q.at("kappa"), q.at("chi"), q.at("nbar"));
    const std::size_t n = count(c, "npoints");
    ScenarioResult r;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = q.at("tmax") * static_cast<double>(i) / static_cast<double>(n - 1);
        const auto pt = cavity::detuned_trajectory(p, Complex{0.0, 0.0}, t);
        std::vector<double> row{t, cavity::survival_W(pt), cavity::jump_density_D(pt, p)};
        if (detuned_columns) {
            row.push_back(pt.alpha.real());
            row.push_back(pt.alpha.imag());
        }
        r.table.rows.push_back(std::move(row));
    }
    const Complex gl = cavity::gamma_L_drive(p);
    r.summary = {{"gamma_drive", p.gamma_drive}, {"re_gamma_L", gl.real()}, {"im_gamma_L", gl.imag()},
                 {"W_final", r.table.rows.back()[1]}};
    if (p.chi == 0.0) r.summary["mean_jump_time"] = cavity::mean_jump_time(p);
    return r;
}

ScenarioResult run_transmon_dark(const RunConfig& c) {
    const auto& q = c.params;
    transmon::TransmonParams p;
    p.kappa = q.at("kappa");
    p.chi = q.at("chi");
    p.nbar = q.at("nbar");
    const int code = static_cast<int>(std::llround(q.at("method")));
    need(code >= 0 && code <= 2, "method must be 0 (quadrature), 1 (steepest_descent) or 2 (drive_formula)");
    const auto method = static_cast<transmon::BetaMethod>(code);
    const double bb = transmon::beta_B(p, transmon::BetaMethod::drive_formula);
    p.omega_b = q.at("epsilon") * bb;
    p.omega_d = q.at("eta") * p.omega_b;
    const int nmax = static_cast<int>(count(c, "nmax"));
    const auto fit = transmon::fit_dark_rate(p, nmax, q.at("dt"), method);
    const int nsteps = static_cast<int>(std::ceil(fit.t_hi / q.at("dt")));
    const auto series = transmon::dark_norm_series(p, q.at("dt"), nsteps, nmax);
    ScenarioResult r;
    for (std::size_t i = 0; i < series.t.size(); ++i) r.table.rows.push_back({series.t[i], series.norm2[i]});
    r.summary = {{"fitted_rate", fit.fitted_rate}, {"predicted_rate", fit.predicted_rate},
                 {"t_lo", fit.t_lo},           {"t_hi", fit.t_hi},
                 {"beta_B", fit.spectrum.beta_b}, {"re_iE_plus", fit.spectrum.ie_plus.real()},
                 {"re_iE_minus", fit.spectrum.ie_minus.real()}, {"edge_weight", fit.edge_weight},
                 {"method", transmon::to_string(method)}};
    r.flags = flags_json(fit.spectrum.flags);
    return r;
}

ScenarioResult run_transmon_multiscale(const RunConfig& c) {
    const auto& q = c.params;
    transmon::TransmonParams p;
    p.kappa = q.at("kappa");
    p.chi = q.at("chi");
    p.nbar = q.at("nbar");
    p.omega_b = q.at("omega");
    const auto v = transmon::multiscale_volterra(p, q.at("tmax"), q.at("dt"), q.at("check_halving") != 0.0);
    const std::size_t every = count(c, "output_every");
    ScenarioResult r;
    for (std::size_t i = 0; i < v.c.size(); i += every) r.table.rows.push_back({v.dt * static_cast<double>(i), v.c[i]});
    const Complex ur = transmon::unshifted_rate(p);
    r.summary = {{"fitted_rate", v.fitted_rate},
                 {"gamma", transmon::slow_rate_gamma(p)},
                 {"unshifted_rabi_decay", transmon::unshifted_rabi_decay(p)},
                 {"re_unshifted_rate", ur.real()},
                 {"im_unshifted_rate", ur.imag()},
                 {"monotone", v.monotone},
                 {"halved_dt_max_diff", v.halved_dt_max_diff}};
    r.flags = flags_json(transmon::reduced_regime_flags(p));
    return r;
}

ScenarioResult run_heterodyne_sse(const RunConfig& c) {
    const auto& q = c.params;
    const auto p = heterodyne::HeterodyneParams::from_nbar(q.at("kappa"), q.at("nbar"), q.at("B"),
                                                           q.at("omega") / q.at("kappa"));
    const double dt = q.at("dt");
    try {
        p.check_step(dt);
    } catch (const std::invalid_argument& e) {
        throw InvalidConfig(e.what());
    }
    const auto nsteps = static_cast<std::size_t>(std::llround(q.at("tmax") / dt));
    need(nsteps > 0, "tmax shorter than one step");
    const auto path = heterodyne::make_noise_path(p, dt, nsteps, {c.seed, 0});
    const Complex a0{q.at("re_alpha0"), q.at("im_alpha0")};
    const std::size_t every = count(c, "output_every");
    heterodyne::CoherentSSE s;
    s.alpha = a0;
    ScenarioResult r;
    auto emit = [&] {
        r.table.rows.push_back({s.t, s.alpha.real(), s.alpha.imag(), s.beta.real(), s.beta.imag(), s.T.real(),
                                s.T.imag(), s.log_norm2()});
    };
    emit();
    for (std::size_t i = 0; i < nsteps; ++i) {
        heterodyne::coherent_step(p, s, path.increments[i], dt);
        if ((i + 1) % every == 0 || i + 1 == nsteps) emit();
    }
    const auto cf = heterodyne::closed_form(p, a0, s.t, s.T, s.S);
    r.summary = {{"closed_form_alpha_diff", std::abs(cf.alpha - s.alpha)},
                 {"closed_form_beta_diff", std::abs(cf.beta - s.beta)},
                 {"alpha_steady", p.alpha_steady()}};
    if (q.at("fock_check") != 0.0) {
        const int nmax = default_nmax(std::max(p.nbar(), std::norm(a0)));
        const FockVector psi0 = FockVector::coherent(1, nmax, 0, a0, true);
        const auto f = heterodyne::integrate_sse_fock(p, path, psi0);
        r.summary["fock_infidelity"] =
            1.0 - heterodyne::ray_fidelity(heterodyne::coherent_amplitudes(s.alpha, s.beta, nmax), f.psi.amps);
    }
    return r;
}

ScenarioResult run_heterodyne_current(const RunConfig& c) {
    const auto& q = c.params;
    const auto p = heterodyne::HeterodyneParams::from_nbar(q.at("kappa"), q.at("nbar"), q.at("B"),
                                                           q.at("omega") / q.at("kappa"));
    try {
        p.check_step(q.at("dt"));
    } catch (const std::invalid_argument& e) {
        throw InvalidConfig(e.what());
    }
    heterodyne::EnsembleOptions o;
    o.t = q.at("t");
    o.dt = q.at("dt");
    o.npaths = count(c, "npaths");
    o.seed = c.seed;
    o.importance = q.at("importance") != 0.0;
    if (q.at("steady_start") != 0.0) {
        o.alpha0 = p.alpha_steady();
        o.beta0 = -0.5 * p.nbar();
    }
    const auto samples = heterodyne::current_ensemble(p, o);
    const auto st = heterodyne::current_statistics(samples);
    ScenarioResult r;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        r.table.rows.push_back(
            {static_cast<double>(i), s.current_B.real(), s.current_B.imag(), std::abs(s.current_B), s.log_weight});
    }
    r.summary = {{"peak_abs_I_over_B", st.peak_abs},
                 {"predicted_peak", std::sqrt(p.kappa * p.nbar())},
                 {"weighted_mean_abs", st.weighted_mean_abs},
                 {"weighted_std_abs", st.weighted_std_abs},
                 {"relative_width", st.relative_width},
                 {"effective_samples", st.effective_samples},
                 {"raw_var", st.raw_var}};
    return r;
}

ScenarioResult run_figure1(const RunConfig& c) {
    const auto& q = c.params;
    readout::Figure1Defaults d;
    d.kappa = q.at("kappa");
    d.nbar = q.at("nbar");
    d.chi_nextjump = q.at("chi_nextjump");
    d.chi_dispersive = q.at("chi_dispersive");
    d.tau_max = q.at("tau_max");
    d.npoints = static_cast<int>(count(c, "npoints"));
    const auto curves = readout::figure1_dataset(d);
    ScenarioResult r;
    for (std::size_t i = 0; i < curves.tau.size(); ++i)
        r.table.rows.push_back({curves.tau[i], curves.eps_nextjump[i], curves.eps_dispersive[i], curves.Y[i]});
    const auto pj = cavity::CavityParams::from_nbar(d.kappa, d.chi_nextjump * d.kappa, d.nbar);
    const auto pd = cavity::CavityParams::from_nbar(d.kappa, d.chi_dispersive * d.kappa, d.nbar);
    const auto m = readout::next_jump_error_minimum(pj, d.tau_max);
    r.summary = {{"eps_min", m.eps},
                 {"tau_at_min", m.tau},
                 {"chi_t_at_min", m.chi_t},
                 {"eps_min_over_scale", m.ratio},
                 {"tau_eps_dr_below_1e-3", readout::dispersive_crossing(pd, 1e-3)},
                 {"y_frequency", readout::y_oscillation_frequency(pj, std::min(10.0, d.tau_max))},
                 {"chi_over_2pi_kappa", d.chi_nextjump / (2.0 * pi)}};
    return r;
}

}  // namespace

json to_json(const RunConfig& c) {
    json j = {{"scenario", c.scenario}, {"seed", c.seed}, {"output", c.output}, {"format", c.format}};
    for (const auto& [k, v] : c.params) {
        need(!j.contains(k), "parameter name collides with a reserved key: " + k);
        j[k] = v;
    }
    return j;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw InvalidConfig("config must be a JSON object");
    RunConfig c;
    for (const auto& [k, v] : j.items()) {
        if (k == "scenario") {
            need(v.is_string(), "scenario must be a string");
            c.scenario = v.get<std::string>();
        } else if (k == "seed") {
            need(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
                 "seed must be a non-negative integer");
            c.seed = v.get<std::uint64_t>();
        } else if (k == "output") {
            need(v.is_string(), "output must be a string");
            c.output = v.get<std::string>();
        } else if (k == "format") {
            need(v.is_string(), "format must be a string");
            c.format = v.get<std::string>();
        } else if (k == "params") {
            need(v.is_object(), "params must be an object");
            for (const auto& [pk, pv] : v.items()) {
                need(pv.is_number(), "parameter " + pk + " must be numeric");
                c.params[pk] = pv.get<double>();
            }
        } else {
            // every other key is a numeric parameter
            need(v.is_number(), "parameter " + k + " must be numeric");
            c.params[k] = v.get<double>();
        }
    }
    return c;
}

std::string serialize(const RunConfig& c) { return to_json(c).dump(2); }

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

const std::vector<ScenarioSpec>& registry() { return kRegistry; }

const ScenarioSpec* find_scenario(const std::string& name) {
    for (const auto& s : kRegistry) {
        if (s.name == name) return &s;
        if (std::find(s.aliases.begin(), s.aliases.end(), name) != s.aliases.end()) return &s;
    }
    return nullptr;
}

RunConfig resolve(const RunConfig& c) {
    const ScenarioSpec* spec = find_scenario(c.scenario);
    need(spec != nullptr, "unknown scenario '" + c.scenario + "'");
    need(c.format == "csv", "only csv output is supported");
    RunConfig r = c;
    r.scenario = spec->name;
    for (const auto& [k, v] : c.params) {
        const bool known = std::any_of(spec->defaults.begin(), spec->defaults.end(),
                                       [&](const auto& d) { return d.first == k; });
        need(known, "unknown parameter '" + k + "' for scenario " + spec->name);
    }
    for (const auto& [k, v] : spec->defaults) r.params.emplace(k, v);
    for (const auto& [k, v] : r.params) {
        need(std::isfinite(v), "parameter " + k + " must be finite");
        if (kPositive.count(k)) need(v > 0, "parameter " + k + " must be positive");
        if (kNonNegative.count(k)) need(v >= 0, "parameter " + k + " must be >= 0");
        if (kCounts.count(k)) need(v >= 1 && v == std::floor(v), "parameter " + k + " must be a positive integer");
        if (kFlags.count(k)) need(v == 0 || v == 1, "parameter " + k + " must be 0 or 1");
    }
    if (r.params.count("npoints")) need(r.params.at("npoints") >= 2, "npoints must be >= 2");
    if (r.output.empty()) r.output = spec->default_output;
    return r;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) out += ',';
        out += t.columns[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

ScenarioResult run_scenario(const RunConfig& config) {
    const RunConfig c = resolve(config);
    ScenarioResult r;
    const std::string& n = c.scenario;
    if (n == "atom3-null") r = run_atom3_null(c);
    else if (n == "atom3-telegraph") r = run_atom3_telegraph(c);
    else if (n == "cavity-w") r = run_cavity(c, false);
    else if (n == "cavity-detuned") r = run_cavity(c, true);
    else if (n == "transmon-dark") r = run_transmon_dark(c);
    else if (n == "transmon-multiscale") r = run_transmon_multiscale(c);
    else if (n == "heterodyne-sse") r = run_heterodyne_sse(c);
    else if (n == "heterodyne-current") r = run_heterodyne_current(c);
    else if (n == "readout-figure1") r = run_figure1(c);
    else throw InvalidConfig("scenario not runnable: " + n);
    r.table.columns = find_scenario(n)->columns;
    return r;
}

json sidecar(const RunConfig& c, const ScenarioResult& r, double wall_seconds) {
    const json cfg = to_json(c);
    json summary = r.summary;
    summary["rows"] = r.table.rows.size();
    summary["wall_seconds"] = wall_seconds;
    return {{"config", cfg}, {"summary", summary}, {"flags", r.flags}};
}

}  // namespace nextjump::scenarios
