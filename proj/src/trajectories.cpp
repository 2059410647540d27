#include "nextjump/trajectories.hpp"

#include "nextjump/parallel.hpp"

#include <cmath>
#include <limits>

namespace nextjump::trajectories {

namespace {
const Complex I{0.0, 1.0};
constexpr double norm_match_tol = 1e-10;
}  // namespace

CVec EffectiveModel::reset(int channel, const CVec& psi) const {
    CVec out(dim);
    channels.at(static_cast<std::size_t>(channel)).apply(psi, out);
    const double nn = out.norm();
    if (!(nn > 0)) throw NumericalError("reset: jump operator annihilates the state");
    return out / nn;
}

NextJump sample_next_jump(const EffectiveModel& m, const CVec& state0, Philox& rng, double t0, double tmax) {
    NextJump r;
    const double u = rng.uniform();
    if (tmax <= t0) {
        r.t = tmax;
        r.state_at_jump = state0;
        r.post_state = state0.normalized();
        return r;
    }
    Dopri5 s(m.no_jump, state0, t0, m.ode);
    while (s.step(tmax)) {
        if (s.y().squaredNorm() > u) continue;
        // the survival probability crossed u inside the last step; bisect on the dense output
        double lo = s.t_prev(), hi = s.t();
        CVec psi = s.y();
        double tj = hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            CVec y = s.dense(mid);
            const double v = y.squaredNorm();
            tj = mid;
            psi = std::move(y);
            if (std::abs(v - u) < norm_match_tol) break;
            if (v > u) lo = mid;
            else hi = mid;
            if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi))) break;
        }
        r.jumped = true;
        r.t = tj;
        r.state_at_jump = psi;
        // channel k with probability ||L_k psi||^2 / sum_j ||L_j psi||^2
        std::vector<double> w(m.channels.size());
        CVec tmp(m.dim);
        double total = 0.0;
        for (std::size_t k = 0; k < m.channels.size(); ++k) {
            m.channels[k].apply(psi, tmp);
            w[k] = tmp.squaredNorm();
            total += w[k];
        }
        if (!(total > 0)) throw NumericalError("sample_next_jump: norm decayed but no channel is active");
        double pick = rng.uniform() * total;
        int ch = static_cast<int>(w.size()) - 1;
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (pick < w[k]) {
                ch = static_cast<int>(k);
                break;
            }
            pick -= w[k];
        }
        r.channel = ch;
        r.post_state = m.reset(ch, psi);
        return r;
    }
    r.t = tmax;
    r.state_at_jump = s.y();
    r.post_state = s.y().normalized();
    return r;
}

JumpRecord run_trajectory(const EffectiveModel& m, double tmax, RngStream stream) {
    return run_trajectory(m, m.initial, tmax, stream);
}

JumpRecord run_trajectory(const EffectiveModel& m, const CVec& state0, double tmax, RngStream stream) {
    if (tmax < 0) throw std::invalid_argument("run_trajectory: tmax must be >= 0");
    JumpRecord rec;
    rec.tmax = tmax;
    Philox rng(stream);
    CVec psi = state0;
    double t = 0.0;
    while (t < tmax) {
        NextJump nj = sample_next_jump(m, psi, rng, t, tmax);
        psi = nj.post_state;
        if (!nj.jumped) break;
        rec.times.push_back(nj.t);
        rec.channels.push_back(nj.channel);
        t = nj.t;
    }
    rec.final_state = psi;
    return rec;
}

std::vector<double> sample_first_jumps(const EffectiveModel& m, std::size_t n, double tmax, std::uint64_t seed) {
    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t i) {
        Philox rng({seed, i});
        NextJump nj = sample_next_jump(m, m.initial, rng, 0.0, tmax);
        out[i] = nj.jumped ? nj.t : std::numeric_limits<double>::quiet_NaN();
    });
    return out;
}

TelegraphStats telegraph_stats(const JumpRecord& rec, double threshold, int strong_channel, bool keep_segments) {
    if (!(threshold > 0)) throw std::invalid_argument("telegraph_stats: threshold must be positive");
    TelegraphStats st;
    st.threshold = threshold;
    st.total_time = rec.tmax;
    int max_ch = 0;
    for (int c : rec.channels) max_ch = std::max(max_ch, c);
    st.branch_counts.assign(static_cast<std::size_t>(max_ch + 1), 0);

    double prev = 0.0;
    double excess_sum = 0.0;
    auto add_gap = [&](double a, double b, int ch) {
        const double len = b - a;
        const bool dark = len > threshold;
        if (dark) {
            st.dark_time += len;
            ++st.n_dark;
            if (ch >= 0) {
                ++st.n_dark_complete;
                st.dark_durations.push_back(len);
                excess_sum += len - threshold;
                ++st.branch_counts[static_cast<std::size_t>(ch)];
            }
        }
        if (keep_segments) {
            if (!st.segments.empty() && !st.segments.back().dark && !dark) {
                st.segments.back().end = b;
                st.segments.back().terminating_channel = ch;
            } else {
                st.segments.push_back({a, b, dark, ch});
            }
        }
    };
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
        add_gap(prev, rec.times[k], rec.channels[k]);
        prev = rec.times[k];
    }
    if (rec.tmax > prev) add_gap(prev, rec.tmax, -1);

    st.p_D = st.total_time > 0 ? st.dark_time / st.total_time : 0.0;
    if (st.n_dark_complete > 0) {
        if (strong_channel >= 0 && static_cast<std::size_t>(strong_channel) < st.branch_counts.size())
            st.branch_fraction_strong =
                static_cast<double>(st.branch_counts[static_cast<std::size_t>(strong_channel)]) / st.n_dark_complete;
        st.tail_rate = excess_sum > 0 ? st.n_dark_complete / excess_sum : 0.0;
    }
    if (st.n_dark > 0) st.sigma_binomial = std::sqrt(st.p_D * (1.0 - st.p_D) / static_cast<double>(st.n_dark));
    return st;
}

CMat lindblad_evolve(const EffectiveModel& m, const CMat& rho0, double t, const OdeOptions& opts) {
    if (!m.generator) throw std::invalid_argument("lindblad_evolve: model has no dense generator");
    const CMat G = *m.generator;
    std::vector<CMat> Ls;
    for (const auto& c : m.channels) {
        if (!c.dense) throw std::invalid_argument("lindblad_evolve: channel without dense operator");
        Ls.push_back(*c.dense);
    }
    const int d = m.dim;
    OdeRhs f = [&](double, const CVec& y, CVec& dy) {
        Eigen::Map<const CMat> rho(y.data(), d, d);
        Eigen::Map<CMat> out(dy.data(), d, d);
        out.noalias() = G * rho;
        out.noalias() += rho * G.adjoint();
        for (const auto& L : Ls) out.noalias() += L * rho * L.adjoint();
    };
    CVec y0 = Eigen::Map<const CVec>(rho0.data(), d * d);
    CVec y = integrate_ode(f, y0, 0.0, t, opts);
    return Eigen::Map<const CMat>(y.data(), d, d);
}

double trace_identity_error(const EffectiveModel& m, double t) {
    const int d = m.dim;
    CVec tmp(d);
    OdeRhs f = [&](double tt, const CVec& y, CVec& dy) {
        CVec psi = y.head(d);
        CVec dpsi(d);
        m.no_jump(tt, psi, dpsi);
        dy.head(d) = dpsi;
        double rate = 0.0;
        for (const auto& c : m.channels) {
            c.apply(psi, tmp);
            rate += tmp.squaredNorm();
        }
        dy[d] = rate;
    };
    CVec y0 = CVec::Zero(d + 1);
    y0.head(d) = m.initial;
    std::vector<double> times;
    for (int i = 1; i <= 50; ++i) times.push_back(t * i / 50.0);
    OdeOptions o = m.ode;
    o.rtol = std::min(o.rtol, 1e-10);
    auto ys = integrate_ode_at(f, y0, 0.0, times, o);
    double err = 0.0;
    for (const auto& y : ys) err = std::max(err, std::abs(y.head(d).squaredNorm() + y[d].real() - 1.0));
    return err;
}

LindbladReport lindblad_consistency(const EffectiveModel& m, std::size_t ntraj, double t, std::uint64_t seedbase) {
    if (ntraj == 0) throw std::invalid_argument("lindblad_consistency: ntraj must be positive");
    LindbladReport rep;
    std::vector<CVec> finals(ntraj);
    parallel_for(ntraj, [&](std::size_t i) { finals[i] = run_trajectory(m, t, {seedbase, i}).final_state; });
    rep.rho_mc = CMat::Zero(m.dim, m.dim);
    for (const auto& f : finals) rep.rho_mc.noalias() += f * f.adjoint();
    rep.rho_mc /= static_cast<double>(ntraj);
    const CMat rho0 = m.initial * m.initial.adjoint();
    rep.rho_exact = lindblad_evolve(m, rho0, t, OdeOptions{1e-11, 1e-13});
    rep.max_deviation = (rep.rho_mc - rep.rho_exact).cwiseAbs().maxCoeff();
    rep.bound = 5.0 / std::sqrt(static_cast<double>(ntraj));
    rep.trace_identity_error = trace_identity_error(m, t);
    rep.pass = rep.max_deviation < rep.bound && rep.trace_identity_error < 1e-6;
    return rep;
}

// ---------------------------------------------------------------------------

EffectiveModel atom3_model(const atom3::Atom3Params& p) {
    EffectiveModel m;
    m.dim = 3;
    const CMat G = atom3::generator(p);
    m.generator = G;
    m.no_jump = [G](double, const CVec& y, CVec& dy) { dy.noalias() = G * y; };
    const double s1 = std::sqrt(p.beta1);
    CMat L1 = CMat::Zero(3, 3);
    L1(0, 1) = s1;
    m.channels.push_back({"strong", [s1](const CVec& in, CVec& out) {
                              out.setZero(3);
                              out[0] = s1 * in[1];
                          },
                          L1});
    if (p.beta2 > 0) {
        const double s2 = std::sqrt(p.beta2);
        CMat L2 = CMat::Zero(3, 3);
        L2(0, 2) = s2;
        m.channels.push_back({"weak", [s2](const CVec& in, CVec& out) {
                                  out.setZero(3);
                                  out[0] = s2 * in[2];
                              },
                              L2});
    }
    m.initial = atom3::Atom3State::reset().to_vec();
    m.fast_rate = p.beta1;
    return m;
}

EffectiveModel cavity_model(const cavity::CavityParams& p, int nmax, bool detuned, Complex g, std::optional<CVec> init) {
    if (nmax <= 0) nmax = default_nmax(p.nbar);
    EffectiveModel m;
    const int N = nmax + 1;
    m.dim = N;
    const Complex diag = (detuned ? I * p.chi : Complex{0.0}) - 0.5 * p.kappa;
    const Complex cst = -0.5 * p.kappa * std::norm(g);
    const double G = p.gamma_drive;
    const Complex down = p.kappa * std::conj(g) - G;  // coefficient of c
    m.no_jump = [=](double, const CVec& y, CVec& dy) {
        for (int n = 0; n <= nmax; ++n) {
            Complex v = (diag * static_cast<double>(n) + cst) * y[n];
            if (n > 0) v += G * std::sqrt(static_cast<double>(n)) * y[n - 1];
            if (n < nmax) v += down * std::sqrt(static_cast<double>(n + 1)) * y[n + 1];
            dy[n] = v;
        }
    };
    const CMat a = annihilation_matrix(nmax);
    const CMat Id = CMat::Identity(N, N);
    m.generator = diag * (a.adjoint() * a) + cst * Id + G * a.adjoint() + down * a;
    const double sk = std::sqrt(p.kappa);
    CMat L = sk * (a - g * Id);
    m.channels.push_back({"photon", [=](const CVec& in, CVec& out) {
                              out.resize(N);
                              for (int n = 0; n < nmax; ++n) out[n] = sk * (std::sqrt(n + 1.0) * in[n + 1] - g * in[n]);
                              out[nmax] = -sk * g * in[nmax];
                          },
                          L});
    if (init) {
        m.initial = *init;
    } else {
        m.initial = CVec::Zero(N);
        m.initial[0] = 1.0;
    }
    m.fast_rate = p.kappa;
    return m;
}

EffectiveModel decay_model(double beta) {
    EffectiveModel m;
    m.dim = 2;
    CMat G = CMat::Zero(2, 2);
    G(1, 1) = -0.5 * beta;
    m.generator = G;
    m.no_jump = [beta](double, const CVec& y, CVec& dy) {
        dy[0] = 0.0;
        dy[1] = -0.5 * beta * y[1];
    };
    const double s = std::sqrt(beta);
    CMat L = CMat::Zero(2, 2);
    L(0, 1) = s;
    m.channels.push_back({"decay", [s](const CVec& in, CVec& out) {
                              out.setZero(2);
                              out[0] = s * in[1];
                          },
                          L});
    m.initial = CVec::Zero(2);
    m.initial[1] = 1.0;
    m.fast_rate = beta;
    return m;
}

EffectiveModel two_channel_model(double b1, double b2, Complex c1, Complex c2) {
    EffectiveModel m;
    m.dim = 3;
    CMat G = CMat::Zero(3, 3);
    G(1, 1) = -0.5 * b1;
    G(2, 2) = -0.5 * b2;
    m.generator = G;
    m.no_jump = [G](double, const CVec& y, CVec& dy) { dy.noalias() = G * y; };
    const double s1 = std::sqrt(b1), s2 = std::sqrt(b2);
    CMat L1 = CMat::Zero(3, 3), L2 = CMat::Zero(3, 3);
    L1(0, 1) = s1;
    L2(0, 2) = s2;
    m.channels.push_back({"one", [s1](const CVec& in, CVec& out) {
                              out.setZero(3);
                              out[0] = s1 * in[1];
                          },
                          L1});
    m.channels.push_back({"two", [s2](const CVec& in, CVec& out) {
                              out.setZero(3);
                              out[0] = s2 * in[2];
                          },
                          L2});
    m.initial = CVec::Zero(3);
    m.initial[1] = c1;
    m.initial[2] = c2;
    m.initial.normalize();
    m.fast_rate = std::max(b1, b2);
    return m;
}

}  // namespace nextjump::trajectories
