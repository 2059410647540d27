#include "nextjump/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nextjump {

int default_nmax(double nbar) {
    if (!(nbar >= 0.0)) throw std::invalid_argument("nbar must be non-negative");
    return static_cast<int>(std::ceil(nbar + 10.0 * std::sqrt(nbar) + 20.0));
}

FockVector::FockVector(int levels_, int nmax_) : levels(levels_), nmax(nmax_) {
    if (levels < 1 || levels > 3) throw std::invalid_argument("FockVector: levels must be 1..3");
    if (nmax < 0) throw std::invalid_argument("FockVector: nmax must be >= 0");
    amps = CVec::Zero(dim());
}

FockVector FockVector::basis(int levels, int nmax, int level, int n) {
    FockVector v(levels, nmax);
    if (level < 0 || level >= levels || n < 0 || n > nmax) throw std::out_of_range("FockVector::basis");
    v.at(level, n) = 1.0;
    return v;
}

FockVector FockVector::coherent(int levels, int nmax, int level, Complex alpha, bool renormalize) {
    FockVector v(levels, nmax);
    Complex c = std::exp(-0.5 * std::norm(alpha));
    v.at(level, 0) = c;
    for (int n = 1; n <= nmax; ++n) {
        c *= alpha / std::sqrt(static_cast<double>(n));
        v.at(level, n) = c;
    }
    if (renormalize) {
        double nn = v.amps.norm();
        if (nn > 0) v.amps /= nn;
    }
    return v;
}

double FockVector::edge_weight() const {
    double w = 0.0;
    for (int l = 0; l < levels; ++l) w = std::max(w, std::norm(at(l, nmax)));
    return w;
}

void add_annihilate(const Complex* in, Complex* out, int nmax, Complex s) {
    for (int n = 0; n < nmax; ++n) out[n] += s * std::sqrt(static_cast<double>(n + 1)) * in[n + 1];
}

void add_create(const Complex* in, Complex* out, int nmax, Complex s) {
    for (int n = 1; n <= nmax; ++n) out[n] += s * std::sqrt(static_cast<double>(n)) * in[n - 1];
}

void add_number(const Complex* in, Complex* out, int nmax, Complex s) {
    for (int n = 1; n <= nmax; ++n) out[n] += s * static_cast<double>(n) * in[n];
}

FockVector apply_ladder(const FockVector& state, Ladder which, unsigned level_mask, double tail_tol) {
    FockVector out(state.levels, state.nmax);
    const int stride = state.nmax + 1;
    for (int l = 0; l < state.levels; ++l) {
        if (!(level_mask & (1u << l))) continue;
        const Complex* in = state.amps.data() + l * stride;
        Complex* o = out.amps.data() + l * stride;
        switch (which) {
            case Ladder::annihilate: add_annihilate(in, o, state.nmax, 1.0); break;
            case Ladder::number: add_number(in, o, state.nmax, 1.0); break;
            case Ladder::create: {
                double lost = (state.nmax + 1.0) * std::norm(in[state.nmax]);
                if (lost > tail_tol)
                    throw TruncationOverflow("create: amplitude " + std::to_string(lost) + " pushed past nmax=" +
                                             std::to_string(state.nmax));
                add_create(in, o, state.nmax, 1.0);
                break;
            }
        }
    }
    return out;
}

CMat annihilation_matrix(int nmax) {
    CMat a = CMat::Zero(nmax + 1, nmax + 1);
    for (int n = 1; n <= nmax; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace

Dopri5::Dopri5(OdeRhs rhs, CVec y0, double t0, OdeOptions opts)
    : rhs_(std::move(rhs)), opts_(opts), t_(t0), t_prev_(t0), y_(std::move(y0)) {
    if (!(opts_.rtol > 0) || !(opts_.atol > 0)) throw std::invalid_argument("Dopri5: tolerances must be positive");
    const auto n = y_.size();
    for (CVec* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &err_}) v->resize(n);
    y_prev_ = y_;
    r1_ = y_;
    r2_ = r3_ = r4_ = r5_ = CVec::Zero(n);
    span_ref_ = t0;
    h_ = opts_.h_init;
}

double Dopri5::error_norm(const CVec& err, const CVec& y_new) const {
    const auto n = err.size();
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double sk = opts_.atol + opts_.rtol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
        double r = std::abs(err[i]) / sk;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

double Dopri5::initial_step(double t_end) {
    // Hairer's heuristic
    const double span = std::abs(t_end - t_);
    double d0 = error_norm(y_, y_) , d1v;
    rhs_(t_, y_, k1_);
    ++evals_;
    d1v = error_norm(k1_, y_);
    double h0 = (d0 < 1e-5 || d1v < 1e-5) ? 1e-6 : 0.01 * d0 / d1v;
    h0 = std::min(h0, span);
    ytmp_ = y_ + h0 * k1_;
    rhs_(t_ + h0, ytmp_, k2_);
    ++evals_;
    double d2 = error_norm(k2_ - k1_, y_) / h0;
    double h1 = (std::max(d1v, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1v, d2), 0.2);
    fsal_ready_ = true;
    double h = std::min({100 * h0, h1, span});
    if (opts_.h_max > 0) h = std::min(h, opts_.h_max);
    return h;
}

bool Dopri5::step(double t_limit) {
    if (t_limit < t_) throw std::invalid_argument("Dopri5: backward integration not supported");
    if (t_limit == t_) return false;
    const double span = std::max(std::abs(t_limit - span_ref_), std::numeric_limits<double>::min());
    if (h_ <= 0.0) h_ = initial_step(t_limit);
    if (!fsal_ready_) {
        rhs_(t_, y_, k1_);
        ++evals_;
        fsal_ready_ = true;
    }
    for (;;) {
        if (accepted_ >= opts_.max_steps) throw NumericalError("Dopri5: step budget exhausted");
        double h = h_;
        if (opts_.h_max > 0) h = std::min(h, opts_.h_max);
        bool last = false;
        if (t_ + h >= t_limit || t_ + 1.01 * h >= t_limit) {
            h = t_limit - t_;
            last = true;
        }
        if (h < 1e-14 * span && !last) throw StepUnderflow("Dopri5: step size underflow at t=" + std::to_string(t_));

        ytmp_ = y_ + h * a21 * k1_;
        rhs_(t_ + c2 * h, ytmp_, k2_);
        ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
        rhs_(t_ + c3 * h, ytmp_, k3_);
        ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        rhs_(t_ + c4 * h, ytmp_, k4_);
        ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs_(t_ + c5 * h, ytmp_, k5_);
        ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs_(t_ + h, ytmp_, k6_);
        ynew_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        const double t_new = last ? t_limit : t_ + h;
        rhs_(t_new, ynew_, k7_);
        evals_ += 6;
        err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        double en = error_norm(err_, ynew_);
        if (!std::isfinite(en)) {
            h_ = 0.2 * h;
            if (h_ < 1e-14 * span) throw StepUnderflow("Dopri5: non-finite state");
            continue;
        }
        if (en <= 1.0) {
            // dense output coefficients
            r1_ = y_;
            r2_ = ynew_ - y_;
            r3_ = h * k1_ - r2_;
            r4_ = r2_ - h * k7_ - r3_;
            r5_ = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
            y_prev_.swap(y_);
            y_.swap(ynew_);
            k1_.swap(k7_);
            t_prev_ = t_;
            t_ = t_new;
            ++accepted_;
            double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            if (!last) h_ = h * fac;
            else h_ = std::max(h_, h);
            return true;
        }
        h_ = h * std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
        if (h_ < 1e-14 * span) throw StepUnderflow("Dopri5: step size underflow at t=" + std::to_string(t_));
    }
}

void Dopri5::advance_to(double t_end) {
    while (step(t_end)) {
    }
}

CVec Dopri5::dense(double t) const {
    if (t_ == t_prev_) return y_;
    const double h = t_ - t_prev_;
    const double th = (t - t_prev_) / h;
    const double th1 = 1.0 - th;
    return r1_ + th * (r2_ + th1 * (r3_ + th * (r4_ + th1 * r5_)));
}

CVec integrate_ode(const OdeRhs& rhs, const CVec& y0, double t0, double t1, const OdeOptions& opts) {
    if (t1 == t0) return y0;
    Dopri5 s(rhs, y0, t0, opts);
    s.advance_to(t1);
    return s.y();
}

FockVector integrate_ode(const FockRhs& rhs, const FockVector& state0, double t0, double t1, const OdeOptions& opts) {
    FockVector in(state0.levels, state0.nmax), out(state0.levels, state0.nmax);
    OdeRhs f = [&](double t, const CVec& y, CVec& dy) {
        in.amps = y;
        rhs(t, in, out);
        dy = out.amps;
    };
    FockVector res = state0;
    res.amps = integrate_ode(f, state0.amps, t0, t1, opts);
    return res;
}

std::vector<CVec> integrate_ode_at(const OdeRhs& rhs, const CVec& y0, double t0, const std::vector<double>& times,
                                   const OdeOptions& opts) {
    std::vector<CVec> out;
    out.reserve(times.size());
    Dopri5 s(rhs, y0, t0, opts);
    for (double t : times) {
        if (t < s.t()) throw std::invalid_argument("integrate_ode_at: times must be sorted and >= t0");
        s.advance_to(t);
        out.push_back(s.y());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Philox4x32-10

namespace {
constexpr std::uint32_t philox_m0 = 0xD2511F53u, philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u, philox_w1 = 0xBB67AE85u;
}  // namespace

std::array<std::uint32_t, 4> Philox::block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += philox_w0;
            key[1] += philox_w1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(philox_m0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(philox_m1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

Philox::Philox(RngStream s)
    : key_{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32)}, stream_(s.stream_index) {}

void Philox::refill() {
    buf_ = block({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                 key_);
    ++counter_;
    pos_ = 0;
}

void Philox::seek(std::uint64_t blk) {
    counter_ = blk;
    pos_ = 4;
    has_spare_ = false;
}

std::uint32_t Philox::next_u32() {
    if (pos_ >= 4) refill();
    return buf_[pos_++];
}

double Philox::uniform() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Philox::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
}

std::vector<double> gaussian_increments(RngStream rng, std::size_t n, double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance))
        throw std::invalid_argument("gaussian_increments: variance must be positive and finite");
    Philox g(rng);
    const double sd = std::sqrt(variance);
    std::vector<double> out(n);
    for (auto& x : out) x = sd * g.normal();
    return out;
}

double erfc(double x) { return std::erfc(x); }

}  // namespace nextjump
