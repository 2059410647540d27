#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nextjump {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// errors

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TruncationOverflow : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StepUnderflow : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// A non-fatal regime diagnostic attached to closed-form evaluations.
struct RegimeFlag {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool violated = false;
};

// ---------------------------------------------------------------------------
// truncated Fock space

inline constexpr double default_tail_tolerance = 1e-10;

// ceil(nbar + 10 sqrt(nbar) + 20)
int default_nmax(double nbar);

enum class Ladder { annihilate, create, number };

struct FockVector {
    int levels = 1;
    int nmax = 0;
    CVec amps;

    FockVector() = default;
    FockVector(int levels_, int nmax_);

    static FockVector basis(int levels, int nmax, int level, int n);
    // exp(-|a|^2/2) a^n / sqrt(n!) on one level, normalized on the truncated space if requested
    static FockVector coherent(int levels, int nmax, int level, Complex alpha, bool renormalize = false);

    int dim() const { return levels * (nmax + 1); }
    int index(int level, int n) const { return level * (nmax + 1) + n; }
    Complex& at(int level, int n) { return amps[index(level, n)]; }
    Complex at(int level, int n) const { return amps[index(level, n)]; }

    double norm2() const { return amps.squaredNorm(); }
    // largest |amp|^2 at n = nmax over all levels
    double edge_weight() const;
    bool converged(double tail_tol = default_tail_tolerance) const { return edge_weight() < tail_tol; }
};

// level_mask bit k selects atomic level k; unmasked levels are zeroed in the result.
FockVector apply_ladder(const FockVector& state, Ladder which, unsigned level_mask = ~0u,
                        double tail_tol = default_tail_tolerance);

// Raw in-place kernels over one level block of length nmax+1, accumulated as out += s * op(in).
void add_annihilate(const Complex* in, Complex* out, int nmax, Complex s);
void add_create(const Complex* in, Complex* out, int nmax, Complex s);
void add_number(const Complex* in, Complex* out, int nmax, Complex s);

// Dense single-mode operators on 0..nmax.
CMat annihilation_matrix(int nmax);

// ---------------------------------------------------------------------------
// adaptive Dormand-Prince 5(4) with dense output

using OdeRhs = std::function<void(double t, const CVec& y, CVec& dydt)>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;  // 0 selects automatically
    double h_max = 0.0;   // 0 means unbounded
    long max_steps = 50'000'000;
};

class Dopri5 {
public:
    Dopri5(OdeRhs rhs, CVec y0, double t0, OdeOptions opts = {});

    // Advance one accepted step without passing t_limit. Returns false once t == t_limit.
    bool step(double t_limit);
    // Integrate to t_end exactly.
    void advance_to(double t_end);

    double t() const { return t_; }
    double t_prev() const { return t_prev_; }
    const CVec& y() const { return y_; }
    const CVec& y_prev() const { return y_prev_; }
    // Fourth-order continuous extension on [t_prev, t] of the last accepted step.
    CVec dense(double t) const;
    long steps() const { return accepted_; }
    long rhs_evals() const { return evals_; }

private:
    double error_norm(const CVec& err, const CVec& y_new) const;
    double initial_step(double t_end);

    OdeRhs rhs_;
    OdeOptions opts_;
    double t_ = 0.0;
    double t_prev_ = 0.0;
    double h_ = 0.0;
    double span_ref_ = 0.0;
    CVec y_, y_prev_;
    CVec k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, err_;
    CVec r1_, r2_, r3_, r4_, r5_;  // dense-output coefficients
    long accepted_ = 0;
    long evals_ = 0;
    bool fsal_ready_ = false;
};

CVec integrate_ode(const OdeRhs& rhs, const CVec& y0, double t0, double t1, const OdeOptions& opts = {});

// Linear map on Fock vectors; rhs(t, in, out) must overwrite out.
using FockRhs = std::function<void(double t, const FockVector& in, FockVector& out)>;
FockVector integrate_ode(const FockRhs& rhs, const FockVector& state0, double t0, double t1,
                         const OdeOptions& opts = {});

// Evaluate y at each requested (sorted) time.
std::vector<CVec> integrate_ode_at(const OdeRhs& rhs, const CVec& y0, double t0, const std::vector<double>& times,
                                   const OdeOptions& opts = {});

// ---------------------------------------------------------------------------
// counter-based random numbers (Philox4x32-10)

struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;
};

class Philox {
public:
    explicit Philox(RngStream s);

    std::uint32_t next_u32();
    // uniform on the open interval (0, 1), 53-bit resolution
    double uniform();
    double normal();

    // Skip to an absolute 128-bit block position (low word).
    void seek(std::uint64_t block);

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t counter_ = 0;
    std::uint64_t stream_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::vector<double> gaussian_increments(RngStream rng, std::size_t n, double variance);

// ---------------------------------------------------------------------------
// special functions

double erfc(double x);

}  // namespace nextjump
