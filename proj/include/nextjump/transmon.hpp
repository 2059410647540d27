#pragma once

#include "nextjump/numerics.hpp"

#include <string>
#include <vector>

namespace nextjump::transmon {

struct TransmonParams {
    double kappa = 1.0;
    double chi = 20.0;
    double nbar = 100.0;
    Complex omega_b{0.0, 0.0};  // time-averaged B-G Rabi frequency
    Complex omega_d{0.0, 0.0};  // D-G Rabi frequency

    double gamma_drive() const;  // kappa sqrt(nbar) / 2
    Complex gamma_L() const;     // low-field amplitude in the shifted frame
};

enum class BetaMethod { quadrature, steepest_descent, drive_formula };
std::string to_string(BetaMethod m);
BetaMethod beta_method_from_string(const std::string& s);

// Cavity-induced width of the bright level.
//  quadrature:       2 / beta_B = int_0^inf exp(-(kappa/2)|gL - sqrt(nbar)|^2 [t + (2/kappa)(e^{-kappa t/2} - 1)]) dt
//  steepest_descent: 2 kappa |gL - sqrt(nbar)| / sqrt(2 pi)
//  drive_formula:    2 sqrt(2/pi) Gamma
double beta_B(const TransmonParams& p, BetaMethod method = BetaMethod::quadrature);

struct DarkSpectrum {
    double beta_b = 0.0;
    Complex e_plus{};   // eigenvalues E; the decay rates are i E
    Complex e_minus{};
    Complex ie_plus{};
    Complex ie_minus{};
    double ie_plus_asymptotic = 0.0;   // 2 beta_B eps^2
    double ie_minus_asymptotic = 0.0;  // beta_B eta^2 / 2
    double epsilon = 0.0;
    double eta = 0.0;
    double validity_ratio = 0.0;  // |Omega_B|^2 / (beta_B kappa), must be << 1
    bool asymptotics_reliable = false;
    bool hierarchy_holds = false;
    std::vector<RegimeFlag> flags;
};

DarkSpectrum dark_eigenvalues(const TransmonParams& p, BetaMethod method = BetaMethod::quadrature);
// Same with an externally supplied width.
DarkSpectrum dark_eigenvalues_with_width(const TransmonParams& p, double beta_b);

// ---------------------------------------------------------------------------
// full Fock-space dark-period oracle in the shifted frame, basis (B, G, D) x n

CMat dark_hamiltonian(const TransmonParams& p, int nmax);

struct NormSeries {
    std::vector<double> t;
    std::vector<double> norm2;
    double edge_weight = 0.0;  // max over samples of the truncation-edge population
};

// Propagates a0_G |G,0> + a0_D |D,0> with the exact step propagator exp(-i H dt).
NormSeries dark_norm_series(const TransmonParams& p, double dt, int nsteps, int nmax, Complex a0_g = 1.0,
                            Complex a0_d = 0.0);
double dark_norm_oracle(const TransmonParams& p, double t, int nmax = 0);

// least-squares decay rate of ln y over [t_lo, t_hi]
double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi);

struct DarkFit {
    double fitted_rate = 0.0;
    double predicted_rate = 0.0;  // 2 Re(i E_-)
    double t_lo = 0.0;
    double t_hi = 0.0;
    double edge_weight = 0.0;
    DarkSpectrum spectrum;
};
DarkFit fit_dark_rate(const TransmonParams& p, int nmax, double dt = 1.0,
                      BetaMethod method = BetaMethod::quadrature);

// ---------------------------------------------------------------------------
// reduced two-level equations with closure C_B1 = sqrt(2/pi) C_B0

struct ReducedState {
    Complex c_b0{};
    Complex c_g0{1.0, 0.0};
    Complex c_g1{};
    double norm2() const { return std::norm(c_b0) + std::norm(c_g0) + std::norm(c_g1); }
};
OdeRhs reduced_rhs(const TransmonParams& p);
ReducedState reduced_two_level(const TransmonParams& p, const ReducedState& s0, double t, const OdeOptions& opts = {});
std::vector<RegimeFlag> reduced_regime_flags(const TransmonParams& p);

// long time scale 2 |Omega_B|^2 / beta_B
double slow_rate_gamma(const TransmonParams& p, BetaMethod method = BetaMethod::drive_formula);

// ---------------------------------------------------------------------------
// two-level (B, G) Fock model used as ground truth for the multiscale solver

enum class Frame { shifted, unshifted };
CMat two_level_hamiltonian(const TransmonParams& p, int nmax, Frame frame);
// C_{G,0}(t) on t = k dt, k = 0..nsteps, starting from |G,0>
std::vector<Complex> two_level_cg0(const TransmonParams& p, double dt, int nsteps, int nmax, Frame frame);

// ---------------------------------------------------------------------------
// multiscale Volterra solver: dC/dt = -|Omega|^2 int_0^t K(t-w) C(w) dw

double volterra_kernel(const TransmonParams& p, double s);

struct VolterraResult {
    double dt = 0.0;
    std::vector<double> c;  // C_{G,0}(k dt)
    double fitted_rate = 0.0;
    double halved_dt_max_diff = -1.0;  // max |C_dt - C_{dt/2}| on the common grid, <0 when not run
    bool monotone = true;
};
VolterraResult multiscale_volterra(const TransmonParams& p, double tmax, double dt = 0.0, bool check_halving = true);

struct MultiscaleNorm {
    double norm = 1.0;
    double dnorm_dt = 0.0;
};
MultiscaleNorm norm_evolution_multiscale(const TransmonParams& p, double t);

// -i (kappa^2 nbar / 4) / (chi + i kappa / 2) - sqrt(2 pi / (kappa^2 nbar)) |Omega|^2
Complex unshifted_rate(const TransmonParams& p);
// magnitude of the Rabi-induced part of unshifted_rate
double unshifted_rabi_decay(const TransmonParams& p);

// overlap of the bright-state cavity with its initial vacuum in the kappa -> 0, kappa sqrt(nbar) = C limit
double diffusion_overlap(double C, double t);

struct CoherentAB {
    Complex alpha{};
    Complex beta{};
};
// cavity collapse while the qubit sits in B, starting from the low-field state
CoherentAB bright_collapse_trajectory(const TransmonParams& p, double t);

}  // namespace nextjump::transmon
