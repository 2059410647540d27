#pragma once

#include "nextjump/numerics.hpp"

#include <cstdint>
#include <vector>

namespace nextjump::heterodyne {

// Driven damped cavity read out by heterodyne (omega > 0) or homodyne (omega = 0) detection.
// Conditioned, unnormalized evolution on a measurement record zeta(t):
//   dpsi/dt = [xi(t) c + Gamma (c^dag - c) - kappa/2 c^dag c] psi,   xi = (sqrt(kappa)/B) zeta' e^{-i phi}
// with phi(t) = phi0 + omega t.
struct HeterodyneParams {
    double kappa = 1.0;
    double gamma_drive = 1.0;  // Gamma
    double B = 1.0;            // beam amplitude, <<zeta' zeta'>> = B^2 delta
    double omega = 50.0;       // phase rate; 0 selects homodyne
    double phi0 = 0.0;

    static HeterodyneParams from_nbar(double kappa, double nbar, double B = 1.0, double omega_over_kappa = 50.0);
    double nbar() const;        // (2 Gamma / kappa)^2
    double alpha_steady() const;  // 2 Gamma / kappa
    double phase(double t) const { return phi0 + omega * t; }
    // throws std::invalid_argument unless dt <= min(0.05/omega, 0.01/kappa)
    void check_step(double dt) const;
};

struct NoisePath {
    double dt = 0.0;
    double B = 1.0;
    std::vector<double> increments;  // Delta zeta per step, variance B^2 dt
    double duration() const { return dt * static_cast<double>(increments.size()); }
};

NoisePath make_noise_path(const HeterodyneParams& p, double dt, std::size_t nsteps, RngStream stream);
NoisePath zero_path(const HeterodyneParams& p, double dt, std::size_t nsteps);

// Coherent ansatz psi = exp(alpha c^dag + beta)|0> plus the record integrals
//   T(t) = (sqrt(kappa)/B) int zeta' e^{-i phi},  S(t) = (sqrt(kappa)/B) int zeta' e^{-i phi} e^{-kappa s/2}.
struct CoherentSSE {
    double t = 0.0;
    Complex alpha{};
    Complex beta{};
    Complex T{};
    Complex S{};
    double log_norm2() const { return 2.0 * beta.real() + std::norm(alpha); }
};

struct FockSSE {
    double t = 0.0;
    FockVector psi;
    Complex T{};
    Complex S{};
};

// Exact propagation of the coherent ansatz over one step with constant zeta'.
void coherent_step(const HeterodyneParams& p, CoherentSSE& s, double dzeta, double h);
CoherentSSE integrate_sse_coherent(const HeterodyneParams& p, const NoisePath& path, Complex alpha0,
                                   Complex beta0 = 0.0);
// Stochastic Euler oracle in a truncated Fock space.
FockSSE integrate_sse_fock(const HeterodyneParams& p, const NoisePath& path, const FockVector& psi0);

struct ClosedForm {
    Complex alpha{};
    Complex beta{};
};
// Closed form of (alpha, beta) from the accumulated T, S with beta(0) = 0.
ClosedForm closed_form(const HeterodyneParams& p, Complex alpha0, double t, Complex T, Complex S);

// Fock amplitudes of exp(alpha c^dag + beta)|0> up to nmax (unnormalized).
CVec coherent_amplitudes(Complex alpha, Complex beta, int nmax);
// |<a|b>|^2 / (<a|a><b|b>)
double ray_fidelity(const CVec& a, const CVec& b);

// ---------------------------------------------------------------------------
// current statistics

struct CurrentSample {
    Complex current_B{};   // I / B with I = (1/t) int zeta' e^{-i phi}
    Complex current_k{};   // T/t, the kappa-normalized current
    double log_weight = 0.0;  // log of ||psi(t)||^2 P[zeta] / Q[zeta]
};

struct EnsembleOptions {
    double t = 20.0;
    double dt = 1e-3;
    std::size_t npaths = 10000;
    std::uint64_t seed = 0;
    bool importance = true;  // draw records from the drift-corrected law instead of the raw Gaussian
    Complex alpha0{};
    Complex beta0{};
};

std::vector<CurrentSample> current_ensemble(const HeterodyneParams& p, const EnsembleOptions& o);

struct CurrentStats {
    std::size_t n = 0;
    double peak_abs = 0.0;        // mode of the weighted |I/B| distribution
    double weighted_mean_abs = 0.0;
    double weighted_std_abs = 0.0;
    double relative_width = 0.0;  // weighted_std_abs / weighted_mean_abs
    double effective_samples = 0.0;
    double log_weight_spread = 0.0;  // max - min log weight
    Complex raw_mean{};           // unweighted mean of I/B
    double raw_var = 0.0;         // unweighted E|I/B|^2
};

CurrentStats current_statistics(const std::vector<CurrentSample>& samples, double bin_width = 0.05);

// ---------------------------------------------------------------------------
// maximum-likelihood record versus the null-measurement generator

struct NullReport {
    double max_elementwise = 0.0;  // max |phi_sse - phi_heff| over the time grid
    double max_norm_factor = 0.0;  // max | ||psi|| e^{-t|I|^2/2kappa} - ||phi|| |
    double max_relative_norm_factor = 0.0;
    int nmax = 0;
};

NullReport null_correspondence(const HeterodyneParams& p, Complex alpha0, double tmax, int npoints = 51,
                               int nmax = 0);

// Drift form with the classical term I = <c + c^dag> (kappa = B = 1) against the drift-free form on the
// same record. The drift form is integrated in Fock space, the drift-free one through the coherent ansatz.
struct GaugeReport {
    double max_quadrature_diff = 0.0;
    double min_ray_fidelity = 1.0;
    double final_quadrature = 0.0;
    int nmax = 0;
};

GaugeReport gauge_equivalence(const HeterodyneParams& p, const NoisePath& path, Complex alpha0, int nmax = 0);

}  // namespace nextjump::heterodyne
