#pragma once

#include "nextjump/numerics.hpp"

#include <vector>

namespace nextjump::cavity {

// Which cavity frequency the drive sits on. With resonant_B the qubit in G sees a detuning chi.
enum class DriveTuning { resonant_G, resonant_B };

struct CavityParams {
    double kappa = 1.0;
    double chi = 0.0;
    double nbar = 4.0;
    double gamma_drive = 1.0;  // drive strength, kappa sqrt(nbar) / 2 unless overridden
    DriveTuning tuning = DriveTuning::resonant_G;
    Complex gamma_shift{0.0, 0.0};  // reference amplitude of shifted detection

    static CavityParams from_nbar(double kappa, double chi, double nbar,
                                  DriveTuning tuning = DriveTuning::resonant_G);
};

// State exp(alpha c^dag + beta)|0>
struct CoherentPoint {
    Complex alpha{};
    Complex beta{};
};

CoherentPoint resonant_trajectory(const CavityParams& p, double t);
// Detuned evolution from the normalized coherent state |alpha0), i.e. beta(0) = -|alpha0|^2/2.
CoherentPoint detuned_trajectory(const CavityParams& p, Complex alpha0, double t);
// Same, with an explicit initial beta.
CoherentPoint detuned_trajectory(const CavityParams& p, Complex alpha0, Complex beta0, double t);

double log_survival_W(const CoherentPoint& c);
double survival_W(const CoherentPoint& c);
double jump_density_D(const CoherentPoint& c, const CavityParams& p);

double short_time_W(const CavityParams& p, double t);
double mean_jump_time(const CavityParams& p);

// Steady amplitude of the detuned drive, Gamma / (kappa/2 - i chi).
Complex gamma_L_drive(const CavityParams& p);
// Low-field amplitude in the shifted frame, i sqrt(nbar) kappa / (2 chi + i kappa).
Complex gamma_L_shifted(const CavityParams& p);

// dpsi/dt = (i chi_eff - kappa/2) N psi + Gamma (c^dag - c) psi, chi_eff = chi if detuned else 0.
FockRhs fock_rhs(const CavityParams& p, bool detuned);
FockVector evolve_fock_oracle(const CavityParams& p, const FockVector& state0, double t, bool detuned = false,
                              const OdeOptions& opts = {});

// |<coherent(alpha,beta)|psi>|^2 / (<psi|psi> <coh|coh>)
double coherent_fidelity(const FockVector& psi, const CoherentPoint& c);

// Shifted-detection effective generator (atom in G, drive resonant):
// -i H_eff = Gamma (c^dag - c) - kappa/2 c^dag c - kappa |g|^2 / 2 + kappa g^* c
FockRhs shifted_rhs(const CavityParams& p, Complex g);

struct ShiftedBasisReport {
    double gamma_ref = 0.0;      // reference amplitude actually used
    double max_norm_drift = 0.0; // max |norm^2 - 1| for g = sqrt(nbar)
    double fitted_rate = 0.0;    // -d ln norm^2 / dt at the perturbed reference
    double predicted_rate = 0.0; // kappa |delta g|^2
    double unshifted_W_error = 0.0;  // g = 0 against survival_W
};
ShiftedBasisReport shifted_basis_check(const CavityParams& p, double rel_perturbation = 0.01, double tmax = 4.0);

}  // namespace nextjump::cavity
