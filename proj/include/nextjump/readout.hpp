#pragma once

#include "nextjump/cavity.hpp"
#include "nextjump/numerics.hpp"

#include <vector>

namespace nextjump::readout {

using ErfcFn = double (*)(double);

// epsilon = P_G / (P_G + P_B), P_G = 1 - W(chi, t), P_B = 1 - W(0, t), both from the vacuum.
// Returns 1/2 when the two branches are indistinguishable (chi = 0 or t = 0).
double error_next_jump(const cavity::CavityParams& p, double t);

// (1/sqrt 18) (Gamma/kappa) (kappa t)^{5/2}
double snr_heterodyne(const cavity::CavityParams& p, double t);

// erfc(snr/2) / 2; erfc_fn lets a caller substitute the special function
double error_dispersive(double snr, ErfcFn erfc_fn = nextjump::erfc);

// Y = -[(1 + (2 chi/kappa)^2) / (nbar W)] dW/dtau with dW/dtau = -D / kappa, tau = kappa t
double log_decrement_Y(const cavity::CavityParams& p, double tau);

struct ErrorMinimum {
    double tau = 0.0;
    double eps = 0.0;
    double chi_t = 0.0;
    double scale = 0.0;  // (kappa nbar^{1/3} / chi)^2
    double ratio = 0.0;  // eps / scale
};
ErrorMinimum next_jump_error_minimum(const cavity::CavityParams& p, double tau_max = 12.0);

// first tau where error_dispersive(snr(tau)) drops to level
double dispersive_crossing(const cavity::CavityParams& p, double level = 1e-3, double tau_max = 50.0,
                           ErfcFn erfc_fn = nextjump::erfc);

// Dominant frequency of Y(tau) on [0, tau_max] in cycles per unit tau
// (mean removed, Hann window, zero padding).
double y_oscillation_frequency(const cavity::CavityParams& p, double tau_max = 10.0, int npoints = 4096,
                               int pad_factor = 16);

struct ReadoutCurves {
    std::vector<double> tau;
    std::vector<double> eps_nextjump;
    std::vector<double> eps_dispersive;
    std::vector<double> snr;
    std::vector<double> Y;
    double kappa = 1.0;
    double nbar = 100.0;
    double chi_nextjump = 20.0;
    double chi_dispersive = 0.5;
};

struct Figure1Defaults {
    double kappa = 1.0;
    double nbar = 100.0;
    double chi_nextjump = 20.0;   // in units of kappa
    double chi_dispersive = 0.5;  // in units of kappa
    double tau_max = 12.0;
    int npoints = 1201;
};

ReadoutCurves figure1_dataset(const Figure1Defaults& d = {}, ErfcFn erfc_fn = nextjump::erfc);

}  // namespace nextjump::readout
