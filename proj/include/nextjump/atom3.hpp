#pragma once

#include "nextjump/numerics.hpp"

#include <vector>

namespace nextjump::atom3 {

struct Atom3Params {
    Complex omega1{10.0, 0.0};  // strong transition Rabi frequency
    Complex omega2{0.05, 0.0};  // weak transition Rabi frequency
    double delta2 = 10.0;       // weak drive detuning
    double beta1 = 1.0;         // strong decay rate
    double beta2 = 0.0;         // weak decay rate

    double epsilon() const { return std::abs(omega2) / beta1; }
    // |Omega1| = 10 beta1, delta2 = |Omega1|, |Omega2| = eps beta1
    static Atom3Params from_epsilon(double eps, double beta1 = 1.0, double drive_ratio = 10.0, double beta2 = 0.0);
};

struct Atom3State {
    Complex c0{1.0, 0.0};
    Complex c1{};
    Complex c2{};

    double norm2() const { return std::norm(c0) + std::norm(c1) + std::norm(c2); }
    static Atom3State reset() { return {}; }
    CVec to_vec() const;
    static Atom3State from_vec(const CVec& v);
};

struct NullEvolution {
    Atom3State state;
    double W = 1.0;
};

// non-Hermitian no-emission generator dC/dt = M C on (c0, c1, c2)
CMat generator(const Atom3Params& p);
OdeRhs null_rhs(const Atom3Params& p);

NullEvolution evolve_null(const Atom3Params& p, const Atom3State& s, double t, const OdeOptions& opts = {});
std::vector<NullEvolution> evolve_null_series(const Atom3Params& p, const Atom3State& s,
                                              const std::vector<double>& times, const OdeOptions& opts = {});

double beta_ell(const Atom3Params& p);

// two-timescale closed form for the strongly emitting amplitude after a reset
Complex amplitude_c1_closed(const Atom3Params& p, double t);

struct DarkFraction {
    double p_D = 0.0;
    double branch_Gamma = 0.0;
};
DarkFraction dark_fraction(const Atom3Params& p);

// normalized slow-subspace state seen after a no-emission window of length T
Atom3State project_slow(const Atom3Params& p, double T, double t);

// unitary (unmonitored) evolution of the strong-level amplitude
Complex unitary_c1(const Atom3Params& p, double t);
// log of the no-emission probability exp(-beta1 T / 2) when the dark state is ignored
double scenario_a_log_dark_probability(const Atom3Params& p, double T);

std::vector<RegimeFlag> regime_flags(const Atom3Params& p, double T = 0.0);

}  // namespace nextjump::atom3
