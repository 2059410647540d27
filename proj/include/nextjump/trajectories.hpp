#pragma once

#include "nextjump/atom3.hpp"
#include "nextjump/cavity.hpp"
#include "nextjump/numerics.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nextjump::trajectories {

using LinearMap = std::function<void(const CVec& in, CVec& out)>;

struct JumpChannel {
    std::string label;
    LinearMap apply;          // L_k
    std::optional<CMat> dense;  // L_k as a matrix, required for the density-matrix oracle
};

struct EffectiveModel {
    int dim = 0;
    OdeRhs no_jump;                 // d psi / dt = -i H_eff psi
    std::optional<CMat> generator;  // -i H_eff as a matrix (density-matrix oracle)
    std::vector<JumpChannel> channels;
    CVec initial;                   // normalized start state
    double fast_rate = 1.0;         // sets the default dark threshold 10 / fast_rate
    OdeOptions ode{1e-10, 1e-12};

    // post-jump state: L_k psi normalized
    CVec reset(int channel, const CVec& psi) const;
};

struct NextJump {
    bool jumped = false;
    double t = 0.0;             // absolute jump time (or the horizon when no jump)
    int channel = -1;
    CVec state_at_jump;         // unnormalized no-jump state at t
    CVec post_state;            // normalized state after the reset (or normalized state at horizon)
};

// Inverse-transform sampling of the first jump after t0 from state0 (unit norm).
NextJump sample_next_jump(const EffectiveModel& m, const CVec& state0, Philox& rng, double t0, double tmax);

struct JumpRecord {
    std::vector<double> times;
    std::vector<int> channels;
    CVec final_state;  // normalized conditioned state at tmax
    double tmax = 0.0;
};

JumpRecord run_trajectory(const EffectiveModel& m, double tmax, RngStream stream);
JumpRecord run_trajectory(const EffectiveModel& m, const CVec& state0, double tmax, RngStream stream);

// First-jump times of n independent trajectories from the model's initial state (NaN when none before tmax).
std::vector<double> sample_first_jumps(const EffectiveModel& m, std::size_t n, double tmax, std::uint64_t seed);

struct Segment {
    double start = 0.0;
    double end = 0.0;
    bool dark = false;
    int terminating_channel = -1;  // -1 when cut by the horizon
};

struct TelegraphStats {
    double threshold = 0.0;
    double total_time = 0.0;
    double dark_time = 0.0;
    double p_D = 0.0;
    std::size_t n_dark = 0;          // dark segments (including one cut by the horizon)
    std::size_t n_dark_complete = 0; // dark segments terminated by a jump
    std::vector<double> dark_durations;  // completed dark segments only
    std::vector<std::size_t> branch_counts;  // per channel, over completed dark segments
    double branch_fraction_strong = 0.0;
    double sigma_binomial = 0.0;     // sqrt(p(1-p)/n_dark)
    double tail_rate = 0.0;          // MLE 1 / mean(L - threshold)
    std::vector<Segment> segments;
};

// strong_channel: index counted in branch_fraction_strong
TelegraphStats telegraph_stats(const JumpRecord& rec, double dark_threshold, int strong_channel = 0,
                               bool keep_segments = false);

struct LindbladReport {
    double max_deviation = 0.0;
    double bound = 0.0;          // 5 / sqrt(ntraj)
    double trace_identity_error = 0.0;  // |W + jump mass - 1| along the first no-jump flow
    CMat rho_mc;
    CMat rho_exact;
    bool pass = false;
};

CMat lindblad_evolve(const EffectiveModel& m, const CMat& rho0, double t, const OdeOptions& opts = {});
LindbladReport lindblad_consistency(const EffectiveModel& m, std::size_t ntraj, double t, std::uint64_t seedbase);
double trace_identity_error(const EffectiveModel& m, double t);

// ---------------------------------------------------------------------------
// model builders

EffectiveModel atom3_model(const atom3::Atom3Params& p);
// single cavity mode, vacuum start unless init given; detuned applies the chi term; g is the shifted reference
EffectiveModel cavity_model(const cavity::CavityParams& p, int nmax, bool detuned = false, Complex g = 0.0,
                            std::optional<CVec> init = std::nullopt);
// |e> -> |g> at rate beta
EffectiveModel decay_model(double beta);
// |0> <- |1> at rate b1, |0> <- |2> at rate b2, starting from c1|1> + c2|2>
EffectiveModel two_channel_model(double b1, double b2, Complex c1, Complex c2);

}  // namespace nextjump::trajectories
