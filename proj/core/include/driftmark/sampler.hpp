#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "driftmark/injection.hpp"
#include "driftmark/oracle.hpp"
#include "driftmark/rng.hpp"
#include "driftmark/schedule.hpp"

namespace driftmark {

// Reverse-process integrator families. All consume the same corrected noise
// prediction; they differ only in how a hop t -> t_prev is advanced:
//   DDIM(eta):          deterministic update at eta = 0, interpolating to the
//                       ancestral posterior at eta = 1.
//   AncestralDDPM:      posterior mean plus sqrt(beta_tilde) noise.
//   EulerMaruyamaSDE:   one Euler-Maruyama step of the reverse SDE with
//                       per-hop diffusion g^2 = beta_eff (= beta_t on the
//                       full grid).
//   ProbabilityFlowODE: the deterministic flow sharing the same marginals.
struct SamplerKind {
  enum class Family { DDIM, AncestralDDPM, EulerMaruyamaSDE, ProbabilityFlowODE };
  Family family = Family::DDIM;
  double eta = 0.0;  // only meaningful for DDIM; must lie in [0, 1]
};

SamplerKind ddim(double eta = 0.0);
SamplerKind ancestral();
SamplerKind em_sde();
SamplerKind pf_ode();

// Canonical CLI/CSV names: "ddim", "ddim(eta)", "ancestral", "em-sde",
// "pf-ode".
std::string to_string(const SamplerKind& k);
SamplerKind sampler_kind_from_string(const std::string& s);

struct Trajectory {
  std::vector<LatentState> states;  // t = T down to t = 0, steps+1 entries
  std::uint64_t seed = 0;
  std::optional<InjectionConfig> injected;
  std::vector<double> eps_norms;  // ||eps_hat||_2 per hop, after correction
};

// Standard deviation of the noise term a sampler adds on hop t -> t_prev.
// Depends only on the schedule and hop, never on the state; 0 means the hop
// draws nothing.
double noise_scale(const SamplerKind& kind, const NoiseSchedule& s, int t,
                   int t_prev);

// One reverse hop t -> t_prev (t > t_prev >= 0): computes the exact noise
// prediction from the oracle, applies the injection correction if cfg is
// present, and advances z. Draws from rng only when noise_scale > 0.
Eigen::VectorXd step(const SamplerKind& kind, const ScoreOracle& o,
                     const NoiseSchedule& s, const Eigen::VectorXd& z, int t,
                     int t_prev, const InjectionConfig* cfg, Rng& rng);

// Full reverse pass: z_T drawn standard normal from seed, hops over the
// evenly spaced `steps`-point sub-grid of {T..1} and a final hop to 0.
// Deterministic given (kind, seed, cfg).
Trajectory sample(const SamplerKind& kind, const ScoreOracle& o,
                  const NoiseSchedule& s, int steps,
                  const InjectionConfig* cfg, std::uint64_t seed);

// Reverse pass from a given interior state (z at step t_init) down to 0 on
// the dense integer grid t_init, t_init-1, ..., 1, 0. Used by regeneration
// attacks. t_init = 0 returns z unchanged.
Eigen::VectorXd denoise_from(const SamplerKind& kind, const ScoreOracle& o,
                             const NoiseSchedule& s, Eigen::VectorXd z,
                             int t_init, const InjectionConfig* cfg, Rng& rng);

// Runs the deterministic DDIM update backwards (t increasing) over the same
// sub-grid sample() uses, recovering an estimate of z_T from z_0. Each hop
// solves the implicit per-step inverse by fixed-point iteration, so
// invert-then-sample is an approximate identity. Uses the uncorrected
// oracle.
Eigen::VectorXd ddim_invert(const ScoreOracle& o, const NoiseSchedule& s,
                            const Eigen::VectorXd& z0, int steps);

// Clean and injected trajectories advanced in lockstep with identical
// Gaussian draws (common random numbers); returns (z0_clean, z0_marked).
// The measured difference isolates the injection's realized shift.
std::pair<Eigen::VectorXd, Eigen::VectorXd> paired_sample(
    const SamplerKind& kind, const ScoreOracle& o, const NoiseSchedule& s,
    int steps, const InjectionConfig& cfg, std::uint64_t seed);

}  // namespace driftmark
