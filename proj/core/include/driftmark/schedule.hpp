#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "driftmark/rng.hpp"

namespace driftmark {

enum class ScheduleKind { Linear, Cosine };

std::string to_string(ScheduleKind k);
ScheduleKind schedule_kind_from_string(const std::string& s);

// Variance-preserving discrete noise schedule. Steps are indexed t = 1..T
// (t = 0 denotes clean data, with signal retention alpha_bar = 1 by
// convention). Immutable after construction; all derived arrays are
// precomputed once.
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::Linear;
  int T = 0;
  double beta_min = 0.0;
  double beta_max = 0.0;
  std::vector<double> betas;       // betas[t-1] = beta_t
  std::vector<double> alphas;      // 1 - beta_t
  std::vector<double> alpha_bars;  // cumulative product of alphas
};

// Builds a schedule. Linear: beta_t evenly spaced over [beta_min, beta_max]
// (beta = beta_min when T == 1). Cosine: squared-cosine signal retention with
// offset 0.008, betas clipped to 0.999; beta_min/beta_max are recorded but do
// not shape the curve.
// Throws std::invalid_argument for T < 1, beta_min <= 0, beta_max >= 1, or
// beta_min > beta_max.
NoiseSchedule build_schedule(ScheduleKind kind, int T, double beta_min,
                             double beta_max);

// Cumulative signal retention at step t (1 <= t <= T).
double alpha_bar(const NoiseSchedule& s, int t);

// Per-step noise rate beta_t (1 <= t <= T).
double beta(const NoiseSchedule& s, int t);

// alpha_bar extended with the t = 0 convention alpha_bar(0) = 1, used at the
// final hop of reverse integration.
double alpha_bar0(const NoiseSchedule& s, int t);

// Strength-scaled modulation coefficient
//   gamma_t(lambda) = lambda * sqrt(alpha_bar_t) / sqrt(1 - alpha_bar_t),
// the scalar multiplying the target residual in the noise-prediction
// correction.
double modulation_coeff(const NoiseSchedule& s, int t, double lambda);

// Coefficient of the residual in the induced reverse-drift change, with the
// per-step diffusion coefficient g^2 = beta_t:
//   -beta_t * sqrt(alpha_bar_t) / (1 - alpha_bar_t)
//   == -(beta_t / sqrt(1 - alpha_bar_t)) * modulation_coeff(s, t, 1).
double drift_correction_coeff(const NoiseSchedule& s, int t);

// Forward noising: returns sqrt(alpha_bar_t) * z0 + sqrt(1 - alpha_bar_t) * eps
// with eps drawn standard normal from rng.
Eigen::VectorXd forward_perturb(const NoiseSchedule& s,
                                const Eigen::VectorXd& z0, int t, Rng& rng);

// Evenly spaced descending integer sub-grid of {T..1} with `steps` entries,
// always including T and (for steps >= 2) ending at 1. Reverse integrators
// append a final hop from 1 to 0.
std::vector<int> step_grid(int T, int steps);

}  // namespace driftmark
