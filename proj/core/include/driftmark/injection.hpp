#pragma once

#include <Eigen/Dense>

#include <string>

#include "driftmark/schedule.hpp"

namespace driftmark {

enum class PresetKind { Q, R, Custom };

std::string to_string(PresetKind p);
PresetKind preset_kind_from_string(const std::string& s);

// Watermark injection configuration: the target clean-latent residual
// delta_wm, a strength lambda >= 0, and an inclusive reverse-step window
// [t_start, t_end] (1 <= t_start <= t_end <= T) on which the noise-prediction
// correction is active.
struct InjectionConfig {
  Eigen::VectorXd delta_wm;
  double lambda = 0.0;
  int t_start = 1;
  int t_end = 1;
  PresetKind preset = PresetKind::Custom;
};

// Validates window ordering/range and delta shape against the schedule.
void validate(const InjectionConfig& cfg, const NoiseSchedule& s);

// Builds a validated custom configuration.
InjectionConfig make_injection(const Eigen::VectorXd& delta, double lambda,
                               int t_start, int t_end, const NoiseSchedule& s);

// Named presets, defined at T = 50 as
//   Q (quality-oriented):  window [20, 45], lambda = 0.85
//   R (robustness-first):  window [1, 50],  lambda = 1.0
// and scaled proportionally for other T (rounded to nearest integer, clamped
// to [1, T]). Window bounds count the reverse-loop variable t, where t = T is
// the first (most noised) step.
InjectionConfig make_preset(PresetKind kind, const NoiseSchedule& s,
                            const Eigen::VectorXd& delta);

inline bool in_window(const InjectionConfig& cfg, int t) {
  return t >= cfg.t_start && t <= cfg.t_end;
}

// The noise-prediction correction: for t inside the window returns
//   eps - modulation_coeff(s, t, lambda) * delta_wm,
// otherwise eps unchanged. Depends only on (t, alpha_bar_t, lambda, delta);
// deliberately takes no sampler state.
Eigen::VectorXd corrected_eps(const Eigen::VectorXd& eps,
                              const InjectionConfig& cfg,
                              const NoiseSchedule& s, int t);

}  // namespace driftmark
