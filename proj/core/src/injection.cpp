#include "driftmark/injection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace driftmark {

std::string to_string(PresetKind p) {
  switch (p) {
    case PresetKind::Q:
      return "Q";
    case PresetKind::R:
      return "R";
    default:
      return "custom";
  }
}

PresetKind preset_kind_from_string(const std::string& s) {
  if (s == "Q" || s == "q") return PresetKind::Q;
  if (s == "R" || s == "r") return PresetKind::R;
  if (s == "custom") return PresetKind::Custom;
  throw std::invalid_argument("unknown preset: " + s);
}

void validate(const InjectionConfig& cfg, const NoiseSchedule& s) {
  if (cfg.delta_wm.size() == 0)
    throw std::invalid_argument("injection: delta_wm must be non-empty");
  if (cfg.lambda < 0.0)
    throw std::invalid_argument("injection: lambda must be >= 0");
  if (cfg.t_start < 1 || cfg.t_end > s.T || cfg.t_start > cfg.t_end)
    throw std::invalid_argument(
        "injection: window must satisfy 1 <= t_start <= t_end <= T");
}

InjectionConfig make_injection(const Eigen::VectorXd& delta, double lambda,
                               int t_start, int t_end,
                               const NoiseSchedule& s) {
  InjectionConfig cfg;
  cfg.delta_wm = delta;
  cfg.lambda = lambda;
  cfg.t_start = t_start;
  cfg.t_end = t_end;
  cfg.preset = PresetKind::Custom;
  validate(cfg, s);
  return cfg;
}

namespace {
int scale_bound(int bound_at_50, int T) {
  double scaled = static_cast<double>(bound_at_50) * T / 50.0;
  int v = static_cast<int>(std::lround(scaled));
  return std::clamp(v, 1, T);
}
}  // namespace

InjectionConfig make_preset(PresetKind kind, const NoiseSchedule& s,
                            const Eigen::VectorXd& delta) {
  if (delta.size() == 0)
    throw std::invalid_argument("injection: delta_wm must be non-empty");
  InjectionConfig cfg;
  cfg.delta_wm = delta;
  cfg.preset = kind;
  switch (kind) {
    case PresetKind::Q:
      cfg.lambda = 0.85;
      cfg.t_start = scale_bound(20, s.T);
      cfg.t_end = scale_bound(45, s.T);
      break;
    case PresetKind::R:
      cfg.lambda = 1.0;
      cfg.t_start = scale_bound(0, s.T);  // clamps to 1
      cfg.t_end = scale_bound(50, s.T);
      break;
    default:
      throw std::invalid_argument("make_preset: kind must be Q or R");
  }
  validate(cfg, s);
  return cfg;
}

Eigen::VectorXd corrected_eps(const Eigen::VectorXd& eps,
                              const InjectionConfig& cfg,
                              const NoiseSchedule& s, int t) {
  if (eps.size() != cfg.delta_wm.size())
    throw std::invalid_argument(
        "corrected_eps: eps / delta_wm dimension mismatch");
  if (!in_window(cfg, t) || cfg.lambda == 0.0) return eps;
  return eps - modulation_coeff(s, t, cfg.lambda) * cfg.delta_wm;
}

}  // namespace driftmark
