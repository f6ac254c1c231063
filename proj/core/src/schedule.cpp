#include "driftmark/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace driftmark {

std::string to_string(ScheduleKind k) {
  return k == ScheduleKind::Linear ? "linear" : "cosine";
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "linear") return ScheduleKind::Linear;
  if (s == "cosine") return ScheduleKind::Cosine;
  throw std::invalid_argument("unknown schedule kind: " + s);
}

NoiseSchedule build_schedule(ScheduleKind kind, int T, double beta_min,
                             double beta_max) {
  if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
  if (beta_min <= 0.0)
    throw std::invalid_argument("schedule: beta_min must be > 0");
  if (beta_max >= 1.0)
    throw std::invalid_argument("schedule: beta_max must be < 1");
  if (beta_min > beta_max)
    throw std::invalid_argument("schedule: beta_min must be <= beta_max");

  NoiseSchedule s;
  s.kind = kind;
  s.T = T;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.betas.resize(T);
  s.alphas.resize(T);
  s.alpha_bars.resize(T);

  if (kind == ScheduleKind::Linear) {
    for (int i = 0; i < T; ++i) {
      s.betas[i] = (T == 1) ? beta_min
                            : beta_min + (beta_max - beta_min) *
                                             static_cast<double>(i) / (T - 1);
    }
  } else {
    // Squared-cosine signal retention with a small offset; betas are the
    // per-step ratios, clipped away from 1 for numerical sanity.
    const double offset = 0.008;
    auto f = [&](double u) {
      double v = std::cos((u / T + offset) / (1.0 + offset) * M_PI / 2.0);
      return v * v;
    };
    const double f0 = f(0.0);
    double prev = 1.0;
    for (int i = 0; i < T; ++i) {
      double ab = f(static_cast<double>(i + 1)) / f0;
      double b = 1.0 - ab / prev;
      if (b > 0.999) b = 0.999;
      if (b < 0.0) b = 0.0;
      s.betas[i] = b;
      prev *= (1.0 - b);
    }
  }

  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    s.alphas[i] = 1.0 - s.betas[i];
    prod *= s.alphas[i];
    s.alpha_bars[i] = prod;
  }
  return s;
}

namespace {
void check_t(const NoiseSchedule& s, int t) {
  if (t < 1 || t > s.T)
    throw std::out_of_range("schedule: step index t out of range [1, T]");
}
}  // namespace

double alpha_bar(const NoiseSchedule& s, int t) {
  check_t(s, t);
  return s.alpha_bars[t - 1];
}

double beta(const NoiseSchedule& s, int t) {
  check_t(s, t);
  return s.betas[t - 1];
}

double alpha_bar0(const NoiseSchedule& s, int t) {
  if (t == 0) return 1.0;
  return alpha_bar(s, t);
}

double modulation_coeff(const NoiseSchedule& s, int t, double lambda) {
  const double ab = alpha_bar(s, t);
  return lambda * std::sqrt(ab) / std::sqrt(1.0 - ab);
}

double drift_correction_coeff(const NoiseSchedule& s, int t) {
  const double ab = alpha_bar(s, t);
  return -beta(s, t) * std::sqrt(ab) / (1.0 - ab);
}

Eigen::VectorXd forward_perturb(const NoiseSchedule& s,
                                const Eigen::VectorXd& z0, int t, Rng& rng) {
  check_t(s, t);
  const double ab = s.alpha_bars[t - 1];
  return std::sqrt(ab) * z0 +
         std::sqrt(1.0 - ab) * rng.gaussian_vec(z0.size());
}

std::vector<int> step_grid(int T, int steps) {
  if (steps < 1) throw std::invalid_argument("step_grid: steps must be >= 1");
  if (steps > T) throw std::invalid_argument("step_grid: steps must be <= T");
  std::vector<int> grid(steps);
  if (steps == 1) {
    grid[0] = T;
    return grid;
  }
  for (int i = 0; i < steps; ++i) {
    double g = T - static_cast<double>(i) * (T - 1) / (steps - 1);
    grid[i] = static_cast<int>(std::lround(g));
  }
  return grid;
}

}  // namespace driftmark
