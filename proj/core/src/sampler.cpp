#include "driftmark/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace driftmark {

SamplerKind ddim(double eta) {
  if (eta < 0.0 || eta > 1.0)
    throw std::invalid_argument("ddim: eta must lie in [0, 1]");
  return SamplerKind{SamplerKind::Family::DDIM, eta};
}
SamplerKind ancestral() {
  return SamplerKind{SamplerKind::Family::AncestralDDPM, 0.0};
}
SamplerKind em_sde() {
  return SamplerKind{SamplerKind::Family::EulerMaruyamaSDE, 0.0};
}
SamplerKind pf_ode() {
  return SamplerKind{SamplerKind::Family::ProbabilityFlowODE, 0.0};
}

std::string to_string(const SamplerKind& k) {
  switch (k.family) {
    case SamplerKind::Family::DDIM:
      if (k.eta == 0.0) return "ddim";
      return "ddim(" + std::to_string(k.eta) + ")";
    case SamplerKind::Family::AncestralDDPM:
      return "ancestral";
    case SamplerKind::Family::EulerMaruyamaSDE:
      return "em-sde";
    default:
      return "pf-ode";
  }
}

SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "ddim") return ddim(0.0);
  if (s.rfind("ddim(", 0) == 0 && s.back() == ')')
    return ddim(std::stod(s.substr(5, s.size() - 6)));
  if (s == "ancestral") return ancestral();
  if (s == "em-sde") return em_sde();
  if (s == "pf-ode") return pf_ode();
  throw std::invalid_argument("unknown sampler kind: " + s);
}

namespace {

struct Hop {
  double ab_t;       // alpha_bar at t
  double ab_p;       // alpha_bar at t_prev (1 when t_prev == 0)
  double alpha_eff;  // ab_t / ab_p: effective per-hop retention
  double beta_eff;   // 1 - alpha_eff: effective per-hop noise rate
};

Hop hop_coeffs(const NoiseSchedule& s, int t, int t_prev) {
  if (t_prev < 0 || t <= t_prev)
    throw std::invalid_argument("sampler: hop requires t > t_prev >= 0");
  Hop h;
  h.ab_t = alpha_bar(s, t);
  h.ab_p = alpha_bar0(s, t_prev);
  h.alpha_eff = h.ab_t / h.ab_p;
  h.beta_eff = 1.0 - h.alpha_eff;
  return h;
}

// Advances one hop from z given the (possibly corrected) noise prediction.
// `noise` must be a standard normal draw when noise_scale > 0; it is ignored
// otherwise.
Eigen::VectorXd advance(const SamplerKind& kind, const Hop& h,
                        const Eigen::VectorXd& z, const Eigen::VectorXd& eps,
                        double nscale, const Eigen::VectorXd* noise) {
  const double root_ab_t = std::sqrt(h.ab_t);
  const double root_1mab_t = std::sqrt(1.0 - h.ab_t);
  switch (kind.family) {
    case SamplerKind::Family::DDIM: {
      const Eigen::VectorXd z0 = (z - root_1mab_t * eps) / root_ab_t;
      const double sigma2 = nscale * nscale;
      const double dir = std::sqrt(std::max(0.0, 1.0 - h.ab_p - sigma2));
      Eigen::VectorXd out = std::sqrt(h.ab_p) * z0 + dir * eps;
      if (nscale > 0.0) out += nscale * (*noise);
      return out;
    }
    case SamplerKind::Family::AncestralDDPM: {
      const Eigen::VectorXd z0 = (z - root_1mab_t * eps) / root_ab_t;
      const double denom = 1.0 - h.ab_t;
      Eigen::VectorXd mu =
          (std::sqrt(h.ab_p) * h.beta_eff / denom) * z0 +
          (std::sqrt(h.alpha_eff) * (1.0 - h.ab_p) / denom) * z;
      if (nscale > 0.0) mu += nscale * (*noise);
      return mu;
    }
    case SamplerKind::Family::EulerMaruyamaSDE: {
      const Eigen::VectorXd score = -eps / root_1mab_t;
      Eigen::VectorXd out =
          (2.0 - std::sqrt(h.alpha_eff)) * z + h.beta_eff * score;
      if (nscale > 0.0) out += nscale * (*noise);
      return out;
    }
    default: {  // ProbabilityFlowODE
      const Eigen::VectorXd score = -eps / root_1mab_t;
      return (2.0 - std::sqrt(h.alpha_eff)) * z + 0.5 * h.beta_eff * score;
    }
  }
}

Eigen::VectorXd predicted_eps(const ScoreOracle& o, const NoiseSchedule& s,
                              const Eigen::VectorXd& z, int t,
                              const InjectionConfig* cfg) {
  const Eigen::VectorXd score = exact_score(o, s, z, t);
  Eigen::VectorXd eps = reparameterize(z, score, s, t, Param::Score, Param::Eps);
  if (cfg) eps = corrected_eps(eps, *cfg, s, t);
  return eps;
}

// Hop targets for a `steps`-point run: the sub-grid tail plus the final hop
// to 0.
std::vector<int> hop_targets(const std::vector<int>& grid) {
  std::vector<int> targets(grid.begin() + 1, grid.end());
  targets.push_back(0);
  return targets;
}

}  // namespace

double noise_scale(const SamplerKind& kind, const NoiseSchedule& s, int t,
                   int t_prev) {
  const Hop h = hop_coeffs(s, t, t_prev);
  switch (kind.family) {
    case SamplerKind::Family::DDIM: {
      if (kind.eta == 0.0) return 0.0;
      const double var = (1.0 - h.ab_p) / (1.0 - h.ab_t) * h.beta_eff;
      return kind.eta * std::sqrt(std::max(0.0, var));
    }
    case SamplerKind::Family::AncestralDDPM: {
      const double var = (1.0 - h.ab_p) / (1.0 - h.ab_t) * h.beta_eff;
      return std::sqrt(std::max(0.0, var));
    }
    case SamplerKind::Family::EulerMaruyamaSDE:
      return std::sqrt(h.beta_eff);
    default:
      return 0.0;
  }
}

Eigen::VectorXd step(const SamplerKind& kind, const ScoreOracle& o,
                     const NoiseSchedule& s, const Eigen::VectorXd& z, int t,
                     int t_prev, const InjectionConfig* cfg, Rng& rng) {
  if (z.size() != o.dim)
    throw std::invalid_argument("step: latent dimension mismatch");
  const Hop h = hop_coeffs(s, t, t_prev);
  const Eigen::VectorXd eps = predicted_eps(o, s, z, t, cfg);
  const double nscale = noise_scale(kind, s, t, t_prev);
  if (nscale > 0.0) {
    const Eigen::VectorXd xi = rng.gaussian_vec(z.size());
    return advance(kind, h, z, eps, nscale, &xi);
  }
  return advance(kind, h, z, eps, 0.0, nullptr);
}

Trajectory sample(const SamplerKind& kind, const ScoreOracle& o,
                  const NoiseSchedule& s, int steps,
                  const InjectionConfig* cfg, std::uint64_t seed) {
  if (steps < 1 || steps > s.T)
    throw std::invalid_argument("sample: steps must lie in [1, T]");
  if (cfg) validate(*cfg, s);
  const std::vector<int> grid = step_grid(s.T, steps);
  const std::vector<int> targets = hop_targets(grid);

  Trajectory traj;
  traj.seed = seed;
  if (cfg) traj.injected = *cfg;
  traj.states.reserve(steps + 1);
  traj.eps_norms.reserve(steps);

  Rng rng(seed);
  Eigen::VectorXd z = rng.gaussian_vec(o.dim);
  traj.states.push_back({z, s.T});

  for (std::size_t i = 0; i < targets.size(); ++i) {
    const int t = grid[i];
    const int t_prev = targets[i];
    const Hop h = hop_coeffs(s, t, t_prev);
    const Eigen::VectorXd eps = predicted_eps(o, s, z, t, cfg);
    traj.eps_norms.push_back(eps.norm());
    const double nscale = noise_scale(kind, s, t, t_prev);
    if (nscale > 0.0) {
      const Eigen::VectorXd xi = rng.gaussian_vec(z.size());
      z = advance(kind, h, z, eps, nscale, &xi);
    } else {
      z = advance(kind, h, z, eps, 0.0, nullptr);
    }
    traj.states.push_back({z, t_prev});
  }
  return traj;
}

Eigen::VectorXd denoise_from(const SamplerKind& kind, const ScoreOracle& o,
                             const NoiseSchedule& s, Eigen::VectorXd z,
                             int t_init, const InjectionConfig* cfg,
                             Rng& rng) {
  if (t_init < 0 || t_init > s.T)
    throw std::invalid_argument("denoise_from: t_init out of range [0, T]");
  for (int t = t_init; t >= 1; --t) z = step(kind, o, s, z, t, t - 1, cfg, rng);
  return z;
}

Eigen::VectorXd ddim_invert(const ScoreOracle& o, const NoiseSchedule& s,
                            const Eigen::VectorXd& z0, int steps) {
  if (z0.size() != o.dim)
    throw std::invalid_argument("ddim_invert: latent dimension mismatch");
  if (steps == 0) return z0;
  if (steps < 0 || steps > s.T)
    throw std::invalid_argument("ddim_invert: steps must lie in [0, T]");

  const std::vector<int> grid = step_grid(s.T, steps);
  const std::vector<int> targets = hop_targets(grid);

  Eigen::VectorXd z = z0;
  // Undo the hops in reverse order: for the forward hop t -> t_lo with
  // z_lo = sqrt(ab_lo/ab_t) z + (sqrt(1-ab_lo) - sqrt(ab_lo/ab_t)
  // sqrt(1-ab_t)) eps_hat(z, t), the inverse satisfies the fixed point
  //   z = sqrt(ab_t/ab_lo) z_lo
  //     + (sqrt(1-ab_t) - sqrt(ab_t/ab_lo) sqrt(1-ab_lo)) eps_hat(z, t).
  for (int i = static_cast<int>(targets.size()) - 1; i >= 0; --i) {
    const int t = grid[i];
    const int t_lo = targets[i];
    const double ab_t = alpha_bar(s, t);
    const double ab_lo = alpha_bar0(s, t_lo);
    const double scale = std::sqrt(ab_t / ab_lo);
    const double coef =
        std::sqrt(1.0 - ab_t) - scale * std::sqrt(1.0 - ab_lo);
    const Eigen::VectorXd y = z;
    Eigen::VectorXd cur = y;
    for (int iter = 0; iter < 64; ++iter) {
      const Eigen::VectorXd eps = predicted_eps(o, s, cur, t, nullptr);
      Eigen::VectorXd next = scale * y + coef * eps;
      const double move = (next - cur).norm();
      cur.swap(next);
      if (move <= 1e-13 * (1.0 + cur.norm())) break;
    }
    z = cur;
  }
  return z;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> paired_sample(
    const SamplerKind& kind, const ScoreOracle& o, const NoiseSchedule& s,
    int steps, const InjectionConfig& cfg, std::uint64_t seed) {
  if (steps < 1 || steps > s.T)
    throw std::invalid_argument("paired_sample: steps must lie in [1, T]");
  validate(cfg, s);
  const std::vector<int> grid = step_grid(s.T, steps);
  const std::vector<int> targets = hop_targets(grid);

  Rng rng(seed);
  Eigen::VectorXd zc = rng.gaussian_vec(o.dim);
  Eigen::VectorXd zw = zc;

  for (std::size_t i = 0; i < targets.size(); ++i) {
    const int t = grid[i];
    const int t_prev = targets[i];
    const Hop h = hop_coeffs(s, t, t_prev);
    const Eigen::VectorXd eps_c = predicted_eps(o, s, zc, t, nullptr);
    const Eigen::VectorXd eps_w = predicted_eps(o, s, zw, t, &cfg);
    // The noise scale depends only on the hop, so one shared draw keeps the
    // Wiener increments identical across the pair.
    const double nscale = noise_scale(kind, s, t, t_prev);
    if (nscale > 0.0) {
      const Eigen::VectorXd xi = rng.gaussian_vec(o.dim);
      zc = advance(kind, h, zc, eps_c, nscale, &xi);
      zw = advance(kind, h, zw, eps_w, nscale, &xi);
    } else {
      zc = advance(kind, h, zc, eps_c, 0.0, nullptr);
      zw = advance(kind, h, zw, eps_w, 0.0, nullptr);
    }
  }
  return {zc, zw};
}

}  // namespace driftmark
