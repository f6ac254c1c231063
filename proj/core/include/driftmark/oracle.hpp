#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "driftmark/rng.hpp"
#include "driftmark/schedule.hpp"

namespace driftmark {

// One isotropic Gaussian mixture component: weight * N(mean, var * I).
struct MixtureComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  double var = 1.0;
};

// Exact mixture data distribution p(z_0). Under the forward process the
// marginal at step t stays a mixture:
//   p_t(z) = sum_k w_k N(z; sqrt(ab_t) mu_k, (ab_t var_k + 1 - ab_t) I),
// so the score, noise prediction, and posterior mean are all closed-form.
struct ScoreOracle {
  int dim = 0;
  std::vector<MixtureComponent> components;
};

struct LatentState {
  Eigen::VectorXd z;
  int t = 0;  // 0 = final clean latent, T = pure noise
};

// Validates weights (positive, summing to 1 within 1e-12), dimensions, and
// variances. Throws std::invalid_argument on violation.
void validate(const ScoreOracle& o);

// Default desk-scale oracle: `k_components` unit-variance components with
// means of norm `mean_norm`, directions drawn from the given seed. Weights
// uniform.
ScoreOracle make_desk_oracle(int dim = 16, int k_components = 3,
                             double mean_norm = 4.0, std::uint64_t seed = 7);

// Draws one sample from the clean data distribution p(z_0).
Eigen::VectorXd sample_z0(const ScoreOracle& o, Rng& rng);

// log p_t(z), computed with a max-subtracted log-sum-exp guard.
// Accepts 0 <= t <= T (t = 0 evaluates the clean data density).
double log_density_t(const ScoreOracle& o, const NoiseSchedule& s,
                     const Eigen::VectorXd& z, int t);

// grad_z log p_t(z): the responsibility-weighted sum of per-component
// Gaussian scores. Accepts 0 <= t <= T.
Eigen::VectorXd exact_score(const ScoreOracle& o, const NoiseSchedule& s,
                            const Eigen::VectorXd& z, int t);

// E[z_0 | z_t], computed directly from per-component Gaussian conditioning
// (independent of the score path; serves as its cross-check).
Eigen::VectorXd posterior_mean(const ScoreOracle& o, const NoiseSchedule& s,
                               const Eigen::VectorXd& z, int t);

enum class Param { Score, Eps, Z0 };

// Converts `value` among the three equivalent denoiser parameterizations at
// state (z, t), 1 <= t <= T:
//   eps = -sqrt(1 - ab_t) * score
//   z0  = (z - sqrt(1 - ab_t) * eps) / sqrt(ab_t)
// Compositions of conversions are exact (pure linear algebra).
Eigen::VectorXd reparameterize(const Eigen::VectorXd& z,
                               const Eigen::VectorXd& value,
                               const NoiseSchedule& s, int t, Param from,
                               Param to);

}  // namespace driftmark
