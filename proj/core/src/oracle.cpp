#include "driftmark/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace driftmark {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

void check_dim(const ScoreOracle& o, const Eigen::VectorXd& z) {
  if (z.size() != o.dim)
    throw std::invalid_argument("oracle: latent dimension mismatch");
}

double ab_at(const NoiseSchedule& s, int t) {
  if (t < 0 || t > s.T)
    throw std::out_of_range("oracle: step index t out of range [0, T]");
  return t == 0 ? 1.0 : s.alpha_bars[t - 1];
}

// Per-component log densities at step t; returns the vector of
// log(w_k) + log N(z; sqrt(ab) mu_k, v_k I) with v_k = ab var_k + 1 - ab.
std::vector<double> component_logs(const ScoreOracle& o, double ab,
                                   const Eigen::VectorXd& z,
                                   std::vector<double>* vars_out) {
  const double root_ab = std::sqrt(ab);
  std::vector<double> logs(o.components.size());
  if (vars_out) vars_out->resize(o.components.size());
  for (std::size_t k = 0; k < o.components.size(); ++k) {
    const auto& c = o.components[k];
    const double v = ab * c.var + (1.0 - ab);
    if (vars_out) (*vars_out)[k] = v;
    const double sq = (z - root_ab * c.mean).squaredNorm();
    logs[k] = std::log(c.weight) -
              0.5 * o.dim * (kLog2Pi + std::log(v)) - 0.5 * sq / v;
  }
  return logs;
}

}  // namespace

void validate(const ScoreOracle& o) {
  if (o.dim < 1) throw std::invalid_argument("oracle: dim must be >= 1");
  if (o.components.empty())
    throw std::invalid_argument("oracle: needs at least one component");
  double wsum = 0.0;
  for (const auto& c : o.components) {
    if (c.weight <= 0.0)
      throw std::invalid_argument("oracle: weights must be positive");
    if (c.var <= 0.0)
      throw std::invalid_argument("oracle: variances must be positive");
    if (c.mean.size() != o.dim)
      throw std::invalid_argument("oracle: component mean dimension mismatch");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("oracle: weights must sum to 1");
}

ScoreOracle make_desk_oracle(int dim, int k_components, double mean_norm,
                             std::uint64_t seed) {
  ScoreOracle o;
  o.dim = dim;
  Rng rng(seed);
  o.components.resize(k_components);
  for (int k = 0; k < k_components; ++k) {
    Eigen::VectorXd dir = rng.gaussian_vec(dim);
    dir.normalize();
    o.components[k].weight = 1.0 / k_components;
    o.components[k].mean = mean_norm * dir;
    o.components[k].var = 1.0;
  }
  validate(o);
  return o;
}

Eigen::VectorXd sample_z0(const ScoreOracle& o, Rng& rng) {
  // Component choice consumes one uniform; the draw consumes dim gaussians.
  double u = rng.uniform();
  std::size_t pick = 0;
  double acc = 0.0;
  for (std::size_t k = 0; k < o.components.size(); ++k) {
    acc += o.components[k].weight;
    if (u <= acc) {
      pick = k;
      break;
    }
    pick = k;
  }
  const auto& c = o.components[pick];
  return c.mean + std::sqrt(c.var) * rng.gaussian_vec(o.dim);
}

double log_density_t(const ScoreOracle& o, const NoiseSchedule& s,
                     const Eigen::VectorXd& z, int t) {
  check_dim(o, z);
  const double ab = ab_at(s, t);
  const auto logs = component_logs(o, ab, z, nullptr);
  double m = logs[0];
  for (double l : logs) m = std::max(m, l);
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - m);
  return m + std::log(acc);
}

Eigen::VectorXd exact_score(const ScoreOracle& o, const NoiseSchedule& s,
                            const Eigen::VectorXd& z, int t) {
  check_dim(o, z);
  const double ab = ab_at(s, t);
  const double root_ab = std::sqrt(ab);
  std::vector<double> vars;
  const auto logs = component_logs(o, ab, z, &vars);
  double m = logs[0];
  for (double l : logs) m = std::max(m, l);
  double norm = 0.0;
  for (double l : logs) norm += std::exp(l - m);

  Eigen::VectorXd score = Eigen::VectorXd::Zero(o.dim);
  for (std::size_t k = 0; k < o.components.size(); ++k) {
    const double r = std::exp(logs[k] - m) / norm;
    score += r * (root_ab * o.components[k].mean - z) / vars[k];
  }
  return score;
}

Eigen::VectorXd posterior_mean(const ScoreOracle& o, const NoiseSchedule& s,
                               const Eigen::VectorXd& z, int t) {
  check_dim(o, z);
  const double ab = ab_at(s, t);
  const double root_ab = std::sqrt(ab);
  std::vector<double> vars;
  const auto logs = component_logs(o, ab, z, &vars);
  double m = logs[0];
  for (double l : logs) m = std::max(m, l);
  double norm = 0.0;
  for (double l : logs) norm += std::exp(l - m);

  // Gaussian conditioning per component:
  //   E[z0 | z, k] = ((1 - ab) mu_k + sqrt(ab) var_k z) / (ab var_k + 1 - ab).
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(o.dim);
  for (std::size_t k = 0; k < o.components.size(); ++k) {
    const auto& c = o.components[k];
    const double r = std::exp(logs[k] - m) / norm;
    mean += r * ((1.0 - ab) * c.mean + root_ab * c.var * z) / vars[k];
  }
  return mean;
}

Eigen::VectorXd reparameterize(const Eigen::VectorXd& z,
                               const Eigen::VectorXd& value,
                               const NoiseSchedule& s, int t, Param from,
                               Param to) {
  if (value.size() != z.size())
    throw std::invalid_argument("reparameterize: dimension mismatch");
  const double ab = alpha_bar(s, t);
  const double root_ab = std::sqrt(ab);
  const double root_1mab = std::sqrt(1.0 - ab);
  if (from == to) return value;

  // Route everything through the eps parameterization.
  Eigen::VectorXd eps;
  switch (from) {
    case Param::Eps:
      eps = value;
      break;
    case Param::Score:
      eps = -root_1mab * value;
      break;
    case Param::Z0:
      eps = (z - root_ab * value) / root_1mab;
      break;
    default:
      throw std::invalid_argument("reparameterize: unknown source");
  }
  switch (to) {
    case Param::Eps:
      return eps;
    case Param::Score:
      return -eps / root_1mab;
    case Param::Z0:
      return (z - root_1mab * eps) / root_ab;
    default:
      throw std::invalid_argument("reparameterize: unknown target");
  }
}

}  // namespace driftmark
