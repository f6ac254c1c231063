#include "driftmark/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace driftmark {

// Defined in eval.cpp (same library); re-declared here to keep the attack
// report self-contained without a header cycle.
double psnr(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

namespace {

std::string fmt_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// Orthonormal cosine basis row j evaluated against x: the toy stand-in for a
// frequency transform. Basis is fixed (no seed) so LowPass is deterministic.
Eigen::MatrixXd cosine_basis(int D) {
  Eigen::MatrixXd C(D, D);
  const double c0 = std::sqrt(1.0 / D);
  const double cj = std::sqrt(2.0 / D);
  for (int j = 0; j < D; ++j)
    for (int i = 0; i < D; ++i)
      C(j, i) = (j == 0 ? c0 : cj) *
                std::cos(M_PI * (2.0 * i + 1.0) * j / (2.0 * D));
  return C;
}

int trailing_zero_count(double keep_fraction, int D) {
  if (keep_fraction < 0.0 || keep_fraction > 1.0)
    throw std::invalid_argument("attack: keep_fraction must lie in [0, 1]");
  return static_cast<int>(std::lround((1.0 - keep_fraction) * D));
}

}  // namespace

std::string attack_name(const AttackSpec& spec) {
  switch (spec.kind) {
    case AttackSpec::Kind::Identity:
      return "none";
    case AttackSpec::Kind::AdditiveNoise:
      return "noise(" + fmt_param(spec.sigma) + ")";
    case AttackSpec::Kind::Brightness:
      return "brightness(" + fmt_param(spec.factor) + ")";
    case AttackSpec::Kind::Contrast:
      return "contrast(" + fmt_param(spec.factor) + ")";
    case AttackSpec::Kind::Quantize:
      return "quantize(" + std::to_string(spec.levels) + ")";
    case AttackSpec::Kind::LowPass:
      return "lowpass(" + fmt_param(spec.keep_fraction) + ")";
    case AttackSpec::Kind::CropMask:
      return "cropmask(" + fmt_param(spec.keep_fraction) + ")";
    case AttackSpec::Kind::VaeReencode:
      return "vae-reencode";
    case AttackSpec::Kind::Regenerate: {
      std::string base = "rinse-" + std::to_string(spec.rinse_n) + "x";
      if (spec.strength != 0.2)
        base += "(s=" + fmt_param(spec.strength) + ")";
      return base;
    }
  }
  return "none";
}

AttackSpec attack_from_name(const std::string& name) {
  AttackSpec spec;
  auto parse_param = [&](const std::string& prefix) -> std::string {
    return name.substr(prefix.size(), name.size() - prefix.size() - 1);
  };
  auto starts = [&](const char* p) { return name.rfind(p, 0) == 0; };
  if (name == "none" || name == "identity") {
    spec.kind = AttackSpec::Kind::Identity;
  } else if (starts("noise(") && name.back() == ')') {
    spec.kind = AttackSpec::Kind::AdditiveNoise;
    spec.sigma = std::stod(parse_param("noise("));
  } else if (starts("brightness(") && name.back() == ')') {
    spec.kind = AttackSpec::Kind::Brightness;
    spec.factor = std::stod(parse_param("brightness("));
  } else if (starts("contrast(") && name.back() == ')') {
    spec.kind = AttackSpec::Kind::Contrast;
    spec.factor = std::stod(parse_param("contrast("));
  } else if (starts("quantize(") && name.back() == ')') {
    spec.kind = AttackSpec::Kind::Quantize;
    spec.levels = std::stoi(parse_param("quantize("));
  } else if (starts("lowpass(") && name.back() == ')') {
    spec.kind = AttackSpec::Kind::LowPass;
    spec.keep_fraction = std::stod(parse_param("lowpass("));
  } else if (starts("cropmask(") && name.back() == ')') {
    spec.kind = AttackSpec::Kind::CropMask;
    spec.keep_fraction = std::stod(parse_param("cropmask("));
  } else if (name == "vae-reencode") {
    spec.kind = AttackSpec::Kind::VaeReencode;
  } else if (starts("rinse-")) {
    spec.kind = AttackSpec::Kind::Regenerate;
    const auto xpos = name.find('x');
    if (xpos == std::string::npos)
      throw std::invalid_argument("attack: malformed rinse spec: " + name);
    spec.rinse_n = std::stoi(name.substr(6, xpos - 6));
    const auto spos = name.find("(s=");
    if (spos != std::string::npos && name.back() == ')')
      spec.strength = std::stod(name.substr(spos + 3, name.size() - spos - 4));
  } else {
    throw std::invalid_argument("attack: unknown name: " + name);
  }
  return spec;
}

Eigen::VectorXd apply_distortion(const Eigen::VectorXd& x,
                                 const AttackSpec& spec, Rng& rng) {
  const int D = static_cast<int>(x.size());
  switch (spec.kind) {
    case AttackSpec::Kind::Identity:
      return x;
    case AttackSpec::Kind::AdditiveNoise: {
      if (spec.sigma < 0.0)
        throw std::invalid_argument("attack: noise sigma must be >= 0");
      if (spec.sigma == 0.0) return x;
      return x + spec.sigma * rng.gaussian_vec(D);
    }
    case AttackSpec::Kind::Brightness:
      return spec.factor * x;
    case AttackSpec::Kind::Contrast: {
      const double mean = x.mean();
      return Eigen::VectorXd::Constant(D, mean) +
             spec.factor * (x.array() - mean).matrix();
    }
    case AttackSpec::Kind::Quantize: {
      if (spec.levels < 2)
        throw std::invalid_argument("attack: quantize levels must be >= 2");
      const double L = spec.levels - 1;
      Eigen::VectorXd out(D);
      for (int i = 0; i < D; ++i) {
        const double clamped = std::clamp(x[i], -1.0, 1.0);
        const double q = std::round((clamped + 1.0) / 2.0 * L);
        out[i] = -1.0 + 2.0 * q / L;
      }
      return out;
    }
    case AttackSpec::Kind::LowPass: {
      const int nz = trailing_zero_count(spec.keep_fraction, D);
      if (nz == 0) return x;
      const Eigen::MatrixXd C = cosine_basis(D);
      Eigen::VectorXd coef = C * x;
      coef.tail(nz).setZero();
      return C.transpose() * coef;
    }
    case AttackSpec::Kind::CropMask: {
      const int nz = trailing_zero_count(spec.keep_fraction, D);
      Eigen::VectorXd out = x;
      if (nz > 0) out.tail(nz).setZero();
      return out;
    }
    case AttackSpec::Kind::VaeReencode: {
      const int d2 = std::max(1, D / 4);
      const LinearVAE v2 = make_vae(D, d2, 0.05, rng.next_u64());
      return vae_decode(v2, vae_encode(v2, x), rng);
    }
    default:
      throw std::invalid_argument(
          "apply_distortion: generative attacks go through `regenerate`");
  }
}

Eigen::VectorXd regenerate(const Eigen::VectorXd& x, const ScoreOracle& o,
                           const NoiseSchedule& s, const LinearVAE& v,
                           const AttackSpec& spec, std::uint64_t seed) {
  if (spec.kind != AttackSpec::Kind::Regenerate)
    throw std::invalid_argument("regenerate: spec kind must be Regenerate");
  if (spec.strength < 0.0 || spec.strength >= 1.0)
    throw std::invalid_argument("regenerate: strength must lie in [0, 1)");
  if (spec.rinse_n < 1)
    throw std::invalid_argument("regenerate: rinse_n must be >= 1");
  Rng rng(seed);
  const int t_star = static_cast<int>(std::lround(spec.strength * s.T));
  Eigen::VectorXd out = x;
  for (int r = 0; r < spec.rinse_n; ++r) {
    Eigen::VectorXd z = vae_encode(v, out);
    if (t_star > 0) {
      z = forward_perturb(s, z, t_star, rng);
      z = denoise_from(spec.sampler, o, s, z, t_star, nullptr, rng);
    }
    out = vae_decode(v, z, rng);
  }
  return out;
}

Eigen::VectorXd apply_attack(const Eigen::VectorXd& x, const AttackSpec& spec,
                             const ScoreOracle& o, const NoiseSchedule& s,
                             const LinearVAE& v, std::uint64_t seed) {
  if (spec.kind == AttackSpec::Kind::Regenerate)
    return regenerate(x, o, s, v, spec, seed);
  Rng rng(seed);
  return apply_distortion(x, spec, rng);
}

Eigen::VectorXd average_forgery(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs,
    const LinearVAE& v, int n) {
  if (pairs.empty()) throw std::invalid_argument("average_forgery: no pairs");
  if (n < 1 || n > static_cast<int>(pairs.size()))
    throw std::invalid_argument(
        "average_forgery: n must lie in [1, pairs.size()]");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(v.d);
  for (int i = 0; i < n; ++i)
    acc += vae_encode(v, pairs[i].first) - vae_encode(v, pairs[i].second);
  return acc / n;
}

Eigen::VectorXd imprint_residual(const Eigen::VectorXd& x, const LinearVAE& v,
                                 const Eigen::VectorXd& delta) {
  if (delta.size() != v.d)
    throw std::invalid_argument("imprint_residual: dimension mismatch");
  return x + v.dec * delta;
}

Eigen::VectorXd imprint_forgery(const Eigen::VectorXd& x_clean,
                                const LinearVAE& v, const CodeBook& cb,
                                const Message& m_target, double budget,
                                double* delta_norm, double* psnr_out) {
  if (budget <= 0.0)
    throw std::invalid_argument("imprint_forgery: budget must be > 0");
  if (cb.d() != v.d)
    throw std::invalid_argument("imprint_forgery: codebook/VAE mismatch");
  const Eigen::VectorXd z = vae_encode(v, x_clean);
  // Least-norm perturbation meeting every margin constraint
  // s_i (u_i . (z + dz)) >= budget * alpha: with orthonormal carriers the
  // constraints decouple, so each deficient margin is raised exactly to the
  // target along its own carrier.
  Eigen::VectorXd dz = Eigen::VectorXd::Zero(v.d);
  for (int i = 0; i < cb.k(); ++i) {
    const double s_i = m_target.bits[i] ? 1.0 : -1.0;
    const double margin = s_i * cb.carriers.col(i).dot(z);
    const double deficit = budget * cb.alpha - margin;
    if (deficit > 0.0) dz += deficit * s_i * cb.carriers.col(i);
  }
  const Eigen::VectorXd forged = x_clean + v.dec * dz;
  if (delta_norm) *delta_norm = dz.norm();
  if (psnr_out) *psnr_out = psnr(forged, x_clean);
  return forged;
}

}  // namespace driftmark
