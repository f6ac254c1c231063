#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "driftmark/codec.hpp"
#include "driftmark/oracle.hpp"
#include "driftmark/rng.hpp"
#include "driftmark/sampler.hpp"
#include "driftmark/schedule.hpp"
#include "driftmark/vae.hpp"

namespace driftmark {

// Declarative attack taxonomy over toy data vectors. Geometric and
// photometric image attacks are realized as fixed-basis analogs that
// preserve the information-destruction structure at small D:
//   AdditiveNoise(sigma)    x + sigma * eta
//   Brightness(factor)      x * factor
//   Contrast(factor)        recenters about the scalar mean, then scales
//   Quantize(levels)        nearest of `levels` uniform levels over [-1, 1]
//                           (lossy-compression analog)
//   LowPass(keep_fraction)  zeroes trailing coefficients in an orthonormal
//                           cosine "frequency" basis (blur/resize analog)
//   CropMask(keep_fraction) zeroes a trailing contiguous coordinate block
//   VaeReencode             round trip through a second, independently
//                           seeded autoencoder with d = D/4
//   Regenerate              encode, partially re-noise to round(strength*T),
//                           denoise with the uncorrected sampler, decode;
//                           repeated rinse_n times with fresh noise
//   Identity                passthrough ("none" cell in suites)
struct AttackSpec {
  enum class Kind {
    Identity,
    AdditiveNoise,
    Brightness,
    Contrast,
    Quantize,
    LowPass,
    CropMask,
    VaeReencode,
    Regenerate,
  };
  Kind kind = Kind::Identity;
  double sigma = 0.0;          // AdditiveNoise
  double factor = 1.0;         // Brightness / Contrast
  int levels = 256;            // Quantize
  double keep_fraction = 1.0;  // LowPass / CropMask
  double strength = 0.2;       // Regenerate: fraction of T to re-noise
  int rinse_n = 1;             // Regenerate: repetition count
  SamplerKind sampler{};       // Regenerate: denoising sampler
};

// Canonical cell label, e.g. "none", "noise(0.25)", "quantize(64)",
// "rinse-2x". Stable across runs; used in suite CSVs.
std::string attack_name(const AttackSpec& spec);
AttackSpec attack_from_name(const std::string& name);

// Applies a non-generative distortion. Deterministic given (spec, rng seed).
// Throws std::invalid_argument for generative specs (use `regenerate`) or
// out-of-range parameters.
Eigen::VectorXd apply_distortion(const Eigen::VectorXd& x,
                                 const AttackSpec& spec, Rng& rng);

// Regeneration attack (spec.kind must be Regenerate): VAE-encode, forward
// perturb to t* = round(strength * T), denoise on the dense integer grid
// with the uncorrected sampler, VAE-decode; looped rinse_n times. t* == 0
// degenerates to a plain VAE round trip per rinse.
Eigen::VectorXd regenerate(const Eigen::VectorXd& x, const ScoreOracle& o,
                           const NoiseSchedule& s, const LinearVAE& v,
                           const AttackSpec& spec, std::uint64_t seed);

// Dispatches either of the above with a derived RNG.
Eigen::VectorXd apply_attack(const Eigen::VectorXd& x, const AttackSpec& spec,
                             const ScoreOracle& o, const NoiseSchedule& s,
                             const LinearVAE& v, std::uint64_t seed);

// Residual-averaging forgery: mean over the first n (marked, clean) pairs of
// the encoder-space difference enc(x_marked) - enc(x_clean). Returns the
// estimated residual in R^d; imprint it on new content with
// `imprint_residual`.
Eigen::VectorXd average_forgery(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs,
    const LinearVAE& v, int n);

// x + dec(delta): plants an encoder-space residual on a data vector.
Eigen::VectorXd imprint_residual(const Eigen::VectorXd& x, const LinearVAE& v,
                                 const Eigen::VectorXd& delta);

// Margin-targeting forgery against a known linear decoder: the least-norm
// encoder-space perturbation driving every carrier margin
// s_i (u_i . (z + dz)) to at least budget * alpha. With orthonormal carriers
// the solution is closed-form: dz = sum_i max(0, budget*alpha - s_i(u_i.z))
// s_i u_i. Optionally reports ||dz|| and the PSNR between the forged and
// original data vectors (peak amplitude 2.0).
Eigen::VectorXd imprint_forgery(const Eigen::VectorXd& x_clean,
                                const LinearVAE& v, const CodeBook& cb,
                                const Message& m_target, double budget,
                                double* delta_norm = nullptr,
                                double* psnr_out = nullptr);

}  // namespace driftmark
