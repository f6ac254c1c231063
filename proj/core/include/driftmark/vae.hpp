#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "driftmark/rng.hpp"

namespace driftmark {

// Linear stand-in for the latent <-> data boundary. The decoder is a random
// orthonormal column frame (D x d) plus optional additive reconstruction
// noise sigma_r on decode; the encoder is its transpose, so enc(dec(z)) == z
// exactly (right-inverse invariant). Encoding stays deterministic so that
// extraction pipelines are reproducible.
struct LinearVAE {
  int D = 0;  // data dimension
  int d = 0;  // latent dimension
  double sigma_r = 0.0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd dec;  // D x d, orthonormal columns at construction
  Eigen::MatrixXd enc;  // d x D, transpose of the constructed frame
};

// Builds the VAE. Throws std::invalid_argument if D < d, d < 1, or
// sigma_r < 0. Deterministic given seed.
LinearVAE make_vae(int D, int d, double sigma_r, std::uint64_t seed);

// enc * x (deterministic).
Eigen::VectorXd vae_encode(const LinearVAE& v, const Eigen::VectorXd& x);

// dec * z + sigma_r * eta with eta standard normal from rng.
Eigen::VectorXd vae_decode(const LinearVAE& v, const Eigen::VectorXd& z,
                           Rng& rng);

// Returns a copy whose decoder is dec + eps_scale * G / ||G||_2 (seeded
// Gaussian G), i.e. a relative spectral perturbation of exactly eps_scale
// (the unperturbed frame has unit spectral norm). The encoder is unchanged,
// modeling an adversary fine-tuning only the generator-side decoder.
LinearVAE perturb_decoder(const LinearVAE& v, double eps_scale,
                          std::uint64_t seed);

}  // namespace driftmark
