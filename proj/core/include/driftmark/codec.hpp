#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "driftmark/rng.hpp"
#include "driftmark/vae.hpp"

namespace driftmark {

// Payload of k bits (values 0/1).
struct Message {
  std::vector<std::uint8_t> bits;
  int k() const { return static_cast<int>(bits.size()); }
};

bool operator==(const Message& a, const Message& b);

// Fixed spread-spectrum code: k orthonormal carrier vectors u_i in R^d and a
// per-carrier amplitude alpha. Bits map antipodally (s_i = 2 m_i - 1) onto
// carrier signs, which gives symmetric analytic error rates under additive
// Gaussian noise.
struct CodeBook {
  Eigen::MatrixXd carriers;  // d x k, orthonormal columns
  double alpha = 0.0;
  std::uint64_t seed = 0;
  int d() const { return static_cast<int>(carriers.rows()); }
  int k() const { return static_cast<int>(carriers.cols()); }
};

// Orthonormalized seeded Gaussian carriers. Throws std::invalid_argument if
// k < 1, k > d, or alpha <= 0. Deterministic given seed.
CodeBook make_codebook(int d, int k, double alpha, std::uint64_t seed);

// delta = alpha * sum_i s_i u_i, with ||delta|| = alpha * sqrt(k) exactly.
Eigen::VectorXd encode_message(const Message& m, const CodeBook& cb);

// bit_i = 1 iff u_i . z > 0; a tie at exactly zero decodes to 1.
Message decode_message(const Eigen::VectorXd& z, const CodeBook& cb);

// Mean signed carrier margin (1/k) sum_i s_i (u_i . z) / alpha: exactly 1 on
// a clean encoded message, mean 0 on carrier-free Gaussian input. The
// detection statistic thresholded by the evaluation harness.
double detection_stat(const Eigen::VectorXd& z, const Message& m_expected,
                      const CodeBook& cb);

// Fraction of matching bits, in [0, 1]. Throws on length mismatch.
double bit_accuracy(const Message& m, const Message& m_prime);

// Uniform random k-bit message.
Message random_message(int k, Rng& rng);

// Hex round trip, MSB-first within each byte; k is needed to restore
// payloads that are not a multiple of 8 bits.
std::string message_to_hex(const Message& m);
Message message_from_hex(const std::string& hex, int k);

// Trainable linear encoder/decoder pair:
//   encode: delta = We * s           (We is d x k, s antipodal)
//   decode: logits = Wd * z + b      (Wd is k x d)
// trained by plain gradient descent on
//   L = mean-over-batch sum-over-bits BCE(m, sigmoid(logits))
//     + lambda2 * per-coordinate MSE between the decoded images of the
//       watermarked latent and of the unmarked latent,
// with fresh random antipodal messages each step.
struct LinearCoder {
  Eigen::MatrixXd We;  // d x k
  Eigen::MatrixXd Wd;  // k x d
  Eigen::VectorXd b;   // k
  std::vector<double> loss_curve;
  double lambda2 = 0.0;
  int epochs = 0;
};

// Trains on the given clean latents through the VAE's (noiseless) decoder.
// Throws std::invalid_argument for an empty dataset, lr <= 0, k < 1, or
// epochs < 0. Deterministic given seed.
LinearCoder train_linear_coder(const std::vector<Eigen::VectorXd>& latents,
                               const LinearVAE& vae, int k, double lambda2,
                               int epochs, double lr, std::uint64_t seed);

Eigen::VectorXd coder_encode(const LinearCoder& c, const Message& m);
Message coder_decode(const LinearCoder& c, const Eigen::VectorXd& z);

}  // namespace driftmark
