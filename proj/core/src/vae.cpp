#include "driftmark/vae.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <stdexcept>

namespace driftmark {

namespace {

// Orthonormal columns from a seeded Gaussian matrix via Householder QR, with
// column signs fixed so the result is a deterministic function of the seed.
Eigen::MatrixXd orthonormal_frame(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g = rng.gaussian_mat(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  Eigen::MatrixXd r =
      qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (int j = 0; j < cols; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

LinearVAE make_vae(int D, int d, double sigma_r, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("vae: d must be >= 1");
  if (D < d) throw std::invalid_argument("vae: D must be >= d");
  if (sigma_r < 0.0) throw std::invalid_argument("vae: sigma_r must be >= 0");
  LinearVAE v;
  v.D = D;
  v.d = d;
  v.sigma_r = sigma_r;
  v.seed = seed;
  v.dec = orthonormal_frame(D, d, seed);
  v.enc = v.dec.transpose();
  return v;
}

Eigen::VectorXd vae_encode(const LinearVAE& v, const Eigen::VectorXd& x) {
  if (x.size() != v.D)
    throw std::invalid_argument("vae_encode: dimension mismatch");
  return v.enc * x;
}

Eigen::VectorXd vae_decode(const LinearVAE& v, const Eigen::VectorXd& z,
                           Rng& rng) {
  if (z.size() != v.d)
    throw std::invalid_argument("vae_decode: dimension mismatch");
  Eigen::VectorXd x = v.dec * z;
  if (v.sigma_r > 0.0) x += v.sigma_r * rng.gaussian_vec(v.D);
  return x;
}

LinearVAE perturb_decoder(const LinearVAE& v, double eps_scale,
                          std::uint64_t seed) {
  if (eps_scale < 0.0)
    throw std::invalid_argument("perturb_decoder: eps_scale must be >= 0");
  LinearVAE out = v;
  if (eps_scale == 0.0) return out;
  Rng rng(seed);
  Eigen::MatrixXd g = rng.gaussian_mat(v.D, v.d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  const double spectral = svd.singularValues()(0);
  out.dec = v.dec + (eps_scale / spectral) * g;
  return out;
}

}  // namespace driftmark
