#include "driftmark/codec.hpp"

#include <Eigen/QR>

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace driftmark {

bool operator==(const Message& a, const Message& b) {
  return a.bits == b.bits;
}

CodeBook make_codebook(int d, int k, double alpha, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("codebook: k must be >= 1");
  if (k > d) throw std::invalid_argument("codebook: k must be <= d");
  if (alpha <= 0.0) throw std::invalid_argument("codebook: alpha must be > 0");
  Rng rng(seed);
  Eigen::MatrixXd g = rng.gaussian_mat(d, k);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  CodeBook cb;
  cb.carriers = q;
  cb.alpha = alpha;
  cb.seed = seed;
  return cb;
}

namespace {
Eigen::VectorXd antipodal(const Message& m) {
  Eigen::VectorXd s(m.k());
  for (int i = 0; i < m.k(); ++i) s[i] = m.bits[i] ? 1.0 : -1.0;
  return s;
}
}  // namespace

Eigen::VectorXd encode_message(const Message& m, const CodeBook& cb) {
  if (m.k() != cb.k())
    throw std::invalid_argument("encode_message: payload length mismatch");
  return cb.alpha * (cb.carriers * antipodal(m));
}

Message decode_message(const Eigen::VectorXd& z, const CodeBook& cb) {
  if (z.size() != cb.d())
    throw std::invalid_argument("decode_message: dimension mismatch");
  Eigen::VectorXd proj = cb.carriers.transpose() * z;
  Message m;
  m.bits.resize(cb.k());
  for (int i = 0; i < cb.k(); ++i) m.bits[i] = proj[i] >= 0.0 ? 1 : 0;
  return m;
}

double detection_stat(const Eigen::VectorXd& z, const Message& m_expected,
                      const CodeBook& cb) {
  if (z.size() != cb.d())
    throw std::invalid_argument("detection_stat: dimension mismatch");
  if (m_expected.k() != cb.k())
    throw std::invalid_argument("detection_stat: payload length mismatch");
  Eigen::VectorXd proj = cb.carriers.transpose() * z;
  return antipodal(m_expected).dot(proj) / (cb.alpha * cb.k());
}

double bit_accuracy(const Message& m, const Message& m_prime) {
  if (m.k() != m_prime.k())
    throw std::invalid_argument("bit_accuracy: payload length mismatch");
  int match = 0;
  for (int i = 0; i < m.k(); ++i)
    if (m.bits[i] == m_prime.bits[i]) ++match;
  return static_cast<double>(match) / m.k();
}

Message random_message(int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("random_message: k must be >= 1");
  Message m;
  m.bits.resize(k);
  for (int i = 0; i < k; ++i) m.bits[i] = rng.uniform() < 0.5 ? 0 : 1;
  return m;
}

std::string message_to_hex(const Message& m) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  const int k = m.k();
  const int nbytes = (k + 7) / 8;
  for (int byte = 0; byte < nbytes; ++byte) {
    int v = 0;
    for (int bit = 0; bit < 8; ++bit) {
      const int idx = byte * 8 + bit;
      v = (v << 1) | (idx < k ? m.bits[idx] : 0);
    }
    out.push_back(digits[(v >> 4) & 0xf]);
    out.push_back(digits[v & 0xf]);
  }
  return out;
}

Message message_from_hex(const std::string& hex, int k) {
  if (k < 1) throw std::invalid_argument("message_from_hex: k must be >= 1");
  const int nbytes = (k + 7) / 8;
  if (static_cast<int>(hex.size()) != 2 * nbytes)
    throw std::invalid_argument("message_from_hex: hex length mismatch");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c >= 'a' && c <= 'f') return 10 + (c - 'a');
    throw std::invalid_argument("message_from_hex: invalid hex digit");
  };
  Message m;
  m.bits.resize(k);
  for (int byte = 0; byte < nbytes; ++byte) {
    const int v = (nibble(hex[2 * byte]) << 4) | nibble(hex[2 * byte + 1]);
    for (int bit = 0; bit < 8; ++bit) {
      const int idx = byte * 8 + bit;
      if (idx < k) m.bits[idx] = (v >> (7 - bit)) & 1;
    }
  }
  return m;
}

LinearCoder train_linear_coder(const std::vector<Eigen::VectorXd>& latents,
                               const LinearVAE& vae, int k, double lambda2,
                               int epochs, double lr, std::uint64_t seed) {
  if (latents.empty())
    throw std::invalid_argument("train_linear_coder: empty dataset");
  if (lr <= 0.0) throw std::invalid_argument("train_linear_coder: lr <= 0");
  if (k < 1) throw std::invalid_argument("train_linear_coder: k must be >= 1");
  if (epochs < 0)
    throw std::invalid_argument("train_linear_coder: epochs must be >= 0");
  const int n = static_cast<int>(latents.size());
  const int d = static_cast<int>(latents[0].size());
  if (d != vae.d)
    throw std::invalid_argument(
        "train_linear_coder: latent dimension does not match VAE");
  const int D = vae.D;

  Eigen::MatrixXd Z(n, d);
  for (int i = 0; i < n; ++i) Z.row(i) = latents[i].transpose();

  Rng rng(seed);
  LinearCoder c;
  c.We = 0.1 * rng.gaussian_mat(d, k);
  c.Wd = 0.1 * rng.gaussian_mat(k, d);
  c.b = Eigen::VectorXd::Zero(k);
  c.lambda2 = lambda2;
  c.epochs = epochs;
  c.loss_curve.reserve(epochs);

  // Gram matrix of the noiseless decoder; the image-space MSE of a latent
  // perturbation delta is delta' (dec' dec) delta / D.
  const Eigen::MatrixXd gram = vae.dec.transpose() * vae.dec;

  for (int step = 0; step < epochs; ++step) {
    Eigen::MatrixXd S(n, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) S(i, j) = rng.uniform() < 0.5 ? -1.0 : 1.0;

    const Eigen::MatrixXd delta = S * c.We.transpose();     // n x d
    const Eigen::MatrixXd zw = Z + delta;                   // n x d
    Eigen::MatrixXd logits = zw * c.Wd.transpose();         // n x k
    logits.rowwise() += c.b.transpose();
    const Eigen::MatrixXd m01 = (S.array() + 1.0) / 2.0;

    // Bit-summed BCE averaged over the batch (softplus(logit) - m * logit,
    // computed stably), plus per-coordinate image MSE.
    double bce = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) {
        const double l = logits(i, j);
        const double softplus =
            l > 0.0 ? l + std::log1p(std::exp(-l)) : std::log1p(std::exp(l));
        bce += softplus - m01(i, j) * l;
      }
    bce /= n;
    const Eigen::MatrixXd img = delta * vae.dec.transpose();  // n x D
    const double mse = img.array().square().sum() / (n * D);
    c.loss_curve.push_back(bce + lambda2 * mse);

    const Eigen::MatrixXd p =
        (1.0 / (1.0 + (-logits.array()).exp())).matrix();
    const Eigen::MatrixXd gl = (p - m01) / n;                // n x k
    const Eigen::MatrixXd gWd = gl.transpose() * zw;         // k x d
    const Eigen::VectorXd gb = gl.colwise().sum().transpose();
    const Eigen::MatrixXd gWe_bce = (gl * c.Wd).transpose() * S;  // d x k
    const Eigen::MatrixXd gWe_mse =
        (2.0 * lambda2 / (n * D)) * (gram * c.We) * (S.transpose() * S);
    c.We -= lr * (gWe_bce + gWe_mse);
    c.Wd -= lr * gWd;
    c.b -= lr * gb;
  }
  return c;
}

Eigen::VectorXd coder_encode(const LinearCoder& c, const Message& m) {
  if (m.k() != c.We.cols())
    throw std::invalid_argument("coder_encode: payload length mismatch");
  return c.We * antipodal(m);
}

Message coder_decode(const LinearCoder& c, const Eigen::VectorXd& z) {
  if (z.size() != c.Wd.cols())
    throw std::invalid_argument("coder_decode: dimension mismatch");
  Eigen::VectorXd logits = c.Wd * z + c.b;
  Message m;
  m.bits.resize(static_cast<int>(logits.size()));
  for (int i = 0; i < logits.size(); ++i) m.bits[i] = logits[i] >= 0.0 ? 1 : 0;
  return m;
}

}  // namespace driftmark
