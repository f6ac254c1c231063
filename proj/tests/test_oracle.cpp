#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "driftmark/injection.hpp"
#include "driftmark/oracle.hpp"
#include "driftmark/serialize.hpp"

using namespace driftmark;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

ScoreOracle standard_normal(int d) {
  ScoreOracle o;
  o.dim = d;
  o.components = {{1.0, Eigen::VectorXd::Zero(d), 1.0}};
  return o;
}

ScoreOracle symmetric_pair(const Eigen::VectorXd& mu) {
  ScoreOracle o;
  o.dim = static_cast<int>(mu.size());
  o.components = {{0.5, mu, 1.0}, {0.5, -mu, 1.0}};
  return o;
}

// Random mixture for fuzzing: K components, random weights/means/variances.
ScoreOracle random_mixture(int d, int K, Rng& rng) {
  ScoreOracle o;
  o.dim = d;
  double wsum = 0.0;
  for (int k = 0; k < K; ++k) {
    MixtureComponent c;
    c.weight = 0.1 + rng.uniform();
    c.mean = 3.0 * rng.gaussian_vec(d);
    c.var = 0.25 + 3.75 * rng.uniform();
    wsum += c.weight;
    o.components.push_back(std::move(c));
  }
  for (auto& c : o.components) c.weight /= wsum;
  // Exact renormalization so the sum-to-one invariant holds to 1e-12.
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < o.components.size(); ++k)
    acc += o.components[k].weight;
  o.components.back().weight = 1.0 - acc;
  return o;
}

}  // namespace

TEST_CASE("log density: stationary standard-normal marginal") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  const auto o = standard_normal(6);
  Rng rng(3);
  const Eigen::VectorXd z = rng.gaussian_vec(6);
  const double expect = -0.5 * 6 * kLog2Pi - 0.5 * z.squaredNorm();
  for (int t : {0, 1, 10, 25, 50})
    CHECK(log_density_t(o, s, z, t) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("log density: symmetric pair at the origin") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(4);
  mu[0] = 2.5;
  const auto o = symmetric_pair(mu);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
  for (int t : {1, 20, 50}) {
    const double ab = alpha_bar(s, t);
    const double v = ab * 1.0 + (1.0 - ab);
    const double one = -0.5 * 4 * (kLog2Pi + std::log(v)) -
                       0.5 * (std::sqrt(ab) * mu).squaredNorm() / v;
    // Both components contribute the same density, so the mixture log equals
    // the single-component log (weights 1/2 cancel against the 2 terms).
    CHECK(log_density_t(o, s, z, t) == doctest::Approx(one).epsilon(1e-12));
  }
}

TEST_CASE("log density: far-separated components stay finite") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(4);
  mu[0] = 1e3;
  const auto o = symmetric_pair(mu);
  const double ld = log_density_t(o, s, mu, 1);
  CHECK(std::isfinite(ld));
  const Eigen::VectorXd sc = exact_score(o, s, mu, 1);
  CHECK(sc.allFinite());
}

TEST_CASE("exact score: closed-form reductions") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  SUBCASE("standard normal gives -z at every t") {
    const auto o = standard_normal(5);
    Rng rng(17);
    const Eigen::VectorXd z = 2.0 * rng.gaussian_vec(5);
    for (int t : {1, 7, 25, 50}) {
      const Eigen::VectorXd sc = exact_score(o, s, z, t);
      CHECK((sc + z).norm() < 1e-12);
    }
  }
  SUBCASE("symmetric pair scores zero at the origin") {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(4);
    mu[1] = 3.0;
    const auto o = symmetric_pair(mu);
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
    CHECK(exact_score(o, s, z, 20).norm() < 1e-14);
  }
  SUBCASE("dimension mismatch throws") {
    const auto o = standard_normal(5);
    CHECK_THROWS_AS(exact_score(o, s, Eigen::VectorXd::Zero(4), 1),
                    std::invalid_argument);
  }
}

TEST_CASE("exact score matches central finite differences") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  Rng rng(41);
  const double h = 1e-4;
  for (int rep = 0; rep < 25; ++rep) {
    auto o = random_mixture(6, 3, rng);
    Eigen::VectorXd z = 2.5 * rng.gaussian_vec(6);
    const int t = 1 + static_cast<int>(rng.uniform() * 50) % 50;
    const Eigen::VectorXd sc = exact_score(o, s, z, t);
    for (int i = 0; i < 6; ++i) {
      Eigen::VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double fd =
          (log_density_t(o, s, zp, t) - log_density_t(o, s, zm, t)) / (2 * h);
      CHECK(std::abs(sc[i] - fd) < 1e-4);
    }
  }
}

TEST_CASE("reparameterize: exact linear bijections") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  Rng rng(5);
  const Eigen::VectorXd z = rng.gaussian_vec(8);

  SUBCASE("eps -> z0 -> eps round trip") {
    const Eigen::VectorXd eps = rng.gaussian_vec(8);
    for (int t : {1, 13, 50}) {
      const auto z0 = reparameterize(z, eps, s, t, Param::Eps, Param::Z0);
      const auto back = reparameterize(z, z0, s, t, Param::Z0, Param::Eps);
      CHECK((back - eps).norm() < 1e-12);
    }
  }
  SUBCASE("standard-normal chain: score -z, eps sqrt(1-ab) z, z0 sqrt(ab) z") {
    for (int t : {1, 25, 50}) {
      const double ab = alpha_bar(s, t);
      const Eigen::VectorXd score = -z;
      const auto eps = reparameterize(z, score, s, t, Param::Score, Param::Eps);
      CHECK((eps - std::sqrt(1.0 - ab) * z).norm() < 1e-12);
      const auto z0 = reparameterize(z, eps, s, t, Param::Eps, Param::Z0);
      CHECK((z0 - std::sqrt(ab) * z).norm() < 1e-12);
    }
  }
  SUBCASE("all six conversions compose exactly") {
    const Eigen::VectorXd score = rng.gaussian_vec(8);
    for (int t : {3, 37}) {
      const auto eps = reparameterize(z, score, s, t, Param::Score, Param::Eps);
      const auto z0 = reparameterize(z, score, s, t, Param::Score, Param::Z0);
      const auto z0b = reparameterize(z, eps, s, t, Param::Eps, Param::Z0);
      CHECK((z0 - z0b).norm() < 1e-12);
      const auto back =
          reparameterize(z, z0, s, t, Param::Z0, Param::Score);
      CHECK((back - score).norm() < 1e-11);
    }
  }
  SUBCASE("noise-prediction shift maps to exact clean-latent shift") {
    const auto sched = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
    Rng r2(9);
    const Eigen::VectorXd eps = r2.gaussian_vec(8);
    const Eigen::VectorXd delta = r2.gaussian_vec(8);
    for (double lambda : {0.5, 1.0})
      for (int t : {1, 20, 45}) {
        const Eigen::VectorXd shifted =
            eps - modulation_coeff(sched, t, lambda) * delta;
        const auto z0a = reparameterize(z, eps, sched, t, Param::Eps, Param::Z0);
        const auto z0b =
            reparameterize(z, shifted, sched, t, Param::Eps, Param::Z0);
        CHECK((z0b - (z0a + lambda * delta)).norm() < 1e-10);
      }
  }
}

TEST_CASE("posterior mean: conditioning reductions and Tweedie consistency") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  SUBCASE("standard normal shrinks by sqrt(alpha_bar)") {
    const auto o = standard_normal(5);
    Rng rng(23);
    const Eigen::VectorXd z = rng.gaussian_vec(5);
    for (int t : {1, 25, 50}) {
      const auto pm = posterior_mean(o, s, z, t);
      CHECK((pm - std::sqrt(alpha_bar(s, t)) * z).norm() < 1e-12);
    }
  }
  SUBCASE("far-separated mixture: responsibility collapses on one mean") {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(4);
    mu[0] = 8.0;
    const auto o = symmetric_pair(mu);
    const int t = 5;  // early step: components stay ~15 sigma apart
    const Eigen::VectorXd z = std::sqrt(alpha_bar(s, t)) * mu;
    const auto pm = posterior_mean(o, s, z, t);
    CHECK((pm - mu).norm() < 1e-8);
  }
  SUBCASE("posterior mean equals score converted to z0 (fuzz)") {
    Rng rng(71);
    for (int rep = 0; rep < 200; ++rep) {
      const int d = 2 + static_cast<int>(rng.uniform() * 15) % 15;
      const int K = 1 + static_cast<int>(rng.uniform() * 4) % 4;
      auto o = random_mixture(d, K, rng);
      const Eigen::VectorXd z = 3.0 * rng.gaussian_vec(d);
      const int t = 1 + static_cast<int>(rng.uniform() * 50) % 50;
      const auto score = exact_score(o, s, z, t);
      const auto via_score =
          reparameterize(z, score, s, t, Param::Score, Param::Z0);
      const auto direct = posterior_mean(o, s, z, t);
      CHECK((via_score - direct).norm() < 1e-10);
    }
  }
}

TEST_CASE("score shift induced by a clean-latent shift") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  Rng rng(13);
  const Eigen::VectorXd z = rng.gaussian_vec(6);
  const Eigen::VectorXd eps = rng.gaussian_vec(6);
  const Eigen::VectorXd delta = rng.gaussian_vec(6);
  for (int t = 1; t <= 50; ++t) {
    const double ab = alpha_bar(s, t);
    const Eigen::VectorXd eps_shift =
        eps - modulation_coeff(s, t, 1.0) * delta;
    const auto sc = reparameterize(z, eps, s, t, Param::Eps, Param::Score);
    const auto sc_shift =
        reparameterize(z, eps_shift, s, t, Param::Eps, Param::Score);
    const Eigen::VectorXd expect = std::sqrt(ab) / (1.0 - ab) * delta;
    CHECK((sc_shift - sc - expect).norm() <= 1e-12 * expect.norm());
  }
}

TEST_CASE("desk oracle: deterministic, validated, unit-norm directions") {
  const auto o1 = make_desk_oracle();
  const auto o2 = make_desk_oracle();
  REQUIRE(o1.components.size() == 3);
  CHECK(o1.dim == 16);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(o1.components[k].mean == o2.components[k].mean);
    CHECK(o1.components[k].mean.norm() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(o1.components[k].var == 1.0);
  }
  CHECK_NOTHROW(validate(o1));
}

TEST_CASE("oracle validation rejects malformed mixtures") {
  ScoreOracle o;
  o.dim = 3;
  CHECK_THROWS_AS(validate(o), std::invalid_argument);  // empty
  o.components = {{0.6, Eigen::VectorXd::Zero(3), 1.0},
                  {0.6, Eigen::VectorXd::Zero(3), 1.0}};
  CHECK_THROWS_AS(validate(o), std::invalid_argument);  // weights sum 1.2
  o.components = {{1.0, Eigen::VectorXd::Zero(2), 1.0}};
  CHECK_THROWS_AS(validate(o), std::invalid_argument);  // mean dim mismatch
  o.components = {{1.0, Eigen::VectorXd::Zero(3), -1.0}};
  CHECK_THROWS_AS(validate(o), std::invalid_argument);  // negative variance
}

TEST_CASE("oracle JSON round trip") {
  Rng rng(2);
  auto o = random_mixture(5, 3, rng);
  const auto o2 = oracle_from_json(to_json(o));
  REQUIRE(o2.components.size() == o.components.size());
  CHECK(o2.dim == o.dim);
  for (std::size_t k = 0; k < o.components.size(); ++k) {
    CHECK(o2.components[k].weight == o.components[k].weight);
    CHECK(o2.components[k].var == o.components[k].var);
    CHECK(o2.components[k].mean == o.components[k].mean);
  }
  // Builder form regenerates the default desk oracle.
  const auto o3 =
      oracle_from_json(nlohmann::json{{"dim", 16}, {"seed", 7}});
  CHECK(o3.components[0].mean == make_desk_oracle().components[0].mean);
}

TEST_CASE("clean-latent sampling hits mixture moments") {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(3);
  mu[2] = 2.0;
  const auto o = symmetric_pair(mu);
  Rng rng(31);
  const int n = 40000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  double second_last = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd z = sample_z0(o, rng);
    mean += z;
    second_last += z[2] * z[2];
  }
  mean /= n;
  second_last /= n;
  CHECK(mean.norm() < 0.05);
  // E[z_2^2] = var + mu_2^2 = 1 + 4.
  CHECK(second_last == doctest::Approx(5.0).epsilon(0.05));
}
