#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "driftmark/schedule.hpp"
#include "driftmark/serialize.hpp"

using namespace driftmark;

namespace {

// Hand-built schedule for probing the pure coefficient formulas at exact
// (beta, alpha_bar) points that no constructed schedule hits.
NoiseSchedule probe(double beta_t, double ab_t) {
  NoiseSchedule s;
  s.kind = ScheduleKind::Linear;
  s.T = 1;
  s.beta_min = beta_t;
  s.beta_max = beta_t;
  s.betas = {beta_t};
  s.alphas = {1.0 - beta_t};
  s.alpha_bars = {ab_t};
  return s;
}

}  // namespace

TEST_CASE("linear schedule: evenly spaced betas") {
  const auto s = build_schedule(ScheduleKind::Linear, 10, 0.1, 0.2);
  REQUIRE(s.betas.size() == 10);
  const double spacing = 0.1 / 9.0;
  CHECK(s.betas.front() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.betas.back() == doctest::Approx(0.2).epsilon(1e-15));
  for (int i = 0; i + 1 < 10; ++i)
    CHECK(s.betas[i + 1] - s.betas[i] == doctest::Approx(spacing).epsilon(1e-12));
}

TEST_CASE("linear schedule: T = 1 degenerates to beta_min") {
  const auto s = build_schedule(ScheduleKind::Linear, 1, 0.1, 0.1);
  REQUIRE(s.betas.size() == 1);
  CHECK(s.betas[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.alpha_bars[0] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("linear schedule: terminal signal retention at T = 1000") {
  // Independent brute-force recomputation in extended precision.
  const auto s = build_schedule(ScheduleKind::Linear, 1000, 1e-4, 0.02);
  long double prod = 1.0L;
  for (int i = 0; i < 1000; ++i) {
    const long double b = 1e-4L + (0.02L - 1e-4L) * i / 999.0L;
    prod *= (1.0L - b);
  }
  CHECK(std::abs(alpha_bar(s, 1000) - static_cast<double>(prod)) < 1e-12);
  CHECK(alpha_bar(s, 1000) == doctest::Approx(4.0e-5).epsilon(0.025));
  CHECK(std::abs(alpha_bar(s, 1000) - 4.0e-5) < 1e-6);
}

TEST_CASE("schedule construction rejects bad parameters") {
  CHECK_THROWS_AS(build_schedule(ScheduleKind::Linear, 0, 0.1, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(ScheduleKind::Linear, 10, 0.0, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(ScheduleKind::Linear, 10, -0.1, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(ScheduleKind::Linear, 10, 0.1, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(ScheduleKind::Linear, 10, 0.3, 0.2),
                  std::invalid_argument);
}

TEST_CASE("alpha_bar: cumulative products and range checks") {
  const auto s = build_schedule(ScheduleKind::Linear, 2, 0.1, 0.2);
  REQUIRE(s.betas[0] == doctest::Approx(0.1).epsilon(1e-15));
  REQUIRE(s.betas[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(alpha_bar(s, 1) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(alpha_bar(s, 2) == doctest::Approx(0.72).epsilon(1e-15));
  CHECK(alpha_bar0(s, 0) == 1.0);
  CHECK_THROWS_AS(alpha_bar(s, 0), std::out_of_range);
  CHECK_THROWS_AS(alpha_bar(s, 3), std::out_of_range);
}

TEST_CASE("modulation coefficient: pinned values") {
  // T = 1 schedules land alpha_bar_1 exactly on 1 - beta.
  const auto half = build_schedule(ScheduleKind::Linear, 1, 0.5, 0.5);
  CHECK(modulation_coeff(half, 1, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(modulation_coeff(half, 1, 0.0) == 0.0);

  const auto s99 = build_schedule(ScheduleKind::Linear, 1, 0.01, 0.01);
  CHECK(modulation_coeff(s99, 1, 1.0) ==
        doctest::Approx(std::sqrt(99.0)).epsilon(1e-14));
  CHECK(modulation_coeff(s99, 1, 1.0) ==
        doctest::Approx(9.9498743710662).epsilon(1e-12));
}

TEST_CASE("modulation coefficient: square identity and monotonicity") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  for (int t = 1; t <= 50; ++t) {
    for (double lambda : {0.25, 0.85, 1.0, 2.0}) {
      const double g = modulation_coeff(s, t, lambda);
      const double lhs = g * g * (1.0 - alpha_bar(s, t));
      const double rhs = lambda * lambda * alpha_bar(s, t);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    }
  }
  // alpha_bar decreases with t, so gamma must strictly decrease with t
  // (equivalently: strictly increase with alpha_bar).
  for (int t = 1; t < 50; ++t)
    CHECK(modulation_coeff(s, t, 1.0) > modulation_coeff(s, t + 1, 1.0));
}

TEST_CASE("drift correction coefficient: pinned value and consistency") {
  const auto s = probe(0.1, 0.5);
  CHECK(drift_correction_coeff(s, 1) ==
        doctest::Approx(-0.1 * std::sqrt(0.5) / 0.5).epsilon(1e-15));
  CHECK(drift_correction_coeff(s, 1) ==
        doctest::Approx(-0.14142135623730951).epsilon(1e-14));

  const auto real = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  for (int t = 1; t <= 50; ++t) {
    const double expect =
        -beta(real, t) / std::sqrt(1.0 - alpha_bar(real, t)) *
        modulation_coeff(real, t, 1.0);
    CHECK(drift_correction_coeff(real, t) ==
          doctest::Approx(expect).epsilon(1e-14));
  }

  // Vanishing beta at fixed alpha_bar sends the correction to zero.
  double prev = std::abs(drift_correction_coeff(probe(1e-3, 0.5), 1));
  for (double b : {1e-6, 1e-9, 1e-12}) {
    const double cur = std::abs(drift_correction_coeff(probe(b, 0.5), 1));
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 1e-11);
}

TEST_CASE("forward perturb: moments, determinism") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  const int t = 25;
  const double ab = alpha_bar(s, t);

  SUBCASE("same seed gives identical draws") {
    Rng r1(123), r2(123);
    const Eigen::VectorXd z0 = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
    CHECK(forward_perturb(s, z0, t, r1) == forward_perturb(s, z0, t, r2));
  }

  SUBCASE("zero input: centered with variance 1 - alpha_bar") {
    Rng rng(7);
    const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(8);
    const int n = 20000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(8);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(8);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = forward_perturb(s, z0, t, rng);
      mean += x;
      sq += x.cwiseProduct(x);
    }
    mean /= n;
    sq /= n;
    const double mean_tol = 4.0 * std::sqrt((1.0 - ab) / n);
    for (int i = 0; i < 8; ++i) {
      CHECK(std::abs(mean[i]) < mean_tol);
      CHECK(sq[i] - mean[i] * mean[i] ==
            doctest::Approx(1.0 - ab).epsilon(0.05));
    }
  }

  SUBCASE("general input: mean drifts to sqrt(alpha_bar) * mu") {
    Rng seed_rng(99);
    const Eigen::VectorXd mu = seed_rng.gaussian_vec(4) * 2.0;
    Rng rng(11);
    const int n = 100000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < n; ++i) mean += forward_perturb(s, mu, t, rng);
    mean /= n;
    const double tol = 4.0 * std::sqrt((1.0 - ab) / n);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(mean[i] - std::sqrt(ab) * mu[i]) < tol);
  }
}

TEST_CASE("cosine schedule: monotone retention, bounded betas") {
  const auto s = build_schedule(ScheduleKind::Cosine, 50, 1e-4, 0.999);
  for (int t = 1; t < 50; ++t) CHECK(alpha_bar(s, t) > alpha_bar(s, t + 1));
  for (double b : s.betas) {
    CHECK(b >= 0.0);
    CHECK(b <= 0.999);
  }
  CHECK(alpha_bar(s, 50) < 1e-3);
  CHECK(alpha_bar(s, 1) > 0.9);
}

TEST_CASE("step grid: inclusive endpoints, strict descent") {
  SUBCASE("single step") {
    const auto g = step_grid(50, 1);
    REQUIRE(g.size() == 1);
    CHECK(g[0] == 50);
  }
  SUBCASE("full grid") {
    const auto g = step_grid(50, 50);
    REQUIRE(g.size() == 50);
    for (int i = 0; i < 50; ++i) CHECK(g[i] == 50 - i);
  }
  SUBCASE("sub-grids keep endpoints and strictly descend") {
    for (int steps : {2, 7, 10, 49}) {
      const auto g = step_grid(50, steps);
      REQUIRE(static_cast<int>(g.size()) == steps);
      CHECK(g.front() == 50);
      CHECK(g.back() == 1);
      for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i] > g[i + 1]);
    }
    const auto g = step_grid(1000, 50);
    CHECK(g.front() == 1000);
    CHECK(g.back() == 1);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(step_grid(10, 11), std::invalid_argument);
    CHECK_THROWS_AS(step_grid(10, 0), std::invalid_argument);
  }
}

TEST_CASE("schedule JSON round trip re-derives identical arrays") {
  const auto s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  const auto s2 = schedule_from_json(to_json(s));
  CHECK(s2.T == s.T);
  CHECK(s2.kind == s.kind);
  REQUIRE(s2.betas.size() == s.betas.size());
  for (int t = 1; t <= s.T; ++t) {
    CHECK(beta(s2, t) == beta(s, t));
    CHECK(alpha_bar(s2, t) == alpha_bar(s, t));
  }
  const auto c = build_schedule(ScheduleKind::Cosine, 20, 1e-4, 0.999);
  const auto c2 = schedule_from_json(to_json(c));
  for (int t = 1; t <= c.T; ++t) CHECK(alpha_bar(c2, t) == alpha_bar(c, t));
}
