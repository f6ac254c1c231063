// Micro-benchmarks for the hot paths: the exact mixture score, one reverse
// hop per sampler family, a full desk-scale trajectory, payload decoding,
// and one complete suite cell.

#include <benchmark/benchmark.h>

#include <driftmark/codec.hpp>
#include <driftmark/eval.hpp>
#include <driftmark/injection.hpp>
#include <driftmark/oracle.hpp>
#include <driftmark/rng.hpp>
#include <driftmark/sampler.hpp>
#include <driftmark/schedule.hpp>

using namespace driftmark;

namespace {

const NoiseSchedule& desk_schedule() {
  static const NoiseSchedule s = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  return s;
}

const ScoreOracle& desk() {
  static const ScoreOracle o = make_desk_oracle();
  return o;
}

void BM_ExactScore(benchmark::State& state) {
  Rng rng(1);
  const Eigen::VectorXd z = rng.gaussian_vec(16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_score(desk(), desk_schedule(), z, 25));
  }
}
BENCHMARK(BM_ExactScore);

void BM_SamplerStep(benchmark::State& state) {
  const std::vector<SamplerKind> kinds = {ddim(0.0), ancestral(), em_sde(), pf_ode()};
  const SamplerKind kind = kinds[static_cast<std::size_t>(state.range(0))];
  Rng rng(2);
  const Eigen::VectorXd z = rng.gaussian_vec(16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(step(kind, desk(), desk_schedule(), z, 25, 24, nullptr, rng));
  }
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_SamplerStep)->DenseRange(0, 3);

void BM_FullTrajectory(benchmark::State& state) {
  const CodeBook cb = make_codebook(16, 8, 1.2, 11);
  const Message msg = message_from_hex("a7", 8);
  const InjectionConfig cfg =
      make_preset(PresetKind::R, desk_schedule(), encode_message(msg, cb));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample(ddim(0.0), desk(), desk_schedule(), 50, &cfg, seed++));
  }
}
BENCHMARK(BM_FullTrajectory);

void BM_DecodeMessage(benchmark::State& state) {
  const CodeBook cb = make_codebook(16, 8, 1.2, 11);
  Rng rng(3);
  const Eigen::VectorXd z =
      encode_message(random_message(8, rng), cb) + rng.gaussian_vec(16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_message(z, cb));
  }
}
BENCHMARK(BM_DecodeMessage);

void BM_SuiteCell(benchmark::State& state) {
  ExperimentConfig cfg = default_config();
  cfg.samplers = {ddim(0.0)};
  cfg.presets = {PresetKind::R};
  cfg.attacks.clear();  // one "none" cell
  cfg.n_seeds = 40;
  cfg.fpr_target = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_suite(cfg));
  }
}
BENCHMARK(BM_SuiteCell);

}  // namespace

BENCHMARK_MAIN();
