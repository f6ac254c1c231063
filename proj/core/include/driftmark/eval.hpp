#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "driftmark/attacks.hpp"
#include "driftmark/codec.hpp"
#include "driftmark/injection.hpp"
#include "driftmark/oracle.hpp"
#include "driftmark/sampler.hpp"
#include "driftmark/schedule.hpp"
#include "driftmark/vae.hpp"

namespace driftmark {

// Full description of one experiment: generation, watermarking, codec,
// data boundary, attacks, and detection protocol. `default_config()` is the
// desk-scale reference setup used by the suite CLI and the acceptance gate.
struct ExperimentConfig {
  NoiseSchedule schedule;
  ScoreOracle oracle;
  std::vector<SamplerKind> samplers;
  std::vector<PresetKind> presets;
  CodeBook codebook;
  LinearVAE vae;
  std::vector<AttackSpec> attacks;
  Message message;
  int steps = 50;
  int n_seeds = 200;
  double fpr_target = 0.01;
  std::uint64_t master_seed = 2026;
  int workers = 0;  // 0 = one per hardware thread
};

ExperimentConfig default_config();

// One suite cell: a (sampler, attack, preset) combination evaluated over
// n_seeds clean/marked pairs with a per-cell calibrated threshold.
struct MetricsRecord {
  std::string sampler;
  std::string attack;
  std::string preset;
  int n = 0;
  double bit_acc_mean = 0.0;
  double bit_acc_se = 0.0;
  double tpr = 0.0;
  double stat_mean = 0.0;
  double psnr_mean = 0.0;
};

// Empirical (1 - fpr_target) quantile of clean detection statistics
// (higher statistic means "detected"). Throws std::invalid_argument when
// fewer than 1/fpr_target samples are supplied — the quantile would be
// meaningless — or when fpr_target is outside (0, 1).
double calibrate_threshold(std::vector<double> clean_stats,
                           double fpr_target);

// Fraction of statistics strictly above the threshold. Throws on empty
// input.
double tpr_at_fpr(const std::vector<double>& wm_stats, double threshold);

// 10*log10(MAX^2 / MSE) with MAX = 2.0 (toy dynamic range [-1, 1]); capped
// at 99.0, which is also the documented value for identical inputs.
double psnr(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Per-hop comparison row for a quality-preset and a robustness-preset run
// of the same seed: the strength-1 modulation coefficient and both noise
// prediction norms.
struct DiagRow {
  int t = 0;
  double gamma = 0.0;
  double eps_norm_q = 0.0;
  double eps_norm_r = 0.0;
};

// Requires trajectories of equal step structure on the given schedule.
std::vector<DiagRow> diagnostics(const NoiseSchedule& s, const Trajectory& q,
                                 const Trajectory& r);

// Runs every (sampler x attack x preset) cell: n_seeds common-random-number
// clean/marked pairs, per-cell threshold calibration on the clean
// statistics, bit accuracy / TPR / mean statistic / PSNR. Cells execute on a
// bounded worker pool; every cell derives its RNG streams from (master_seed,
// cell index), so parallel and serial runs produce identical records. An
// empty attack list runs one "none" cell per sampler x preset. Per-cell
// failures propagate with the cell identity attached.
std::vector<MetricsRecord> run_suite(const ExperimentConfig& cfg);

// CSV with the stable header
//   sampler,attack,preset,n,bit_acc_mean,bit_acc_se,tpr,stat_mean,psnr_mean
// and %.6f formatting, so identical configs give byte-identical files.
std::string to_csv(const std::vector<MetricsRecord>& records);

// Window/strength ablation cell and its measurements (no attack; the first
// configured sampler drives generation).
struct SweepCellSpec {
  int t_start = 1;
  int t_end = 1;
  double lambda = 1.0;
};
struct SweepRecord {
  int t_start = 0;
  int t_end = 0;
  double lambda = 0.0;
  double psnr_mean = 0.0;
  double tpr = 0.0;
  double bit_acc_mean = 0.0;
};

// Reference grid: windows {[1,T], [T/2,T], [0.4T,0.9T]} crossed with
// strengths {0.5, 1.0}.
std::vector<SweepCellSpec> default_sweep_grid(int T);

std::vector<SweepRecord> sweep_ablation(const std::vector<SweepCellSpec>& grid,
                                        const ExperimentConfig& cfg);

std::string to_csv(const std::vector<SweepRecord>& records);
std::string to_csv(const std::vector<DiagRow>& rows);

}  // namespace driftmark
