#include "driftmark/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <stdexcept>
#include <thread>

namespace driftmark {

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  // T = 50 linear schedule with the per-step rates scaled up by 1000/50 so
  // the total noise injected matches the common T = 1000, [1e-4, 0.02]
  // parameterization.
  cfg.schedule = build_schedule(ScheduleKind::Linear, 50, 0.002, 0.4);
  cfg.oracle = make_desk_oracle(16, 3, 4.0, 7);
  cfg.samplers = {ddim(0.0), ancestral(), em_sde(), pf_ode()};
  cfg.presets = {PresetKind::Q, PresetKind::R};
  cfg.codebook = make_codebook(16, 8, 1.2, 11);
  cfg.vae = make_vae(64, 16, 0.05, 5);
  cfg.attacks = {attack_from_name("none"), attack_from_name("noise(0.25)"),
                 attack_from_name("rinse-2x")};
  cfg.message = message_from_hex("a7", 8);
  cfg.steps = 50;
  cfg.n_seeds = 200;
  cfg.fpr_target = 0.01;
  cfg.master_seed = 2026;
  return cfg;
}

double calibrate_threshold(std::vector<double> clean_stats,
                           double fpr_target) {
  if (fpr_target <= 0.0 || fpr_target >= 1.0)
    throw std::invalid_argument("calibrate_threshold: fpr_target not in (0,1)");
  const double n = static_cast<double>(clean_stats.size());
  if (n < 1.0 / fpr_target)
    throw std::invalid_argument(
        "calibrate_threshold: need at least 1/fpr_target clean samples for a "
        "meaningful quantile; supply more calibration data");
  std::sort(clean_stats.begin(), clean_stats.end());
  const auto idx = static_cast<std::ptrdiff_t>(
      std::ceil((1.0 - fpr_target) * n)) - 1;
  const auto clamped = std::clamp<std::ptrdiff_t>(
      idx, 0, static_cast<std::ptrdiff_t>(clean_stats.size()) - 1);
  return clean_stats[static_cast<std::size_t>(clamped)];
}

double tpr_at_fpr(const std::vector<double>& wm_stats, double threshold) {
  if (wm_stats.empty())
    throw std::invalid_argument("tpr_at_fpr: empty statistic list");
  std::size_t above = 0;
  for (double v : wm_stats)
    if (v > threshold) ++above;
  return static_cast<double>(above) / wm_stats.size();
}

double psnr(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("psnr: dimension mismatch");
  const double mse = (x - y).squaredNorm() / x.size();
  if (mse == 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(4.0 / mse));
}

std::vector<DiagRow> diagnostics(const NoiseSchedule& s, const Trajectory& q,
                                 const Trajectory& r) {
  if (q.states.empty() || q.states.size() != r.states.size() ||
      q.eps_norms.size() != r.eps_norms.size() ||
      q.states.front().t != s.T || r.states.front().t != s.T)
    throw std::invalid_argument("diagnostics: mismatched schedules");
  for (std::size_t i = 0; i < q.states.size(); ++i)
    if (q.states[i].t != r.states[i].t)
      throw std::invalid_argument("diagnostics: mismatched schedules");
  std::vector<DiagRow> rows(q.eps_norms.size());
  for (std::size_t i = 0; i < q.eps_norms.size(); ++i) {
    const int t = q.states[i].t;  // source step of hop i
    rows[i] = {t, modulation_coeff(s, t, 1.0), q.eps_norms[i],
               r.eps_norms[i]};
  }
  return rows;
}

namespace {

struct CellId {
  SamplerKind sampler;
  AttackSpec attack;
  PresetKind preset;
  std::size_t index;
};

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (double v : xs) m.mean += v;
  m.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double v : xs) ss += (v - m.mean) * (v - m.mean);
    m.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

MetricsRecord run_cell(const ExperimentConfig& cfg, const CellId& cell) {
  const Eigen::VectorXd delta = encode_message(cfg.message, cfg.codebook);
  const InjectionConfig inj =
      make_preset(cell.preset, cfg.schedule, delta);

  // Four per-cell streams, all derived from (master_seed, cell index):
  // trajectory seeds, decode noise, attack randomness for the marked and the
  // clean branch. Work inside a cell is sequential; cells are independent.
  const std::uint64_t traj_stream =
      mix_seed(cfg.master_seed, cell.index * 4 + 0);
  const std::uint64_t decode_stream =
      mix_seed(cfg.master_seed, cell.index * 4 + 1);
  const std::uint64_t attack_wm_stream =
      mix_seed(cfg.master_seed, cell.index * 4 + 2);
  const std::uint64_t attack_clean_stream =
      mix_seed(cfg.master_seed, cell.index * 4 + 3);

  std::vector<double> accs, stats_wm, stats_clean, psnrs;
  accs.reserve(cfg.n_seeds);
  stats_wm.reserve(cfg.n_seeds);
  stats_clean.reserve(cfg.n_seeds);
  psnrs.reserve(cfg.n_seeds);

  for (int j = 0; j < cfg.n_seeds; ++j) {
    const auto [z0_clean, z0_wm] =
        paired_sample(cell.sampler, cfg.oracle, cfg.schedule, cfg.steps, inj,
                      mix_seed(traj_stream, j));
    // Identical decoder noise inside the pair, so PSNR isolates the
    // watermark (a zero-strength mark reports the cap value).
    Rng dec_wm(mix_seed(decode_stream, j));
    Rng dec_clean(mix_seed(decode_stream, j));
    const Eigen::VectorXd x_wm = vae_decode(cfg.vae, z0_wm, dec_wm);
    const Eigen::VectorXd x_clean = vae_decode(cfg.vae, z0_clean, dec_clean);
    psnrs.push_back(psnr(x_wm, x_clean));

    const Eigen::VectorXd y_wm =
        apply_attack(x_wm, cell.attack, cfg.oracle, cfg.schedule, cfg.vae,
                     mix_seed(attack_wm_stream, j));
    const Eigen::VectorXd y_clean =
        apply_attack(x_clean, cell.attack, cfg.oracle, cfg.schedule, cfg.vae,
                     mix_seed(attack_clean_stream, j));

    const Eigen::VectorXd zr_wm = vae_encode(cfg.vae, y_wm);
    const Eigen::VectorXd zr_clean = vae_encode(cfg.vae, y_clean);
    accs.push_back(
        bit_accuracy(decode_message(zr_wm, cfg.codebook), cfg.message));
    stats_wm.push_back(detection_stat(zr_wm, cfg.message, cfg.codebook));
    stats_clean.push_back(
        detection_stat(zr_clean, cfg.message, cfg.codebook));
  }

  const double threshold = calibrate_threshold(stats_clean, cfg.fpr_target);

  MetricsRecord rec;
  rec.sampler = to_string(cell.sampler);
  rec.attack = attack_name(cell.attack);
  rec.preset = to_string(cell.preset);
  rec.n = cfg.n_seeds;
  const Moments acc_m = moments(accs);
  rec.bit_acc_mean = acc_m.mean;
  rec.bit_acc_se = acc_m.se;
  rec.tpr = tpr_at_fpr(stats_wm, threshold);
  rec.stat_mean = moments(stats_wm).mean;
  rec.psnr_mean = moments(psnrs).mean;
  return rec;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n_seeds < 2)
    throw std::invalid_argument("suite: n_seeds must be >= 2");
  if (cfg.fpr_target <= 0.0 || cfg.fpr_target >= 1.0)
    throw std::invalid_argument("suite: fpr_target must lie in (0, 1)");
  if (static_cast<double>(cfg.n_seeds) < 1.0 / cfg.fpr_target)
    throw std::invalid_argument(
        "suite: n_seeds must be at least 1/fpr_target so the per-cell "
        "threshold quantile is meaningful");
  if (cfg.samplers.empty())
    throw std::invalid_argument("suite: at least one sampler required");
  if (cfg.presets.empty())
    throw std::invalid_argument("suite: at least one preset required");
  if (cfg.codebook.d() != cfg.oracle.dim || cfg.vae.d != cfg.oracle.dim)
    throw std::invalid_argument(
        "suite: codebook/VAE latent dimension must match the oracle");
  if (cfg.message.k() != cfg.codebook.k())
    throw std::invalid_argument(
        "suite: message length must match the codebook payload");
  validate(cfg.oracle);
}

// Runs one job per cell on a bounded pool; rethrows the first failure (by
// cell order) with the cell identity attached.
template <typename Job>
void run_cells(std::size_t n_cells, int workers, Job&& job) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t pool =
      std::min<std::size_t>(n_cells, workers > 0 ? workers : hw);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n_cells);
  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (std::size_t w = 0; w < pool; ++w) {
    threads.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_cells) return;
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<MetricsRecord> run_suite(const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::vector<AttackSpec> attacks = cfg.attacks;
  if (attacks.empty()) attacks.push_back(AttackSpec{});  // "none" cell

  std::vector<CellId> cells;
  for (const auto& sampler : cfg.samplers)
    for (const auto& attack : attacks)
      for (const auto& preset : cfg.presets)
        cells.push_back({sampler, attack, preset, cells.size()});

  std::vector<MetricsRecord> records(cells.size());
  run_cells(cells.size(), cfg.workers, [&](std::size_t i) {
    try {
      records[i] = run_cell(cfg, cells[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error(
          "suite cell sampler=" + to_string(cells[i].sampler) +
          " attack=" + attack_name(cells[i].attack) +
          " preset=" + to_string(cells[i].preset) + ": " + e.what());
    }
  });
  return records;
}

namespace {
std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}
}  // namespace

std::string to_csv(const std::vector<MetricsRecord>& records) {
  std::string out =
      "sampler,attack,preset,n,bit_acc_mean,bit_acc_se,tpr,stat_mean,"
      "psnr_mean\n";
  for (const auto& r : records) {
    out += r.sampler + ',' + r.attack + ',' + r.preset + ',' +
           std::to_string(r.n) + ',' + fmt6(r.bit_acc_mean) + ',' +
           fmt6(r.bit_acc_se) + ',' + fmt6(r.tpr) + ',' + fmt6(r.stat_mean) +
           ',' + fmt6(r.psnr_mean) + '\n';
  }
  return out;
}

std::vector<SweepCellSpec> default_sweep_grid(int T) {
  const auto half = static_cast<int>(std::lround(T / 2.0));
  const auto lo = static_cast<int>(std::lround(0.4 * T));
  const auto hi = static_cast<int>(std::lround(0.9 * T));
  std::vector<SweepCellSpec> grid;
  for (double lambda : {0.5, 1.0}) {
    grid.push_back({1, T, lambda});
    grid.push_back({half, T, lambda});
    grid.push_back({lo, hi, lambda});
  }
  return grid;
}

std::vector<SweepRecord> sweep_ablation(const std::vector<SweepCellSpec>& grid,
                                        const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (grid.empty())
    throw std::invalid_argument("sweep_ablation: empty grid");
  const SamplerKind sampler = cfg.samplers.front();
  const Eigen::VectorXd delta = encode_message(cfg.message, cfg.codebook);

  std::vector<SweepRecord> records(grid.size());
  run_cells(grid.size(), cfg.workers, [&](std::size_t i) {
    const SweepCellSpec& cell = grid[i];
    try {
      const InjectionConfig inj = make_injection(
          delta, cell.lambda, cell.t_start, cell.t_end, cfg.schedule);
      const std::uint64_t traj_stream =
          mix_seed(cfg.master_seed, i * 4 + 0);
      const std::uint64_t decode_stream =
          mix_seed(cfg.master_seed, i * 4 + 1);
      std::vector<double> accs, stats_wm, stats_clean, psnrs;
      for (int j = 0; j < cfg.n_seeds; ++j) {
        const auto [z0_clean, z0_wm] = paired_sample(
            sampler, cfg.oracle, cfg.schedule, cfg.steps, inj,
            mix_seed(traj_stream, j));
        Rng dec_wm(mix_seed(decode_stream, j));
        Rng dec_clean(mix_seed(decode_stream, j));
        const Eigen::VectorXd x_wm = vae_decode(cfg.vae, z0_wm, dec_wm);
        const Eigen::VectorXd x_clean =
            vae_decode(cfg.vae, z0_clean, dec_clean);
        psnrs.push_back(psnr(x_wm, x_clean));
        const Eigen::VectorXd zr_wm = vae_encode(cfg.vae, x_wm);
        const Eigen::VectorXd zr_clean = vae_encode(cfg.vae, x_clean);
        accs.push_back(
            bit_accuracy(decode_message(zr_wm, cfg.codebook), cfg.message));
        stats_wm.push_back(detection_stat(zr_wm, cfg.message, cfg.codebook));
        stats_clean.push_back(
            detection_stat(zr_clean, cfg.message, cfg.codebook));
      }
      const double threshold =
          calibrate_threshold(stats_clean, cfg.fpr_target);
      records[i] = {cell.t_start,  cell.t_end,
                    cell.lambda,   moments(psnrs).mean,
                    tpr_at_fpr(stats_wm, threshold), moments(accs).mean};
    } catch (const std::exception& e) {
      throw std::runtime_error(
          "sweep cell window=[" + std::to_string(cell.t_start) + "," +
          std::to_string(cell.t_end) + "] lambda=" +
          std::to_string(cell.lambda) + ": " + e.what());
    }
  });
  return records;
}

std::string to_csv(const std::vector<SweepRecord>& records) {
  std::string out = "t_start,t_end,lambda,psnr_mean,tpr,bit_acc_mean\n";
  for (const auto& r : records) {
    out += std::to_string(r.t_start) + ',' + std::to_string(r.t_end) + ',' +
           fmt6(r.lambda) + ',' + fmt6(r.psnr_mean) + ',' + fmt6(r.tpr) +
           ',' + fmt6(r.bit_acc_mean) + '\n';
  }
  return out;
}

std::string to_csv(const std::vector<DiagRow>& rows) {
  std::string out = "t,gamma,eps_norm_q,eps_norm_r\n";
  for (const auto& r : rows) {
    out += std::to_string(r.t) + ',' + fmt6(r.gamma) + ',' +
           fmt6(r.eps_norm_q) + ',' + fmt6(r.eps_norm_r) + '\n';
  }
  return out;
}

}  // namespace driftmark
