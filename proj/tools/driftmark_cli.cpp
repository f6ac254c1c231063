// driftmark: command-line front end for the watermark-injection laboratory.
//
// Subcommands
//   embed        generate one watermarked sample (JSON object out)
//   extract      decode payload + detection statistic from a sample file
//   attack       apply a named attack to a sample file
//   suite        full (sampler x attack x preset) metrics matrix (CSV)
//   sweep        window/strength ablation table (CSV)
//   diagnostics  per-step modulation-coefficient and noise-norm table (CSV)
//   calibrate    detection threshold from clean generations (CSV)
//
// All table commands accept --json to mirror the CSV as JSON. Exit code is 0
// on success and 1 on failure, with the failing cell or file named on stderr.

#include <CLI11.hpp>

#include <driftmark/attacks.hpp>
#include <driftmark/codec.hpp>
#include <driftmark/eval.hpp>
#include <driftmark/injection.hpp>
#include <driftmark/oracle.hpp>
#include <driftmark/rng.hpp>
#include <driftmark/sampler.hpp>
#include <driftmark/schedule.hpp>
#include <driftmark/serialize.hpp>
#include <driftmark/vae.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace driftmark;
using nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> sampler;
  std::optional<int> steps;
  std::optional<std::string> preset;
  std::optional<double> lambda;
  std::optional<std::string> window;
  std::optional<std::string> message_hex;
  bool as_json = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path,
                  "Experiment config JSON; fields override the built-in default");
  cmd->add_option("--out", o.out_path, "Output file (default: stdout)");
  cmd->add_option("--seed", o.seed, "Master seed override");
  cmd->add_option("--sampler", o.sampler,
                  "Sampler kind: ddim, ddim(eta), ancestral, em-sde, pf-ode");
  cmd->add_option("--steps", o.steps, "Reverse steps (sub-grid size)");
  cmd->add_option("--preset", o.preset, "Injection preset: Q or R")
      ->check(CLI::IsMember({"Q", "R"}));
  cmd->add_option("--lambda", o.lambda, "Injection strength for a custom window");
  cmd->add_option("--window", o.window,
                  "Custom injection window a:b (inclusive reverse steps)");
  cmd->add_option("--message", o.message_hex, "Payload as hex, MSB first");
  cmd->add_flag("--json", o.as_json, "Emit JSON instead of CSV (table commands)");
}

ExperimentConfig load_config(const CommonOpts& o) {
  ExperimentConfig cfg =
      o.config_path.empty() ? default_config() : config_from_json(load_json(o.config_path));
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.steps) cfg.steps = *o.steps;
  if (o.sampler) cfg.samplers = {sampler_kind_from_string(*o.sampler)};
  if (o.message_hex) cfg.message = message_from_hex(*o.message_hex, cfg.codebook.k());
  return cfg;
}

std::pair<int, int> parse_window(const std::string& w) {
  const auto colon = w.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= w.size())
    throw std::invalid_argument("window must have the form a:b, got '" + w + "'");
  return {std::stoi(w.substr(0, colon)), std::stoi(w.substr(colon + 1))};
}

// Preset unless a custom window/strength was given; custom requires both.
InjectionConfig make_cli_injection(const ExperimentConfig& cfg, const CommonOpts& o) {
  const Eigen::VectorXd delta = encode_message(cfg.message, cfg.codebook);
  if (o.window || o.lambda) {
    if (!(o.window && o.lambda))
      throw std::invalid_argument("custom injection needs both --window and --lambda");
    const auto [a, b] = parse_window(*o.window);
    return make_injection(delta, *o.lambda, a, b, cfg.schedule);
  }
  const PresetKind pk =
      (o.preset && *o.preset == "Q") ? PresetKind::Q : PresetKind::R;
  return make_preset(pk, cfg.schedule, delta);
}

void emit(const CommonOpts& o, const std::string& text) {
  if (o.out_path.empty())
    std::cout << text;
  else
    save_text(o.out_path, text);
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

// Reads a sample file: {"x": [...]} data-space vector (preferred) or
// {"z": [...]} latent.
std::pair<Eigen::VectorXd, bool> load_sample(const std::string& path) {
  const json j = load_json(path);
  if (j.contains("x")) return {vector_from_json(j.at("x")), true};
  if (j.contains("z")) return {vector_from_json(j.at("z")), false};
  throw std::invalid_argument(path + ": expected an object with an 'x' or 'z' array");
}

int cmd_embed(const CommonOpts& o) {
  const ExperimentConfig cfg = load_config(o);
  const SamplerKind kind = cfg.samplers.empty() ? ddim(0.0) : cfg.samplers.front();
  const InjectionConfig inj = make_cli_injection(cfg, o);
  const std::uint64_t seed = cfg.master_seed;
  const auto [z_clean, z_marked] =
      paired_sample(kind, cfg.oracle, cfg.schedule, cfg.steps, inj, seed);
  Rng rng_marked(mix_seed(seed, 1));
  Rng rng_clean(mix_seed(seed, 1));  // identical decode noise isolates the mark
  const Eigen::VectorXd x_marked = vae_decode(cfg.vae, z_marked, rng_marked);
  const Eigen::VectorXd x_clean = vae_decode(cfg.vae, z_clean, rng_clean);
  const Eigen::VectorXd z_rt = vae_encode(cfg.vae, x_marked);

  json out;
  out["seed"] = seed;
  out["sampler"] = to_string(kind);
  out["steps"] = cfg.steps;
  out["preset"] = to_string(inj.preset);
  out["t_start"] = inj.t_start;
  out["t_end"] = inj.t_end;
  out["lambda"] = inj.lambda;
  out["message"] = message_to_hex(cfg.message);
  out["detection_stat"] = detection_stat(z_rt, cfg.message, cfg.codebook);
  out["bit_accuracy"] = bit_accuracy(cfg.message, decode_message(z_rt, cfg.codebook));
  out["psnr_vs_clean"] = psnr(x_clean, x_marked);
  out["z"] = vector_to_json(z_marked);
  out["x"] = vector_to_json(x_marked);
  emit(o, out.dump(2) + "\n");
  return 0;
}

int cmd_extract(const CommonOpts& o, const std::string& in_path) {
  const ExperimentConfig cfg = load_config(o);
  const auto [v, is_data] = load_sample(in_path);
  const Eigen::VectorXd z = is_data ? vae_encode(cfg.vae, v) : v;
  const Message decoded = decode_message(z, cfg.codebook);
  json out;
  out["input"] = in_path;
  out["space"] = is_data ? "data" : "latent";
  out["message"] = message_to_hex(decoded);
  out["expected_message"] = message_to_hex(cfg.message);
  out["bit_accuracy"] = bit_accuracy(cfg.message, decoded);
  out["detection_stat"] = detection_stat(z, cfg.message, cfg.codebook);
  emit(o, out.dump(2) + "\n");
  return 0;
}

int cmd_attack(const CommonOpts& o, const std::string& in_path,
               const std::string& attack_name_str) {
  const ExperimentConfig cfg = load_config(o);
  const AttackSpec spec = attack_from_name(attack_name_str);
  const auto [x, is_data] = load_sample(in_path);
  if (!is_data)
    throw std::invalid_argument(in_path + ": attacks act on data-space samples ('x')");
  const Eigen::VectorXd y =
      apply_attack(x, spec, cfg.oracle, cfg.schedule, cfg.vae, cfg.master_seed);
  json out;
  out["input"] = in_path;
  out["attack"] = attack_name(spec);
  out["seed"] = cfg.master_seed;
  out["psnr_vs_input"] = psnr(x, y);
  out["x"] = vector_to_json(y);
  emit(o, out.dump(2) + "\n");
  return 0;
}

int cmd_suite(const CommonOpts& o) {
  const ExperimentConfig cfg = load_config(o);
  const auto records = run_suite(cfg);
  emit(o, o.as_json ? to_json(records).dump(2) + "\n" : to_csv(records));
  return 0;
}

int cmd_sweep(const CommonOpts& o) {
  const ExperimentConfig cfg = load_config(o);
  std::vector<SweepCellSpec> grid;
  if (o.window || o.lambda) {
    if (!(o.window && o.lambda))
      throw std::invalid_argument("a custom sweep cell needs both --window and --lambda");
    const auto [a, b] = parse_window(*o.window);
    grid.push_back({a, b, *o.lambda});
  } else {
    grid = default_sweep_grid(cfg.schedule.T);
  }
  const auto records = sweep_ablation(grid, cfg);
  emit(o, o.as_json ? to_json(records).dump(2) + "\n" : to_csv(records));
  return 0;
}

int cmd_diagnostics(const CommonOpts& o) {
  const ExperimentConfig cfg = load_config(o);
  const SamplerKind kind = cfg.samplers.empty() ? ddim(0.0) : cfg.samplers.front();
  const Eigen::VectorXd delta = encode_message(cfg.message, cfg.codebook);
  const InjectionConfig inj_q = make_preset(PresetKind::Q, cfg.schedule, delta);
  const InjectionConfig inj_r = make_preset(PresetKind::R, cfg.schedule, delta);
  const Trajectory traj_q =
      sample(kind, cfg.oracle, cfg.schedule, cfg.steps, &inj_q, cfg.master_seed);
  const Trajectory traj_r =
      sample(kind, cfg.oracle, cfg.schedule, cfg.steps, &inj_r, cfg.master_seed);
  const auto rows = diagnostics(cfg.schedule, traj_q, traj_r);
  emit(o, o.as_json ? to_json(rows).dump(2) + "\n" : to_csv(rows));
  return 0;
}

int cmd_calibrate(const CommonOpts& o) {
  const ExperimentConfig cfg = load_config(o);
  const SamplerKind kind = cfg.samplers.empty() ? ddim(0.0) : cfg.samplers.front();
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(cfg.n_seeds));
  double mean = 0.0;
  for (int j = 0; j < cfg.n_seeds; ++j) {
    const std::uint64_t sj = static_cast<std::uint64_t>(j);
    const Trajectory traj = sample(kind, cfg.oracle, cfg.schedule, cfg.steps, nullptr,
                                   mix_seed(cfg.master_seed, sj * 2));
    Rng dec_rng(mix_seed(cfg.master_seed, sj * 2 + 1));
    const Eigen::VectorXd x = vae_decode(cfg.vae, traj.states.back().z, dec_rng);
    stats.push_back(detection_stat(vae_encode(cfg.vae, x), cfg.message, cfg.codebook));
    mean += stats.back();
  }
  mean /= static_cast<double>(cfg.n_seeds);
  const double threshold = calibrate_threshold(stats, cfg.fpr_target);
  char line[160];
  std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", cfg.n_seeds, cfg.fpr_target,
                threshold, mean);
  if (o.as_json) {
    json out;
    out["n"] = cfg.n_seeds;
    out["fpr_target"] = cfg.fpr_target;
    out["threshold"] = threshold;
    out["clean_stat_mean"] = mean;
    emit(o, out.dump(2) + "\n");
  } else {
    emit(o, std::string("n,fpr_target,threshold,clean_stat_mean\n") + line);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Watermark-injection laboratory for diffusion-style samplers"};
  app.require_subcommand(1);

  CommonOpts embed_o, extract_o, attack_o, suite_o, sweep_o, diag_o, cal_o;
  std::string extract_in, attack_in, attack_kind;

  CLI::App* embed = app.add_subcommand("embed", "Generate one watermarked sample");
  add_common(embed, embed_o);

  CLI::App* extract =
      app.add_subcommand("extract", "Decode payload and detection statistic from a sample");
  extract->add_option("input", extract_in, "Sample JSON ({'x': [...]} or {'z': [...]})")
      ->required();
  add_common(extract, extract_o);

  CLI::App* attack = app.add_subcommand("attack", "Apply a named attack to a sample");
  attack->add_option("input", attack_in, "Sample JSON with a data-space 'x' array")
      ->required();
  attack->add_option("--attack", attack_kind, "Attack name, e.g. noise(0.25), rinse-2x")
      ->required();
  add_common(attack, attack_o);

  CLI::App* suite = app.add_subcommand("suite", "Run the full metrics matrix");
  add_common(suite, suite_o);

  CLI::App* sweep = app.add_subcommand("sweep", "Window/strength ablation table");
  add_common(sweep, sweep_o);

  CLI::App* diag =
      app.add_subcommand("diagnostics", "Per-step modulation and noise-norm table");
  add_common(diag, diag_o);

  CLI::App* cal = app.add_subcommand("calibrate", "Calibrate the detection threshold");
  add_common(cal, cal_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (embed->parsed()) return cmd_embed(embed_o);
    if (extract->parsed()) return cmd_extract(extract_o, extract_in);
    if (attack->parsed()) return cmd_attack(attack_o, attack_in, attack_kind);
    if (suite->parsed()) return cmd_suite(suite_o);
    if (sweep->parsed()) return cmd_sweep(sweep_o);
    if (diag->parsed()) return cmd_diagnostics(diag_o);
    if (cal->parsed()) return cmd_calibrate(cal_o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "driftmark: %s\n", e.what());
    return 1;
  }
  return 0;
}
