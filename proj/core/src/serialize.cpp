#include "driftmark/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace driftmark {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const NoiseSchedule& s) {
  return {{"kind", to_string(s.kind)},
          {"T", s.T},
          {"beta_min", s.beta_min},
          {"beta_max", s.beta_max}};
}

NoiseSchedule schedule_from_json(const nlohmann::json& j) {
  return build_schedule(schedule_kind_from_string(j.at("kind")), j.at("T"),
                        j.at("beta_min"), j.at("beta_max"));
}

nlohmann::json to_json(const ScoreOracle& o) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : o.components)
    comps.push_back({{"weight", c.weight},
                     {"mean", to_std(c.mean)},
                     {"var", c.var}});
  return {{"dim", o.dim}, {"components", comps}};
}

ScoreOracle oracle_from_json(const nlohmann::json& j) {
  ScoreOracle o;
  if (j.contains("components")) {
    o.dim = j.at("dim");
    for (const auto& cj : j.at("components")) {
      MixtureComponent c;
      c.weight = cj.at("weight");
      c.mean = from_std(cj.at("mean").get<std::vector<double>>());
      c.var = cj.at("var");
      o.components.push_back(std::move(c));
    }
  } else {
    // Builder form: regenerate the default desk-scale oracle from a seed.
    o = make_desk_oracle(j.value("dim", 16), j.value("k_components", 3),
                         j.value("mean_norm", 4.0),
                         j.value("seed", std::uint64_t{7}));
  }
  validate(o);
  return o;
}

nlohmann::json to_json(const InjectionConfig& cfg) {
  return {{"delta", to_std(cfg.delta_wm)},
          {"lambda", cfg.lambda},
          {"t_start", cfg.t_start},
          {"t_end", cfg.t_end},
          {"preset", to_string(cfg.preset)}};
}

InjectionConfig injection_from_json(const nlohmann::json& j,
                                    const NoiseSchedule& s) {
  InjectionConfig cfg;
  cfg.delta_wm = from_std(j.at("delta").get<std::vector<double>>());
  cfg.lambda = j.at("lambda");
  cfg.t_start = j.at("t_start");
  cfg.t_end = j.at("t_end");
  cfg.preset = preset_kind_from_string(j.value("preset", "custom"));
  validate(cfg, s);
  return cfg;
}

nlohmann::json to_json(const CodeBook& cb) {
  return {{"d", cb.d()}, {"k", cb.k()}, {"alpha", cb.alpha}, {"seed", cb.seed}};
}

CodeBook codebook_from_json(const nlohmann::json& j) {
  return make_codebook(j.at("d"), j.at("k"), j.at("alpha"),
                       j.value("seed", std::uint64_t{11}));
}

nlohmann::json to_json(const LinearVAE& v) {
  return {{"D", v.D}, {"d", v.d}, {"sigma_r", v.sigma_r}, {"seed", v.seed}};
}

LinearVAE vae_from_json(const nlohmann::json& j) {
  return make_vae(j.at("D"), j.at("d"), j.at("sigma_r"),
                  j.value("seed", std::uint64_t{5}));
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json samplers = nlohmann::json::array();
  for (const auto& s : cfg.samplers) samplers.push_back(to_string(s));
  nlohmann::json presets = nlohmann::json::array();
  for (const auto& p : cfg.presets) presets.push_back(to_string(p));
  nlohmann::json attacks = nlohmann::json::array();
  for (const auto& a : cfg.attacks) attacks.push_back(attack_name(a));
  return {{"schedule", to_json(cfg.schedule)},
          {"oracle", to_json(cfg.oracle)},
          {"samplers", samplers},
          {"presets", presets},
          {"codebook", to_json(cfg.codebook)},
          {"vae", to_json(cfg.vae)},
          {"attacks", attacks},
          {"message", message_to_hex(cfg.message)},
          {"steps", cfg.steps},
          {"n_seeds", cfg.n_seeds},
          {"fpr_target", cfg.fpr_target},
          {"master_seed", cfg.master_seed},
          {"workers", cfg.workers}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg = default_config();
  if (j.contains("schedule")) cfg.schedule = schedule_from_json(j["schedule"]);
  if (j.contains("oracle")) cfg.oracle = oracle_from_json(j["oracle"]);
  if (j.contains("samplers")) {
    cfg.samplers.clear();
    for (const auto& s : j["samplers"])
      cfg.samplers.push_back(
          sampler_kind_from_string(s.get<std::string>()));
  }
  if (j.contains("presets")) {
    cfg.presets.clear();
    for (const auto& p : j["presets"])
      cfg.presets.push_back(preset_kind_from_string(p.get<std::string>()));
  }
  if (j.contains("codebook")) cfg.codebook = codebook_from_json(j["codebook"]);
  if (j.contains("vae")) cfg.vae = vae_from_json(j["vae"]);
  if (j.contains("attacks")) {
    cfg.attacks.clear();
    for (const auto& a : j["attacks"])
      cfg.attacks.push_back(attack_from_name(a.get<std::string>()));
  }
  cfg.steps = j.value("steps", cfg.steps);
  cfg.n_seeds = j.value("n_seeds", cfg.n_seeds);
  cfg.fpr_target = j.value("fpr_target", cfg.fpr_target);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.workers = j.value("workers", cfg.workers);
  if (j.contains("message")) {
    cfg.message = message_from_hex(j["message"].get<std::string>(),
                                   cfg.codebook.k());
  } else if (cfg.message.k() != cfg.codebook.k()) {
    // No explicit payload and a non-default codebook: derive one
    // deterministically from the master seed.
    Rng rng(mix_seed(cfg.master_seed, 0x6d7367));
    cfg.message = random_message(cfg.codebook.k(), rng);
  }
  return cfg;
}

nlohmann::json to_json(const MetricsRecord& r) {
  return {{"sampler", r.sampler},
          {"attack", r.attack},
          {"preset", r.preset},
          {"n", r.n},
          {"bit_acc_mean", r.bit_acc_mean},
          {"bit_acc_se", r.bit_acc_se},
          {"tpr", r.tpr},
          {"stat_mean", r.stat_mean},
          {"psnr_mean", r.psnr_mean}};
}

nlohmann::json to_json(const std::vector<MetricsRecord>& rs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rs) arr.push_back(to_json(r));
  return arr;
}

nlohmann::json to_json(const std::vector<SweepRecord>& rs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rs)
    arr.push_back({{"t_start", r.t_start},
                   {"t_end", r.t_end},
                   {"lambda", r.lambda},
                   {"psnr_mean", r.psnr_mean},
                   {"tpr", r.tpr},
                   {"bit_acc_mean", r.bit_acc_mean}});
  return arr;
}

nlohmann::json to_json(const std::vector<DiagRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"t", r.t},
                   {"gamma", r.gamma},
                   {"eps_norm_q", r.eps_norm_q},
                   {"eps_norm_r", r.eps_norm_r}});
  return arr;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

}  // namespace driftmark
