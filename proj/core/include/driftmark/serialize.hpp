#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "driftmark/eval.hpp"

namespace driftmark {

// JSON bindings for the persistent object formats. Schedules, codebooks and
// VAEs serialize their constructor parameters only; derived arrays and
// matrices are regenerated on load, which keeps files small and guarantees
// the stored seed fully determines the object.
//
//   schedule  {"kind", "T", "beta_min", "beta_max"}
//   oracle    {"dim", "components": [{"weight", "mean", "var"}, ...]}
//   injection {"delta", "lambda", "t_start", "t_end", "preset"}
//   codebook  {"d", "k", "alpha", "seed"}
//   vae       {"D", "d", "sigma_r", "seed"}
//   message   hex string, most significant bit first
//   attacks   canonical name strings, e.g. "noise(0.25)", "rinse-2x"

nlohmann::json to_json(const NoiseSchedule& s);
NoiseSchedule schedule_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScoreOracle& o);
ScoreOracle oracle_from_json(const nlohmann::json& j);

nlohmann::json to_json(const InjectionConfig& cfg);
InjectionConfig injection_from_json(const nlohmann::json& j,
                                    const NoiseSchedule& s);

nlohmann::json to_json(const CodeBook& cb);
CodeBook codebook_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LinearVAE& v);
LinearVAE vae_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MetricsRecord& r);
nlohmann::json to_json(const std::vector<MetricsRecord>& rs);
nlohmann::json to_json(const std::vector<SweepRecord>& rs);
nlohmann::json to_json(const std::vector<DiagRow>& rows);

// Whole-file helpers.
nlohmann::json load_json(const std::string& path);
void save_text(const std::string& path, const std::string& text);

}  // namespace driftmark
