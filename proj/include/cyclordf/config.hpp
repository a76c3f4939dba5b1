#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cyclordf/af_model.hpp"
#include "cyclordf/asymptotic.hpp"
#include "cyclordf/sampling.hpp"

namespace cyclordf {

/// One source model of an experiment. Sweeps draw one curve per entry.
struct ModelEntry {
  std::string label;  // "t_dc=0.4", "memoryless", ...
  std::shared_ptr<const Autocorrelation> model;
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::N;
  std::vector<std::int64_t> n_values;  // n axis: swept; phi axis: one curve per value
  std::vector<double> phi_tildes;      // phi axis, fractions of T_c
  std::vector<double> distortions;     // D axis
  bool optimize_phase = false;         // n axis: "optimize" phase mode
  double window_fraction = 0.2;
};

struct GridSpec {
  int freq_nodes = 256;
  int phase_points = 64;
  int gamma_t_grid = 4096;
  int gamma_lag_grid = 4096;
  EigenMethod eigen_method = EigenMethod::RealEmbedding;
  double tol_psd = 1e-8;
  std::int64_t cost_budget = 1'000'000;
  bool override_cost = false;
};

/// Sizes of the checks run by `verify`.
struct VerifySpec {
  int l = 32;
  std::vector<std::int64_t> n_list{10, 20, 40, 80};
  int phi_grid = 64;
  int moment_cases = 1000;
  int moment_max_l = 32;
  double rho = 10.0;
  std::int64_t mc_samples = 100'000;
  int sdd_cases = 1000;
  int sdd_max_l = 32;
  int block_l = 16;
  std::int64_t consistency_n = 1;
  int consistency_l_multiple = 64;
  double consistency_rel_tol = 0.02;
  int info_l = 8;
  std::int64_t info_blocks = 10;
  std::int64_t info_samples = 10'000;
};

struct OutputSpec {
  std::string dir = "out";
  bool csv = true;
  bool svg = false;
  std::uint64_t seed = 12345;
};

struct ExperimentConfig {
  std::vector<ModelEntry> models;
  SamplingPlan sampling;
  std::optional<SweepSpec> sweep;
  std::optional<double> distortion;
  GridSpec grid;
  VerifySpec verify;
  OutputSpec output;

  PipelineOptions pipeline(int jobs) const;
  NSweepOptions n_sweep_options() const;
};

/// Throws ConfigError with the offending key on any validation failure.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// JSON Schema (draft 2020-12) of the accepted document.
nlohmann::json config_schema();

/// Reads a number that may also be given as a string pi expression ("pi/5").
double number_or_pi(const nlohmann::json& value, const std::string& key);

}  // namespace cyclordf
