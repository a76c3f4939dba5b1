#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cyclordf/af_model.hpp"
#include "cyclordf/polyphase_spectrum.hpp"
#include "cyclordf/sampling.hpp"
#include "cyclordf/waterfill.hpp"

namespace cyclordf {

struct PipelineOptions {
  EigenFieldOptions field;
  std::size_t memory_budget = kDefaultMemoryBudget;
  // Refuse plans with p_n * grid_size above this unless override_cost is set.
  std::int64_t cost_budget = 1'000'000;
  bool override_cost = false;
  // Worker threads for independent sweep points.
  int jobs = 1;
};

/// Eigenvalue field of the polyphase PSD matrix for a synchronous plan.
/// Enforces the cost guard.
EigenField field_for_plan(const Autocorrelation& model, const ResolvedPlan& plan,
                          const PipelineOptions& options);

struct RdfEvaluation {
  ResolvedPlan plan;
  RdfPoint point;
};

/// Block autocorrelation -> eigenvalue field -> water level for one (n, phi_s, D).
RdfEvaluation rdf_sync(const Autocorrelation& model, const SamplingPlan& plan, double distortion,
                       const PipelineOptions& options = {});

struct PhaseCurve {
  std::vector<double> phases;  // seconds, k T_c / grid
  std::vector<RdfPoint> points;
  std::size_t argmin = 0;
  double phi_opt = 0.0;
  double rate_min = 0.0;

  /// max - min of the rate over the grid.
  double spread() const;
};

/// Grid minimisation of the rate over phi_s = k T_c / grid_size, k < grid_size.
/// Ties go to the smallest k. plan.n must be set; plan.phase_s is ignored.
PhaseCurve phase_optimize(const Autocorrelation& model, const SamplingPlan& plan,
                          double distortion, int phase_grid_size,
                          const PipelineOptions& options = {});

struct GateReport {
  double gamma_c = 0.0;
  double distortion = 0.0;
  bool pass = false;
  int tau_c = 0;
  int t_grid = 0;
  int lag_grid = 0;

  /// "certified" when the margin condition holds, "heuristic" otherwise.
  std::string label() const { return pass ? "certified" : "heuristic"; }
};

/// PASS iff gamma_c > 0 and D <= gamma_c.
GateReport gate_check(const Autocorrelation& model, int p, double distortion, int t_grid = 4096,
                      int lag_grid = 4096);

enum class SweepAxis { N, Phase, Distortion };

const char* to_string(SweepAxis axis);

struct SweepPoint {
  double axis_value = 0.0;
  std::int64_t n = 0;
  std::int64_t p_n = 0;
  double eps_n = 0.0;
  double phase_s = 0.0;
  RdfPoint rdf;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::N;
  std::vector<SweepPoint> points;
  std::optional<GateReport> gate;
  std::optional<double> limsup_estimate;  // n axis only
  // phase axis: |R(phi_0 + T_s) - R(phi_0)| at the first phase
  std::optional<double> shift_gap;
  bool partial = false;
};

/// Max over the trailing ceil(window_fraction * size) values (at least one).
/// NaN entries are skipped. Empty input yields nullopt.
std::optional<double> limsup_estimate(std::span<const double> values, double window_fraction);

struct NSweepOptions {
  double window_fraction = 0.2;
  // true: rate minimised over the phase grid at each n. false: plan.phase_s is used.
  bool optimize_phase = true;
  int phase_grid_size = 64;
  int gate_t_grid = 4096;
  int gate_lag_grid = 4096;
};

/// Rate versus n. Per-n failures are recorded and the sweep continues.
SweepResult n_sweep(const Autocorrelation& model, const SamplingPlan& plan, double distortion,
                    std::span<const std::int64_t> ns, const NSweepOptions& sweep = {},
                    const PipelineOptions& options = {});

/// Rate versus normalized phase phi_s / T_c at fixed n.
SweepResult phase_sweep(const Autocorrelation& model, const SamplingPlan& plan,
                        double distortion, std::span<const double> phi_tildes,
                        const PipelineOptions& options = {});

/// Rate versus D at fixed (n, phi_s); the eigenvalue field is built once.
SweepResult distortion_sweep(const Autocorrelation& model, const SamplingPlan& plan,
                             std::span<const double> distortions,
                             const PipelineOptions& options = {});

/// Overhead of the block-plus-guard-interval construction.
struct GuardPlan {
  int l = 0;
  int tau_c = 0;
  double delta_g_prime = 0.0;  // seconds
  double delta_g = 0.0;        // seconds, in [0, T_c)
  double rate_factor = 1.0;    // l / (l + tau_c + delta_g / T_s)
  double distortion_penalty = 0.0;  // tau_c * gamma / l
};

double overall_rate_factor(int l, int tau_c, double guard_samples);

/// Uses plan.sample_interval as T_s and model.gamma_bound() as gamma.
GuardPlan guard_plan(const Autocorrelation& model, const ResolvedPlan& plan, int l,
                     double phi_opt);

}  // namespace cyclordf
