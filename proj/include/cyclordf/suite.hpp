#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "cyclordf/af_model.hpp"
#include "cyclordf/asymptotic.hpp"
#include "cyclordf/config.hpp"
#include "cyclordf/sampling.hpp"

namespace cyclordf {

/// One entry of the verify report.
struct CheckResult {
  std::string name;
  std::string status = "SKIP";  // PASS, FAIL or SKIP
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json numbers = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string error;

  bool failed() const { return status == "FAIL"; }
  nlohmann::json to_json() const;
};

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string inputs_digest(const nlohmann::json& inputs);

/// Derives an independent 64-bit seed for sub-task `index` (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Random PSD matrix of random rank with max diagonal equal to u * rho, u in [0.1, 1].
Eigen::MatrixXd random_psd_matrix(int l, double rho, std::mt19937_64& rng);

/// Random symmetric strictly diagonally dominant matrix with positive diagonal.
Eigen::MatrixXd random_sdd_matrix(int l, std::mt19937_64& rng);

/// Analytic moment bounds and Monte Carlo confidence intervals on `cases`
/// random PSD matrices of size 1..max_l. PASS iff every analytic bound holds
/// and the Monte Carlo mean of d falls in its 99% interval for at least
/// `min_ci_fraction` of the cases.
CheckResult check_moment_suite(int cases, int max_l, double rho, std::int64_t samples,
                               std::uint64_t seed, double min_ci_fraction = 0.99, int jobs = 1);

/// Moment bounds and Monte Carlo check on the l x l block covariance of a model.
CheckResult check_model_moments(const Autocorrelation& model, const SamplingPlan& plan, int l,
                                std::int64_t samples, std::uint64_t seed, int jobs = 1);

/// PASS iff the gaps are non-increasing along ns and the last gap is below
/// 1e-3 * gamma.
CheckResult check_autocorr_convergence(const Autocorrelation& model, int p, const Epsilon& eps,
                                       int l, std::span<const std::int64_t> ns, int phi_grid);

/// PASS iff the unflagged gaps are non-increasing along ns.
CheckResult check_logdet_convergence(const Autocorrelation& model, int p, const Epsilon& eps,
                                     int l, std::span<const std::int64_t> ns, int phi_grid);

/// Minimal eigenvalue versus the row bound on `cases` random SDD matrices.
CheckResult check_sdd_suite(int cases, int max_l, std::uint64_t seed);

/// Finite-block rate at l = l_multiple * p_n against the spectral pipeline.
CheckResult check_block_consistency(const Autocorrelation& model, const SamplingPlan& plan,
                                    double distortion, int l_multiple, double rel_tol,
                                    const PipelineOptions& options = {});

/// Information density mean on the l-block test channel at distortion D.
CheckResult check_info_density(const Autocorrelation& model, const SamplingPlan& plan,
                               double distortion, int l, std::int64_t blocks,
                               std::int64_t samples, std::uint64_t seed, int jobs = 1);

struct SuiteReport {
  std::vector<CheckResult> checks;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Every check above for every configured model, with sizes from cfg.verify.
/// Exceptions inside a check become FAIL entries.
SuiteReport run_verify_suite(const ExperimentConfig& cfg, int jobs = 1);

}  // namespace cyclordf
