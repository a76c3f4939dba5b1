#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cyclordf/af_model.hpp"
#include "cyclordf/sampling.hpp"

namespace cyclordf {

/// Moments of d = (1/l) ||X||^2 for X ~ N(0, cov). With cov = U diag(lambda) U^T,
/// d = (1/l) sum_i lambda_i g_i^2 with g_i i.i.d. standard normal, so
/// E{d} = (1/l) sum lambda_i and E{d^2} = (2/l^2) sum lambda_i^2 + E{d}^2.
struct MomentReport {
  int l = 0;
  double rho = 0.0;
  double mean_d = 0.0;
  double second_moment = 0.0;
  double bound_3rho2 = 0.0;
  bool mean_within_rho = false;
  bool second_within_bound = false;

  // Monte Carlo part, filled by mc_distortion_check.
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  double mc_mean = 0.0;
  double mc_mean_stderr = 0.0;
  double mc_second = 0.0;
  double mc_second_stderr = 0.0;
  bool mean_in_ci = false;
  bool second_in_ci = false;

  bool mc_pass() const { return mean_in_ci && second_in_ci; }
};

inline constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

/// Analytic moments and the two bounds E{d} <= rho, E{d^2} <= 3 rho^2
/// (relative tolerance 1e-12). Throws DomainError if a diagonal entry exceeds rho.
MomentReport moment_bound_check(const Eigen::MatrixXd& cov, double rho);

/// Symmetric square root U diag(sqrt(lambda)) U^T. Throws NumericalError when
/// cov has an eigenvalue below -1e-10 * trace.
Eigen::MatrixXd symmetric_factor(const Eigen::MatrixXd& cov);

/// `count` zero-mean Gaussian columns factor * g. Stream `stream` of `seed`;
/// draws are generated in fixed-size batches, each seeded from (seed, stream, batch).
Eigen::MatrixXd draw_gaussian(const Eigen::MatrixXd& factor, std::int64_t count,
                              std::uint64_t seed, std::uint64_t stream = 0);

/// Monte Carlo estimate of E{d} and E{d^2}; the analytic values must fall in
/// the 99% normal-approximation intervals. rho is taken as max diag(cov).
MomentReport mc_distortion_check(const Eigen::MatrixXd& cov, std::int64_t samples,
                                 std::uint64_t seed, int jobs = 1);

struct ConvergenceRow {
  std::int64_t n = 0;
  double eps_n = 0.0;
  double gap = 0.0;  // NaN when flagged
  bool flagged = false;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool non_increasing = false;
  // Margin gate failed: eigenvalues are not certified to stay away from zero.
  bool heuristic = false;
};

/// max over phi_k = k T_c / phi_grid and entries of |C^l(eps_n, phi) - C^l(eps, phi)|.
ConvergenceTable autocorr_convergence(const Autocorrelation& model, int p, const Epsilon& eps,
                                      int l, std::span<const std::int64_t> ns, int phi_grid);

/// max over the phase grid of |(1/2l) log2 det C^l(eps_n, phi) - (1/2l) log2 det C^l(eps, phi)|.
/// Rows with an eigenvalue <= 1e-12 * trace are flagged and carry no value.
ConvergenceTable logdet_convergence(const Autocorrelation& model, int p, const Epsilon& eps,
                                    int l, std::span<const std::int64_t> ns, int phi_grid);

struct SddReport {
  double min_eig = 0.0;
  double gershgorin_bound = 0.0;
  bool sdd = false;
  // Vacuously true when !sdd.
  bool bound_holds = true;
};

/// Strict diagonal dominance flag, exact minimal eigenvalue and the row bound
/// min_i (a_ii - sum_{j != i} |a_ij|).
SddReport sdd_min_eig_bound(const Eigen::MatrixXd& cov);

struct InfoDensityReport {
  int l = 0;
  std::int64_t blocks = 0;   // k
  std::int64_t samples = 0;  // repetitions of the k-block codeword
  std::uint64_t seed = 0;
  double target = 0.0;       // (1/2l) log2(det covX / det covS)
  double mean_z = 0.0;
  double std_z = 0.0;
  double std_error = 0.0;
  double var_codeword = 0.0;  // empirical Var of the k-block average
  double var_reference = 0.0;  // 3 / (k l), descriptive only
  bool pass = false;
};

/// Monte Carlo of the information density rate of the Gaussian backward test
/// channel X = Xhat + E, Xhat ~ N(0, covX - covS), E ~ N(0, covS) independent.
InfoDensityReport info_density_mc(const Eigen::MatrixXd& cov_x, const Eigen::MatrixXd& cov_s,
                                  std::int64_t blocks, std::int64_t samples, std::uint64_t seed,
                                  int jobs = 1);

/// Pairwise (tree) sum with a fixed shape.
double pairwise_sum(std::span<const double> values);

}  // namespace cyclordf
