#pragma once

#include <Eigen/Dense>

#include "cyclordf/polyphase_spectrum.hpp"

namespace cyclordf {

/// One point of the rate-distortion curve. Rates are in bits per sample.
struct RdfPoint {
  double distortion = 0.0;
  double theta = 0.0;
  double rate = 0.0;
  double avg_var = 0.0;
  // Fraction of (m, f) mass with lambda_m(f) > theta.
  double active_fraction = 0.0;
  // D exceeded the time-averaged variance; rate reported as zero.
  bool constraint_inactive = false;
  int iterations = 0;
  // |R - R_coarse| where R_coarse uses every other quadrature node.
  double quadrature_error = 0.0;
  double max_clamp_ratio = 0.0;
  int flagged_nodes = 0;
};

inline constexpr int kMaxBisectionIterations = 200;
inline constexpr double kThetaTolerance = 1e-12;  // relative to avg_var

/// (1/p_n) sum_m int min(lambda_m(f), theta) df.
double distortion_of_theta(const EigenField& field, double theta);

/// (1/(2 p_n)) sum_m int (log2(lambda_m(f)/theta))^+ df. Throws DomainError for theta <= 0.
double rate_of_theta(const EigenField& field, double theta);

/// Reverse water-filling: bisection on theta in [0, lambda_max] until the
/// distortion matches D within kThetaTolerance * avg_var.
///
/// D <= 0 throws DomainError. D at the time-averaged variance gives
/// theta = lambda_max and R = 0; larger D gives the same with
/// constraint_inactive set.
RdfPoint solve_theta(const EigenField& field, double distortion);

struct BlockRdf {
  double rate = 0.0;
  double theta = 0.0;
  Eigen::VectorXd eigenvalues;  // descending, clamped
  RdfPoint point;
};

/// Rate-distortion function of an l-dimensional Gaussian vector with the
/// given covariance under per-component MSE D: water-filling over the
/// eigenvalues of cov. Eigenvalues below -1e-10 * trace are rejected.
BlockRdf finite_block_rdf(const Eigen::MatrixXd& cov, double distortion);

/// Error covariance of the optimal Gaussian test channel, U diag(min(lambda_i, theta)) U^T.
Eigen::MatrixXd test_channel_error_covariance(const Eigen::MatrixXd& cov, double theta);

}  // namespace cyclordf
