#include "cyclordf/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cyclordf/errors.hpp"

namespace cyclordf {

namespace {

double positive_log2_ratio(double lambda, double theta) {
  return lambda > theta ? std::log2(lambda / theta) : 0.0;
}

// Rate using only the even-indexed nodes with doubled weights.
double coarse_rate(const EigenField& field, double theta) {
  if (field.nodes() < 2) return rate_of_theta(field, theta);
  double total = 0.0;
  for (std::size_t k = 0; k < field.nodes(); k += 2) {
    double node = 0.0;
    for (double lambda : field.at(k)) node += positive_log2_ratio(lambda, theta);
    total += 2.0 * field.weights[k] * node;
  }
  return total / (2.0 * field.dim);
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> symmetric_solve(const Eigen::MatrixXd& cov,
                                                               bool vectors) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw DomainError("covariance must be a non-empty square matrix");
  }
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      sym, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigen-solve failed");
  const double trace = std::abs(sym.trace());
  if (solver.eigenvalues().minCoeff() < -1e-10 * trace) {
    throw DomainError("covariance is indefinite (min eigenvalue " +
                      std::to_string(solver.eigenvalues().minCoeff()) + ")");
  }
  return solver;
}

}  // namespace

double distortion_of_theta(const EigenField& field, double theta) {
  if (theta < 0.0) throw DomainError("distortion_of_theta: theta must be non-negative");
  return freq_integral(field, [theta](double lambda) { return std::min(lambda, theta); });
}

double rate_of_theta(const EigenField& field, double theta) {
  if (!(theta > 0.0)) throw DomainError("rate_of_theta: theta must be positive");
  return 0.5 * freq_integral(field,
                             [theta](double lambda) { return positive_log2_ratio(lambda, theta); });
}

RdfPoint solve_theta(const EigenField& field, double distortion) {
  if (!(distortion > 0.0)) throw DomainError("distortion must be positive");

  RdfPoint pt;
  pt.distortion = distortion;
  pt.avg_var = freq_integral(field, [](double lambda) { return lambda; });
  pt.max_clamp_ratio = field.max_clamp_ratio;
  pt.flagged_nodes = static_cast<int>(field.flagged_freqs.size());
  const double lambda_max = field.max_eigenvalue();

  if (distortion >= pt.avg_var * (1.0 - kThetaTolerance)) {
    pt.theta = lambda_max;
    pt.rate = 0.0;
    pt.constraint_inactive = distortion > pt.avg_var * (1.0 + kThetaTolerance);
    return pt;
  }

  const double tol = kThetaTolerance * pt.avg_var;
  double lo = 0.0;
  double hi = lambda_max;
  double theta = 0.5 * (lo + hi);
  double err = distortion_of_theta(field, theta) - distortion;
  int it = 1;
  while (std::abs(err) > tol && it < kMaxBisectionIterations) {
    if (err < 0.0) {
      lo = theta;
    } else {
      hi = theta;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    theta = mid;
    err = distortion_of_theta(field, theta) - distortion;
    ++it;
  }
  if (std::abs(err) > tol) {
    throw NumericalError("water level bisection stalled after " + std::to_string(it) +
                         " iterations (residual " + std::to_string(err) + ")");
  }

  pt.theta = theta;
  pt.iterations = it;
  pt.rate = rate_of_theta(field, theta);
  pt.active_fraction =
      freq_integral(field, [theta](double lambda) { return lambda > theta ? 1.0 : 0.0; });
  pt.quadrature_error = std::abs(pt.rate - coarse_rate(field, theta));
  return pt;
}

BlockRdf finite_block_rdf(const Eigen::MatrixXd& cov, double distortion) {
  const auto solver = symmetric_solve(cov, false);
  BlockRdf out;
  out.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);

  EigenField single;
  single.dim = static_cast<int>(out.eigenvalues.size());
  single.freqs = {0.0};
  single.weights = {1.0};
  single.eigs.assign(out.eigenvalues.data(), out.eigenvalues.data() + out.eigenvalues.size());

  out.point = solve_theta(single, distortion);
  out.rate = out.point.rate;
  out.theta = out.point.theta;
  return out;
}

Eigen::MatrixXd test_channel_error_covariance(const Eigen::MatrixXd& cov, double theta) {
  const auto solver = symmetric_solve(cov, true);
  const Eigen::VectorXd levels = solver.eigenvalues().cwiseMax(0.0).cwiseMin(theta);
  const Eigen::MatrixXd& u = solver.eigenvectors();
  Eigen::MatrixXd s = u * levels.asDiagonal() * u.transpose();
  return 0.5 * (s + s.transpose());
}

}  // namespace cyclordf
