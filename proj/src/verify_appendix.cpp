#include "cyclordf/verify_appendix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "cyclordf/errors.hpp"
#include "cyclordf/parallel.hpp"

namespace cyclordf {

namespace {

constexpr std::int64_t kBatch = 4096;

std::int64_t batch_count(std::int64_t count) { return (count + kBatch - 1) / kBatch; }

// Standard normals for one batch, column-major, from a counter-derived seed.
void fill_normals(Eigen::MatrixXd& g, std::uint64_t seed, std::uint64_t stream,
                  std::int64_t batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(batch),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(batch) >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  double* data = g.data();
  for (Eigen::Index i = 0; i < g.size(); ++i) data[i] = normal(rng);
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solve_symmetric(const Eigen::MatrixXd& m,
                                                               bool vectors) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DomainError("expected a non-empty square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (m + m.transpose()), vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigen-solve failed");
  return solver;
}

bool is_non_increasing(const std::vector<ConvergenceRow>& rows) {
  const ConvergenceRow* prev = nullptr;
  for (const auto& row : rows) {
    if (row.flagged) continue;
    if (prev && row.gap > prev->gap + 1e-12 * std::max(1.0, prev->gap)) return false;
    prev = &row;
  }
  return true;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t mid = values.size() / 2;
  return pairwise_sum(values.subspan(0, mid)) + pairwise_sum(values.subspan(mid));
}

MomentReport moment_bound_check(const Eigen::MatrixXd& cov, double rho) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw DomainError("moment_bound_check: expected a non-empty square matrix");
  }
  if (cov.diagonal().maxCoeff() > rho * (1.0 + 1e-12)) {
    throw DomainError("moment_bound_check: a diagonal entry exceeds rho");
  }
  const auto solver = solve_symmetric(cov, false);
  const Eigen::VectorXd lam = solver.eigenvalues().cwiseMax(0.0);
  const double l = static_cast<double>(cov.rows());

  MomentReport r;
  r.l = static_cast<int>(cov.rows());
  r.rho = rho;
  r.mean_d = lam.sum() / l;
  r.second_moment = 2.0 * lam.squaredNorm() / (l * l) + r.mean_d * r.mean_d;
  r.bound_3rho2 = 3.0 * rho * rho;
  r.mean_within_rho = r.mean_d <= rho * (1.0 + 1e-12);
  r.second_within_bound = r.second_moment <= r.bound_3rho2 * (1.0 + 1e-12);
  return r;
}

Eigen::MatrixXd symmetric_factor(const Eigen::MatrixXd& cov) {
  const auto solver = solve_symmetric(cov, true);
  const double trace = std::abs(cov.trace());
  if (solver.eigenvalues().minCoeff() < -1e-10 * trace) {
    throw NumericalError("covariance is indefinite; cannot factor");
  }
  const Eigen::VectorXd root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& u = solver.eigenvectors();
  return u * root.asDiagonal() * u.transpose();
}

Eigen::MatrixXd draw_gaussian(const Eigen::MatrixXd& factor, std::int64_t count,
                              std::uint64_t seed, std::uint64_t stream) {
  const Eigen::Index l = factor.cols();
  Eigen::MatrixXd out(factor.rows(), count);
  for (std::int64_t b = 0; b < batch_count(count); ++b) {
    const std::int64_t begin = b * kBatch;
    const std::int64_t cols = std::min(kBatch, count - begin);
    Eigen::MatrixXd g(l, cols);
    fill_normals(g, seed, stream, b);
    out.middleCols(begin, cols).noalias() = factor * g;
  }
  return out;
}

MomentReport mc_distortion_check(const Eigen::MatrixXd& cov, std::int64_t samples,
                                 std::uint64_t seed, int jobs) {
  if (samples < 1000) throw DomainError("mc_distortion_check needs at least 1000 samples");
  MomentReport r = moment_bound_check(cov, cov.diagonal().maxCoeff());
  const Eigen::MatrixXd factor = symmetric_factor(cov);
  const double l = static_cast<double>(cov.rows());

  const std::int64_t batches = batch_count(samples);
  std::vector<double> s1(batches), s2(batches), s4(batches);
  parallel_for(static_cast<std::size_t>(batches), jobs, [&](std::size_t b) {
    const std::int64_t cols = std::min(kBatch, samples - static_cast<std::int64_t>(b) * kBatch);
    Eigen::MatrixXd g(cov.rows(), cols);
    fill_normals(g, seed, 0, static_cast<std::int64_t>(b));
    const Eigen::MatrixXd x = factor * g;
    double a1 = 0.0, a2 = 0.0, a4 = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double d = x.col(j).squaredNorm() / l;
      a1 += d;
      a2 += d * d;
      a4 += d * d * d * d;
    }
    s1[b] = a1;
    s2[b] = a2;
    s4[b] = a4;
  });

  const double n = static_cast<double>(samples);
  const double sum1 = pairwise_sum(s1), sum2 = pairwise_sum(s2), sum4 = pairwise_sum(s4);
  r.samples = samples;
  r.seed = seed;
  r.mc_mean = sum1 / n;
  r.mc_second = sum2 / n;
  const double var_d = std::max(0.0, (sum2 - n * r.mc_mean * r.mc_mean) / (n - 1.0));
  const double var_d2 = std::max(0.0, (sum4 - n * r.mc_second * r.mc_second) / (n - 1.0));
  r.mc_mean_stderr = std::sqrt(var_d / n);
  r.mc_second_stderr = std::sqrt(var_d2 / n);
  r.mean_in_ci = std::abs(r.mc_mean - r.mean_d) <= kZ99 * r.mc_mean_stderr;
  r.second_in_ci = std::abs(r.mc_second - r.second_moment) <= kZ99 * r.mc_second_stderr;
  return r;
}

ConvergenceTable autocorr_convergence(const Autocorrelation& model, int p, const Epsilon& eps,
                                      int l, std::span<const std::int64_t> ns, int phi_grid) {
  if (phi_grid < 1) throw DomainError("phase grid must be positive");
  const double ts_async = async_sample_interval(eps, p, model.period());
  ConvergenceTable table;
  for (std::int64_t n : ns) {
    const RationalApprox approx = rational_approx(eps, p, n, model.period());
    ConvergenceRow row;
    row.n = n;
    row.eps_n = approx.eps_n;
    for (int k = 0; k < phi_grid; ++k) {
      const double phase = model.period() * k / phi_grid;
      const Eigen::MatrixXd a = block_covariance(model, approx.sample_interval, phase, l);
      const Eigen::MatrixXd b = block_covariance(model, ts_async, phase, l);
      row.gap = std::max(row.gap, (a - b).cwiseAbs().maxCoeff());
    }
    table.rows.push_back(row);
  }
  table.non_increasing = is_non_increasing(table.rows);
  return table;
}

ConvergenceTable logdet_convergence(const Autocorrelation& model, int p, const Epsilon& eps,
                                    int l, std::span<const std::int64_t> ns, int phi_grid) {
  if (phi_grid < 1) throw DomainError("phase grid must be positive");
  const double ts_async = async_sample_interval(eps, p, model.period());

  // Returns NaN when the matrix is numerically singular.
  auto scaled_logdet = [l](const Eigen::MatrixXd& c) {
    const auto solver = solve_symmetric(c, false);
    const Eigen::VectorXd& lam = solver.eigenvalues();
    if (lam.minCoeff() <= 1e-12 * std::abs(c.trace())) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) s += std::log2(lam(i));
    return s / (2.0 * l);
  };

  std::vector<double> reference(phi_grid);
  for (int k = 0; k < phi_grid; ++k) {
    reference[k] =
        scaled_logdet(block_covariance(model, ts_async, model.period() * k / phi_grid, l));
  }

  ConvergenceTable table;
  table.heuristic = !gamma_c(model, p).positive();
  for (std::int64_t n : ns) {
    const RationalApprox approx = rational_approx(eps, p, n, model.period());
    ConvergenceRow row;
    row.n = n;
    row.eps_n = approx.eps_n;
    for (int k = 0; k < phi_grid && !row.flagged; ++k) {
      const double v = scaled_logdet(
          block_covariance(model, approx.sample_interval, model.period() * k / phi_grid, l));
      if (std::isnan(v) || std::isnan(reference[k])) {
        row.flagged = true;
        break;
      }
      row.gap = std::max(row.gap, std::abs(v - reference[k]));
    }
    if (row.flagged) row.gap = std::numeric_limits<double>::quiet_NaN();
    table.rows.push_back(row);
  }
  table.non_increasing = is_non_increasing(table.rows);
  return table;
}

SddReport sdd_min_eig_bound(const Eigen::MatrixXd& cov) {
  const auto solver = solve_symmetric(cov, false);
  SddReport r;
  r.min_eig = solver.eigenvalues().minCoeff();
  r.sdd = true;
  r.gershgorin_bound = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    const double off = cov.row(i).cwiseAbs().sum() - std::abs(cov(i, i));
    r.sdd = r.sdd && std::abs(cov(i, i)) > off;
    r.gershgorin_bound = std::min(r.gershgorin_bound, cov(i, i) - off);
  }
  r.bound_holds = !r.sdd || r.min_eig >= r.gershgorin_bound - 1e-10;
  return r;
}

InfoDensityReport info_density_mc(const Eigen::MatrixXd& cov_x, const Eigen::MatrixXd& cov_s,
                                  std::int64_t blocks, std::int64_t samples, std::uint64_t seed,
                                  int jobs) {
  if (blocks < 1 || samples < 2) throw DomainError("info_density_mc: need k >= 1, samples >= 2");
  if (cov_x.rows() != cov_s.rows() || cov_x.cols() != cov_s.cols()) {
    throw DomainError("info_density_mc: covariance shapes differ");
  }
  const Eigen::MatrixXd cov_r = cov_x - cov_s;
  {
    const auto solver = solve_symmetric(cov_r, false);
    if (solver.eigenvalues().minCoeff() < -1e-10 * std::abs(cov_x.trace())) {
      throw DomainError("info_density_mc: covS is not dominated by covX");
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt_x(0.5 * (cov_x + cov_x.transpose()));
  const Eigen::LLT<Eigen::MatrixXd> llt_s(0.5 * (cov_s + cov_s.transpose()));
  if (llt_x.info() != Eigen::Success || llt_s.info() != Eigen::Success) {
    throw DomainError("info_density_mc: covariances must be positive definite");
  }
  const int l = static_cast<int>(cov_x.rows());
  const Eigen::MatrixXd lx = llt_x.matrixL();
  const Eigen::MatrixXd ls = llt_s.matrixL();
  const double logdet_x = 2.0 * lx.diagonal().array().log().sum();
  const double logdet_s = 2.0 * ls.diagonal().array().log().sum();
  const double to_bits = 1.0 / (2.0 * l * std::numbers::ln2);

  InfoDensityReport r;
  r.l = l;
  r.blocks = blocks;
  r.samples = samples;
  r.seed = seed;
  r.target = (logdet_x - logdet_s) * to_bits;
  r.var_reference = 3.0 / (static_cast<double>(blocks) * l);

  const Eigen::MatrixXd factor_r = symmetric_factor(cov_r);
  const Eigen::MatrixXd factor_s = symmetric_factor(cov_s);
  const std::int64_t total = blocks * samples;
  std::vector<double> z(static_cast<std::size_t>(total));
  parallel_for(static_cast<std::size_t>(batch_count(total)), jobs, [&](std::size_t b) {
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBatch;
    const std::int64_t cols = std::min(kBatch, total - begin);
    Eigen::MatrixXd g1(l, cols), g2(l, cols);
    fill_normals(g1, seed, 1, static_cast<std::int64_t>(b));
    fill_normals(g2, seed, 2, static_cast<std::int64_t>(b));
    const Eigen::MatrixXd err = factor_s * g2;
    const Eigen::MatrixXd x = factor_r * g1 + err;
    const Eigen::MatrixXd wx = llt_x.matrixL().solve(x);
    const Eigen::MatrixXd we = llt_s.matrixL().solve(err);
    for (Eigen::Index j = 0; j < cols; ++j) {
      z[begin + j] =
          (logdet_x - logdet_s + wx.col(j).squaredNorm() - we.col(j).squaredNorm()) * to_bits;
    }
  });

  const double n = static_cast<double>(total);
  r.mean_z = pairwise_sum(z) / n;
  std::vector<double> dev(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) dev[i] = (z[i] - r.mean_z) * (z[i] - r.mean_z);
  r.std_z = std::sqrt(pairwise_sum(dev) / (n - 1.0));
  r.std_error = r.std_z / std::sqrt(n);

  std::vector<double> codeword(static_cast<std::size_t>(samples));
  for (std::int64_t s = 0; s < samples; ++s) {
    codeword[s] = pairwise_sum(std::span<const double>(z).subspan(s * blocks, blocks)) /
                  static_cast<double>(blocks);
  }
  std::vector<double> cdev(codeword.size());
  for (std::size_t i = 0; i < codeword.size(); ++i) {
    cdev[i] = (codeword[i] - r.mean_z) * (codeword[i] - r.mean_z);
  }
  r.var_codeword = pairwise_sum(cdev) / (static_cast<double>(samples) - 1.0);

  r.pass = std::abs(r.mean_z - r.target) < 4.0 * r.std_error ||
           (r.std_error == 0.0 && r.mean_z == r.target);
  return r;
}

}  // namespace cyclordf
