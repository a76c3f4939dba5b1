#include "cyclordf/polyphase_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>

#ifdef CYCLORDF_HAVE_LAPACKE
#include <lapacke.h>
#ifdef CYCLORDF_HAVE_OPENBLAS
extern "C" void openblas_set_num_threads(int);
#endif
#endif

#include "cyclordf/errors.hpp"
#include "cyclordf/output.hpp"
#include "cyclordf/parallel.hpp"

namespace cyclordf {

BlockAutocorr build_block_autocorr(const Autocorrelation& model, const ResolvedPlan& plan,
                                   std::size_t memory_budget_bytes) {
  if (!plan.synchronous || plan.p_n < 1) {
    throw DomainError("block autocorrelation needs a synchronous plan (finite n)");
  }
  const std::int64_t pn = plan.p_n;
  const int max_lag = 1 + static_cast<int>((plan.tau_c + pn - 1) / pn);
  const double bytes = static_cast<double>(2 * max_lag + 1) * static_cast<double>(pn) *
                       static_cast<double>(pn) * sizeof(double);
  if (bytes > static_cast<double>(memory_budget_bytes)) {
    throw ResourceError("block autocorrelation needs " + std::to_string(bytes / 1048576.0) +
                        " MiB (p_n=" + std::to_string(pn) + ", max block lag=" +
                        std::to_string(max_lag) + "); raise the memory budget or lower n");
  }

  BlockAutocorr ba;
  ba.dim = static_cast<int>(pn);
  ba.max_block_lag = max_lag;
  ba.blocks.reserve(2 * max_lag + 1);
  for (int delta = -max_lag; delta <= max_lag; ++delta) {
    Eigen::MatrixXd c(pn, pn);
    for (std::int64_t u = 0; u < pn; ++u) {
      for (std::int64_t v = 0; v < pn; ++v) {
        c(u, v) = dt_autocorr(model, plan, u, delta * pn + v - u);
      }
    }
    ba.blocks.push_back(std::move(c));
  }
  return ba;
}

Eigen::MatrixXcd psd_at_freq(const BlockAutocorr& ba, double f, bool hermitize) {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(ba.dim, ba.dim);
  for (int delta = -ba.max_block_lag; delta <= ba.max_block_lag; ++delta) {
    const std::complex<double> phase = std::polar(1.0, -2.0 * std::numbers::pi * f * delta);
    s += ba.at(delta).cast<std::complex<double>>() * phase;
  }
  if (hermitize) s = ((s + s.adjoint()) * 0.5).eval();
  return s;
}

namespace {

#ifdef CYCLORDF_HAVE_LAPACKE
// Parallelism lives at the sweep level; a threaded BLAS underneath would
// oversubscribe and could make results depend on the thread count.
void single_threaded_blas() {
#ifdef CYCLORDF_HAVE_OPENBLAS
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
#endif
}
#endif

// Ascending eigenvalues; `a` is overwritten.
Eigen::VectorXd symmetric_eigenvalues(Eigen::MatrixXd& a) {
#ifdef CYCLORDF_HAVE_LAPACKE
  single_threaded_blas();
  Eigen::VectorXd w(a.rows());
  const lapack_int info = LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(a.rows()),
                                        a.data(), static_cast<lapack_int>(a.rows()), w.data());
  if (info != 0) throw NumericalError("symmetric eigen-solve failed (info " + std::to_string(info) + ")");
  return w;
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigen-solve failed");
  return solver.eigenvalues();
#endif
}

Eigen::VectorXd complex_hermitian_eigenvalues(Eigen::MatrixXcd a) {
#ifdef CYCLORDF_HAVE_LAPACKE
  single_threaded_blas();
  Eigen::VectorXd w(a.rows());
  const lapack_int info =
      LAPACKE_zheev(LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(a.rows()),
                    reinterpret_cast<lapack_complex_double*>(a.data()),
                    static_cast<lapack_int>(a.rows()), w.data());
  if (info != 0) throw NumericalError("Hermitian eigen-solve failed (info " + std::to_string(info) + ")");
  return w;
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigen-solve failed");
  return solver.eigenvalues();
#endif
}

}  // namespace

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& s, EigenMethod method) {
  const Eigen::Index n = s.rows();
  if (method == EigenMethod::ComplexHermitian) {
    return complex_hermitian_eigenvalues(s).reverse();
  }
  Eigen::MatrixXd embed(2 * n, 2 * n);
  embed.topLeftCorner(n, n) = s.real();
  embed.topRightCorner(n, n) = -s.imag();
  embed.bottomLeftCorner(n, n) = s.imag();
  embed.bottomRightCorner(n, n) = s.real();
  const Eigen::VectorXd asc = symmetric_eigenvalues(embed);
  // Each eigenvalue of S appears twice in the embedding.
  Eigen::VectorXd out(n);
  for (Eigen::Index m = 0; m < n; ++m) out(m) = asc(2 * n - 1 - 2 * m);
  return out;
}

double EigenField::max_eigenvalue() const {
  double best = 0.0;
  for (std::size_t k = 0; k < nodes(); ++k) best = std::max(best, at(k).front());
  return best;
}

EigenField eigen_field(const BlockAutocorr& ba, const EigenFieldOptions& options) {
  const int g = options.grid_size;
  if (g < 2 || g % 2 != 0) throw DomainError("eigen_field: grid size must be even and >= 2");

  EigenField field;
  field.dim = ba.dim;
  field.freqs.resize(g);
  field.weights.assign(g, 1.0 / g);
  field.eigs.assign(static_cast<std::size_t>(g) * ba.dim, 0.0);
  for (int k = 0; k < g; ++k) field.freqs[k] = -0.5 + (k + 0.5) / g;

  // S(-f) = conj(S(f)) has the same spectrum, so only f > 0 is solved.
  const int half = g / 2;
  std::vector<double> clamp_ratio(half, 0.0);
  std::vector<char> flagged(half, 0);
  parallel_for(static_cast<std::size_t>(half), options.jobs, [&](std::size_t j) {
    const int k = half + static_cast<int>(j);
    const double f = field.freqs[k];
    const Eigen::MatrixXcd s = psd_at_freq(ba, f);
    Eigen::VectorXd lam;
    try {
      lam = hermitian_eigenvalues(s, options.method);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at f=" + format_double(f));
    }
    const double trace = std::max(s.real().trace(), 0.0);
    for (Eigen::Index m = 0; m < lam.size(); ++m) {
      if (lam(m) < 0.0) {
        const double ratio = trace > 0.0 ? -lam(m) / trace : 1.0;
        clamp_ratio[j] = std::max(clamp_ratio[j], ratio);
        if (ratio > options.tol_psd) flagged[j] = 1;
        lam(m) = 0.0;
      }
    }
    std::copy(lam.data(), lam.data() + lam.size(),
              field.eigs.begin() + static_cast<std::ptrdiff_t>(k) * ba.dim);
    const int mirror = g - 1 - k;
    std::copy(lam.data(), lam.data() + lam.size(),
              field.eigs.begin() + static_cast<std::ptrdiff_t>(mirror) * ba.dim);
  });

  for (int j = 0; j < half; ++j) {
    field.max_clamp_ratio = std::max(field.max_clamp_ratio, clamp_ratio[j]);
  }
  for (int k = 0; k < g; ++k) {
    const int j = (k >= half ? k : g - 1 - k) - half;
    if (flagged[j]) field.flagged_freqs.push_back(field.freqs[k]);
  }
  return field;
}

EigenField flat_field(std::span<const double> eigenvalues, int grid_size) {
  if (grid_size < 2 || grid_size % 2 != 0) {
    throw DomainError("flat_field: grid size must be even and >= 2");
  }
  std::vector<double> sorted(eigenvalues.begin(), eigenvalues.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  EigenField field;
  field.dim = static_cast<int>(sorted.size());
  field.weights.assign(grid_size, 1.0 / grid_size);
  for (int k = 0; k < grid_size; ++k) {
    field.freqs.push_back(-0.5 + (k + 0.5) / grid_size);
    field.eigs.insert(field.eigs.end(), sorted.begin(), sorted.end());
  }
  return field;
}

void write_eigen_field_csv(const EigenField& field, std::ostream& out) {
  out << "f,m,lambda\n";
  for (std::size_t k = 0; k < field.nodes(); ++k) {
    const auto lam = field.at(k);
    for (std::size_t m = 0; m < lam.size(); ++m) {
      out << format_double(field.freqs[k]) << ',' << m << ',' << format_double(lam[m]) << '\n';
    }
  }
}

}  // namespace cyclordf
