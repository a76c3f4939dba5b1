#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cyclordf/af_model.hpp"
#include "cyclordf/sampling.hpp"

namespace cyclordf {

/// Block autocorrelation C[delta] = E{ X[i] X[i+delta]^T } of the p_n-dimensional
/// polyphase vector process (X[i])_m = X[i p_n + m]. Zero outside
/// |delta| <= max_block_lag.
struct BlockAutocorr {
  int dim = 0;
  int max_block_lag = 0;
  std::vector<Eigen::MatrixXd> blocks;  // blocks[delta + max_block_lag]

  const Eigen::MatrixXd& at(int delta) const { return blocks.at(delta + max_block_lag); }
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{1} << 30;

/// Requires a synchronous plan. max_block_lag = 1 + ceil(tau_c / p_n).
BlockAutocorr build_block_autocorr(const Autocorrelation& model, const ResolvedPlan& plan,
                                   std::size_t memory_budget_bytes = kDefaultMemoryBudget);

/// S(f) = sum_delta C[delta] exp(-j 2 pi f delta). With `hermitize`, returns (S + S^H)/2.
Eigen::MatrixXcd psd_at_freq(const BlockAutocorr& ba, double f, bool hermitize = true);

enum class EigenMethod {
  RealEmbedding,     // eigenvalues of [[Re S, -Im S], [Im S, Re S]], pairs deduplicated
  ComplexHermitian,  // direct complex Hermitian solve
};

/// Eigenvalues of a Hermitian matrix, sorted descending.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& s, EigenMethod method);

struct EigenFieldOptions {
  int grid_size = 1024;
  double tol_psd = 1e-8;
  EigenMethod method = EigenMethod::RealEmbedding;
  int jobs = 1;
};

/// Sorted eigenvalues of S(f) on the midpoint grid f_k = -1/2 + (k + 1/2)/G.
struct EigenField {
  int dim = 0;
  std::vector<double> freqs;
  std::vector<double> weights;
  std::vector<double> eigs;  // node-major, descending within a node

  // Largest clamped negativity relative to tr S(f).
  double max_clamp_ratio = 0.0;
  // Nodes where negativity exceeded tol_psd * tr S(f).
  std::vector<double> flagged_freqs;

  std::size_t nodes() const { return freqs.size(); }
  std::span<const double> at(std::size_t k) const {
    return {eigs.data() + k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  double max_eigenvalue() const;
};

EigenField eigen_field(const BlockAutocorr& ba, const EigenFieldOptions& options = {});

/// A field with the same eigenvalues at every node (frequency-flat). Useful
/// for memoryless sources and for tests.
EigenField flat_field(std::span<const double> eigenvalues, int grid_size);

/// (1/dim) sum_k w_k sum_m g(lambda_m(f_k)), summed in ascending k then m.
template <typename G>
double freq_integral(const EigenField& field, G&& g) {
  double total = 0.0;
  for (std::size_t k = 0; k < field.nodes(); ++k) {
    double node = 0.0;
    for (double lambda : field.at(k)) node += g(lambda);
    total += field.weights[k] * node;
  }
  return total / field.dim;
}

/// CSV with header "f,m,lambda".
void write_eigen_field_csv(const EigenField& field, std::ostream& out);

}  // namespace cyclordf
