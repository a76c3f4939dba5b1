#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "cyclordf/af_model.hpp"

namespace cyclordf {

/// Fractional sampling offset epsilon in [0, 1). Keeps an exact form when
/// the value came from a rational ("3/8") or a rational multiple of pi
/// ("pi/7", "2*pi/9") so that floor(n * epsilon) can be audited.
struct Epsilon {
  enum class Kind { Float, Rational, PiRational };

  Kind kind = Kind::Float;
  double value = 0.0;
  std::int64_t num = 0;  // Rational / PiRational: value = num/den (* pi)
  std::int64_t den = 1;

  static Epsilon from_double(double v);
  static Epsilon rational(std::int64_t num, std::int64_t den);
  static Epsilon pi_rational(std::int64_t num, std::int64_t den);

  /// Accepts a decimal literal, "a/b", or pi expressions such as "pi/7",
  /// "2pi/7", "2*pi/7", "pi". Throws ConfigError otherwise.
  static Epsilon parse(const std::string& text);

  std::string to_string() const;
};

/// Parses a real number written either as a decimal literal or as a
/// rational multiple of pi ("pi/5"). Used for epsilon and phase fields.
double parse_pi_expression(const std::string& text);

/// floor(n * eps), exact for Float/Rational inputs and cross-checked at two
/// floating precisions (64-bit and 166-bit mantissas) for pi multiples.
/// Throws PrecisionError if the two disagree.
std::int64_t floor_n_eps(const Epsilon& eps, std::int64_t n);

struct RationalApprox {
  std::int64_t n = 0;
  std::int64_t floor_n_eps = 0;
  double eps_n = 0.0;
  std::int64_t p_n = 0;            // p * n + floor(n eps)
  double sample_interval = 0.0;    // T_c / (p + eps_n)
};

RationalApprox rational_approx(const Epsilon& eps, int p, std::int64_t n, double period);

/// T_c / (p + eps), computed as an exact ratio for rational eps.
double async_sample_interval(const Epsilon& eps, int p, double period);

/// ceil((p+1) lambda_c / T_c), at least 1.
int tau_c(const Autocorrelation& model, int p);

struct SamplingPlan {
  int p = 2;
  Epsilon epsilon;
  std::optional<std::int64_t> n;  // empty: asynchronous sampling at epsilon itself
  double phase_s = 0.0;            // initial sampling phase phi_s in seconds
};

/// SamplingPlan with every derived quantity filled in.
struct ResolvedPlan {
  int p = 0;
  bool synchronous = false;
  std::int64_t n = 0;
  std::int64_t floor_n_eps = 0;
  double eps_eff = 0.0;  // eps_n (synchronous) or eps
  std::int64_t p_n = 0;  // period of the sampled statistics; 0 when asynchronous
  double sample_interval = 0.0;
  double phase_s = 0.0;
  int tau_c = 0;
};

ResolvedPlan resolve(const SamplingPlan& plan, const Autocorrelation& model);

/// c_X[i, delta] = c(i T_s + phi_s, delta T_s). For synchronous plans the
/// sample index is first reduced modulo p_n.
double dt_autocorr(const Autocorrelation& model, const ResolvedPlan& plan, std::int64_t i,
                   std::int64_t delta);

/// l x l covariance of (X[0], ..., X[l-1]) under the plan.
Eigen::MatrixXd block_covariance(const Autocorrelation& model, const ResolvedPlan& plan,
                                 int l);

/// l x l covariance for an arbitrary sampling interval and phase.
Eigen::MatrixXd block_covariance(const Autocorrelation& model, double sample_interval,
                                 double phase_s, int l);

}  // namespace cyclordf
