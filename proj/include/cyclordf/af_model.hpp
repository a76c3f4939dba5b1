#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace cyclordf {

/// One period of a unit-height trapezoid: linear rise over `rise_fall`,
/// flat top for `duty`, linear fall over `rise_fall`, then zero for the rest.
/// Both fields are fractions of the (unit) period.
struct TrapezoidalPulse {
  double rise_fall = 0.01;
  double duty = 0.4;

  /// Throws ConfigError unless 0 < rise_fall, 0 <= duty, 2*rise_fall + duty <= 1.
  void validate() const;

  /// Value at t (in periods), wrapped into [0, 1).
  double operator()(double t) const;

  /// Corner locations in [0, 1): start of rise, top start, fall start, fall end.
  std::vector<double> corners() const;
};

double pulse_eval(const TrapezoidalPulse& pulse, double t);

/// Evaluable autocorrelation function c(t, lag) = E{X(t) X(t + lag)} of a
/// continuous-time wide-sense cyclostationary process.
///
/// Implementations must be periodic in t with period(), vanish for
/// |lag| > max_lag(), and satisfy c(t, lag) = c(t + lag, -lag).
class Autocorrelation {
 public:
  virtual ~Autocorrelation() = default;

  virtual double operator()(double t, double lag) const = 0;

  /// Period T_c in seconds.
  virtual double period() const = 0;

  /// Maximal correlation length lambda_c in seconds.
  virtual double max_lag() const = 0;

  /// Certified bound on sup |c(t, lag)|.
  virtual double gamma_bound() const = 0;

  /// Times in [0, period()) where the variance profile has corners. The
  /// gamma_c grid search always visits these.
  virtual std::vector<double> corner_times() const { return {}; }
};

/// Separable family: variance profile base_var + var_amp * pulse(t/T_c - phi_tilde),
/// exponential decay in lag, hard cutoff at lambda_c.
struct AfModel final : Autocorrelation {
  double period_s = 5e-6;
  double max_lag_s = 4e-6;
  TrapezoidalPulse pulse;
  double base_var = 2.0;
  double var_amp = 8.0;
  double decay_rate = std::pow(10.0, 6.1);  // 1/s
  double phi_tilde = 0.0;                   // profile offset, fraction of a period

  /// The numerical-example family (T_c = 5 us, lambda_c = 4 us, t_rf = 0.01)
  /// with the given duty fraction.
  static AfModel trapezoid_example(double duty);

  /// Stationary memoryless source with constant variance.
  static AfModel white(double variance, double period_s = 5e-6);

  void validate() const;

  /// c(t, 0).
  double variance(double t) const;

  double operator()(double t, double lag) const override;
  double period() const override { return period_s; }
  double max_lag() const override { return max_lag_s; }
  double gamma_bound() const override;
  std::vector<double> corner_times() const override;
};

double af_eval(const AfModel& model, double t, double lag);
double gamma_bound(const Autocorrelation& model);

/// Wraps an arbitrary callable as an Autocorrelation. The callable is trusted
/// to honour the interface invariants.
class FunctionAf final : public Autocorrelation {
 public:
  using Fn = std::function<double(double, double)>;

  FunctionAf(Fn fn, double period_s, double max_lag_s, double gamma,
             std::vector<double> corners = {});

  double operator()(double t, double lag) const override;
  double period() const override { return period_; }
  double max_lag() const override { return max_lag_; }
  double gamma_bound() const override { return gamma_; }
  std::vector<double> corner_times() const override { return corners_; }

 private:
  Fn fn_;
  double period_;
  double max_lag_;
  double gamma_;
  std::vector<double> corners_;
};

struct GammaCEstimate {
  double value = 0.0;
  int tau_c = 0;
  int t_grid = 0;
  int lag_grid = 0;
  double t_argmin = 0.0;

  bool positive() const { return value > 0.0; }
};

/// Grid estimate of the strict-diagonal-dominance margin
///
///   min_t { c(t,0) - 2 tau_c max_{T_c/(p+1) <= |lag| <= lambda_c} |c(t,lag)| }
///
/// The t-grid is uniform over [0, T_c) plus corner_times(); the lag grid is
/// uniform over [T_c/(p+1), lambda_c] with both endpoints (the supremum over
/// the open interval equals the max over its closure for continuous c).
/// tau_c is ceil((p+1) lambda_c / T_c).
GammaCEstimate gamma_c(const Autocorrelation& model, int p, int t_grid = 4096,
                       int lag_grid = 4096);

/// Same search with an explicit memory length.
GammaCEstimate gamma_c_for_memory(const Autocorrelation& model, int p, int tau_c,
                                  int t_grid = 4096, int lag_grid = 4096);

}  // namespace cyclordf
