#include "cyclordf/af_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "cyclordf/errors.hpp"
#include "cyclordf/sampling.hpp"

namespace cyclordf {

namespace {

double wrap_unit(double t) {
  double w = t - std::floor(t);
  // t slightly below an integer can round up to exactly 1.
  return w >= 1.0 ? 0.0 : w;
}

}  // namespace

void TrapezoidalPulse::validate() const {
  if (!(rise_fall > 0.0) || !(duty >= 0.0) || 2.0 * rise_fall + duty > 1.0 ||
      !std::isfinite(rise_fall) || !std::isfinite(duty)) {
    throw ConfigError("invalid trapezoidal pulse: t_rf=" + std::to_string(rise_fall) +
                      ", t_dc=" + std::to_string(duty) +
                      " (need t_rf > 0, t_dc >= 0, 2*t_rf + t_dc <= 1)");
  }
}

double TrapezoidalPulse::operator()(double t) const {
  const double u = wrap_unit(t);
  if (u < rise_fall) return u / rise_fall;
  if (u < rise_fall + duty) return 1.0;
  if (u < 2.0 * rise_fall + duty) return 1.0 - (u - duty - rise_fall) / rise_fall;
  return 0.0;
}

std::vector<double> TrapezoidalPulse::corners() const {
  std::vector<double> out{0.0, rise_fall, rise_fall + duty, 2.0 * rise_fall + duty};
  for (double& c : out) c = wrap_unit(c);
  return out;
}

double pulse_eval(const TrapezoidalPulse& pulse, double t) {
  pulse.validate();
  return pulse(t);
}

AfModel AfModel::trapezoid_example(double duty) {
  AfModel m;
  m.pulse.duty = duty;
  m.validate();
  return m;
}

AfModel AfModel::white(double variance, double period_s) {
  AfModel m;
  m.period_s = period_s;
  m.max_lag_s = 1e-9 * period_s;
  m.base_var = variance;
  m.var_amp = 0.0;
  m.validate();
  return m;
}

void AfModel::validate() const {
  pulse.validate();
  auto bad = [](double x) { return !std::isfinite(x); };
  if (bad(period_s) || period_s <= 0.0) throw ConfigError("T_c_seconds must be positive");
  if (bad(max_lag_s) || max_lag_s <= 0.0)
    throw ConfigError("lambda_c_seconds must be positive");
  if (bad(base_var) || base_var <= 0.0) throw ConfigError("base_var must be positive");
  if (bad(var_amp) || var_amp < 0.0) throw ConfigError("var_amp must be non-negative");
  if (std::isnan(decay_rate) || decay_rate < 0.0)
    throw ConfigError("decay_rate_per_second must be non-negative");
  if (bad(phi_tilde)) throw ConfigError("phi_tilde must be finite");
}

double AfModel::variance(double t) const {
  return base_var + var_amp * pulse(t / period_s - phi_tilde);
}

double AfModel::operator()(double t, double lag) const {
  if (lag < 0.0) {
    t += lag;
    lag = -lag;
  }
  if (lag > max_lag_s) return 0.0;
  if (lag == 0.0) return variance(t);
  return std::exp(-lag * decay_rate) * variance(t);
}

double AfModel::gamma_bound() const { return base_var + var_amp; }

std::vector<double> AfModel::corner_times() const {
  std::vector<double> out;
  for (double c : pulse.corners()) out.push_back(wrap_unit(c + phi_tilde) * period_s);
  std::sort(out.begin(), out.end());
  return out;
}

double af_eval(const AfModel& model, double t, double lag) { return model(t, lag); }

double gamma_bound(const Autocorrelation& model) { return model.gamma_bound(); }

FunctionAf::FunctionAf(Fn fn, double period_s, double max_lag_s, double gamma,
                       std::vector<double> corners)
    : fn_(std::move(fn)),
      period_(period_s),
      max_lag_(max_lag_s),
      gamma_(gamma),
      corners_(std::move(corners)) {
  if (!(period_ > 0.0) || !(max_lag_ > 0.0)) {
    throw ConfigError("FunctionAf needs a positive period and max lag");
  }
}

double FunctionAf::operator()(double t, double lag) const {
  if (std::abs(lag) > max_lag_) return 0.0;
  return fn_(t, lag);
}

GammaCEstimate gamma_c(const Autocorrelation& model, int p, int t_grid, int lag_grid) {
  return gamma_c_for_memory(model, p, tau_c(model, p), t_grid, lag_grid);
}

GammaCEstimate gamma_c_for_memory(const Autocorrelation& model, int p, int memory,
                                  int t_grid, int lag_grid) {
  if (p < 1) throw DomainError("gamma_c: p must be positive");
  if (t_grid < 2 || lag_grid < 2) throw DomainError("gamma_c: grids need >= 2 points");

  const double period = model.period();
  const double lo = period / (p + 1);
  const double hi = model.max_lag();

  std::vector<double> lags;
  if (hi >= lo) {
    lags.reserve(lag_grid);
    for (int k = 0; k < lag_grid; ++k) {
      lags.push_back(lo + (hi - lo) * static_cast<double>(k) / (lag_grid - 1));
    }
  }

  std::vector<double> times;
  times.reserve(t_grid + 8);
  for (int k = 0; k < t_grid; ++k) times.push_back(period * k / t_grid);
  for (double c : model.corner_times()) times.push_back(c);

  GammaCEstimate est;
  est.tau_c = memory;
  est.t_grid = t_grid;
  est.lag_grid = lag_grid;
  est.value = std::numeric_limits<double>::infinity();
  for (double t : times) {
    double worst = 0.0;
    for (double lag : lags) {
      worst = std::max({worst, std::abs(model(t, lag)), std::abs(model(t, -lag))});
    }
    const double margin = model(t, 0.0) - 2.0 * memory * worst;
    if (margin < est.value) {
      est.value = margin;
      est.t_argmin = t;
    }
  }
  return est;
}

}  // namespace cyclordf
