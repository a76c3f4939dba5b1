#include "cyclordf/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cyclordf/errors.hpp"
#include "cyclordf/parallel.hpp"

namespace cyclordf {

namespace {

PipelineOptions single_threaded(PipelineOptions options) {
  options.field.jobs = 1;
  options.jobs = 1;
  return options;
}

// Splits jobs between sweep points and frequency nodes.
PipelineOptions inner_options(const PipelineOptions& options, std::size_t points) {
  if (points > 1 && options.jobs > 1) return single_threaded(options);
  PipelineOptions inner = options;
  inner.field.jobs = std::max(options.jobs, options.field.jobs);
  return inner;
}

}  // namespace

EigenField field_for_plan(const Autocorrelation& model, const ResolvedPlan& plan,
                          const PipelineOptions& options) {
  const std::int64_t cost = plan.p_n * static_cast<std::int64_t>(options.field.grid_size);
  if (!options.override_cost && cost > options.cost_budget) {
    throw ResourceError("p_n * grid_size = " + std::to_string(cost) + " exceeds the cost budget " +
                        std::to_string(options.cost_budget) + " (p_n=" +
                        std::to_string(plan.p_n) + "); set override_cost to run anyway");
  }
  const BlockAutocorr ba = build_block_autocorr(model, plan, options.memory_budget);
  return eigen_field(ba, options.field);
}

RdfEvaluation rdf_sync(const Autocorrelation& model, const SamplingPlan& plan, double distortion,
                       const PipelineOptions& options) {
  if (!plan.n) throw DomainError("rdf_sync needs a synchronous plan (finite n)");
  if (!(distortion > 0.0)) throw DomainError("distortion must be positive");
  RdfEvaluation out;
  out.plan = resolve(plan, model);
  const EigenField field = field_for_plan(model, out.plan, options);
  out.point = solve_theta(field, distortion);
  return out;
}

double PhaseCurve::spread() const {
  if (points.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                      [](const RdfPoint& a, const RdfPoint& b) {
                                        return a.rate < b.rate;
                                      });
  return hi->rate - lo->rate;
}

PhaseCurve phase_optimize(const Autocorrelation& model, const SamplingPlan& plan,
                          double distortion, int phase_grid_size,
                          const PipelineOptions& options) {
  if (phase_grid_size < 2) throw DomainError("phase grid needs at least 2 points");
  PhaseCurve curve;
  curve.phases.resize(phase_grid_size);
  curve.points.resize(phase_grid_size);
  for (int k = 0; k < phase_grid_size; ++k) {
    curve.phases[k] = model.period() * k / phase_grid_size;
  }
  const PipelineOptions inner = inner_options(options, curve.phases.size());
  parallel_for(curve.phases.size(), options.jobs, [&](std::size_t k) {
    SamplingPlan at = plan;
    at.phase_s = curve.phases[k];
    curve.points[k] = rdf_sync(model, at, distortion, inner).point;
  });
  curve.argmin = 0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    if (curve.points[k].rate < curve.points[curve.argmin].rate) curve.argmin = k;
  }
  curve.phi_opt = curve.phases[curve.argmin];
  curve.rate_min = curve.points[curve.argmin].rate;
  return curve;
}

GateReport gate_check(const Autocorrelation& model, int p, double distortion, int t_grid,
                      int lag_grid) {
  const GammaCEstimate est = gamma_c(model, p, t_grid, lag_grid);
  GateReport g;
  g.gamma_c = est.value;
  g.distortion = distortion;
  g.tau_c = est.tau_c;
  g.t_grid = est.t_grid;
  g.lag_grid = est.lag_grid;
  g.pass = est.value > 0.0 && distortion <= est.value;
  return g;
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::N:
      return "n";
    case SweepAxis::Phase:
      return "phi";
    case SweepAxis::Distortion:
      return "D";
  }
  return "?";
}

std::optional<double> limsup_estimate(std::span<const double> values, double window_fraction) {
  if (values.empty()) return std::nullopt;
  const double frac = std::clamp(window_fraction, 0.0, 1.0);
  const auto window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(frac * static_cast<double>(values.size()))));
  std::optional<double> best;
  for (std::size_t i = values.size() - std::min(window, values.size()); i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    if (!best || values[i] > *best) best = values[i];
  }
  return best;
}

namespace {

void mark_failure(SweepPoint& pt, const std::exception& e) {
  pt.failed = true;
  pt.error = e.what();
  pt.rdf.rate = std::numeric_limits<double>::quiet_NaN();
  pt.rdf.theta = std::numeric_limits<double>::quiet_NaN();
}

void finish(SweepResult& result) {
  for (const auto& pt : result.points) result.partial = result.partial || pt.failed;
}

}  // namespace

SweepResult n_sweep(const Autocorrelation& model, const SamplingPlan& plan, double distortion,
                    std::span<const std::int64_t> ns, const NSweepOptions& sweep,
                    const PipelineOptions& options) {
  if (ns.empty()) throw DomainError("n range must be non-empty");
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw DomainError("n range must be strictly ascending");
  }
  SweepResult result;
  result.axis = SweepAxis::N;
  result.points.resize(ns.size());
  result.gate = gate_check(model, plan.p, distortion, sweep.gate_t_grid, sweep.gate_lag_grid);

  const PipelineOptions inner = inner_options(options, ns.size());
  parallel_for(ns.size(), options.jobs, [&](std::size_t i) {
    SweepPoint& pt = result.points[i];
    pt.axis_value = static_cast<double>(ns[i]);
    pt.n = ns[i];
    try {
      SamplingPlan at = plan;
      at.n = ns[i];
      const ResolvedPlan resolved = resolve(at, model);
      pt.p_n = resolved.p_n;
      pt.eps_n = resolved.eps_eff;
      if (sweep.optimize_phase) {
        const PhaseCurve curve =
            phase_optimize(model, at, distortion, sweep.phase_grid_size, inner);
        pt.phase_s = curve.phi_opt;
        pt.rdf = curve.points[curve.argmin];
      } else {
        pt.phase_s = at.phase_s;
        pt.rdf = rdf_sync(model, at, distortion, inner).point;
      }
    } catch (const Error& e) {
      mark_failure(pt, e);
    }
  });

  std::vector<double> rates;
  for (const auto& pt : result.points) rates.push_back(pt.rdf.rate);
  result.limsup_estimate = limsup_estimate(rates, sweep.window_fraction);
  finish(result);
  return result;
}

SweepResult phase_sweep(const Autocorrelation& model, const SamplingPlan& plan,
                        double distortion, std::span<const double> phi_tildes,
                        const PipelineOptions& options) {
  if (phi_tildes.empty()) throw DomainError("phase range must be non-empty");
  for (std::size_t i = 1; i < phi_tildes.size(); ++i) {
    if (!(phi_tildes[i] > phi_tildes[i - 1])) {
      throw DomainError("phase values must be strictly ascending");
    }
  }
  SweepResult result;
  result.axis = SweepAxis::Phase;
  result.points.resize(phi_tildes.size());
  const PipelineOptions inner = inner_options(options, phi_tildes.size());
  parallel_for(phi_tildes.size(), options.jobs, [&](std::size_t i) {
    SweepPoint& pt = result.points[i];
    pt.axis_value = phi_tildes[i];
    pt.phase_s = phi_tildes[i] * model.period();
    try {
      SamplingPlan at = plan;
      at.phase_s = pt.phase_s;
      const RdfEvaluation ev = rdf_sync(model, at, distortion, inner);
      pt.n = ev.plan.n;
      pt.p_n = ev.plan.p_n;
      pt.eps_n = ev.plan.eps_eff;
      pt.rdf = ev.point;
    } catch (const Error& e) {
      mark_failure(pt, e);
    }
  });
  // Shifting the phase by one sample interval only relabels the sample index.
  // Reported, not enforced.
  if (!result.points[0].failed) {
    try {
      SamplingPlan at = plan;
      const double ts = resolve(at, model).sample_interval;
      at.phase_s = result.points[0].phase_s + ts;
      result.shift_gap =
          std::abs(rdf_sync(model, at, distortion, options).point.rate - result.points[0].rdf.rate);
    } catch (const Error&) {
    }
  }
  finish(result);
  return result;
}

SweepResult distortion_sweep(const Autocorrelation& model, const SamplingPlan& plan,
                             std::span<const double> distortions,
                             const PipelineOptions& options) {
  if (distortions.empty()) throw DomainError("distortion range must be non-empty");
  for (std::size_t i = 1; i < distortions.size(); ++i) {
    if (!(distortions[i] > distortions[i - 1])) {
      throw DomainError("distortion values must be strictly ascending");
    }
  }
  if (!plan.n) throw DomainError("distortion sweep needs a synchronous plan (finite n)");
  SweepResult result;
  result.axis = SweepAxis::Distortion;
  result.points.resize(distortions.size());

  const ResolvedPlan resolved = resolve(plan, model);
  std::optional<EigenField> field;
  std::string field_error;
  try {
    PipelineOptions inner = options;
    inner.field.jobs = std::max(options.jobs, options.field.jobs);
    field = field_for_plan(model, resolved, inner);
  } catch (const Error& e) {
    field_error = e.what();
  }
  for (std::size_t i = 0; i < distortions.size(); ++i) {
    SweepPoint& pt = result.points[i];
    pt.axis_value = distortions[i];
    pt.n = resolved.n;
    pt.p_n = resolved.p_n;
    pt.eps_n = resolved.eps_eff;
    pt.phase_s = resolved.phase_s;
    try {
      if (!field) throw NumericalError(field_error);
      pt.rdf = solve_theta(*field, distortions[i]);
    } catch (const Error& e) {
      mark_failure(pt, e);
    }
  }
  finish(result);
  return result;
}

double overall_rate_factor(int l, int tau_c, double guard_samples) {
  if (l < 1) throw DomainError("block length must be positive");
  return static_cast<double>(l) / (l + tau_c + guard_samples);
}

GuardPlan guard_plan(const Autocorrelation& model, const ResolvedPlan& plan, int l,
                     double phi_opt) {
  if (l < 1) throw DomainError("block length must be positive");
  const long double period = model.period();
  const long double ts = plan.sample_interval;
  GuardPlan g;
  g.l = l;
  g.tau_c = plan.tau_c;

  long double last = std::fmod(static_cast<long double>(phi_opt) + (l + plan.tau_c) * ts, period);
  if (last < 0) last += period;
  if (period - last <= 1e-12L * period) last = 0;
  g.delta_g_prime = static_cast<double>(last);

  long double guard = last <= phi_opt ? phi_opt - last : period - last + phi_opt;
  if (guard >= period * (1 - 1e-12L)) guard = 0;
  g.delta_g = static_cast<double>(guard);

  g.rate_factor = overall_rate_factor(l, plan.tau_c, static_cast<double>(guard / ts));
  g.distortion_penalty = plan.tau_c * model.gamma_bound() / l;
  return g;
}

}  // namespace cyclordf
