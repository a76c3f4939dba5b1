#include "cyclordf/suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cyclordf/errors.hpp"
#include "cyclordf/verify_appendix.hpp"
#include "cyclordf/waterfill.hpp"

namespace cyclordf {

using nlohmann::json;

namespace {

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

json table_json(const ConvergenceTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"n", r.n},
                    {"epsilon_n", r.eps_n},
                    {"gap", r.flagged ? json(nullptr) : json(r.gap)},
                    {"flagged", r.flagged}});
  }
  return rows;
}

json plan_json(const SamplingPlan& plan) {
  return {{"p", plan.p},
          {"epsilon", plan.epsilon.to_string()},
          {"n", plan.n ? json(*plan.n) : json(nullptr)},
          {"phi_s_seconds", plan.phase_s}};
}

json model_json(const Autocorrelation& model) {
  json j = {{"T_c_seconds", model.period()},
            {"lambda_c_seconds", model.max_lag()},
            {"gamma", model.gamma_bound()}};
  if (const auto* af = dynamic_cast<const AfModel*>(&model)) {
    j["t_rf"] = af->pulse.rise_fall;
    j["t_dc"] = af->pulse.duty;
    j["base_var"] = af->base_var;
    j["var_amp"] = af->var_amp;
    j["decay_rate_per_second"] = af->decay_rate;
    j["phi_tilde"] = af->phi_tilde;
  }
  return j;
}

}  // namespace

json CheckResult::to_json() const {
  json j = {{"name", name},
            {"status", status},
            {"inputs_digest", inputs_digest(inputs)},
            {"inputs", inputs},
            {"seed", seed},
            {"numbers", numbers}};
  if (!error.empty()) j["error"] = error;
  return j;
}

std::string inputs_digest(const json& inputs) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : inputs.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = hex[h & 0xf];
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXd random_psd_matrix(int l, double rho, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> rank_dist(1, l);
  std::uniform_real_distribution<double> scale_dist(0.1, 1.0);
  const int rank = rank_dist(rng);
  Eigen::MatrixXd a(l, rank);
  for (int j = 0; j < rank; ++j) {
    for (int i = 0; i < l; ++i) a(i, j) = normal(rng);
  }
  Eigen::MatrixXd m = a * a.transpose();
  const double max_diag = m.diagonal().maxCoeff();
  if (max_diag > 0.0) m *= scale_dist(rng) * rho / max_diag;
  // exact symmetry and diagonal <= rho after rounding
  m = 0.5 * (m + m.transpose()).eval();
  for (int i = 0; i < l; ++i) m(i, i) = std::min(m(i, i), rho);
  return m;
}

Eigen::MatrixXd random_sdd_matrix(int l, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::uniform_real_distribution<double> slack(1e-3, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(l, l);
  for (int i = 0; i < l; ++i) {
    for (int j = i + 1; j < l; ++j) m(i, j) = m(j, i) = off(rng);
  }
  for (int i = 0; i < l; ++i) m(i, i) = m.row(i).cwiseAbs().sum() + slack(rng);
  return m;
}

CheckResult check_moment_suite(int cases, int max_l, double rho, std::int64_t samples,
                               std::uint64_t seed, double min_ci_fraction, int jobs) {
  CheckResult r;
  r.name = "moment_bounds_random";
  r.seed = seed;
  r.inputs = {{"cases", cases}, {"max_l", max_l}, {"rho", rho}, {"samples", samples},
              {"min_ci_fraction", min_ci_fraction}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> l_dist(1, max_l);
  int analytic_ok = 0, mean_in = 0, second_in = 0;
  double worst_mean_ratio = 0.0, worst_second_ratio = 0.0;
  for (int c = 0; c < cases; ++c) {
    const int l = l_dist(rng);
    const Eigen::MatrixXd cov = random_psd_matrix(l, rho, rng);
    const auto a = moment_bound_check(cov, rho);
    if (a.mean_within_rho && a.second_within_bound) ++analytic_ok;
    worst_mean_ratio = std::max(worst_mean_ratio, a.mean_d / rho);
    worst_second_ratio = std::max(worst_second_ratio, a.second_moment / a.bound_3rho2);
    const auto mc = mc_distortion_check(cov, samples, derive_seed(seed, c), jobs);
    mean_in += mc.mean_in_ci;
    second_in += mc.second_in_ci;
  }
  const double mean_frac = cases > 0 ? static_cast<double>(mean_in) / cases : 1.0;
  const double second_frac = cases > 0 ? static_cast<double>(second_in) / cases : 1.0;
  r.numbers = {{"analytic_bounds_hold", analytic_ok},
               {"max_mean_over_rho", worst_mean_ratio},
               {"max_second_over_3rho2", worst_second_ratio},
               {"mean_in_ci", mean_in},
               {"mean_in_ci_fraction", mean_frac},
               {"second_in_ci", second_in},
               {"second_in_ci_fraction", second_frac}};
  r.status = verdict(analytic_ok == cases && mean_frac >= min_ci_fraction);
  return r;
}

CheckResult check_model_moments(const Autocorrelation& model, const SamplingPlan& plan, int l,
                                std::int64_t samples, std::uint64_t seed, int jobs) {
  CheckResult r;
  r.name = "moment_bounds_model";
  r.seed = seed;
  r.inputs = {{"model", model_json(model)}, {"plan", plan_json(plan)}, {"l", l},
              {"samples", samples}};
  const auto resolved = resolve(plan, model);
  const Eigen::MatrixXd cov = block_covariance(model, resolved, l);
  const double rho = model.gamma_bound();
  const auto a = moment_bound_check(cov, rho);
  const auto mc = mc_distortion_check(cov, samples, seed, jobs);
  r.numbers = {{"rho", rho},
               {"mean_d", a.mean_d},
               {"second_moment", a.second_moment},
               {"bound_3rho2", a.bound_3rho2},
               {"mc_mean", mc.mc_mean},
               {"mc_mean_stderr", mc.mc_mean_stderr},
               {"mc_second", mc.mc_second},
               {"mc_second_stderr", mc.mc_second_stderr},
               {"mean_in_ci", mc.mean_in_ci},
               {"second_in_ci", mc.second_in_ci}};
  r.status = verdict(a.mean_within_rho && a.second_within_bound && mc.mc_pass());
  return r;
}

CheckResult check_autocorr_convergence(const Autocorrelation& model, int p, const Epsilon& eps,
                                       int l, std::span<const std::int64_t> ns, int phi_grid) {
  CheckResult r;
  r.name = "autocorr_convergence";
  r.inputs = {{"model", model_json(model)}, {"p", p}, {"epsilon", eps.to_string()}, {"l", l},
              {"n_list", std::vector<std::int64_t>(ns.begin(), ns.end())},
              {"phi_grid", phi_grid}};
  const auto t = autocorr_convergence(model, p, eps, l, ns, phi_grid);
  const double limit = 1e-3 * model.gamma_bound();
  const double last = t.rows.empty() ? 0.0 : t.rows.back().gap;
  r.numbers = {{"rows", table_json(t)},
               {"non_increasing", t.non_increasing},
               {"last_gap", last},
               {"last_gap_limit", limit},
               {"heuristic", t.heuristic}};
  r.status = verdict(t.non_increasing && last < limit);
  return r;
}

CheckResult check_logdet_convergence(const Autocorrelation& model, int p, const Epsilon& eps,
                                     int l, std::span<const std::int64_t> ns, int phi_grid) {
  CheckResult r;
  r.name = "logdet_convergence";
  r.inputs = {{"model", model_json(model)}, {"p", p}, {"epsilon", eps.to_string()}, {"l", l},
              {"n_list", std::vector<std::int64_t>(ns.begin(), ns.end())},
              {"phi_grid", phi_grid}};
  const auto t = logdet_convergence(model, p, eps, l, ns, phi_grid);
  r.numbers = {{"rows", table_json(t)},
               {"non_increasing", t.non_increasing},
               {"heuristic", t.heuristic}};
  r.status = verdict(t.non_increasing);
  return r;
}

CheckResult check_sdd_suite(int cases, int max_l, std::uint64_t seed) {
  CheckResult r;
  r.name = "sdd_min_eig_bound";
  r.seed = seed;
  r.inputs = {{"cases", cases}, {"max_l", max_l}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> l_dist(1, max_l);
  int sdd = 0, holds = 0;
  double worst_margin = INFINITY;
  for (int c = 0; c < cases; ++c) {
    const auto m = random_sdd_matrix(l_dist(rng), rng);
    const auto rep = sdd_min_eig_bound(m);
    sdd += rep.sdd;
    holds += rep.sdd && rep.bound_holds;
    worst_margin = std::min(worst_margin, rep.min_eig - rep.gershgorin_bound);
  }
  r.numbers = {{"sdd_cases", sdd},
               {"bound_holds", holds},
               {"min_margin", cases > 0 ? json(worst_margin) : json(nullptr)}};
  r.status = verdict(sdd == cases && holds == cases);
  return r;
}

CheckResult check_block_consistency(const Autocorrelation& model, const SamplingPlan& plan,
                                    double distortion, int l_multiple, double rel_tol,
                                    const PipelineOptions& options) {
  CheckResult r;
  r.name = "finite_block_consistency";
  r.inputs = {{"model", model_json(model)}, {"plan", plan_json(plan)}, {"D", distortion},
              {"l_multiple", l_multiple}, {"rel_tol", rel_tol},
              {"grid_size", options.field.grid_size}};
  const auto eval = rdf_sync(model, plan, distortion, options);
  const int l = static_cast<int>(l_multiple * eval.plan.p_n);
  const auto block = finite_block_rdf(block_covariance(model, eval.plan, l), distortion);
  const double gap = std::abs(block.rate - eval.point.rate) /
                     std::max(std::abs(eval.point.rate), std::numeric_limits<double>::min());
  r.numbers = {{"p_n", eval.plan.p_n},
               {"l", l},
               {"rate_pipeline", eval.point.rate},
               {"rate_block", block.rate},
               {"theta_pipeline", eval.point.theta},
               {"theta_block", block.theta},
               {"relative_gap", gap}};
  r.status = verdict(gap < rel_tol);
  return r;
}

CheckResult check_info_density(const Autocorrelation& model, const SamplingPlan& plan,
                               double distortion, int l, std::int64_t blocks,
                               std::int64_t samples, std::uint64_t seed, int jobs) {
  CheckResult r;
  r.name = "info_density_mean";
  r.seed = seed;
  r.inputs = {{"model", model_json(model)}, {"plan", plan_json(plan)}, {"D", distortion},
              {"l", l}, {"blocks", blocks}, {"samples", samples}};
  const auto resolved = resolve(plan, model);
  const Eigen::MatrixXd cov_x = block_covariance(model, resolved, l);
  const auto block = finite_block_rdf(cov_x, distortion);
  const Eigen::MatrixXd cov_s = test_channel_error_covariance(cov_x, block.theta);
  const auto rep = info_density_mc(cov_x, cov_s, blocks, samples, seed, jobs);
  r.numbers = {{"theta", block.theta},
               {"target", rep.target},
               {"mean_z", rep.mean_z},
               {"std_z", rep.std_z},
               {"std_error", rep.std_error},
               {"z_score", rep.std_error > 0 ? json((rep.mean_z - rep.target) / rep.std_error)
                                             : json(nullptr)},
               {"var_codeword", rep.var_codeword},
               {"var_reference", rep.var_reference}};
  r.status = verdict(rep.pass);
  return r;
}

bool SuiteReport::all_pass() const {
  return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.failed(); });
}

json SuiteReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back(c.to_json());
  return {{"checks", arr}, {"all_pass", all_pass()}};
}

namespace {

template <typename Fn>
CheckResult guarded(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    CheckResult r;
    r.name = name;
    r.status = "FAIL";
    r.error = e.what();
    return r;
  }
}

}  // namespace

SuiteReport run_verify_suite(const ExperimentConfig& cfg, int jobs) {
  const auto& v = cfg.verify;
  const std::uint64_t seed = cfg.output.seed;
  SuiteReport rep;

  rep.checks.push_back(guarded("moment_bounds_random", [&] {
    return check_moment_suite(v.moment_cases, v.moment_max_l, v.rho, v.mc_samples,
                              derive_seed(seed, 1), 0.99, jobs);
  }));
  rep.checks.push_back(guarded("sdd_min_eig_bound", [&] {
    return check_sdd_suite(v.sdd_cases, v.sdd_max_l, derive_seed(seed, 2));
  }));

  SamplingPlan fixed_n = cfg.sampling;
  fixed_n.n = v.consistency_n;
  const auto options = cfg.pipeline(jobs);

  for (std::size_t m = 0; m < cfg.models.size(); ++m) {
    const auto& entry = cfg.models[m];
    const auto& model = *entry.model;
    auto tag = [&](CheckResult r) {
      r.name += "[" + entry.label + "]";
      return r;
    };
    const std::uint64_t base = 16 * (m + 1);
    rep.checks.push_back(tag(guarded("moment_bounds_model", [&] {
      return check_model_moments(model, fixed_n, v.block_l, v.mc_samples,
                                 derive_seed(seed, base + 1), jobs);
    })));
    rep.checks.push_back(tag(guarded("autocorr_convergence", [&] {
      return check_autocorr_convergence(model, cfg.sampling.p, cfg.sampling.epsilon, v.l,
                                        v.n_list, v.phi_grid);
    })));
    rep.checks.push_back(tag(guarded("logdet_convergence", [&] {
      return check_logdet_convergence(model, cfg.sampling.p, cfg.sampling.epsilon, v.l,
                                      v.n_list, v.phi_grid);
    })));
    if (!cfg.distortion) {
      CheckResult skip;
      skip.name = "finite_block_consistency";
      skip.error = "no D configured";
      rep.checks.push_back(tag(skip));
      skip.name = "info_density_mean";
      rep.checks.push_back(tag(skip));
      continue;
    }
    const double d = *cfg.distortion;
    rep.checks.push_back(tag(guarded("finite_block_consistency", [&] {
      return check_block_consistency(model, fixed_n, d, v.consistency_l_multiple,
                                     v.consistency_rel_tol, options);
    })));
    rep.checks.push_back(tag(guarded("info_density_mean", [&] {
      return check_info_density(model, fixed_n, d, v.info_l, v.info_blocks, v.info_samples,
                                derive_seed(seed, base + 2), jobs);
    })));
  }
  return rep;
}

}  // namespace cyclordf
