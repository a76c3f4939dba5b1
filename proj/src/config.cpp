#include "cyclordf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "cyclordf/errors.hpp"

namespace cyclordf {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return number_or_pi(obj.at(key), key);
}

template <typename Int>
Int get_int(const json& obj, const std::string& key, Int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(key + ": expected an integer");
  return v.get<Int>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ConfigError(key + ": expected true or false");
  return obj.at(key).get<bool>();
}

std::vector<double> number_list(const json& v, const std::string& key) {
  if (!v.is_array()) return {number_or_pi(v, key)};
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number_or_pi(x, key));
  return out;
}

std::vector<std::int64_t> int_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key + ": expected an array of integers");
  std::vector<std::int64_t> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) throw ConfigError(key + ": expected integers");
    out.push_back(x.get<std::int64_t>());
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, int points, const std::string& key) {
  if (points < 1) throw ConfigError(key + ": points must be >= 1");
  if (!(hi >= lo)) throw ConfigError(key + ": max must not be below min");
  std::vector<double> out(points);
  for (int k = 0; k < points; ++k) {
    out[k] = points == 1 ? lo : lo + (hi - lo) * k / (points - 1);
  }
  return out;
}

std::string duty_label(double duty) {
  std::string s = "t_dc=" + json(duty).dump();
  return s;
}

std::vector<ModelEntry> parse_af(const json& af) {
  check_keys(af, "af",
             {"kind", "T_c_seconds", "lambda_c_seconds", "t_rf", "t_dc", "base_var", "var_amp",
              "decay_rate_per_second", "log10_decay_rate", "phi_tilde", "variances"});
  const std::string kind = af.value("kind", "trapezoid");
  const double period = get_number(af, "T_c_seconds", 5e-6);
  if (!(period > 0.0)) throw ConfigError("af.T_c_seconds must be positive");

  std::vector<ModelEntry> out;
  if (kind == "memoryless") {
    if (!af.contains("variances")) throw ConfigError("af.variances is required for memoryless");
    const auto vars = number_list(af.at("variances"), "af.variances");
    if (vars.empty()) throw ConfigError("af.variances must be non-empty");
    for (double v : vars) {
      if (!(v >= 0.0)) throw ConfigError("af.variances must be non-negative");
    }
    if (vars.size() == 1) {
      out.push_back({"memoryless", std::make_shared<AfModel>(AfModel::white(vars[0], period))});
      return out;
    }
    // Piecewise-constant variance over equal slots of the period, no correlation
    // between distinct instants.
    const double gamma = *std::max_element(vars.begin(), vars.end());
    const auto m = static_cast<double>(vars.size());
    std::vector<double> corners;
    for (std::size_t k = 0; k < vars.size(); ++k) corners.push_back(period * k / m);
    auto fn = [vars, period, m](double t, double lag) {
      if (lag != 0.0) return 0.0;
      double frac = t / period - std::floor(t / period);
      auto k = static_cast<std::size_t>(std::floor(frac * m + 1e-9));
      return vars[k % vars.size()];
    };
    out.push_back({"memoryless",
                   std::make_shared<FunctionAf>(fn, period, 1e-9 * period, gamma, corners)});
    return out;
  }
  if (kind != "trapezoid") throw ConfigError("af.kind must be 'trapezoid' or 'memoryless'");

  AfModel base;
  base.period_s = period;
  base.max_lag_s = get_number(af, "lambda_c_seconds", base.max_lag_s);
  base.pulse.rise_fall = get_number(af, "t_rf", base.pulse.rise_fall);
  base.base_var = get_number(af, "base_var", base.base_var);
  base.var_amp = get_number(af, "var_amp", base.var_amp);
  if (af.contains("decay_rate_per_second") && af.contains("log10_decay_rate")) {
    throw ConfigError("af: give decay_rate_per_second or log10_decay_rate, not both");
  }
  if (af.contains("log10_decay_rate")) {
    base.decay_rate = std::pow(10.0, get_number(af, "log10_decay_rate", 6.1));
  } else {
    base.decay_rate = get_number(af, "decay_rate_per_second", base.decay_rate);
  }
  base.phi_tilde = get_number(af, "phi_tilde", 0.0);
  const auto duties = af.contains("t_dc") ? number_list(af.at("t_dc"), "af.t_dc")
                                          : std::vector<double>{0.4};
  if (duties.empty()) throw ConfigError("af.t_dc must be non-empty");
  for (double duty : duties) {
    AfModel m = base;
    m.pulse.duty = duty;
    try {
      m.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("af: ") + e.what());
    }
    out.push_back({duty_label(duty), std::make_shared<AfModel>(m)});
  }
  return out;
}

SamplingPlan parse_sampling(const json& s, double period) {
  check_keys(s, "sampling", {"p", "epsilon", "n", "phi_s_seconds", "phi_tilde"});
  SamplingPlan plan;
  plan.p = get_int<int>(s, "p", 2);
  if (plan.p < 1) throw ConfigError("sampling.p must be >= 1");
  if (s.contains("epsilon")) {
    const auto& e = s.at("epsilon");
    if (e.is_string()) {
      plan.epsilon = Epsilon::parse(e.get<std::string>());
    } else if (e.is_number()) {
      plan.epsilon = Epsilon::from_double(e.get<double>());
    } else {
      throw ConfigError("sampling.epsilon: expected a number or a string such as \"pi/7\"");
    }
  }
  if (s.contains("n") && !s.at("n").is_null()) {
    const auto n = get_int<std::int64_t>(s, "n", 1);
    if (n < 1) throw ConfigError("sampling.n must be >= 1");
    plan.n = n;
  }
  if (s.contains("phi_s_seconds") && s.contains("phi_tilde")) {
    throw ConfigError("sampling: give phi_s_seconds or phi_tilde, not both");
  }
  if (s.contains("phi_tilde")) {
    plan.phase_s = get_number(s, "phi_tilde", 0.0) * period;
  } else {
    plan.phase_s = get_number(s, "phi_s_seconds", 0.0);
  }
  if (!(plan.phase_s >= 0.0) || !std::isfinite(plan.phase_s)) {
    throw ConfigError("sampling phase must be finite and non-negative");
  }
  return plan;
}

SweepSpec parse_sweep(const json& s, const SamplingPlan& plan) {
  check_keys(s, "sweep",
             {"axis", "n_min", "n_max", "n_values", "phase_mode", "window_fraction",
              "phi_tilde_min", "phi_tilde_max", "phi_tilde_values", "points", "D_min", "D_max",
              "D_values"});
  if (!s.contains("axis") || !s.at("axis").is_string()) {
    throw ConfigError("sweep.axis is required: one of \"n\", \"phi\", \"D\"");
  }
  const auto axis = s.at("axis").get<std::string>();
  SweepSpec out;
  out.window_fraction = get_number(s, "window_fraction", 0.2);
  if (!(out.window_fraction > 0.0 && out.window_fraction <= 1.0)) {
    throw ConfigError("sweep.window_fraction must lie in (0, 1]");
  }
  auto read_ns = [&](bool required) {
    if (s.contains("n_values")) {
      out.n_values = int_list(s.at("n_values"), "sweep.n_values");
    } else if (s.contains("n_min") || s.contains("n_max")) {
      const auto lo = get_int<std::int64_t>(s, "n_min", 1);
      const auto hi = get_int<std::int64_t>(s, "n_max", lo);
      if (hi < lo) throw ConfigError("sweep.n_max must not be below n_min");
      for (auto n = lo; n <= hi; ++n) out.n_values.push_back(n);
    } else if (plan.n) {
      out.n_values = {*plan.n};
    } else if (required) {
      throw ConfigError("sweep: n range required");
    }
    for (auto n : out.n_values) {
      if (n < 1) throw ConfigError("sweep: n values must be >= 1");
    }
  };
  if (axis == "n") {
    out.axis = SweepAxis::N;
    read_ns(true);
    const std::string mode = s.value("phase_mode", "fixed");
    if (mode != "fixed" && mode != "optimize") {
      throw ConfigError("sweep.phase_mode must be \"fixed\" or \"optimize\"");
    }
    out.optimize_phase = mode == "optimize";
  } else if (axis == "phi") {
    out.axis = SweepAxis::Phase;
    read_ns(true);
    if (s.contains("phi_tilde_values")) {
      out.phi_tildes = number_list(s.at("phi_tilde_values"), "sweep.phi_tilde_values");
    } else {
      out.phi_tildes = linspace(get_number(s, "phi_tilde_min", 0.0),
                                get_number(s, "phi_tilde_max", 1.0),
                                get_int<int>(s, "points", 64), "sweep.phi_tilde");
    }
    for (double v : out.phi_tildes) {
      if (!(v >= 0.0)) throw ConfigError("sweep: phi_tilde values must be non-negative");
    }
  } else if (axis == "D") {
    out.axis = SweepAxis::Distortion;
    if (s.contains("D_values")) {
      out.distortions = number_list(s.at("D_values"), "sweep.D_values");
    } else {
      if (!s.contains("D_min") || !s.contains("D_max")) {
        throw ConfigError("sweep: D_min and D_max (or D_values) required");
      }
      out.distortions = linspace(get_number(s, "D_min", 0.0), get_number(s, "D_max", 0.0),
                                 get_int<int>(s, "points", 15), "sweep.D");
    }
    for (double d : out.distortions) {
      if (!(d > 0.0)) throw ConfigError("sweep: D values must be positive");
    }
  } else {
    throw ConfigError("sweep.axis must be one of \"n\", \"phi\", \"D\"");
  }
  auto strictly_ascending = [](const auto& v) {
    return std::adjacent_find(v.begin(), v.end(), [](auto a, auto b) { return b <= a; }) == v.end();
  };
  if (!strictly_ascending(out.n_values) || !strictly_ascending(out.phi_tildes) ||
      !strictly_ascending(out.distortions)) {
    throw ConfigError("sweep: values must be strictly ascending");
  }
  if (out.axis != SweepAxis::Distortion && out.n_values.empty()) {
    throw ConfigError("sweep: empty n range");
  }
  if (out.axis == SweepAxis::Phase && out.phi_tildes.empty()) {
    throw ConfigError("sweep: empty phi range");
  }
  if (out.axis == SweepAxis::Distortion && out.distortions.empty()) {
    throw ConfigError("sweep: empty D range");
  }
  return out;
}

GridSpec parse_grid(const json& g) {
  check_keys(g, "grid",
             {"freq_nodes", "phase_points", "gamma_t_grid", "gamma_lag_grid", "eigen_method",
              "tol_psd", "cost_budget", "override_cost"});
  GridSpec out;
  out.freq_nodes = get_int<int>(g, "freq_nodes", out.freq_nodes);
  out.phase_points = get_int<int>(g, "phase_points", out.phase_points);
  out.gamma_t_grid = get_int<int>(g, "gamma_t_grid", out.gamma_t_grid);
  out.gamma_lag_grid = get_int<int>(g, "gamma_lag_grid", out.gamma_lag_grid);
  out.tol_psd = get_number(g, "tol_psd", out.tol_psd);
  out.cost_budget = get_int<std::int64_t>(g, "cost_budget", out.cost_budget);
  out.override_cost = get_bool(g, "override_cost", out.override_cost);
  const std::string method = g.value("eigen_method", "real_embedding");
  if (method == "real_embedding") {
    out.eigen_method = EigenMethod::RealEmbedding;
  } else if (method == "complex_hermitian") {
    out.eigen_method = EigenMethod::ComplexHermitian;
  } else {
    throw ConfigError("grid.eigen_method must be \"real_embedding\" or \"complex_hermitian\"");
  }
  if (out.freq_nodes < 2 || out.freq_nodes % 2 != 0) {
    throw ConfigError("grid.freq_nodes must be an even integer >= 2");
  }
  if (out.phase_points < 2) throw ConfigError("grid.phase_points must be >= 2");
  if (out.gamma_t_grid < 1 || out.gamma_lag_grid < 2) {
    throw ConfigError("grid: gamma grids must be >= 1 (t) and >= 2 (lag)");
  }
  if (!(out.tol_psd > 0.0)) throw ConfigError("grid.tol_psd must be positive");
  return out;
}

VerifySpec parse_verify(const json& v) {
  check_keys(v, "verify",
             {"l", "n_list", "phi_grid", "moment_cases", "moment_max_l", "rho", "mc_samples",
              "sdd_cases", "sdd_max_l", "block_l", "consistency_n", "consistency_l_multiple",
              "consistency_rel_tol", "info_l", "info_blocks", "info_samples"});
  VerifySpec out;
  out.l = get_int<int>(v, "l", out.l);
  if (v.contains("n_list")) out.n_list = int_list(v.at("n_list"), "verify.n_list");
  out.phi_grid = get_int<int>(v, "phi_grid", out.phi_grid);
  out.moment_cases = get_int<int>(v, "moment_cases", out.moment_cases);
  out.moment_max_l = get_int<int>(v, "moment_max_l", out.moment_max_l);
  out.rho = get_number(v, "rho", out.rho);
  out.mc_samples = get_int<std::int64_t>(v, "mc_samples", out.mc_samples);
  out.sdd_cases = get_int<int>(v, "sdd_cases", out.sdd_cases);
  out.sdd_max_l = get_int<int>(v, "sdd_max_l", out.sdd_max_l);
  out.block_l = get_int<int>(v, "block_l", out.block_l);
  out.consistency_n = get_int<std::int64_t>(v, "consistency_n", out.consistency_n);
  out.consistency_l_multiple = get_int<int>(v, "consistency_l_multiple", out.consistency_l_multiple);
  out.consistency_rel_tol = get_number(v, "consistency_rel_tol", out.consistency_rel_tol);
  out.info_l = get_int<int>(v, "info_l", out.info_l);
  out.info_blocks = get_int<std::int64_t>(v, "info_blocks", out.info_blocks);
  out.info_samples = get_int<std::int64_t>(v, "info_samples", out.info_samples);
  if (out.l < 1 || out.block_l < 1 || out.info_l < 1 || out.moment_max_l < 1 ||
      out.sdd_max_l < 1) {
    throw ConfigError("verify: block lengths must be >= 1");
  }
  if (out.mc_samples < 1000) throw ConfigError("verify.mc_samples must be >= 1000");
  if (out.n_list.empty() ||
      std::adjacent_find(out.n_list.begin(), out.n_list.end(),
                         [](auto a, auto b) { return b <= a; }) != out.n_list.end()) {
    throw ConfigError("verify.n_list must be non-empty and ascending");
  }
  if (out.phi_grid < 1 || out.moment_cases < 0 || out.sdd_cases < 0 || out.info_blocks < 1 ||
      out.info_samples < 2 || out.consistency_n < 1 || out.consistency_l_multiple < 1) {
    throw ConfigError("verify: counts out of range");
  }
  if (!(out.rho > 0.0)) throw ConfigError("verify.rho must be positive");
  return out;
}

OutputSpec parse_output(const json& o) {
  check_keys(o, "output", {"dir", "formats", "seed"});
  OutputSpec out;
  if (o.contains("dir")) {
    if (!o.at("dir").is_string() || o.at("dir").get<std::string>().empty()) {
      throw ConfigError("output.dir must be a non-empty string");
    }
    out.dir = o.at("dir").get<std::string>();
  }
  if (o.contains("formats")) {
    const auto& f = o.at("formats");
    if (!f.is_array()) throw ConfigError("output.formats must be an array");
    out.csv = out.svg = false;
    for (const auto& x : f) {
      const auto s = x.is_string() ? x.get<std::string>() : std::string();
      if (s == "csv") {
        out.csv = true;
      } else if (s == "svg") {
        out.svg = true;
      } else {
        throw ConfigError("output.formats entries must be \"csv\" or \"svg\"");
      }
    }
  }
  if (o.contains("seed")) {
    if (!o.at("seed").is_number_unsigned()) {
      throw ConfigError("output.seed must be a non-negative integer");
    }
    out.seed = o.at("seed").get<std::uint64_t>();
  }
  return out;
}

}  // namespace

double number_or_pi(const json& value, const std::string& key) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    try {
      return parse_pi_expression(value.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  throw ConfigError(key + ": expected a number or a pi expression string");
}

PipelineOptions ExperimentConfig::pipeline(int jobs) const {
  PipelineOptions o;
  o.field.grid_size = grid.freq_nodes;
  o.field.tol_psd = grid.tol_psd;
  o.field.method = grid.eigen_method;
  o.cost_budget = grid.cost_budget;
  o.override_cost = grid.override_cost;
  o.jobs = std::max(1, jobs);
  return o;
}

NSweepOptions ExperimentConfig::n_sweep_options() const {
  NSweepOptions o;
  if (sweep) {
    o.window_fraction = sweep->window_fraction;
    o.optimize_phase = sweep->optimize_phase;
  }
  o.phase_grid_size = grid.phase_points;
  o.gate_t_grid = grid.gamma_t_grid;
  o.gate_lag_grid = grid.gamma_lag_grid;
  return o;
}

ExperimentConfig parse_config(const json& doc) {
  check_keys(doc, "config", {"af", "sampling", "sweep", "D", "grid", "verify", "output"});
  ExperimentConfig cfg;
  cfg.models = parse_af(doc.value("af", json::object()));
  const double period = cfg.models.front().model->period();
  cfg.sampling = parse_sampling(doc.value("sampling", json::object()), period);
  if (doc.contains("D")) {
    cfg.distortion = number_or_pi(doc.at("D"), "D");
    if (!(*cfg.distortion > 0.0)) throw ConfigError("D must be positive");
  }
  if (doc.contains("sweep")) cfg.sweep = parse_sweep(doc.at("sweep"), cfg.sampling);
  cfg.grid = parse_grid(doc.value("grid", json::object()));
  cfg.verify = parse_verify(doc.value("verify", json::object()));
  cfg.output = parse_output(doc.value("output", json::object()));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json config_schema() {
  const json num_or_pi = {{"oneOf", json::array({{{"type", "number"}},
                                                 {{"type", "string"},
                                                  {"pattern", "^\\s*\\d*\\*?pi(/\\d+)?\\s*$"}}})}};
  const json num_list = {{"oneOf", json::array({num_or_pi, {{"type", "array"}, {"items", num_or_pi}}})}};
  const json int_array = {{"type", "array"}, {"items", {{"type", "integer"}}}};
  return {
      {"$schema", "https://json-schema.org/draft/2020-12/schema"},
      {"title", "cyclordf experiment"},
      {"type", "object"},
      {"additionalProperties", false},
      {"properties",
       {{"af",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties",
           {{"kind", {{"enum", {"trapezoid", "memoryless"}}, {"default", "trapezoid"}}},
            {"T_c_seconds", {{"type", "number"}, {"default", 5e-6}}},
            {"lambda_c_seconds", {{"type", "number"}, {"default", 4e-6}}},
            {"t_rf", {{"type", "number"}, {"default", 0.01}}},
            {"t_dc", num_list},
            {"base_var", {{"type", "number"}, {"default", 2}}},
            {"var_amp", {{"type", "number"}, {"default", 8}}},
            {"decay_rate_per_second", {{"type", "number"}}},
            {"log10_decay_rate", {{"type", "number"}, {"default", 6.1}}},
            {"phi_tilde", num_or_pi},
            {"variances", num_list}}}}},
        {"sampling",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties",
           {{"p", {{"type", "integer"}, {"minimum", 1}, {"default", 2}}},
            {"epsilon",
             {{"oneOf", json::array({{{"type", "number"}},
                                     {{"type", "string"},
                                      {"description", "decimal, a/b, or pi expression"}}})}}},
            {"n", {{"type", {"integer", "null"}}, {"minimum", 1}}},
            {"phi_s_seconds", {{"type", "number"}, {"minimum", 0}}},
            {"phi_tilde", num_or_pi}}}}},
        {"D", num_or_pi},
        {"sweep",
         {{"type", "object"},
          {"additionalProperties", false},
          {"required", {"axis"}},
          {"properties",
           {{"axis", {{"enum", {"n", "phi", "D"}}}},
            {"n_min", {{"type", "integer"}}},
            {"n_max", {{"type", "integer"}}},
            {"n_values", int_array},
            {"phase_mode", {{"enum", {"fixed", "optimize"}}, {"default", "fixed"}}},
            {"window_fraction", {{"type", "number"}, {"default", 0.2}}},
            {"phi_tilde_min", num_or_pi},
            {"phi_tilde_max", num_or_pi},
            {"phi_tilde_values", num_list},
            {"points", {{"type", "integer"}, {"minimum", 1}}},
            {"D_min", {{"type", "number"}}},
            {"D_max", {{"type", "number"}}},
            {"D_values", num_list}}}}},
        {"grid",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties",
           {{"freq_nodes", {{"type", "integer"}, {"default", 256}}},
            {"phase_points", {{"type", "integer"}, {"default", 64}}},
            {"gamma_t_grid", {{"type", "integer"}, {"default", 4096}}},
            {"gamma_lag_grid", {{"type", "integer"}, {"default", 4096}}},
            {"eigen_method",
             {{"enum", {"real_embedding", "complex_hermitian"}}, {"default", "real_embedding"}}},
            {"tol_psd", {{"type", "number"}, {"default", 1e-8}}},
            {"cost_budget", {{"type", "integer"}, {"default", 1000000}}},
            {"override_cost", {{"type", "boolean"}, {"default", false}}}}}}},
        {"verify",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties",
           {{"l", {{"type", "integer"}, {"default", 32}}},
            {"n_list", int_array},
            {"phi_grid", {{"type", "integer"}, {"default", 64}}},
            {"moment_cases", {{"type", "integer"}, {"default", 1000}}},
            {"moment_max_l", {{"type", "integer"}, {"default", 32}}},
            {"rho", {{"type", "number"}, {"default", 10}}},
            {"mc_samples", {{"type", "integer"}, {"default", 100000}}},
            {"sdd_cases", {{"type", "integer"}, {"default", 1000}}},
            {"sdd_max_l", {{"type", "integer"}, {"default", 32}}},
            {"block_l", {{"type", "integer"}, {"default", 16}}},
            {"consistency_n", {{"type", "integer"}, {"default", 1}}},
            {"consistency_l_multiple", {{"type", "integer"}, {"default", 64}}},
            {"consistency_rel_tol", {{"type", "number"}, {"default", 0.02}}},
            {"info_l", {{"type", "integer"}, {"default", 8}}},
            {"info_blocks", {{"type", "integer"}, {"default", 10}}},
            {"info_samples", {{"type", "integer"}, {"default", 10000}}}}}}},
        {"output",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties",
           {{"dir", {{"type", "string"}, {"default", "out"}}},
            {"formats", {{"type", "array"}, {"items", {{"enum", {"csv", "svg"}}}}}},
            {"seed", {{"type", "integer"}, {"minimum", 0}, {"default", 12345}}}}}}}}},
  };
}

}  // namespace cyclordf
