// Command-line front end: rdf, sweep, gate and verify.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cyclordf/asymptotic.hpp"
#include "cyclordf/config.hpp"
#include "cyclordf/errors.hpp"
#include "cyclordf/output.hpp"
#include "cyclordf/suite.hpp"

namespace fs = std::filesystem;
using namespace cyclordf;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kPartial = 4, kGateFail = 5, kVerifyFail = 6 };

struct Flags {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool svg = false;
};

std::string file_tag(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-') {
      out += c;
    } else if (c == ',' || c == ' ') {
      if (!out.empty() && out.back() != '_') out += '_';
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
  if (!f) throw ConfigError("write failed for " + path.string());
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
  const fs::path probe = fs::path(dir) / ".cyclordf_write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory is not writable: " + dir);
  }
  fs::remove(probe, ec);
  return dir;
}

ExperimentConfig load(const Flags& flags) {
  if (flags.config.empty()) throw ConfigError("--config is required");
  auto cfg = load_config(flags.config);
  if (!flags.out.empty()) cfg.output.dir = flags.out;
  if (flags.seed) cfg.output.seed = *flags.seed;
  if (flags.svg) cfg.output.svg = true;
  if (flags.jobs < 1) throw ConfigError("--jobs must be >= 1");
  return cfg;
}

double require_distortion(const ExperimentConfig& cfg) {
  if (!cfg.distortion) throw ConfigError("D is required for this command");
  return *cfg.distortion;
}

int cmd_rdf(const Flags& flags) {
  const auto cfg = load(flags);
  const double d = require_distortion(cfg);
  if (!cfg.sampling.n) throw ConfigError("rdf needs a fixed sampling.n");
  const fs::path dir = prepare_out_dir(cfg.output.dir);
  const auto options = cfg.pipeline(flags.jobs);

  std::ostringstream csv;
  csv << "model,n,p_n,epsilon_n,phi_tilde,D,R,theta,avg_var,gate\n";
  for (const auto& entry : cfg.models) {
    const auto& model = *entry.model;
    const auto eval = rdf_sync(model, cfg.sampling, d, options);
    const auto gate = gate_check(model, cfg.sampling.p, d, cfg.grid.gamma_t_grid,
                                 cfg.grid.gamma_lag_grid);
    const auto& pt = eval.point;
    std::printf("[%s] R=%.6f theta=%.6g p_n=%lld gate=%s (gamma_c=%.6g, %s)\n",
                entry.label.c_str(), pt.rate, pt.theta, static_cast<long long>(eval.plan.p_n),
                gate.pass ? "PASS" : "FAIL", gate.gamma_c, gate.label().c_str());
    if (pt.constraint_inactive) {
      std::printf("[%s] constraint inactive: D exceeds the average variance %.6g, R=0\n",
                  entry.label.c_str(), pt.avg_var);
    }
    if (pt.flagged_nodes > 0) {
      std::printf("[%s] warning: %d frequency nodes clamped above tol_psd\n",
                  entry.label.c_str(), pt.flagged_nodes);
    }
    csv << entry.label << ',' << eval.plan.n << ',' << eval.plan.p_n << ','
        << format_double(eval.plan.eps_eff) << ','
        << format_double(eval.plan.phase_s / model.period()) << ',' << format_double(d) << ','
        << format_double(pt.rate) << ',' << format_double(pt.theta) << ','
        << format_double(pt.avg_var) << ',' << (gate.pass ? "PASS" : "FAIL") << '\n';
  }
  if (cfg.output.csv) write_file(dir / "rdf.csv", csv.str());
  return kOk;
}

struct Curve {
  std::string label;
  SweepResult result;
  double period;
};

int cmd_sweep(const Flags& flags) {
  const auto cfg = load(flags);
  if (!cfg.sweep) throw ConfigError("sweep section is required");
  const auto& sw = *cfg.sweep;
  const fs::path dir = prepare_out_dir(cfg.output.dir);
  const auto options = cfg.pipeline(flags.jobs);

  std::vector<Curve> curves;
  for (const auto& entry : cfg.models) {
    const auto& model = *entry.model;
    switch (sw.axis) {
      case SweepAxis::N:
        curves.push_back({entry.label,
                          n_sweep(model, cfg.sampling, require_distortion(cfg), sw.n_values,
                                  cfg.n_sweep_options(), options),
                          model.period()});
        break;
      case SweepAxis::Phase:
        for (auto n : sw.n_values) {
          SamplingPlan plan = cfg.sampling;
          plan.n = n;
          curves.push_back({entry.label + ", n=" + std::to_string(n),
                            phase_sweep(model, plan, require_distortion(cfg), sw.phi_tildes,
                                        options),
                            model.period()});
        }
        break;
      case SweepAxis::Distortion:
        if (!cfg.sampling.n) throw ConfigError("D sweep needs a fixed sampling.n");
        curves.push_back({entry.label,
                          distortion_sweep(model, cfg.sampling, sw.distortions, options),
                          model.period()});
        break;
    }
  }

  const std::string axis = to_string(sw.axis);
  bool partial = false;
  json summary = {{"axis", axis}, {"curves", json::array()}};
  std::vector<PlotSeries> series;
  for (const auto& c : curves) {
    partial = partial || c.result.partial;
    const std::string name = "sweep_" + axis + "_" + file_tag(c.label) + ".csv";
    if (cfg.output.csv) {
      std::ostringstream csv;
      write_sweep_csv(c.result, c.period, csv);
      write_file(dir / name, csv.str());
    }
    json entry = {{"label", c.label}, {"csv", name}, {"partial", c.result.partial}};
    if (c.result.gate) entry["gate"] = gate_report_json(*c.result.gate);
    if (c.result.limsup_estimate) entry["limsup_estimate"] = *c.result.limsup_estimate;
    if (c.result.shift_gap) entry["shift_gap"] = *c.result.shift_gap;
    json failures = json::array();
    for (const auto& pt : c.result.points) {
      if (pt.failed) failures.push_back({{"axis_value", pt.axis_value}, {"error", pt.error}});
    }
    entry["failures"] = failures;
    summary["curves"].push_back(entry);

    PlotSeries s{c.label, {}, {}};
    for (const auto& pt : c.result.points) {
      s.x.push_back(sw.axis == SweepAxis::N ? static_cast<double>(pt.n) : pt.axis_value);
      s.y.push_back(pt.rdf.rate);
    }
    series.push_back(std::move(s));
  }
  write_file(dir / ("sweep_" + axis + ".json"), summary.dump(2) + "\n");
  if (cfg.output.svg) {
    const char* x_label = sw.axis == SweepAxis::N       ? "n"
                          : sw.axis == SweepAxis::Phase ? "normalized sampling phase phi_s / T_c"
                                                        : "D";
    write_file(dir / ("sweep_" + axis + ".svg"),
               render_svg("Rate-distortion function versus " + std::string(x_label), x_label,
                          "R (bits/sample)", series));
  }
  for (const auto& c : curves) {
    std::printf("[%s] %zu points%s", c.label.c_str(), c.result.points.size(),
                c.result.partial ? " (partial)" : "");
    if (c.result.limsup_estimate) std::printf(", limsup estimate %.6f", *c.result.limsup_estimate);
    if (c.result.gate) {
      std::printf(", gate %s (%s)", c.result.gate->pass ? "PASS" : "FAIL",
                  c.result.gate->label().c_str());
    }
    std::printf("\n");
  }
  return partial ? kPartial : kOk;
}

int cmd_gate(const Flags& flags) {
  const auto cfg = load(flags);
  const double d = require_distortion(cfg);
  const fs::path dir = prepare_out_dir(cfg.output.dir);
  bool all_pass = true;
  json reports = json::array();
  for (const auto& entry : cfg.models) {
    const auto gate = gate_check(*entry.model, cfg.sampling.p, d, cfg.grid.gamma_t_grid,
                                 cfg.grid.gamma_lag_grid);
    all_pass = all_pass && gate.pass;
    json j = gate_report_json(gate);
    j["model"] = entry.label;
    reports.push_back(j);
    std::printf("[%s] gamma_c=%.10g D=%.6g verdict=%s\n", entry.label.c_str(), gate.gamma_c, d,
                gate.pass ? "PASS" : "FAIL");
  }
  write_file(dir / "gate.json",
             json{{"reports", reports}, {"verdict", all_pass ? "PASS" : "FAIL"}}.dump(2) + "\n");
  return all_pass ? kOk : kGateFail;
}

int cmd_verify(const Flags& flags) {
  const auto cfg = load(flags);
  const fs::path dir = prepare_out_dir(cfg.output.dir);
  const auto report = run_verify_suite(cfg, flags.jobs);
  write_file(dir / "verify.json", report.to_json().dump(2) + "\n");
  for (const auto& c : report.checks) {
    std::printf("%-4s %s%s%s\n", c.status.c_str(), c.name.c_str(), c.error.empty() ? "" : ": ",
                c.error.c_str());
  }
  return report.all_pass() ? kOk : kVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-distortion analysis of sampled cyclostationary Gaussian sources"};
  app.fallthrough();
  Flags flags;
  bool print_schema = false;
  app.add_option("--config", flags.config, "Experiment JSON file");
  app.add_option("--out", flags.out, "Output directory (overrides output.dir)");
  app.add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", flags.seed, "Random seed (overrides output.seed)");
  app.add_flag("--svg", flags.svg, "Also write SVG plots");
  app.add_flag("--print-schema", print_schema, "Print the config JSON schema and exit");

  auto* rdf = app.add_subcommand("rdf", "Rate at one (n, phase, D)");
  auto* sweep = app.add_subcommand("sweep", "Rate versus n, phase or D");
  auto* gate = app.add_subcommand("gate", "Margin condition report");
  auto* verify = app.add_subcommand("verify", "Verification check suite");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (print_schema) {
    std::cout << config_schema().dump(2) << "\n";
    return kOk;
  }
  try {
    if (*rdf) return cmd_rdf(flags);
    if (*sweep) return cmd_sweep(flags);
    if (*gate) return cmd_gate(flags);
    if (*verify) return cmd_verify(flags);
    std::cerr << app.help();
    return kConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
}
