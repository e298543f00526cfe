// Command-line front end: tableau reports, convergence studies, adaptive
// runs and reference curves.
//
// Exit codes: 0 success, 2 validation failure, 3 numerical failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ierk/adaptive.hpp"
#include "ierk/errors.hpp"
#include "ierk/manufactured.hpp"
#include "ierk/report.hpp"
#include "ierk/solver.hpp"
#include "ierk/tableau.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

/// Raised for user-facing validation problems inside the CLI itself.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TableauRef {
  std::string name;
  std::optional<double> param;
};

/// "name" or "name:param".
TableauRef parse_tableau_ref(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {s, std::nullopt};
  try {
    return {s.substr(0, colon), std::stod(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ValidationFailure("bad tableau parameter in '" + s + "'");
  }
}

/// Everything a run needs. File values are loaded first, flags override.
struct RunConfig {
  std::string case_name = "example1";
  std::map<std::string, double> overrides;
  std::vector<std::string> tableaux{"ierk23:0.35"};
  int M = 128;
  std::optional<double> T;
  std::vector<double> taus;
  ierk::ControllerConfig controller;
  std::string forcing = "explicit";
  bool allow_unstable = false;
  int cadence = 1;
  std::string csv;
  std::string summary;
  std::string json_out;
  int samples = 2001;
};

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ValidationFailure("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationFailure("config file '" + path + "': " + e.what());
  }
  try {
    if (j.contains("case")) cfg.case_name = j["case"].get<std::string>();
    if (j.contains("overrides")) {
      for (const auto& [k, v] : j["overrides"].items()) cfg.overrides[k] = v.get<double>();
    }
    if (j.contains("tableau")) {
      const auto& t = j["tableau"];
      cfg.tableaux = t.is_array() ? t.get<std::vector<std::string>>()
                                  : std::vector<std::string>{t.get<std::string>()};
    }
    if (j.contains("M")) cfg.M = j["M"].get<int>();
    if (j.contains("T")) cfg.T = j["T"].get<double>();
    if (j.contains("tau")) {
      const auto& t = j["tau"];
      cfg.taus = t.is_array() ? t.get<std::vector<double>>()
                              : std::vector<double>{t.get<double>()};
    }
    if (j.contains("forcing")) cfg.forcing = j["forcing"].get<std::string>();
    if (j.contains("allow_unstable")) cfg.allow_unstable = j["allow_unstable"].get<bool>();
    if (j.contains("cadence")) cfg.cadence = j["cadence"].get<int>();
    if (j.contains("samples")) cfg.samples = j["samples"].get<int>();
    if (j.contains("controller")) {
      const auto& c = j["controller"];
      auto& cc = cfg.controller;
      cc.tau_min = c.value("tau_min", cc.tau_min);
      cc.tau_max = c.value("tau_max", cc.tau_max);
      cc.beta = c.value("beta", cc.beta);
      cc.r_star = c.value("r_star", cc.r_star);
      cc.d_max = c.value("d_max", cc.d_max);
      cc.gamma_tol = c.value("gamma_tol", cc.gamma_tol);
      cc.beta_thr = c.value("beta_thr", cc.beta_thr);
      if (c.contains("strategy")) cc.strategy = ierk::parse_strategy(c["strategy"].get<std::string>());
    }
    if (j.contains("outputs")) {
      const auto& o = j["outputs"];
      cfg.csv = o.value("csv", cfg.csv);
      cfg.summary = o.value("summary", cfg.summary);
      cfg.json_out = o.value("json", cfg.json_out);
    }
  } catch (const json::exception& e) {
    throw ValidationFailure("config file '" + path + "': " + e.what());
  }
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationFailure("override '" + kv + "' is not key=value");
    try {
      out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationFailure("override '" + kv + "' has a non-numeric value");
    }
  }
  return out;
}

/// Builds a tableau and enforces the stability range unless allowed.
ierk::Tableau checked_tableau(const TableauRef& ref, bool allow_unstable) {
  ierk::Tableau t = ierk::make_tableau(ref.name, ref.param);
  if (!allow_unstable && !ierk::stability_report(t).positive_definite) {
    throw ValidationFailure(t.label() +
                            ": parameter outside positive-definite range (use --allow-unstable)");
  }
  return t;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ValidationFailure("cannot write '" + path + "'");
  out << content;
}

/// Emits to the file when a path is given, otherwise to stdout.
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file(path, content);
  }
}

ierk::ManufacturedCase build_case(const RunConfig& cfg) {
  auto overrides = cfg.overrides;
  if (cfg.T) overrides["T"] = *cfg.T;
  return ierk::make_case(cfg.case_name, ierk::GridSpec(cfg.M), overrides);
}

int cmd_tableau(const RunConfig& cfg, const TableauRef& ref) {
  const ierk::Tableau t = ierk::make_tableau(ref.name, ref.param);
  const ierk::TableauReport report = ierk::analyze(t);
  ierk::write_text(std::cout, report);
  if (!cfg.json_out.empty()) write_file(cfg.json_out, ierk::to_json(report).dump(2) + "\n");
  if (!report.stability.positive_definite) {
    std::cerr << t.label() << ": outside positive-definite range\n";
  }
  if (report.certified_order != t.order) {
    std::cerr << t.label() << ": certified order " << report.certified_order
              << " differs from claimed order " << t.order << "\n";
  }
  if (!report.violations.empty()) std::cerr << t.label() << ": structural violations\n";
  if (report.ok() || (cfg.allow_unstable && report.certified_order == t.order &&
                      report.violations.empty())) {
    return kExitOk;
  }
  return kExitValidation;
}

int cmd_converge(const RunConfig& cfg) {
  if (cfg.taus.empty()) throw ValidationFailure("converge needs at least one --tau");
  const ierk::ManufacturedCase c = build_case(cfg);
  if (!c.has_exact()) throw ValidationFailure("case '" + c.name + "' has no exact solution");
  const double T = c.horizon;
  ierk::Problem prob = ierk::problem_for(c);
  prob.forcing_placement = ierk::parse_forcing_placement(cfg.forcing);

  const ierk::Field exact_omega = c.exact_omega(T);
  const ierk::Field exact_psi = c.exact_psi(T);
  const ierk::VectorField exact_vel = c.exact_velocity(T);

  std::vector<ierk::ConvergenceRow> rows;
  for (const auto& name : cfg.tableaux) {
    const ierk::Tableau t = checked_tableau(parse_tableau_ref(name), cfg.allow_unstable);
    for (double tau : cfg.taus) {
      const auto traj = ierk::run_fixed(prob, t, c.initial_omega(), tau, T,
                                        ierk::RunOptions{.keep_records = false});
      const auto& st = traj.final_state;
      const double eu = ierk::l2_norm(st.vel.u - exact_vel.u);
      const double ev = ierk::l2_norm(st.vel.v - exact_vel.v);
      rows.push_back({t.label(), tau, ierk::l2_norm(st.omega - exact_omega),
                      std::sqrt(eu * eu + ev * ev), ierk::l2_norm(st.psi - exact_psi)});
    }
  }
  ierk::fill_observed_rates(rows);

  std::ostringstream csv;
  ierk::write_convergence_csv(csv, rows);
  if (!cfg.csv.empty()) write_file(cfg.csv, csv.str());

  std::ostream& table = cfg.csv.empty() ? std::cerr : std::cout;
  if (cfg.csv.empty()) std::cout << csv.str();
  table << std::left << std::setw(18) << "tableau" << std::right << std::setw(12) << "tau"
        << std::setw(14) << "err_omega" << std::setw(8) << "rate" << '\n';
  for (const auto& r : rows) {
    table << std::left << std::setw(18) << r.tableau << std::right << std::setw(12) << r.tau
          << std::setw(14) << std::scientific << std::setprecision(4) << r.err_omega
          << std::defaultfloat << std::setw(8) << std::fixed << std::setprecision(2);
    if (std::isfinite(r.observed_rate)) {
      table << r.observed_rate;
    } else {
      table << "-";
    }
    table << std::defaultfloat << std::setprecision(6) << '\n';
  }
  return kExitOk;
}

int cmd_adaptive(const RunConfig& cfg) {
  if (cfg.tableaux.size() != 1) throw ValidationFailure("adaptive takes exactly one tableau");
  if (cfg.cadence < 1) throw ValidationFailure("cadence must be >= 1");
  const ierk::ManufacturedCase c = build_case(cfg);
  const ierk::Tableau t = checked_tableau(parse_tableau_ref(cfg.tableaux[0]), cfg.allow_unstable);
  ierk::Problem prob = ierk::problem_for(c);
  prob.forcing_placement = ierk::parse_forcing_placement(cfg.forcing);
  ierk::StepController controller(cfg.controller);

  std::vector<ierk::StepRecord> written;
  std::optional<ierk::StepRecord> last_unwritten;
  long accepted_seen = 0;
  ierk::RunOptions opts;
  opts.exact_omega = c.exact_omega;
  opts.keep_records = false;
  opts.observer = [&](const ierk::StepRecord& r, const ierk::SolverState&) {
    if (r.rejected || (accepted_seen++ % cfg.cadence) == 0) {
      written.push_back(r);
      last_unwritten.reset();
    } else {
      last_unwritten = r;
    }
  };

  const auto start = std::chrono::steady_clock::now();
  const auto traj = ierk::run_adaptive(prob, t, c.initial_omega(), controller, c.horizon, opts);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // The final accepted step is always written.
  if (last_unwritten) written.push_back(*last_unwritten);

  std::ostringstream csv;
  ierk::write_trajectory_csv(csv, written);
  emit(cfg.csv, csv.str());

  json summary;
  summary["case"] = c.name;
  summary["tableau"] = t.label();
  summary["strategy"] = ierk::to_string(cfg.controller.strategy);
  summary["max_err_mix"] =
      std::isfinite(traj.max_err_mix) ? json(traj.max_err_mix) : json(nullptr);
  summary["steps"] = traj.accepted;
  summary["rejects"] = traj.rejected;
  summary["seed"] = c.seed;
  summary["wall_time_s"] = wall;
  summary["M"] = cfg.M;
  summary["T"] = c.horizon;
  summary["forcing"] = cfg.forcing;
  const std::string text = summary.dump(2) + "\n";
  if (cfg.summary.empty()) {
    std::cerr << text;
  } else {
    write_file(cfg.summary, text);
  }
  return kExitOk;
}

int cmd_reference(const RunConfig& cfg) {
  const ierk::ManufacturedCase c = build_case(cfg);
  std::ostringstream csv;
  ierk::write_reference_csv(csv, c, c.horizon, cfg.samples);
  emit(cfg.csv, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IMEX Runge-Kutta solver for 2D periodic Navier-Stokes"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);

  // Flag storage; applied on top of the file config only when given.
  std::string case_name, forcing, strategy, csv, summary, json_out;
  std::vector<std::string> tableaux, sets;
  std::vector<double> taus;
  int M = 0, cadence = 1, samples = 0, d_max = 0;
  double T = 0, tau_min = 0, tau_max = 0, beta = 0, r_star = 0, gamma_tol = 0, beta_thr = 0;
  double param = 0;
  unsigned long seed = 0;
  bool allow_unstable = false;
  std::string tableau_name;

  std::vector<CLI::Option*> given;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--case", case_name, "example1, example2, example3-freqA, example3-freqB, decay");
    sub->add_option("--set", sets, "case override key=value (nu, T, l_x, l_t, T1, seed, kmax)");
    sub->add_option("-M,--points", M, "grid points per direction")->check(CLI::PositiveNumber);
    sub->add_option("-T,--final-time", T, "final time");
    sub->add_option("--seed", seed, "seed for random initial data");
    sub->add_option("--forcing", forcing, "forcing placement: explicit or implicit")
        ->check(CLI::IsMember({"explicit", "implicit"}));
    sub->add_option("--csv", csv, "CSV output path ('-' for stdout)");
    sub->add_flag("--allow-unstable", allow_unstable, "accept tableaux outside the stable range");
  };

  auto* tab = app.add_subcommand("tableau", "print coefficients, order residuals, stability");
  tab->add_option("name", tableau_name, "imex_euler, ierk23, ierk35, ierk47")->required();
  tab->add_option("--param", param, "method parameter");
  tab->add_option("--json", json_out, "write the JSON report here");
  tab->add_flag("--allow-unstable", allow_unstable, "exit 0 even outside the stable range");

  auto* conv = app.add_subcommand("converge", "fixed-step convergence study against an exact solution");
  common(conv);
  conv->add_option("--tableau", tableaux, "name[:param], repeatable");
  conv->add_option("--tau", taus, "step sizes, repeatable")->check(CLI::PositiveNumber);

  auto* ada = app.add_subcommand("adaptive", "adaptive run with step-size control");
  common(ada);
  ada->add_option("--tableau", tableaux, "name[:param]");
  ada->add_option("--strategy", strategy, "ATS, ATS-LD or ATS-LDLB");
  ada->add_option("--tau-min", tau_min);
  ada->add_option("--tau-max", tau_max);
  ada->add_option("--beta", beta);
  ada->add_option("--r-star", r_star);
  ada->add_option("--d-max", d_max);
  ada->add_option("--gamma-tol", gamma_tol);
  ada->add_option("--beta-thr", beta_thr);
  ada->add_option("--summary", summary, "summary JSON path");
  ada->add_option("--every", cadence, "write every k-th accepted step")->check(CLI::PositiveNumber);

  auto* ref = app.add_subcommand("reference", "sample the exact amplitude and enstrophy");
  common(ref);
  ref->add_option("--samples", samples, "number of time samples")->check(CLI::Range(2, 10000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const auto given_in = [](CLI::App* sub, const std::string& name) {
    const auto* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };

  try {
    RunConfig cfg;
    if (!config_path.empty()) load_config_file(config_path, cfg);
    CLI::App* sub = app.get_subcommands().front();

    if (given_in(sub, "--case")) cfg.case_name = case_name;
    if (given_in(sub, "--set")) {
      for (const auto& [k, v] : parse_overrides(sets)) cfg.overrides[k] = v;
    }
    if (given_in(sub, "--seed")) cfg.overrides["seed"] = static_cast<double>(seed);
    if (given_in(sub, "-M")) cfg.M = M;
    if (given_in(sub, "-T")) cfg.T = T;
    if (given_in(sub, "--forcing")) cfg.forcing = forcing;
    if (given_in(sub, "--csv")) cfg.csv = csv;
    if (given_in(sub, "--json")) cfg.json_out = json_out;
    if (given_in(sub, "--summary")) cfg.summary = summary;
    if (given_in(sub, "--tableau")) cfg.tableaux = tableaux;
    if (given_in(sub, "--tau")) cfg.taus = taus;
    if (given_in(sub, "--every")) cfg.cadence = cadence;
    if (given_in(sub, "--samples")) cfg.samples = samples;
    if (allow_unstable) cfg.allow_unstable = true;
    auto& cc = cfg.controller;
    if (given_in(sub, "--strategy")) cc.strategy = ierk::parse_strategy(strategy);
    if (given_in(sub, "--tau-min")) cc.tau_min = tau_min;
    if (given_in(sub, "--tau-max")) cc.tau_max = tau_max;
    if (given_in(sub, "--beta")) cc.beta = beta;
    if (given_in(sub, "--r-star")) cc.r_star = r_star;
    if (given_in(sub, "--d-max")) cc.d_max = d_max;
    if (given_in(sub, "--gamma-tol")) cc.gamma_tol = gamma_tol;
    if (given_in(sub, "--beta-thr")) cc.beta_thr = beta_thr;
    (void)ierk::parse_forcing_placement(cfg.forcing);

    if (sub == tab) {
      TableauRef r{tableau_name, given_in(tab, "--param") ? std::optional<double>(param)
                                                          : std::nullopt};
      return cmd_tableau(cfg, r);
    }
    if (sub == conv) return cmd_converge(cfg);
    if (sub == ada) return cmd_adaptive(cfg);
    return cmd_reference(cfg);
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ierk::NonFiniteState& e) {
    std::cerr << "numerical failure: " << e.what() << " (step " << e.step_index() << ")\n";
    return kExitNumerical;
  } catch (const ierk::StallError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ierk::SingularStage& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ierk::Error& e) {
    // Unknown names, degenerate parameters, bad arguments.
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
