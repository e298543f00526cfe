#pragma once

/// @file report.hpp
/// @brief Text/JSON tableau reports and the CSV/JSON run artifacts read by
/// downstream plotting.

#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ierk/order_conditions.hpp"
#include "ierk/solver.hpp"
#include "ierk/tableau.hpp"

namespace ierk {

inline const char* const kTrajectoryHeader = "n,t,tau,enstrophy,dtau_norm,err_mix_inf,rejected";
inline const char* const kConvergenceHeader =
    "tableau,tau,err_L2_omega,err_L2_u,err_L2_psi,observed_rate";

/// 17 significant digits; NaN and infinities print as empty fields.
inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Quotes text containing a comma, quote or newline.
inline std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline void write_trajectory_csv(std::ostream& os, const std::vector<StepRecord>& records) {
  os << kTrajectoryHeader << '\n';
  for (const auto& r : records) {
    os << r.n << ',' << csv_number(r.t) << ',' << csv_number(r.tau) << ','
       << csv_number(r.enstrophy) << ',' << csv_number(r.dtau_norm) << ','
       << csv_number(r.err_mix_inf) << ',' << (r.rejected ? 1 : 0) << '\n';
  }
}

struct ConvergenceRow {
  std::string tableau;
  double tau = 0.0;
  double err_omega = 0.0;
  double err_u = 0.0;
  double err_psi = 0.0;
  /// log2 ratio against the previous (larger) tau of the same tableau.
  double observed_rate = std::numeric_limits<double>::quiet_NaN();
};

/// Fills observed_rate for consecutive rows that share a tableau.
inline void fill_observed_rates(std::vector<ConvergenceRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].observed_rate = std::numeric_limits<double>::quiet_NaN();
    if (k == 0 || rows[k - 1].tableau != rows[k].tableau) continue;
    const auto& prev = rows[k - 1];
    const auto& cur = rows[k];
    if (prev.err_omega > 0.0 && cur.err_omega > 0.0 && prev.tau != cur.tau) {
      rows[k].observed_rate =
          std::log(prev.err_omega / cur.err_omega) / std::log(prev.tau / cur.tau);
    }
  }
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << kConvergenceHeader << '\n';
  for (const auto& r : rows) {
    os << csv_text(r.tableau) << ',' << csv_number(r.tau) << ',' << csv_number(r.err_omega) << ','
       << csv_number(r.err_u) << ',' << csv_number(r.err_psi) << ','
       << csv_number(r.observed_rate) << '\n';
  }
}

/// Reference curve f(t) and ||w(t)||^2 sampled on a uniform time grid.
inline void write_reference_csv(std::ostream& os, const ManufacturedCase& c, double T,
                                int samples) {
  if (!c.amplitude || !c.reference_enstrophy) {
    throw InvalidArgument("case '" + c.name + "' has no reference amplitude");
  }
  if (samples < 2) throw InvalidArgument("need at least two samples");
  os << "t,f,enstrophy_ref\n";
  for (int k = 0; k < samples; ++k) {
    const double t = T * k / (samples - 1);
    os << csv_number(t) << ',' << csv_number(c.amplitude(t)) << ','
       << csv_number(c.reference_enstrophy(t)) << '\n';
  }
}

namespace detail {

inline nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace detail

struct TableauReport {
  Tableau tableau;
  StabilityReport stability;
  std::vector<ConditionResult> conditions;
  int certified_order = 0;
  std::vector<std::string> violations;

  bool ok() const {
    return violations.empty() && certified_order == tableau.order && stability.positive_definite;
  }
};

inline TableauReport analyze(const Tableau& t) {
  return TableauReport{t, stability_report(t), check_order(t, std::max(1, t.order)), certify(t),
                       validate(t)};
}

inline nlohmann::json to_json(const TableauReport& r) {
  nlohmann::json j;
  j["name"] = r.tableau.name;
  j["label"] = r.tableau.label();
  j["parameter"] = r.tableau.parameter ? nlohmann::json(*r.tableau.parameter) : nlohmann::json();
  j["claimed_order"] = r.tableau.order;
  j["certified_order"] = r.certified_order;
  j["c"] = detail::to_json(r.tableau.c);
  j["A"] = detail::to_json(r.tableau.A);
  j["Ahat"] = detail::to_json(r.tableau.Ahat);
  j["lambda_I"] = r.stability.lambda_I;
  j["sigma_I"] = r.stability.sigma_I;
  j["sigma_E"] = r.stability.sigma_E;
  j["positive_definite"] = r.stability.positive_definite;
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : r.conditions) {
    conds.push_back({{"label", c.label},
                     {"order", c.order},
                     {"kind", to_string(c.kind)},
                     {"lhs", c.lhs},
                     {"target", c.target},
                     {"residual", c.residual}});
  }
  j["residuals"] = std::move(conds);
  j["violations"] = r.violations;
  return j;
}

inline void write_text(std::ostream& os, const TableauReport& r) {
  const Tableau& t = r.tableau;
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << t.label() << "  (" << t.stages() << " stages, claimed order " << t.order << ")\n";
  os << std::setprecision(10);
  const auto print_matrix = [&](const char* title, const Eigen::MatrixXd& m) {
    os << title << ":\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      os << "  " << std::setw(14) << t.c(i) << " |";
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << std::setw(16) << m(i, j);
      os << '\n';
    }
  };
  print_matrix("A (implicit)", t.A);
  print_matrix("Ahat (explicit)", t.Ahat);
  os << std::setprecision(6) << std::scientific;
  os << "order conditions:\n";
  for (const auto& c : r.conditions) {
    os << "  [" << c.order << "] " << std::left << std::setw(36) << c.label << std::right
       << " residual " << c.residual << '\n';
  }
  os << "certified order: " << r.certified_order << '\n';
  os << "lambda_I = " << r.stability.lambda_I << "  sigma_I = " << r.stability.sigma_I
     << "  sigma_E = " << r.stability.sigma_E << '\n';
  os << "positive definite: " << (r.stability.positive_definite ? "yes" : "no") << '\n';
  for (const auto& v : r.violations) os << "structure violation: " << v << '\n';
  os.flags(old_flags);
  os.precision(old_prec);
}

}  // namespace ierk
