#pragma once

/// @file tableau.hpp
/// @brief Stiffly accurate IMEX Runge-Kutta tableaux, their difference
/// coefficient matrices and the spectral quantities that certify long-time
/// stability.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ierk/errors.hpp"

namespace ierk {

/// s-stage pair (A implicit, Ahat explicit) on shared abscissas c.
///
/// The weights are the last rows of A and Ahat; they are never stored
/// separately.
struct Tableau {
  std::string name;
  std::optional<double> parameter;
  int order = 0;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::MatrixXd Ahat;

  int stages() const { return static_cast<int>(A.rows()); }
  Eigen::VectorXd b() const { return A.row(stages() - 1).transpose(); }
  Eigen::VectorXd bhat() const { return Ahat.row(stages() - 1).transpose(); }

  /// e.g. "IERK(3,5;1.2)".
  std::string label() const {
    if (!parameter) return name;
    std::ostringstream os;
    os << name.substr(0, name.size() - 1) << ";" << *parameter << ")";
    return os.str();
  }
};

/// E^{-1} A_I and E^{-1} A_E, E the lower-triangular all-ones matrix.
struct DifferenceMatrices {
  Eigen::MatrixXd implicit_part;
  Eigen::MatrixXd explicit_part;
};

struct StabilityReport {
  double lambda_I = 0.0;
  double sigma_I = 0.0;
  double sigma_E = 0.0;
  bool positive_definite = false;
};

inline constexpr double kPositiveDefiniteTol = 1e-12;
inline constexpr double kValidateTol = 1e-13;

namespace detail {

inline Tableau make_tableau(std::string name, std::optional<double> param, int order,
                            const Eigen::MatrixXd& A, const Eigen::MatrixXd& Ahat) {
  Tableau t;
  t.name = std::move(name);
  t.parameter = param;
  t.order = order;
  t.A = A;
  t.Ahat = Ahat;
  t.c = A.rowwise().sum();
  return t;
}

/// Rational entry from integer literals that may exceed 64 bits; divided
/// once in extended precision.
inline double ratio(long double num, long double den) {
  return static_cast<double>(num / den);
}

}  // namespace detail

/// First-order IMEX Euler pair: backward Euler on diffusion, forward Euler on
/// convection.
inline Tableau imex_euler() {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 2);
  A(1, 1) = 1.0;
  H(1, 0) = 1.0;
  return detail::make_tableau("IMEX-Euler", std::nullopt, 1, A, H);
}

/// Second-order, three-stage family IERK(2,3;c2).
inline Tableau ierk23(double c2) {
  if (c2 == 0.0 || c2 == 1.0) {
    throw DegenerateParameter("IERK(2,3;c2) is undefined for c2 in {0, 1}");
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 3);
  A(1, 1) = c2;
  A(2, 1) = 1.0 / (2.0 - 2.0 * c2);
  A(2, 2) = (1.0 - 2.0 * c2) / (2.0 - 2.0 * c2);
  H(1, 0) = c2;
  H(2, 0) = 1.0 - 1.0 / (2.0 * c2);
  H(2, 1) = 1.0 / (2.0 * c2);
  return detail::make_tableau("IERK(2,3)", c2, 2, A, H);
}

/// Third-order, five-stage family IERK(3,5;a55).
inline Tableau ierk35(double a55) {
  const double d1 = 2640.0 * a55 + 940.0;
  const double d2 = 132.0 * a55 + 47.0;
  if (std::abs(d1) < 1e-12 || std::abs(d2) < 1e-12) {
    throw DegenerateParameter("IERK(3,5;a55) is undefined for a55 = -47/132");
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(5, 5);
  A(1, 1) = 1.0;
  A(2, 1) = -3.0 / 10.0;
  A(2, 2) = 4.0 / 5.0;
  A(3, 1) = -367.0 / 250.0;
  A(3, 2) = 196.0 / 125.0;
  A(3, 3) = 4.0 / 5.0;
  A(4, 1) = -2.0 * (36.0 * a55 - 5.0) / 147.0;
  A(4, 2) = (75.0 * a55 + 598.0) / 588.0;
  A(4, 3) = -25.0 * (15.0 * a55 + 2.0) / 588.0;
  A(4, 4) = a55;

  H(1, 0) = 1.0;
  H(2, 0) = (939.0 * a55 + 282.0) / d1;
  H(2, 1) = (381.0 * a55 + 188.0) / d1;
  const double h30 = 9.0 * (639.0 * a55 + 1222.0) / (250.0 * d2);
  H(3, 0) = h30;
  H(3, 1) = 9.0 / 10.0;
  H(3, 2) = -h30;
  H(4, 0) = 47.0 / 270.0;
  H(4, 1) = 1.0 / 10.0;
  H(4, 2) = 19.0 / 30.0;
  H(4, 3) = 5.0 / 54.0;
  return detail::make_tableau("IERK(3,5)", a55, 3, A, H);
}

/// Fourth-order, seven-stage family IERK(4,7;ahat43).
inline Tableau ierk47(double ahat43) {
  using detail::ratio;
  const double x = ahat43;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(7, 7);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(7, 7);

  A(1, 1) = 3.0 / 4.0;
  A(2, 1) = -1.0 / 2.0;
  A(2, 2) = 3.0 / 2.0;
  A(3, 1) = -169.0 / 800.0;
  A(3, 2) = 129.0 / 800.0;
  A(3, 3) = 1.0 / 2.0;
  A(4, 1) = -ratio(11099846794473413537.0L, 13545655559296875000.0L);
  A(4, 2) = ratio(5938991227245191.0L, 56762747105625000.0L);
  A(4, 3) = ratio(4021588899578801.0L, 4257206032921875.0L);
  A(4, 4) = ratio(144648284471.0L, 278085937500.0L);
  A(5, 1) = -ratio(15012700453574148059759.0L, 355573458431542968750000.0L);
  A(5, 2) = ratio(37751222339857820917.0L, 135456555592968750000.0L);
  A(5, 3) = ratio(2547104330002710487.0L, 10159241669472656250.0L);
  A(5, 4) = -ratio(3921377950657453.0L, 7299755859375000.0L);
  A(5, 5) = 4.0 / 5.0;
  A(6, 1) = 94181.0 / 262500.0;
  A(6, 2) = -53.0 / 100.0;
  A(6, 3) = 3.0 / 5.0;
  A(6, 4) = -125681.0 / 262500.0;
  A(6, 5) = 4.0 / 5.0;
  A(6, 6) = 1.0 / 4.0;

  H(1, 0) = 3.0 / 4.0;
  H(2, 0) = 7.0 / 10.0;
  H(2, 1) = 3.0 / 10.0;
  H(3, 0) = x / 3.0 + 1557.0 / 4000.0;
  H(3, 1) = 243.0 / 4000.0 - 4.0 * x / 3.0;
  H(3, 2) = x;
  H(4, 0) = (70997500000.0 * x + 1042842334347.0) / 2411160939000.0;
  H(4, 1) = (-283990000000.0 * x - 5126845621293.0) / 2411160939000.0;
  H(4, 2) = 70997500.0 * x / 803720313.0 + 570851989.0 / 676532250.0;
  H(4, 3) = 8.0 / 5.0;
  H(5, 0) = (1913150328903.0 - 672359500000.0 * x) / 2893393126800.0;
  H(5, 1) = (2689438000000.0 * x + 3223449241353.0) / 2893393126800.0;
  H(5, 2) = (-168089875000.0 * x - 138406721733.0) / 241116093900.0;
  H(5, 3) = -201267778.0 / 267906771.0;
  H(5, 4) = 3.0 / 10.0;
  H(6, 0) = 25.0 / 162.0;
  H(6, 1) = -811.0 / 540.0;
  H(6, 2) = 3.0 / 22.0;
  H(6, 3) = 500.0 / 891.0;
  H(6, 4) = 3.0 / 4.0;
  H(6, 5) = 9.0 / 10.0;
  return detail::make_tableau("IERK(4,7)", ahat43, 4, A, H);
}

/// Looks a tableau up by CLI name: imex_euler, ierk23, ierk35, ierk47.
inline Tableau make_tableau(const std::string& name, std::optional<double> param = {}) {
  const auto need = [&](double fallback) { return param.value_or(fallback); };
  if (name == "imex_euler" || name == "imex-euler" || name == "euler") return imex_euler();
  if (name == "ierk23") return ierk23(need(0.35));
  if (name == "ierk35") return ierk35(need(1.2));
  if (name == "ierk47") return ierk47(need(-0.8));
  throw UnknownTableau("unknown tableau '" + name + "'");
}

/// Implicit block A_I (rows/cols 2..s) and explicit block A_E (rows 2..s,
/// cols 1..s-1), both s_I x s_I.
inline Eigen::MatrixXd implicit_block(const Tableau& t) {
  const int si = t.stages() - 1;
  return t.A.bottomRightCorner(si, si);
}
inline Eigen::MatrixXd explicit_block(const Tableau& t) {
  const int si = t.stages() - 1;
  return t.Ahat.bottomLeftCorner(si, si);
}

/// Row i of the result is row i of the source minus row i-1.
inline Eigen::MatrixXd backward_difference_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd d = m;
  for (Eigen::Index i = m.rows() - 1; i > 0; --i) d.row(i) -= m.row(i - 1);
  return d;
}

inline DifferenceMatrices difference_matrices(const Tableau& t) {
  return {backward_difference_rows(implicit_block(t)),
          backward_difference_rows(explicit_block(t))};
}

inline StabilityReport stability_report(const Tableau& t) {
  const DifferenceMatrices d = difference_matrices(t);
  const Eigen::MatrixXd sym = 0.5 * (d.implicit_part + d.implicit_part.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  StabilityReport r;
  r.lambda_I = eig.eigenvalues().minCoeff();
  r.sigma_I = Eigen::JacobiSVD<Eigen::MatrixXd>(d.implicit_part).singularValues()(0);
  r.sigma_E = Eigen::JacobiSVD<Eigen::MatrixXd>(d.explicit_part).singularValues()(0);
  r.positive_definite = r.lambda_I > kPositiveDefiniteTol;
  return r;
}

/// Structural invariants; an empty result means the tableau is admissible.
inline std::vector<std::string> validate(const Tableau& t, double tol = kValidateTol) {
  std::vector<std::string> out;
  const int s = t.stages();
  const auto fmt = [](const char* what, int i, int j) {
    std::ostringstream os;
    os << what << " at (" << i + 1 << "," << j + 1 << ")";
    return os.str();
  };
  if (s < 2 || t.A.cols() != s || t.Ahat.rows() != s || t.Ahat.cols() != s || t.c.size() != s) {
    out.emplace_back("inconsistent tableau dimensions");
    return out;
  }
  if (!t.A.allFinite() || !t.Ahat.allFinite() || !t.c.allFinite()) {
    out.emplace_back("non-finite coefficient");
  }
  if (std::abs(t.c(0)) > tol) out.emplace_back("c_1 must be 0");
  if (std::abs(t.c(s - 1) - 1.0) > tol) out.emplace_back("c_s must be 1");
  for (int i = 0; i < s; ++i) {
    if (std::abs(t.A(i, 0)) > tol) out.push_back(fmt("implicit first column nonzero", i, 0));
    for (int j = i + 1; j < s; ++j) {
      if (std::abs(t.A(i, j)) > tol) out.push_back(fmt("implicit part not lower triangular", i, j));
    }
    for (int j = i; j < s; ++j) {
      if (std::abs(t.Ahat(i, j)) > tol) {
        out.push_back(fmt("explicit part not strictly lower triangular", i, j));
      }
    }
    const double rs = t.A.row(i).sum();
    const double rsh = t.Ahat.row(i).sum();
    if (std::abs(rs - t.c(i)) > tol) {
      out.push_back("canopy violation: implicit row " + std::to_string(i + 1) + " sum != c");
    }
    if (std::abs(rsh - t.c(i)) > tol) {
      out.push_back("canopy violation: explicit row " + std::to_string(i + 1) + " sum != c");
    }
  }
  return out;
}

}  // namespace ierk
