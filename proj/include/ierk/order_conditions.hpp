#pragma once

/// @file order_conditions.hpp
/// @brief Reduced order conditions (up to order four) for IMEX pairs whose
/// implicit part acts on a linear operator.
///
/// Weights come from the last tableau rows. Abscissas are taken as row sums
/// of the matrix they are attached to: c_I = A 1 next to A or b, and
/// c_E = Ahat 1 next to Ahat or bhat. Under the canopy condition both equal
/// c; keeping them apart makes every entry of the tableau observable.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ierk/errors.hpp"
#include "ierk/tableau.hpp"

namespace ierk {

enum class ConditionKind { implicit, explicit_, coupling };

inline const char* to_string(ConditionKind k) {
  switch (k) {
    case ConditionKind::implicit: return "implicit";
    case ConditionKind::explicit_: return "explicit";
    case ConditionKind::coupling: return "coupling";
  }
  return "?";
}

struct ConditionResult {
  std::string label;
  double lhs = 0.0;
  double target = 0.0;
  double residual = 0.0;
  int order = 0;
  ConditionKind kind = ConditionKind::implicit;
};

inline constexpr double kCertifyTol = 1e-10;

/// Every condition at levels 1..p: 2, 2, 5 and 11 conditions per level.
inline std::vector<ConditionResult> check_order(const Tableau& t, int p) {
  if (p < 1 || p > 4) throw InvalidArgument("order must be in 1..4");
  using Eigen::VectorXd;
  const Eigen::MatrixXd& A = t.A;
  const Eigen::MatrixXd& H = t.Ahat;
  const VectorXd b = t.b();
  const VectorXd bh = t.bhat();
  const VectorXd one = VectorXd::Ones(t.stages());
  const VectorXd cI = A * one;
  const VectorXd cE = H * one;
  const auto sq = [](const VectorXd& v) -> VectorXd { return v.cwiseProduct(v); };
  const auto cube = [](const VectorXd& v) -> VectorXd { return v.cwiseProduct(v).cwiseProduct(v); };

  std::vector<ConditionResult> out;
  const auto add = [&](int order, ConditionKind kind, std::string label, double lhs,
                       double target) {
    out.push_back({std::move(label), lhs, target, std::abs(lhs - target), order, kind});
  };
  using K = ConditionKind;

  add(1, K::implicit, "b^T 1 = 1", b.sum(), 1.0);
  add(1, K::explicit_, "bh^T 1 = 1", bh.sum(), 1.0);
  if (p >= 2) {
    add(2, K::implicit, "b^T c = 1/2", b.dot(cI), 0.5);
    add(2, K::explicit_, "bh^T c = 1/2", bh.dot(cE), 0.5);
  }
  if (p >= 3) {
    add(3, K::explicit_, "bh^T c^2 = 1/3", bh.dot(sq(cE)), 1.0 / 3.0);
    add(3, K::implicit, "b^T A c = 1/6", b.dot(A * cI), 1.0 / 6.0);
    add(3, K::explicit_, "bh^T Ah c = 1/6", bh.dot(H * cE), 1.0 / 6.0);
    add(3, K::coupling, "b^T Ah c = 1/6", b.dot(H * cE), 1.0 / 6.0);
    add(3, K::coupling, "bh^T A c = 1/6", bh.dot(A * cI), 1.0 / 6.0);
  }
  if (p >= 4) {
    const VectorXd Ac = A * cI;
    const VectorXd Hc = H * cE;
    add(4, K::explicit_, "bh^T c^3 = 1/4", bh.dot(cube(cE)), 0.25);
    add(4, K::explicit_, "bh^T [c o (Ah c)] = 1/8", bh.dot(cE.cwiseProduct(Hc)), 0.125);
    add(4, K::coupling, "bh^T [c o (A c)] = 1/8", bh.dot(cE.cwiseProduct(Ac)), 0.125);
    add(4, K::explicit_, "bh^T Ah c^2 = 1/12", bh.dot(H * sq(cE)), 1.0 / 12.0);
    add(4, K::coupling, "b^T Ah c^2 = 1/12", b.dot(H * sq(cE)), 1.0 / 12.0);
    add(4, K::coupling, "bh^T A Ah c + b^T Ah^2 c = 1/12", bh.dot(A * Hc) + b.dot(H * Hc),
        1.0 / 12.0);
    add(4, K::implicit, "b^T A^2 c = 1/24", b.dot(A * Ac), 1.0 / 24.0);
    add(4, K::coupling, "b^T Ah A c + bh^T A^2 c = 1/12", b.dot(H * Ac) + bh.dot(A * Ac),
        1.0 / 12.0);
    add(4, K::coupling, "b^T A Ah c = 1/24", b.dot(A * Hc), 1.0 / 24.0);
    add(4, K::coupling, "bh^T Ah A c = 1/24", bh.dot(H * Ac), 1.0 / 24.0);
    add(4, K::explicit_, "bh^T Ah^2 c = 1/24", bh.dot(H * Hc), 1.0 / 24.0);
  }
  return out;
}

inline double max_residual(const std::vector<ConditionResult>& rs) {
  double m = 0.0;
  for (const auto& r : rs) m = std::max(m, r.residual);
  return m;
}

/// Highest p in 0..4 whose conditions all hold to `tol`.
inline int certify(const Tableau& t, double tol = kCertifyTol) {
  int best = 0;
  for (int p = 1; p <= 4; ++p) {
    const auto rs = check_order(t, p);
    const bool ok = std::all_of(rs.begin(), rs.end(), [&](const ConditionResult& r) {
      return std::isfinite(r.residual) && r.residual <= tol;
    });
    if (!ok) break;
    best = p;
  }
  return best;
}

}  // namespace ierk
