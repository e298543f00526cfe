#pragma once

/// @file solver.hpp
/// @brief IMEX Runge-Kutta time stepping for the vorticity/stream-function
/// Navier-Stokes system on the periodic square.
///
/// Per stage i = 2..s, with t_{n,j} = t_{n-1} + c_j tau, every Fourier mode k
/// (Laplacian eigenvalue lambda_k) is advanced by
///
///   w^{i} = [ w^{1} - tau sum_{j<i} ahat_{ij} (C_j - G_j)
///             + tau sum_{1<j<i} a_{ij} nu lambda_k w^{j} ]
///           / (1 - nu tau a_{ii} lambda_k)
///
/// where C_j is the convection term and G_j the forcing at stage j. The
/// forcing can alternatively be attached to the implicit weights a_{ij}
/// (ForcingPlacement::implicit_weights), optionally scaled by nu.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ierk/adaptive.hpp"
#include "ierk/errors.hpp"
#include "ierk/manufactured.hpp"
#include "ierk/spectral.hpp"
#include "ierk/tableau.hpp"

namespace ierk {

using Forcing = std::function<Field(double)>;

/// explicit_weights: g^{n,j} with ahat_{ij}, j < i. Keeps the certified order,
/// since the order conditions constrain quadrature of c^k only through bhat.
/// implicit_weights: g^{n,j} with a_{ij}, j = 2..i. Samples the step end but
/// is limited to order two for the three- and four-stage-order pairs.
enum class ForcingPlacement { explicit_weights, implicit_weights };

inline const char* to_string(ForcingPlacement p) {
  return p == ForcingPlacement::explicit_weights ? "explicit" : "implicit";
}

inline ForcingPlacement parse_forcing_placement(const std::string& s) {
  if (s == "explicit") return ForcingPlacement::explicit_weights;
  if (s == "implicit") return ForcingPlacement::implicit_weights;
  throw InvalidArgument("forcing placement must be 'explicit' or 'implicit', got '" + s + "'");
}

struct Problem {
  GridSpec grid;
  double nu = 0.5;
  /// Empty means g = 0.
  Forcing forcing;
  ConvectionForm convection_form = ConvectionForm::skew;
  ForcingPlacement forcing_placement = ForcingPlacement::explicit_weights;
  /// Multiply g by nu (only meaningful with implicit placement).
  bool forcing_scaled_by_nu = false;

  void validate() const {
    if (!(nu > 0.0)) throw InvalidArgument("viscosity must be positive");
  }
};

inline Problem problem_for(const ManufacturedCase& c) {
  Problem p{.grid = c.grid, .nu = c.nu, .forcing = c.forcing};
  return p;
}

struct SolverState {
  Field omega;
  Field psi;
  VectorField vel;
  double t = 0.0;
  double tau_prev = 0.0;
  double dtau_norm = std::numeric_limits<double>::infinity();
  long step_index = 0;

  /// Consistent (omega, psi, u) triple from mean-free initial vorticity.
  static SolverState initial(Field omega0, double t0 = 0.0) {
    omega0.synchronize();
    omega0.project_mean_free();
    Field psi = solve_poisson(omega0);
    VectorField vel = velocity(psi);
    return SolverState{std::move(omega0), std::move(psi), std::move(vel), t0};
  }
};

/// Called after every stage i = 2..s (1-based) with the new stage values.
using StageObserver =
    std::function<void(int stage, const Field& omega, const Field& psi, const VectorField& vel)>;

namespace detail {

inline Field forcing_at(const Problem& prob, double t) {
  Field g = prob.forcing ? prob.forcing(t) : Field(prob.grid);
  g.require_same_grid(Field(prob.grid));
  g.synchronize();
  g.project_mean_free();
  if (prob.forcing_scaled_by_nu) g *= prob.nu;
  return g;
}

inline std::vector<double> laplacian_eigenvalues(const GridSpec& g) {
  const int n = g.points();
  const int cols = g.spectral_cols();
  std::vector<double> lam(g.spectral_size());
  for (int li = 0; li < n; ++li) {
    for (int m = 0; m < cols; ++m) {
      lam[static_cast<std::size_t>(li) * cols + m] = laplacian_symbol(g, g.signed_row(li), m);
    }
  }
  return lam;
}

}  // namespace detail

/// Advances `state` by one step of size tau.
inline SolverState ierk_step(const SolverState& state, const Problem& prob, const Tableau& tab,
                             double tau, const StageObserver& on_stage = {}) {
  if (!(tau > 0.0)) throw InvalidArgument("step size must be positive");
  state.omega.require_same_grid(Field(prob.grid));
  const int s = tab.stages();
  const GridSpec& grid = prob.grid;
  const std::size_t nk = grid.spectral_size();
  const std::vector<double> lam = detail::laplacian_eigenvalues(grid);
  const bool has_forcing = static_cast<bool>(prob.forcing);
  const bool explicit_forcing = prob.forcing_placement == ForcingPlacement::explicit_weights;

  std::vector<Field> omega;       // stage vorticities, spectral
  std::vector<Field> conv;        // stage convection terms, spectral
  std::vector<Field> force;       // stage forcing, spectral
  omega.reserve(s);
  conv.reserve(s);
  force.reserve(s);

  omega.push_back(state.omega);
  omega.back().synchronize();
  VectorField vel = state.vel;
  Field psi = state.psi;

  const auto stage_time = [&](int j) { return state.t + tab.c(j) * tau; };
  const auto need_conv = [&](int j) {
    for (int i = j + 1; i < s; ++i) {
      if (tab.Ahat(i, j) != 0.0) return true;
    }
    return false;
  };

  conv.push_back(need_conv(0) ? convection(vel, omega[0], prob.convection_form) : Field(grid));
  force.push_back(has_forcing ? detail::forcing_at(prob, stage_time(0)) : Field(grid));

  for (int i = 1; i < s; ++i) {
    const double diag = tab.A(i, i);
    if (has_forcing && !explicit_forcing) {
      force.push_back(detail::forcing_at(prob, stage_time(i)));
    }

    std::vector<cplx> rhs(omega[0].spectral().begin(), omega[0].spectral().end());
    for (int j = 0; j < i; ++j) {
      const double ah = tab.Ahat(i, j);
      if (ah != 0.0) {
        const auto cj = conv[j].spectral();
        for (std::size_t k = 0; k < nk; ++k) rhs[k] -= tau * ah * cj[k];
        if (has_forcing && explicit_forcing) {
          const auto gj = force[j].spectral();
          for (std::size_t k = 0; k < nk; ++k) rhs[k] += tau * ah * gj[k];
        }
      }
      const double a = tab.A(i, j);
      if (j >= 1 && a != 0.0) {
        const auto wj = omega[j].spectral();
        for (std::size_t k = 0; k < nk; ++k) rhs[k] += tau * a * prob.nu * lam[k] * wj[k];
      }
    }
    if (has_forcing && !explicit_forcing) {
      for (int j = 1; j <= i; ++j) {
        const double a = tab.A(i, j);
        if (a == 0.0) continue;
        const auto gj = force[j].spectral();
        for (std::size_t k = 0; k < nk; ++k) rhs[k] += tau * a * gj[k];
      }
    }
    for (std::size_t k = 0; k < nk; ++k) {
      const double den = 1.0 - prob.nu * tau * diag * lam[k];
      if (std::abs(den) < 1e-14) {
        throw SingularStage("implicit stage " + std::to_string(i + 1) +
                            " is singular for tau = " + std::to_string(tau));
      }
      rhs[k] /= den;
    }
    rhs[0] = cplx{};

    Field w = Field::from_spectral(grid, std::move(rhs));
    w.project_mean_free();
    if (!w.all_finite()) {
      throw NonFiniteState("non-finite vorticity at stage " + std::to_string(i + 1),
                           state.step_index + 1);
    }
    psi = solve_poisson(w);
    vel = velocity(psi);
    if (on_stage) on_stage(i + 1, w, psi, vel);

    omega.push_back(std::move(w));
    if (i + 1 < s) {
      conv.push_back(need_conv(i) ? convection(vel, omega.back(), prob.convection_form)
                                  : Field(grid));
      if (has_forcing && explicit_forcing) force.push_back(detail::forcing_at(prob, stage_time(i)));
      else if (!has_forcing) force.push_back(Field(grid));
    }
  }

  SolverState next{std::move(omega.back()), std::move(psi), std::move(vel)};
  next.omega.synchronize();
  next.omega.project_mean_free();
  if (!next.omega.all_finite()) {
    throw NonFiniteState("non-finite vorticity after step", state.step_index + 1);
  }
  next.t = state.t + tau;
  next.tau_prev = tau;
  next.dtau_norm = l2_norm(next.omega - state.omega) / tau;
  next.step_index = state.step_index + 1;
  return next;
}

/// One accepted or rejected step as seen by observers and CSV output.
struct StepRecord {
  long n = 0;
  double t = 0.0;
  double tau = 0.0;
  double enstrophy = 0.0;
  double dtau_norm = 0.0;
  double err_mix_inf = std::numeric_limits<double>::quiet_NaN();
  bool rejected = false;
};

using StepObserver = std::function<void(const StepRecord&, const SolverState&)>;

struct RunOptions {
  /// When set, err_mix_inf is filled for every record.
  std::function<Field(double)> exact_omega;
  StepObserver observer;
  StageObserver stage_observer;
  bool keep_records = true;
};

struct Trajectory {
  std::vector<StepRecord> records;
  SolverState final_state;
  long accepted = 0;
  long rejected = 0;
  double max_err_mix = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline StepRecord make_record(const SolverState& st, double tau, const RunOptions& opts,
                              bool rejected) {
  StepRecord r{.n = st.step_index, .t = st.t, .tau = tau, .enstrophy = enstrophy(st.omega),
               .dtau_norm = st.dtau_norm, .rejected = rejected};
  if (opts.exact_omega) r.err_mix_inf = mixed_error(st.omega, opts.exact_omega(st.t)).max_abs;
  return r;
}

inline void publish(Trajectory& traj, const StepRecord& r, const SolverState& st,
                    const RunOptions& opts) {
  if (opts.keep_records) traj.records.push_back(r);
  if (opts.observer) opts.observer(r, st);
  if (!r.rejected && std::isfinite(r.err_mix_inf)) {
    traj.max_err_mix =
        std::isfinite(traj.max_err_mix) ? std::max(traj.max_err_mix, r.err_mix_inf) : r.err_mix_inf;
  }
}

}  // namespace detail

/// Constant steps of size tau; the last step is shortened to land on T.
inline Trajectory run_fixed(const Problem& prob, const Tableau& tab, const Field& omega0,
                            double tau, double T, const RunOptions& opts = {}) {
  prob.validate();
  if (!(tau > 0.0) || !(T > 0.0)) throw InvalidArgument("need tau > 0 and T > 0");
  const long steps = static_cast<long>(std::ceil(T / tau - 1e-9));
  Trajectory traj{.final_state = SolverState::initial(omega0)};
  SolverState& st = traj.final_state;
  for (long k = 0; k < steps; ++k) {
    const bool last = k + 1 == steps;
    const double h = last ? T - st.t : tau;
    try {
      st = ierk_step(st, prob, tab, h, opts.stage_observer);
    } catch (const NonFiniteState& e) {
      throw NonFiniteState(e.what(), k + 1);
    }
    if (last) st.t = T;
    ++traj.accepted;
    detail::publish(traj, detail::make_record(st, h, opts, false), st, opts);
  }
  return traj;
}

inline constexpr int kMaxConsecutiveRejections = 25;

/// Adaptive loop: first step tau_min, then the controller's proposals,
/// clamped so the final step lands exactly on T.
inline Trajectory run_adaptive(const Problem& prob, const Tableau& tab, const Field& omega0,
                               StepController& controller, double T,
                               const RunOptions& opts = {}) {
  prob.validate();
  if (!(T > 0.0)) throw InvalidArgument("need T > 0");
  const ControllerConfig& cfg = controller.config();
  Trajectory traj{.final_state = SolverState::initial(omega0)};
  SolverState& st = traj.final_state;
  double tau = clamp_final(controller.initial_step(), st.t, T);
  int consecutive_rejections = 0;

  while (st.t < T) {
    const double remaining = T - st.t;
    const bool last = tau >= remaining * (1.0 - 1e-12);
    if (last) tau = remaining;
    SolverState next = ierk_step(st, prob, tab, tau, opts.stage_observer);
    if (last) next.t = T;
    const Decision d = controller.decide(tau, next.dtau_norm);
    if (!d.accept) {
      ++traj.rejected;
      detail::publish(traj, detail::make_record(next, tau, opts, true), next, opts);
      if (++consecutive_rejections > kMaxConsecutiveRejections || d.tau < 0.5 * cfg.tau_min) {
        throw StallError("adaptive loop stalled at t = " + std::to_string(st.t));
      }
      tau = d.tau;
      continue;
    }
    consecutive_rejections = 0;
    const double taken = tau;
    st = std::move(next);
    ++traj.accepted;
    detail::publish(traj, detail::make_record(st, taken, opts, false), st, opts);
    if (st.t >= T) break;
    tau = clamp_final(d.tau, st.t, T);
  }
  return traj;
}

}  // namespace ierk
