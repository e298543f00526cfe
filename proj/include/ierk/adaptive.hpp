#pragma once

/// @file adaptive.hpp
/// @brief Step-size controllers driven by the discrete time derivative
/// ||d_tau omega^n|| = ||omega^n - omega^{n-1}|| / tau_n.
///
///   ATS       always accept, tau_{n+1} from the adaptive formula.
///   ATS_LD    freeze the step over a delay window of d_max accepted steps;
///             release it only when the recorded norms have small variance.
///   ATS_LDLB  ATS_LD plus rejection/retry when the norm jumps by more than
///             beta_thr relative to the previous accepted step.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ierk/errors.hpp"

namespace ierk {

enum class Strategy { ATS, ATS_LD, ATS_LDLB };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::ATS: return "ATS";
    case Strategy::ATS_LD: return "ATS_LD";
    case Strategy::ATS_LDLB: return "ATS_LDLB";
  }
  return "?";
}

inline Strategy parse_strategy(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) {
    return ch == '-' ? '_' : static_cast<char>(std::toupper(ch));
  });
  if (s == "ATS") return Strategy::ATS;
  if (s == "ATS_LD") return Strategy::ATS_LD;
  if (s == "ATS_LDLB") return Strategy::ATS_LDLB;
  throw InvalidArgument("unknown strategy '" + s + "'");
}

struct ControllerConfig {
  double tau_min = 1e-4;
  double tau_max = 0.1;
  double beta = 1000.0;
  double r_star = 4.0;
  int d_max = 5;
  double gamma_tol = 1e-3;
  double beta_thr = 10.0;
  Strategy strategy = Strategy::ATS_LDLB;

  void validate() const {
    if (!(tau_min > 0.0) || !(tau_min <= tau_max)) {
      throw InvalidArgument("need 0 < tau_min <= tau_max");
    }
    if (!(beta > 0.0)) throw InvalidArgument("need beta > 0");
    if (!(r_star > 1.0)) throw InvalidArgument("need r_star > 1");
    if (d_max < 1) throw InvalidArgument("need d_max >= 1");
    if (!(gamma_tol > 0.0)) throw InvalidArgument("need gamma_tol > 0");
    if (strategy == Strategy::ATS_LDLB && !(beta_thr > 1.0)) {
      throw InvalidArgument("need beta_thr > 1");
    }
  }
};

/// Delay counter d is 1-based; history holds d_max slots.
struct ControllerState {
  int d = 1;
  std::vector<double> history;
  double prev_norm = std::numeric_limits<double>::infinity();

  explicit ControllerState(int d_max = 1) : history(static_cast<std::size_t>(d_max), 0.0) {}

  void reset_window() {
    d = 1;
    std::fill(history.begin(), history.end(), 0.0);
  }
};

struct Decision {
  bool accept = true;
  /// Next step size when accepted, retry size for the same step when not.
  double tau = 0.0;
};

/// min{ max{tau_min, tau_max / sqrt(1 + beta ||d_tau w||^2)}, r* tau_n }.
inline double ats_formula(const ControllerConfig& cfg, double tau_n, double dtau_norm) {
  const double proposal = cfg.tau_max / std::sqrt(1.0 + cfg.beta * dtau_norm * dtau_norm);
  return std::min(std::max(cfg.tau_min, proposal), cfg.r_star * tau_n);
}

/// Population variance.
inline double variance(const std::vector<double>& a) {
  if (a.empty()) return 0.0;
  double mean = 0.0;
  for (double v : a) mean += v;
  mean /= static_cast<double>(a.size());
  double var = 0.0;
  for (double v : a) var += (v - mean) * (v - mean);
  return var / static_cast<double>(a.size());
}

/// One pass through the controller after a completed step of size tau_n.
/// On acceptance prev_norm advances to dtau_norm; on rejection it is kept.
inline Decision decide(const ControllerConfig& cfg, ControllerState& st, double tau_n,
                       double dtau_norm) {
  if (cfg.strategy == Strategy::ATS) {
    st.prev_norm = dtau_norm;
    return {true, ats_formula(cfg, tau_n, dtau_norm)};
  }

  if (st.history.size() != static_cast<std::size_t>(cfg.d_max)) {
    st.history.assign(static_cast<std::size_t>(cfg.d_max), 0.0);
  }
  Decision out;
  if (dtau_norm > st.prev_norm) {
    st.reset_window();
    if (cfg.strategy == Strategy::ATS_LDLB && dtau_norm > cfg.beta_thr * st.prev_norm &&
        tau_n > cfg.tau_min) {
      return {false, std::max(cfg.tau_min, tau_n / cfg.beta_thr)};
    }
    out.tau = ats_formula(cfg, tau_n, dtau_norm);
  } else {
    st.history[static_cast<std::size_t>(st.d - 1)] = dtau_norm;
    if (st.d < cfg.d_max) {
      out.tau = tau_n;
      ++st.d;
    } else {
      const double gamma = variance(st.history);
      out.tau = gamma < cfg.gamma_tol ? ats_formula(cfg, tau_n, dtau_norm) : tau_n;
      st.reset_window();
    }
  }
  st.prev_norm = dtau_norm;
  return out;
}

/// Shrinks the proposed step so that t_n + tau does not pass T.
inline double clamp_final(double tau_next, double t_n, double T) {
  if (!(t_n < T)) throw InvalidArgument("clamp_final requires t_n < T");
  return std::min(tau_next, T - t_n);
}

/// Controller bundle owned by one run loop.
class StepController {
 public:
  explicit StepController(ControllerConfig cfg) : cfg_(checked(cfg)), state_(cfg.d_max) {}

  const ControllerConfig& config() const noexcept { return cfg_; }
  const ControllerState& state() const noexcept { return state_; }
  double initial_step() const noexcept { return cfg_.tau_min; }

  Decision decide(double tau_n, double dtau_norm) {
    return ierk::decide(cfg_, state_, tau_n, dtau_norm);
  }

 private:
  static ControllerConfig checked(const ControllerConfig& cfg) {
    cfg.validate();
    return cfg;
  }

  ControllerConfig cfg_;
  ControllerState state_;
};

}  // namespace ierk
