#pragma once

/// @file manufactured.hpp
/// @brief Exact-solution test cases and error metrics.
///
/// example1: omega = cos t sin x sin y with a forcing that makes it exact.
/// example2/example3: Kolmogorov forcing g = g2(t) sin(l_x x) switched on in
/// pulses; the vorticity stays on one Fourier mode, omega = f(t) sin(l_x x),
/// with f' + nu l_x^2 f = g2 solved in closed form.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ierk/errors.hpp"
#include "ierk/spectral.hpp"

namespace ierk {

/// Integral of exp(a s) sin^2(w s) over [0, dt].
///
/// Uses sin^2 = (1 - cos 2ws)/2 and the antiderivative of exp(a s) cos(b s).
inline double j2(double a, double w, double dt) {
  if (dt == 0.0) return 0.0;
  const double b = 2.0 * w;
  const double ad = a * dt;
  // (e^{a dt} - 1)/a, with the a -> 0 limit dt.
  const double growth = std::abs(ad) < 1e-300 ? dt : std::expm1(ad) / a;
  const double e = std::exp(ad);
  const double cos_part =
      (e * (a * std::cos(b * dt) + b * std::sin(b * dt)) - a) / (a * a + b * b);
  return 0.5 * (growth - cos_part);
}

struct MixedError {
  Field field;
  double max_abs = 0.0;
};

/// Per node: absolute error where |exact| <= 1e-8, relative error elsewhere.
inline MixedError mixed_error(const Field& numerical, const Field& exact) {
  numerical.require_same_grid(exact);
  const auto pn = numerical.physical();
  const auto pe = exact.physical();
  std::vector<double> out(pn.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < pn.size(); ++k) {
    const double diff = pn[k] - pe[k];
    out[k] = std::abs(pe[k]) <= 1e-8 ? diff : diff / pe[k];
    worst = std::max(worst, std::abs(out[k]));
  }
  return {Field::from_physical(numerical.grid(), std::move(out)), worst};
}

/// Breakpoints T_0 = 0 < T_1 < ... < T_{2J}; pulse j is active on
/// (T_{2j-1}, T_{2j}] with frequency l_{t,j}.
struct PulseSchedule {
  std::vector<double> breakpoints;
  std::vector<int> frequencies;
  int l_x = 1;

  int pulses() const { return static_cast<int>(frequencies.size()); }
  double period() const { return breakpoints.back(); }

  void validate() const {
    if (frequencies.empty() || breakpoints.size() != 2 * frequencies.size() + 1) {
      throw InvalidArgument("pulse schedule needs 2J+1 breakpoints for J pulses");
    }
    if (breakpoints.front() != 0.0) throw InvalidArgument("first breakpoint must be 0");
    for (std::size_t k = 1; k < breakpoints.size(); ++k) {
      if (!(breakpoints[k] > breakpoints[k - 1])) {
        throw InvalidArgument("breakpoints must be strictly increasing");
      }
    }
    for (int f : frequencies) {
      if (f <= 0) throw InvalidArgument("pulse frequencies must be positive");
    }
    if (l_x <= 0) throw InvalidArgument("l_x must be positive");
  }
};

/// Closed-form amplitude f(t) of the pulsed Kolmogorov flow, extended
/// periodically with period T_{2J}.
class PulseProfile {
 public:
  PulseProfile(PulseSchedule schedule, double nu) : s_(std::move(schedule)), nu_(nu) {
    s_.validate();
    if (!(nu > 0.0)) throw InvalidArgument("viscosity must be positive");
    decay_ = nu_ * s_.l_x * s_.l_x;
    const double T = s_.period();
    double sum = 0.0;
    for (int j = 1; j <= s_.pulses(); ++j) {
      const double on = s_.breakpoints[2 * j - 1];
      const double off = s_.breakpoints[2 * j];
      sum += std::exp(-decay_ * (T - on)) * j2(decay_, omega(j), off - on);
    }
    node_values_.resize(s_.breakpoints.size());
    node_values_[0] = sum / (-std::expm1(-decay_ * T));
    for (std::size_t k = 1; k < s_.breakpoints.size(); ++k) {
      node_values_[k] = evaluate_in_segment(k, s_.breakpoints[k]);
    }
  }

  const PulseSchedule& schedule() const noexcept { return s_; }
  double decay_rate() const noexcept { return decay_; }
  double f0() const noexcept { return node_values_[0]; }
  /// f at breakpoint T_k, from the closed form.
  double node_value(std::size_t k) const { return node_values_.at(k); }

  /// Angular frequency of pulse j (1-based).
  double omega(int j) const {
    const double len = s_.breakpoints[2 * j] - s_.breakpoints[2 * j - 1];
    return 2.0 * std::numbers::pi * s_.frequencies[static_cast<std::size_t>(j - 1)] / len;
  }

  double forcing_weight(double t) const {
    t = wrap(t);
    for (int j = 1; j <= s_.pulses(); ++j) {
      const double on = s_.breakpoints[2 * j - 1];
      const double off = s_.breakpoints[2 * j];
      if (t > on && t <= off) {
        const double sv = std::sin(omega(j) * (t - on));
        return sv * sv;
      }
    }
    return 0.0;
  }

  double amplitude(double t) const {
    t = wrap(t);
    if (t <= 0.0) return node_values_[0];
    std::size_t k = 1;
    while (k + 1 < s_.breakpoints.size() && t > s_.breakpoints[k]) ++k;
    return evaluate_in_segment(k, t);
  }

  /// Evaluates the segment formula for (T_{k-1}, T_k] at t, using the
  /// already computed value at T_{k-1}. Exposed for continuity checks.
  double evaluate_in_segment(std::size_t k, double t) const {
    const double start = s_.breakpoints[k - 1];
    const double f_start = node_values_[k - 1];
    const double decay = std::exp(-decay_ * (t - start));
    if (k % 2 == 1) return f_start * decay;  // quiescent
    const int j = static_cast<int>(k / 2);
    return decay * (f_start + j2(decay_, omega(j), t - start));
  }

 private:
  double wrap(double t) const {
    const double T = s_.period();
    if (t >= 0.0 && t <= T) return t;
    double r = std::fmod(t, T);
    if (r < 0.0) r += T;
    return r;
  }

  PulseSchedule s_;
  double nu_;
  double decay_ = 0.0;
  std::vector<double> node_values_;
};

/// A problem with a known solution, or at least known initial data.
struct ManufacturedCase {
  std::string name;
  GridSpec grid;
  double nu = 0.5;
  double horizon = 1.0;
  std::function<Field(double)> exact_omega;
  std::function<Field(double)> exact_psi;
  std::function<VectorField(double)> exact_velocity;
  std::function<Field(double)> forcing;
  /// ||omega(t)||^2 of the continuous solution.
  std::function<double(double)> reference_enstrophy;
  /// Initial vorticity; defaults to exact_omega(0).
  std::function<Field()> initial;
  /// Scalar amplitude for single-mode cases.
  std::function<double(double)> amplitude;
  unsigned long seed = 0;

  bool has_exact() const { return static_cast<bool>(exact_omega); }
  Field initial_omega() const { return initial ? initial() : exact_omega(0.0); }
};

inline ManufacturedCase example1(GridSpec grid, double nu = 0.5) {
  ManufacturedCase c{.name = "example1", .grid = grid, .nu = nu, .horizon = 1.0};
  const auto mode = [grid](double amp) {
    return Field::sample(grid, [amp](double x, double y) {
      return amp * std::sin(x) * std::sin(y);
    });
  };
  c.exact_omega = [mode](double t) { return mode(std::cos(t)); };
  c.exact_psi = [mode](double t) { return mode(0.5 * std::cos(t)); };
  c.exact_velocity = [grid](double t) {
    const double a = 0.5 * std::cos(t);
    return VectorField{
        Field::sample(grid, [a](double x, double y) { return a * std::sin(x) * std::cos(y); }),
        Field::sample(grid, [a](double x, double y) { return -a * std::cos(x) * std::sin(y); })};
  };
  // u.grad(omega) vanishes identically for this pair, so
  // g = d_t omega - nu Lap omega = (-sin t + 2 nu cos t) sin x sin y.
  c.forcing = [mode, nu](double t) {
    return mode(-std::sin(t) + 2.0 * nu * std::cos(t));
  };
  c.reference_enstrophy = [L = grid.length()](double t) {
    const double ct = std::cos(t);
    return ct * ct * L * L / 4.0;
  };
  c.amplitude = [](double t) { return std::cos(t); };
  return c;
}

/// Single-mode Kolmogorov flow driven by a pulse profile.
inline ManufacturedCase pulsed_case(std::string name, GridSpec grid, PulseSchedule schedule,
                                    double nu) {
  const auto profile = std::make_shared<const PulseProfile>(std::move(schedule), nu);
  const int lx = profile->schedule().l_x;
  ManufacturedCase c{.name = std::move(name), .grid = grid, .nu = nu,
                     .horizon = profile->schedule().period()};
  const auto mode = [grid, lx](double amp) {
    return Field::sample(grid, [amp, lx](double x, double) { return amp * std::sin(lx * x); });
  };
  c.exact_omega = [mode, profile](double t) { return mode(profile->amplitude(t)); };
  c.exact_psi = [mode, profile, lx](double t) {
    return mode(profile->amplitude(t) / (lx * lx));
  };
  c.exact_velocity = [grid, profile, lx](double t) {
    const double a = -profile->amplitude(t) / lx;
    return VectorField{Field(grid), Field::sample(grid, [a, lx](double x, double) {
                         return a * std::cos(lx * x);
                       })};
  };
  c.forcing = [mode, profile](double t) { return mode(profile->forcing_weight(t)); };
  // Integral of sin^2(l_x x) over the square is L^2/2.
  c.reference_enstrophy = [profile, L = grid.length()](double t) {
    const double f = profile->amplitude(t);
    return 0.5 * L * L * f * f;
  };
  c.amplitude = [profile](double t) { return profile->amplitude(t); };
  return c;
}

inline PulseSchedule example2_schedule(int l_x = 1, int l_t = 1, double T1 = 20.0,
                                       double T = 40.0) {
  if (!(T1 > 0.0 && T1 < T)) throw InvalidArgument("example2 needs 0 < T1 < T");
  return PulseSchedule{{0.0, T1, T}, {l_t}, l_x};
}

inline PulseSchedule example3_schedule(std::vector<int> frequencies, int l_x = 1) {
  return PulseSchedule{{0.0, 20.0, 40.0, 70.0, 80.0, 90.0, 120.0}, std::move(frequencies), l_x};
}

inline ManufacturedCase example2(GridSpec grid, int l_x = 1, int l_t = 1, double T1 = 20.0,
                                 double T = 40.0, double nu = 0.5) {
  return pulsed_case("example2", grid, example2_schedule(l_x, l_t, T1, T), nu);
}

inline ManufacturedCase example3(GridSpec grid, PulseSchedule schedule, double nu = 0.5,
                                 std::string name = "example3") {
  return pulsed_case(std::move(name), grid, std::move(schedule), nu);
}

inline ManufacturedCase example3_freqA(GridSpec grid, double nu = 0.5) {
  return example3(grid, example3_schedule({3, 1, 5}), nu, "example3-freqA");
}

inline ManufacturedCase example3_freqB(GridSpec grid, double nu = 0.5) {
  return example3(grid, example3_schedule({40, 20, 50}), nu, "example3-freqB");
}

/// Seeded smooth mean-free field on modes |l|, |m| <= kmax, normalized to
/// unit L2 norm.
inline Field random_band_limited(GridSpec grid, int kmax, unsigned long seed) {
  if (kmax < 1 || kmax >= grid.points() / 2) {
    throw InvalidArgument("kmax must lie in [1, M/2)");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int n = grid.points();
  const int cols = grid.spectral_cols();
  std::vector<cplx> coeffs(grid.spectral_size(), cplx{});
  for (int l = -kmax; l <= kmax; ++l) {
    for (int m = 0; m <= kmax; ++m) {
      if (m == 0 && l <= 0) continue;  // keep (0,0) empty; fill m=0 by symmetry
      const double decay = 1.0 / (1.0 + l * l + m * m);
      const cplx c{normal(rng) * decay, normal(rng) * decay};
      const int li = (l + n) % n;
      coeffs[static_cast<std::size_t>(li) * cols + m] = c;
      if (m == 0) coeffs[static_cast<std::size_t>((-l + n) % n) * cols] = std::conj(c);
    }
  }
  Field f = Field::from_spectral(grid, std::move(coeffs));
  f.synchronize();
  f.project_mean_free();
  const double norm = l2_norm(f);
  return norm > 0.0 ? (1.0 / norm) * f : f;
}

/// Unforced flow from seeded random data; no exact solution.
inline ManufacturedCase decay_case(GridSpec grid, unsigned long seed, int kmax = 5,
                                   double nu = 0.5, double horizon = 50.0) {
  ManufacturedCase c{.name = "decay", .grid = grid, .nu = nu, .horizon = horizon};
  c.initial = [grid, kmax, seed] { return random_band_limited(grid, kmax, seed); };
  c.seed = seed;
  return c;
}

/// Registry lookup. Recognized overrides: nu, T, l_x, l_t, T1, seed, kmax.
inline ManufacturedCase make_case(const std::string& name, GridSpec grid,
                                  const std::map<std::string, double>& overrides = {}) {
  const auto get = [&](const char* key, double fallback) {
    const auto it = overrides.find(key);
    return it == overrides.end() ? fallback : it->second;
  };
  const double nu = get("nu", 0.5);
  if (name == "example1") {
    auto c = example1(grid, nu);
    c.horizon = get("T", 1.0);
    return c;
  }
  if (name == "example2") {
    return example2(grid, static_cast<int>(get("l_x", 1)), static_cast<int>(get("l_t", 1)),
                    get("T1", 20.0), get("T", 40.0), nu);
  }
  if (name == "example3-freqA" || name == "example3-freqB") {
    const bool a = name.back() == 'A';
    auto sched = example3_schedule(a ? std::vector<int>{3, 1, 5} : std::vector<int>{40, 20, 50},
                                   static_cast<int>(get("l_x", 1)));
    return example3(grid, std::move(sched), nu, name);
  }
  if (name == "decay") {
    return decay_case(grid, static_cast<unsigned long>(get("seed", 1)),
                      static_cast<int>(get("kmax", 5)), nu, get("T", 50.0));
  }
  throw UnknownCase("unknown case '" + name + "'");
}

}  // namespace ierk
