#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "ierk/manufactured.hpp"

namespace {

using namespace ierk;
using std::numbers::pi;

double quad_j2(double a, double w, double dt) {
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [a, w](double s) {
    const double v = std::sin(w * s);
    return std::exp(a * s) * v * v;
  };
  // Split so every panel holds only a few oscillations.
  const int panels = 1 + static_cast<int>(std::abs(w) * dt);
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    sum += gauss_kronrod<double, 61>::integrate(f, dt * k / panels, dt * (k + 1) / panels, 10,
                                                1e-14);
  }
  return sum;
}

TEST(J2, MatchesQuadrature) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> ua(-1.0, 2.0), uw(0.1, 10.0), udt(0.01, 4.0);
  for (int k = 0; k < 100; ++k) {
    const double a = ua(rng), w = uw(rng), dt = udt(rng);
    const double ref = quad_j2(a, w, dt);
    EXPECT_NEAR(j2(a, w, dt), ref, 1e-12 * std::max(1.0, std::abs(ref))) << a << " " << w << " " << dt;
  }
}

TEST(J2, ClosedFormLimits) {
  EXPECT_EQ(j2(0.7, 3.0, 0.0), 0.0);
  for (double w : {0.5, 2.0, 7.0}) {
    const double dt = 1.3;
    const double plain = dt / 2 - std::sin(2 * w * dt) / (4 * w);
    EXPECT_NEAR(j2(0.0, w, dt), plain, 1e-14);
    EXPECT_NEAR(j2(1e-12, w, dt), plain, 1e-11);
  }
  // Whole periods of sin^2 average to one half.
  EXPECT_NEAR(j2(0.0, pi, 4.0), 2.0, 1e-14);
}

using Scalar = std::vector<double>;

// f' = -d f + g2(t) integrated independently from f(0) = f0.
double integrate_amplitude(const PulseProfile& p, double t_end) {
  namespace odeint = boost::numeric::odeint;
  Scalar y{p.f0()};
  const double d = p.decay_rate();
  auto rhs = [&](const Scalar& x, Scalar& dx, double t) { dx[0] = -d * x[0] + p.forcing_weight(t); };
  // Integrate segment by segment so the stepper never straddles a breakpoint.
  const auto& bp = p.schedule().breakpoints;
  double t0 = 0.0;
  for (std::size_t k = 1; k < bp.size() && t0 < t_end; ++k) {
    const double t1 = std::min(bp[k], t_end);
    odeint::integrate_adaptive(
        odeint::make_controlled<odeint::runge_kutta_dopri5<Scalar>>(1e-14, 1e-14), rhs, y, t0, t1,
        1e-3);
    t0 = t1;
  }
  return y[0];
}

std::vector<PulseProfile> sample_profiles() {
  return {PulseProfile(example2_schedule(), 0.5),
          PulseProfile(example2_schedule(2, 3, 10.0, 30.0), 0.1),
          PulseProfile(example3_schedule({3, 1, 5}), 0.5),
          PulseProfile(example3_schedule({40, 20, 50}), 0.5)};
}

TEST(PulseProfile, MatchesOdeIntegration) {
  for (const auto& p : sample_profiles()) {
    const double T = p.schedule().period();
    for (double frac : {0.1, 0.37, 0.5, 0.81, 1.0}) {
      const double t = frac * T;
      EXPECT_NEAR(p.amplitude(t), integrate_amplitude(p, t), 1e-9) << t;
    }
  }
}

// The initial amplitude is the periodic one: f(0) = f(T).
TEST(PulseProfile, IsPeriodic) {
  for (const auto& p : sample_profiles()) {
    const double T = p.schedule().period();
    EXPECT_NEAR(p.amplitude(T), p.f0(), 1e-13);
    EXPECT_NEAR(integrate_amplitude(p, T), p.f0(), 1e-9);
    EXPECT_NEAR(p.amplitude(T + 3.7), p.amplitude(3.7), 1e-13);
    EXPECT_GT(p.f0(), 0.0);
  }
}

TEST(PulseProfile, ContinuousAtBreakpoints) {
  for (const auto& p : sample_profiles()) {
    const auto& bp = p.schedule().breakpoints;
    for (std::size_t k = 1; k + 1 < bp.size(); ++k) {
      EXPECT_NEAR(p.evaluate_in_segment(k, bp[k]), p.evaluate_in_segment(k + 1, bp[k]), 1e-14);
      EXPECT_NEAR(p.amplitude(bp[k] - 1e-9), p.amplitude(bp[k] + 1e-9), 1e-8);
    }
  }
}

TEST(PulseProfile, QuiescentSegmentsDecayExponentially) {
  const PulseProfile p(example2_schedule(), 0.5);
  const double d = p.decay_rate();
  EXPECT_DOUBLE_EQ(d, 0.5);
  for (double t : {0.0, 3.0, 11.5, 20.0}) {
    EXPECT_NEAR(p.amplitude(t), p.f0() * std::exp(-d * t), 1e-15);
  }
  EXPECT_NEAR(p.node_value(1), p.f0() * std::exp(-0.5 * 20.0), 1e-18);
  EXPECT_EQ(p.forcing_weight(10.0), 0.0);
  EXPECT_EQ(p.forcing_weight(20.0), 0.0);
  EXPECT_GT(p.forcing_weight(20.5), 0.0);
}

TEST(PulseProfile, ScheduleValidation) {
  EXPECT_THROW(PulseProfile(PulseSchedule{{0.0, 1.0}, {1}, 1}, 0.5), InvalidArgument);
  EXPECT_THROW(PulseProfile(PulseSchedule{{0.0, 2.0, 1.0}, {1}, 1}, 0.5), InvalidArgument);
  EXPECT_THROW(PulseProfile(PulseSchedule{{0.0, 1.0, 2.0}, {0}, 1}, 0.5), InvalidArgument);
  EXPECT_THROW(PulseProfile(example2_schedule(), 0.0), InvalidArgument);
  EXPECT_THROW(example2_schedule(1, 1, 50.0, 40.0), InvalidArgument);
}

// Sixth-order central difference in time.
template <class F>
auto d_dt(F&& f, double t, double h) {
  return (1.0 / (60.0 * h)) * (45.0 * (f(t + h) - f(t - h)) - 9.0 * (f(t + 2 * h) - f(t - 2 * h)) +
                               (f(t + 3 * h) - f(t - 3 * h)));
}

bool near_breakpoint(const std::vector<double>& bp, double t, double gap) {
  for (double b : bp) {
    if (std::abs(t - b) < gap) return true;
  }
  return false;
}

// The exact fields satisfy w_t - nu lap w + u.grad w = g on the grid.
void expect_pde_residual_small(const ManufacturedCase& c, const std::vector<double>& breakpoints,
                               double T, unsigned seed, double tol) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ut(0.0, T);
  const double h = 5e-4;
  int checked = 0;
  while (checked < 20) {
    const double t = ut(rng);
    if (t < 4 * h || near_breakpoint(breakpoints, t, 1e-2)) continue;
    const Field w = c.exact_omega(t);
    const VectorField vel = c.exact_velocity(t);
    const Field wt = d_dt(c.exact_omega, t, h);
    const Field r = wt - c.nu * laplacian(w) + convection(vel, w) - c.forcing(t);
    EXPECT_LT(max_abs(r), tol) << c.name << " t=" << t;
    // Velocity and stream function are consistent with the vorticity.
    EXPECT_LT(max_abs(-1.0 * laplacian(c.exact_psi(t)) - w), 1e-12);
    EXPECT_LT(max_abs(vel.u - deriv_y(c.exact_psi(t))), 1e-12);
    EXPECT_LT(max_abs(vel.v + deriv_x(c.exact_psi(t))), 1e-12);
    ++checked;
  }
}

TEST(Cases, ExactSolutionsSatisfyThePde) {
  const GridSpec g(16);
  expect_pde_residual_small(example1(g), {}, 5.0, 1, 1e-10);
  expect_pde_residual_small(example2(g), {0.0, 20.0, 40.0}, 40.0, 2, 1e-10);
  expect_pde_residual_small(example2(g, 2, 3, 10.0, 30.0, 0.2), {0.0, 10.0, 30.0}, 30.0, 3, 1e-10);
  const std::vector<double> bp3{0.0, 20.0, 40.0, 70.0, 80.0, 90.0, 120.0};
  expect_pde_residual_small(example3_freqA(g), bp3, 120.0, 4, 1e-10);
  expect_pde_residual_small(example3_freqB(g), bp3, 120.0, 5, 1e-9);
}

TEST(Cases, Example1Structure) {
  const GridSpec g(16);
  const ManufacturedCase c = example1(g);
  EXPECT_NEAR(enstrophy(c.exact_omega(0.0)), pi * pi, 1e-12);
  EXPECT_NEAR(c.reference_enstrophy(0.0), pi * pi, 1e-12);
  EXPECT_NEAR(c.reference_enstrophy(1.0), pi * pi * std::cos(1.0) * std::cos(1.0), 1e-12);
  EXPECT_LT(max_abs(c.exact_psi(0.4) - 0.5 * c.exact_omega(0.4)), 1e-15);
  const Field w = c.exact_omega(0.4);
  EXPECT_LT(max_abs(convection(c.exact_velocity(0.4), w)), 1e-13);
  EXPECT_LT(max_abs(solve_poisson(w) - c.exact_psi(0.4)), 1e-14);
}

TEST(Cases, ReferenceEnstrophyMatchesGrid) {
  const GridSpec g(16);
  for (const auto& c : {example2(g), example3_freqA(g)}) {
    for (double t : {0.0, 25.0, 33.3}) {
      EXPECT_NEAR(enstrophy(c.exact_omega(t)), c.reference_enstrophy(t), 1e-12) << c.name;
    }
  }
}

TEST(Cases, Registry) {
  const GridSpec g(16);
  EXPECT_EQ(make_case("example1", g).name, "example1");
  EXPECT_EQ(make_case("example2", g).horizon, 40.0);
  EXPECT_EQ(make_case("example3-freqB", g).horizon, 120.0);
  EXPECT_DOUBLE_EQ(make_case("example2", g, {{"nu", 0.1}}).nu, 0.1);
  EXPECT_DOUBLE_EQ(make_case("example2", g, {{"T", 30.0}, {"T1", 5.0}}).horizon, 30.0);
  const auto d = make_case("decay", g, {{"seed", 9}});
  EXPECT_EQ(d.seed, 9u);
  EXPECT_FALSE(d.has_exact());
  EXPECT_THROW(make_case("example4", g), UnknownCase);
}

TEST(MixedError, SwitchesBetweenAbsoluteAndRelative) {
  const GridSpec g(4);
  std::vector<double> exact(16, 0.0), num(16, 0.0);
  exact[0] = 2.0;
  num[0] = 2.2;  // relative 0.1
  exact[1] = 1e-9;
  num[1] = 0.05;  // absolute
  num[2] = -0.01;
  const auto e = mixed_error(Field::from_physical(g, num), Field::from_physical(g, exact));
  EXPECT_NEAR(e.field.at(0, 0), 0.1, 1e-15);
  EXPECT_NEAR(e.field.at(0, 1), 0.05 - 1e-9, 1e-15);
  EXPECT_NEAR(e.field.at(0, 2), -0.01, 1e-15);
  EXPECT_NEAR(e.max_abs, 0.1, 1e-15);
}

TEST(RandomData, BandLimitedUnitNormDeterministic) {
  const GridSpec g(32);
  const Field a = random_band_limited(g, 5, 7);
  const Field b = random_band_limited(g, 5, 7);
  const Field c = random_band_limited(g, 5, 8);
  EXPECT_NEAR(l2_norm(a), 1.0, 1e-14);
  EXPECT_LT(std::abs(a.mean_mode()), 1e-16);
  EXPECT_EQ(max_abs(a - b), 0.0);
  EXPECT_GT(max_abs(a - c), 1e-3);
  for (int l = -16; l < 16; ++l) {
    for (int m = -16; m < 16; ++m) {
      if (std::abs(l) > 5 || std::abs(m) > 5) EXPECT_LT(std::abs(a.coefficient(l, m)), 1e-15);
    }
  }
  EXPECT_THROW(random_band_limited(g, 16, 1), InvalidArgument);
}

}  // namespace
