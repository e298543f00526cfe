#pragma once

/// @file spectral.hpp
/// @brief Fourier pseudo-spectral operators on the doubly periodic square.
///
/// A Field carries a real grid function in two representations: nodal
/// values and pseudo-spectral (interpolation) coefficients. Either one may be
/// stale; accessors synchronize on demand.
///
/// Layout conventions:
///   - nodes x_i = i*h, y_j = j*h for 0 <= i,j < M; physical[i*M + j].
///   - coefficients are stored as the r2c half spectrum, M x (M/2+1):
///     spectral[li*(M/2+1) + m] with li = l mod M and 0 <= m <= M/2.
///   - coefficients are interpolation coefficients: v(x_i,y_j) equals
///     sum over l,m in [-M/2, M/2-1] of c_{l,m} exp(i*kappa*(l x_i + m y_j)).

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ierk/errors.hpp"

namespace ierk {

using cplx = std::complex<double>;

/// Uniform M x M grid on (0, L)^2.
class GridSpec {
 public:
  explicit GridSpec(int points = 32, double length = 2.0 * std::numbers::pi)
      : points_(points), length_(length) {
    if (points < 4 || points % 2 != 0) {
      throw InvalidArgument("grid size M must be even and >= 4, got " +
                            std::to_string(points));
    }
    if (!(length > 0.0)) throw InvalidArgument("domain length must be positive");
  }

  int points() const noexcept { return points_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / points_; }
  double wavenumber() const noexcept { return 2.0 * std::numbers::pi / length_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(points_) * points_;
  }
  int spectral_cols() const noexcept { return points_ / 2 + 1; }
  std::size_t spectral_size() const noexcept {
    return static_cast<std::size_t>(points_) * spectral_cols();
  }
  double node(int i) const noexcept { return i * spacing(); }

  /// Signed wavenumber index of a row of the half spectrum.
  int signed_row(int li) const noexcept { return li < points_ / 2 ? li : li - points_; }

  friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
    return a.points_ == b.points_ && a.length_ == b.length_;
  }

 private:
  int points_;
  double length_;
};

namespace detail {

class FftPlans {
 public:
  explicit FftPlans(int m) {
    std::vector<double> real(static_cast<std::size_t>(m) * m);
    std::vector<cplx> spec(static_cast<std::size_t>(m) * (m / 2 + 1));
    auto* out = reinterpret_cast<fftw_complex*>(spec.data());
    forward_ = fftw_plan_dft_r2c_2d(m, m, real.data(), out,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_ = fftw_plan_dft_c2r_2d(m, m, out, real.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  // fftw_execute_dft_* on an existing plan is thread-safe.
  void forward(const double* in, cplx* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
  }
  /// Destroys `in`.
  void backward(cplx* in, double* out) const {
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  fftw_plan forward_;
  fftw_plan backward_;
};

inline std::shared_ptr<const FftPlans> plans_for(int m) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const FftPlans>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[m];
  if (!slot) slot = std::make_shared<const FftPlans>(m);
  return slot;
}

}  // namespace detail

/// Doubly periodic real grid function with lazily synchronized
/// physical/spectral representations.
///
/// Accessors on a const Field may refresh the stale representation, so a
/// single Field must not be read from several threads at once. Distinct
/// Fields are independent.
class Field {
 public:
  explicit Field(GridSpec grid)
      : grid_(grid),
        physical_(grid.size(), 0.0),
        spectral_(grid.spectral_size(), cplx{}),
        physical_fresh_(true),
        spectral_fresh_(true),
        mean_free_(true) {}

  static Field from_physical(GridSpec grid, std::vector<double> values) {
    if (values.size() != grid.size()) {
      throw InvalidArgument("physical data size does not match the grid");
    }
    Field f(grid);
    f.physical_ = std::move(values);
    f.physical_fresh_ = true;
    f.spectral_fresh_ = false;
    f.mean_free_ = false;
    return f;
  }

  /// Half-spectrum interpolation coefficients in the layout described above.
  static Field from_spectral(GridSpec grid, std::vector<cplx> coeffs) {
    if (coeffs.size() != grid.spectral_size()) {
      throw InvalidArgument("spectral data size does not match the grid");
    }
    Field f(grid);
    f.spectral_ = std::move(coeffs);
    f.spectral_fresh_ = true;
    f.physical_fresh_ = false;
    f.mean_free_ = false;
    return f;
  }

  /// Samples fn(x, y) at the grid nodes.
  template <class Fn>
  static Field sample(GridSpec grid, Fn&& fn) {
    const int m = grid.points();
    std::vector<double> v(grid.size());
    for (int i = 0; i < m; ++i) {
      const double x = grid.node(i);
      for (int j = 0; j < m; ++j) v[static_cast<std::size_t>(i) * m + j] = fn(x, grid.node(j));
    }
    return from_physical(grid, std::move(v));
  }

  const GridSpec& grid() const noexcept { return grid_; }
  bool has_physical() const noexcept { return physical_fresh_; }
  bool has_spectral() const noexcept { return spectral_fresh_; }

  std::span<const double> physical() const {
    sync_physical();
    return physical_;
  }
  std::span<const cplx> spectral() const {
    sync_spectral();
    return spectral_;
  }

  /// Mutable views invalidate the other representation.
  std::span<double> physical_mut() {
    sync_physical();
    spectral_fresh_ = false;
    mean_free_ = false;
    return physical_;
  }
  std::span<cplx> spectral_mut() {
    sync_spectral();
    physical_fresh_ = false;
    mean_free_ = false;
    return spectral_;
  }

  double at(int i, int j) const {
    return physical()[static_cast<std::size_t>(i) * grid_.points() + j];
  }

  /// Interpolation coefficient for any (l, m) in [-M/2, M/2-1]^2.
  cplx coefficient(int l, int m) const {
    const int n = grid_.points();
    const int half = n / 2;
    if (l < -half || l >= half || m < -half || m >= half) {
      throw InvalidArgument("wavenumber index out of range");
    }
    const auto wrap = [n](int k) { return ((k % n) + n) % n; };
    const auto& s = spectral();
    const int cols = grid_.spectral_cols();
    if (m >= 0) return s[static_cast<std::size_t>(wrap(l)) * cols + m];
    if (m == -half) return s[static_cast<std::size_t>(wrap(l)) * cols + half];
    return std::conj(s[static_cast<std::size_t>(wrap(-l)) * cols + (-m)]);
  }

  cplx mean_mode() const { return spectral()[0]; }

  bool mean_free() const noexcept { return mean_free_; }

  /// Zeroes the (0,0) coefficient and marks the field mean-free.
  Field& project_mean_free() {
    if (spectral_fresh_) {
      spectral_[0] = cplx{};
      if (physical_fresh_) {
        // Keep both representations current.
        double mean = 0.0;
        for (double v : physical_) mean += v;
        mean /= static_cast<double>(physical_.size());
        for (double& v : physical_) v -= mean;
      }
    } else {
      double mean = 0.0;
      for (double v : physical_) mean += v;
      mean /= static_cast<double>(physical_.size());
      for (double& v : physical_) v -= mean;
    }
    mean_free_ = true;
    return *this;
  }

  /// Bring both representations up to date.
  const Field& synchronize() const {
    sync_physical();
    sync_spectral();
    return *this;
  }

  bool all_finite() const {
    if (physical_fresh_) {
      return std::all_of(physical_.begin(), physical_.end(),
                         [](double v) { return std::isfinite(v); });
    }
    return std::all_of(spectral_.begin(), spectral_.end(), [](const cplx& c) {
      return std::isfinite(c.real()) && std::isfinite(c.imag());
    });
  }

  Field& operator+=(const Field& o) { return axpy(1.0, o); }
  Field& operator-=(const Field& o) { return axpy(-1.0, o); }
  Field& operator*=(double a) {
    if (spectral_fresh_) {
      for (auto& c : spectral_) c *= a;
    }
    if (physical_fresh_) {
      for (auto& v : physical_) v *= a;
    }
    return *this;
  }

  /// this += a * o, computed in spectral space when both sides have
  /// current coefficients and in physical space otherwise.
  Field& axpy(double a, const Field& o) {
    require_same_grid(o);
    const bool was_mean_free = mean_free_ && o.mean_free_;
    if (spectral_fresh_ && o.spectral_fresh_) {
      for (std::size_t k = 0; k < spectral_.size(); ++k) spectral_[k] += a * o.spectral_[k];
      physical_fresh_ = false;
    } else {
      sync_physical();
      const auto& op = o.physical();
      for (std::size_t k = 0; k < physical_.size(); ++k) physical_[k] += a * op[k];
      spectral_fresh_ = false;
    }
    mean_free_ = was_mean_free;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator-(Field a) { return a *= -1.0; }

  void require_same_grid(const Field& o) const {
    if (!(grid_ == o.grid_)) throw InvalidArgument("fields live on different grids");
  }

 private:
  void sync_physical() const {
    if (physical_fresh_) return;
    auto plans = detail::plans_for(grid_.points());
    std::vector<cplx> scratch = spectral_;
    plans->backward(scratch.data(), physical_.data());
    physical_fresh_ = true;
  }
  void sync_spectral() const {
    if (spectral_fresh_) return;
    auto plans = detail::plans_for(grid_.points());
    plans->forward(physical_.data(), spectral_.data());
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (auto& c : spectral_) c *= scale;
    spectral_fresh_ = true;
  }

  GridSpec grid_;
  mutable std::vector<double> physical_;
  mutable std::vector<cplx> spectral_;
  mutable bool physical_fresh_;
  mutable bool spectral_fresh_;
  bool mean_free_;
};

/// Velocity (u, v).
struct VectorField {
  Field u;
  Field v;
};

enum class ConvectionForm { skew, advective };

inline const char* to_string(ConvectionForm f) {
  return f == ConvectionForm::skew ? "skew" : "advective";
}

/// Both representations current; the input is left untouched.
inline Field to_spectral(Field f) {
  f.synchronize();
  return f;
}
inline Field to_physical(Field f) {
  f.synchronize();
  return f;
}

namespace detail {

/// Multiplies every coefficient by mult(l, m) with signed indices
/// l in [-M/2, M/2-1] and m in [0, M/2].
template <class Mult>
Field spectral_multiply(const Field& f, Mult&& mult) {
  const GridSpec& g = f.grid();
  const int n = g.points();
  const int cols = g.spectral_cols();
  const auto in = f.spectral();
  std::vector<cplx> out(in.size());
  for (int li = 0; li < n; ++li) {
    const int l = g.signed_row(li);
    for (int m = 0; m < cols; ++m) {
      const std::size_t k = static_cast<std::size_t>(li) * cols + m;
      out[k] = mult(l, m) * in[k];
    }
  }
  return Field::from_spectral(g, std::move(out));
}

}  // namespace detail

/// D_x; the Nyquist row l = -M/2 is dropped so the result stays real.
inline Field deriv_x(const Field& f) {
  const int half = f.grid().points() / 2;
  const double kappa = f.grid().wavenumber();
  return detail::spectral_multiply(f, [=](int l, int) {
    return l == -half ? cplx{} : cplx{0.0, kappa * l};
  });
}

/// D_y; the Nyquist column m = M/2 is dropped.
inline Field deriv_y(const Field& f) {
  const int half = f.grid().points() / 2;
  const double kappa = f.grid().wavenumber();
  return detail::spectral_multiply(f, [=](int, int m) {
    return m == half ? cplx{} : cplx{0.0, kappa * m};
  });
}

/// Eigenvalue of the discrete Laplacian on mode (l, m).
inline double laplacian_symbol(const GridSpec& g, int l, int m) {
  const double kappa = g.wavenumber();
  return -kappa * kappa * (static_cast<double>(l) * l + static_cast<double>(m) * m);
}

inline Field laplacian(const Field& f) {
  const GridSpec g = f.grid();
  return detail::spectral_multiply(
      f, [&](int l, int m) { return cplx{laplacian_symbol(g, l, m), 0.0}; });
}

inline double inner(const Field& a, const Field& b) {
  a.require_same_grid(b);
  const auto pa = a.physical();
  const auto pb = b.physical();
  double sum = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k) sum += pa[k] * pb[k];
  const double h = a.grid().spacing();
  return h * h * sum;
}

inline double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.physical()) m = std::max(m, std::abs(v));
  return m;
}

inline double h1_seminorm(const Field& f) {
  const Field fx = deriv_x(f);
  const Field fy = deriv_y(f);
  return std::sqrt(inner(fx, fx) + inner(fy, fy));
}

/// ||omega||^2 (not halved).
inline double enstrophy(const Field& omega) { return inner(omega, omega); }

/// Returns psi with -Lap_h psi = omega and zero mean.
inline Field solve_poisson(const Field& omega) {
  const double tol = 1e-10 * l2_norm(omega);
  if (std::abs(omega.mean_mode()) > tol) {
    throw NonZeroMean("Poisson right-hand side has nonzero mean " +
                      std::to_string(std::abs(omega.mean_mode())));
  }
  const GridSpec g = omega.grid();
  Field psi = detail::spectral_multiply(omega, [&](int l, int m) {
    if (l == 0 && m == 0) return cplx{};
    return cplx{-1.0 / laplacian_symbol(g, l, m), 0.0};
  });
  psi.project_mean_free();
  return psi;
}

/// u = (D_y psi, -D_x psi).
inline VectorField velocity(const Field& psi) {
  return VectorField{deriv_y(psi), -deriv_x(psi)};
}

inline Field divergence(const VectorField& vel) {
  return deriv_x(vel.u) + deriv_y(vel.v);
}

/// Pointwise product in physical space.
inline Field multiply(const Field& a, const Field& b) {
  a.require_same_grid(b);
  const auto pa = a.physical();
  const auto pb = b.physical();
  std::vector<double> out(pa.size());
  for (std::size_t k = 0; k < pa.size(); ++k) out[k] = pa[k] * pb[k];
  return Field::from_physical(a.grid(), std::move(out));
}

/// Nonlinear term: 1/2 u.grad(w) + 1/2 div(u w) (skew) or u.grad(w)
/// (advective). Products are formed at the nodes without dealiasing.
inline Field convection(const VectorField& vel, const Field& omega,
                        ConvectionForm form = ConvectionForm::skew) {
  omega.require_same_grid(vel.u);
  omega.require_same_grid(vel.v);
  const Field wx = deriv_x(omega);
  const Field wy = deriv_y(omega);
  const auto u = vel.u.physical();
  const auto v = vel.v.physical();
  const auto px = wx.physical();
  const auto py = wy.physical();
  std::vector<double> adv(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) adv[k] = u[k] * px[k] + v[k] * py[k];
  Field result = Field::from_physical(omega.grid(), std::move(adv));
  if (form == ConvectionForm::skew) {
    const Field flux = deriv_x(multiply(vel.u, omega)) + deriv_y(multiply(vel.v, omega));
    result *= 0.5;
    result.axpy(0.5, flux);
  }
  result.synchronize();
  result.project_mean_free();
  return result;
}

}  // namespace ierk
