#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "chlab/error.hpp"
#include "chlab/fft.hpp"

namespace chlab {

/// Uniform periodic grid on [-L, L) with N points, x_i = -L + i*dx.
class Grid {
 public:
  Grid(double half_width, std::size_t points) : half_width_(half_width), points_(points) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw InvalidArgument("Grid: half-width L must be positive and finite");
    if (points < 64 || (points & (points - 1)) != 0)
      throw InvalidArgument("Grid: N must be a power of two >= 64, got " + std::to_string(points));
  }

  double half_width() const noexcept { return half_width_; }
  std::size_t size() const noexcept { return points_; }
  double dx() const noexcept { return 2.0 * half_width_ / static_cast<double>(points_); }
  double x(std::size_t i) const noexcept { return -half_width_ + static_cast<double>(i) * dx(); }

  /// Number of stored half-complex modes, N/2 + 1.
  std::size_t modes() const noexcept { return points_ / 2 + 1; }
  /// Wavenumber of half-complex mode j (0 <= j <= N/2).
  double wavenumber(std::size_t j) const noexcept {
    return std::numbers::pi * static_cast<double>(j) / half_width_;
  }
  std::size_t nyquist() const noexcept { return points_ / 2; }

  /// Index of the grid point closest to x (periodic wrap).
  std::size_t nearest_index(double xv) const noexcept {
    const double n = static_cast<double>(points_);
    double r = std::round((xv + half_width_) / dx());
    r = std::fmod(std::fmod(r, n) + n, n);
    return static_cast<std::size_t>(r);
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double half_width_;
  std::size_t points_;
};

/// Samples of a real function on a grid.
struct Field {
  Grid grid;
  std::vector<double> values;

  explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
  Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw InvalidArgument("Field: sample count does not match grid");
  }

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) noexcept { return values[i]; }
  double operator[](std::size_t i) const noexcept { return values[i]; }
  double x(std::size_t i) const noexcept { return grid.x(i); }

  void check_grid(const Field& o) const {
    if (!(grid == o.grid)) throw InvalidArgument("Field: operands live on different grids");
  }

  Field& operator+=(const Field& o) {
    check_grid(o);
    for (std::size_t i = 0; i < size(); ++i) values[i] += o.values[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_grid(o);
    for (std::size_t i = 0; i < size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  Field& operator*=(double s) {
    for (auto& v : values) v *= s;
    return *this;
  }
  /// this += s * o
  Field& axpy(double s, const Field& o) {
    check_grid(o);
    for (std::size_t i = 0; i < size(); ++i) values[i] += s * o.values[i];
    return *this;
  }
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(double s, Field a) { return a *= s; }

inline void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (!(a.grid == b.grid)) throw InvalidArgument(std::string(where) + ": fields live on different grids");
}

/// Half-complex coefficients of a real field (N/2 + 1 entries, unnormalised).
struct Spectrum {
  Grid grid;
  std::vector<fft::Complex> coeffs;
};

inline Spectrum transform(const Field& f) {
  Spectrum s{f.grid, std::vector<fft::Complex>(f.grid.modes())};
  fft::transform_for(f.size()).forward(f.values, s.coeffs);
  return s;
}

inline Field inverse(const Spectrum& s) {
  Field f(s.grid);
  fft::transform_for(s.grid.size()).inverse(s.coeffs, f.values);
  return f;
}

/// Applies a Fourier multiplier m(k, j) to every mode. When `zero_nyquist` is
/// set the N/2 mode is dropped (odd multipliers have no consistent value there).
template <class Multiplier>
Field apply_multiplier(const Field& f, Multiplier&& m, bool zero_nyquist) {
  Spectrum s = transform(f);
  const Grid& g = f.grid;
  for (std::size_t j = 0; j < g.modes(); ++j) s.coeffs[j] *= m(g.wavenumber(j), j);
  if (zero_nyquist) s.coeffs[g.nyquist()] = 0.0;
  return inverse(s);
}

template <class Fn>
Field sample(const Grid& g, Fn&& fn) {
  Field f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = fn(g.x(i));
  return f;
}

inline bool all_finite(const Field& f) {
  return std::all_of(f.values.begin(), f.values.end(), [](double v) { return std::isfinite(v); });
}

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

inline double min_value(const Field& f) { return *std::min_element(f.values.begin(), f.values.end()); }

/// Rectangle rule, sum_i f_i dx.
inline double integrate(const Field& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.dx();
}

inline double max_abs_difference(const Field& a, const Field& b) {
  require_same_grid(a, b, "max_abs_difference");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Periodic shift by an integer number of grid points: out(x) = f(x - s*dx).
inline Field shift(const Field& f, std::ptrdiff_t points) {
  Field out(f.grid);
  const auto n = static_cast<std::ptrdiff_t>(f.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(((i + points) % n + n) % n)] = f[i];
  return out;
}

/// out(x) = f(-x). On [-L, L) the reflection maps index i to (N - i) mod N.
inline Field reflect(const Field& f) {
  Field out(f.grid);
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) out[(n - i) % n] = f[i];
  return out;
}

}  // namespace chlab
