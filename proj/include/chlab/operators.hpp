#pragma once

// Spectral operators for the nonlocal Camassa-Holm form
//   u_t + u u_x + dx G * F(u) = 0,  G(x) = exp(-|x|)/2,  F(u) = u^2 + (u_x)^2/2.
// G* is realised as the Fourier multiplier 1/(1+k^2) of the periodised kernel.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include "chlab/field.hpp"
#include "chlab/random.hpp"

namespace chlab {

using fft::Complex;

/// Spectral x-derivative (multiplier i k, Nyquist mode zeroed).
inline Field derivative(const Field& u) {
  return apply_multiplier(u, [](double k, std::size_t) { return Complex(0.0, k); }, true);
}

/// G * f = (1 - dx^2)^{-1} f.
inline Field helmholtz_inverse(const Field& f) {
  return apply_multiplier(f, [](double k, std::size_t) { return Complex(1.0 / (1.0 + k * k), 0.0); }, false);
}

/// dx G * f, multiplier i k / (1 + k^2).
inline Field convolve_dxG(const Field& f) {
  return apply_multiplier(f, [](double k, std::size_t) { return Complex(0.0, k / (1.0 + k * k)); }, true);
}

/// m = u - u_xx.
inline Field m_of_u(const Field& u) {
  return apply_multiplier(u, [](double k, std::size_t) { return Complex(1.0 + k * k, 0.0); }, false);
}

/// Inverse of m_of_u.
inline Field u_of_m(const Field& m) { return helmholtz_inverse(m); }

/// 2/3-rule truncation: modes with j >= N/3 are zeroed.
inline Field dealias(const Field& f) {
  Spectrum s = transform(f);
  const std::size_t n = f.size();
  for (std::size_t j = 0; j < s.coeffs.size(); ++j)
    if (3 * j >= n) s.coeffs[j] = 0.0;
  return inverse(s);
}

/// F(u) = u^2 + (u_x)^2 / 2 with u_x = derivative(u); `ux` may be supplied
/// when already available.
inline Field nonlinearity_F(const Field& u, const Field& ux, bool dealiased = true) {
  require_same_grid(u, ux, "nonlinearity_F");
  Field f(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) f[i] = u[i] * u[i] + 0.5 * ux[i] * ux[i];
  return dealiased ? dealias(f) : f;
}

inline Field nonlinearity_F(const Field& u, bool dealiased = true) {
  return nonlinearity_F(u, derivative(u), dealiased);
}

/// Samples of the function whose (continuous) Fourier transform is
/// `ft(k) = \int g(x) e^{-ikx} dx`, periodised onto the grid.
template <class Transform>
Field from_fourier_transform(const Grid& g, Transform&& ft) {
  Spectrum s{g, std::vector<Complex>(g.modes())};
  const double inv_dx = 1.0 / g.dx();
  for (std::size_t j = 0; j < g.modes(); ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;  // e^{-i k_j L}
    s.coeffs[j] = ft(g.wavenumber(j)) * (sign * inv_dx);
  }
  s.coeffs[g.nyquist()] = s.coeffs[g.nyquist()].real();
  return inverse(s);
}

/// Peakon profile c exp(-|x - x0|), sampled pointwise (kink at x0).
inline Field peakon(double c, double x0, const Grid& g) {
  if (!(std::abs(x0) < g.half_width())) throw InvalidArgument("peakon: |x0| must be < L");
  return sample(g, [=](double x) { return c * std::exp(-std::abs(x - x0)); });
}

/// G * (2c rho_w(. - x0)) with rho_w the centred Gaussian density of standard
/// deviation `width`: a C-infinity peakon with identical e^{-|x|} tails up to
/// the factor exp(width^2 / 2).
inline Field mollified_peakon(double c, double x0, double width, const Grid& g) {
  if (!(std::abs(x0) < g.half_width())) throw InvalidArgument("mollified_peakon: |x0| must be < L");
  if (!(width > 0.0)) throw InvalidArgument("mollified_peakon: width must be positive");
  return from_fourier_transform(g, [=](double k) {
    return 2.0 * c / (1.0 + k * k) * std::exp(-0.5 * k * k * width * width) * std::polar(1.0, -k * x0);
  });
}

/// amplitude * (exp(-a|x|) convolved with a Gaussian density of standard deviation `width`).
inline Field mollified_exponential(double amplitude, double rate, double width, const Grid& g) {
  if (!(rate > 0.0)) throw InvalidArgument("mollified_exponential: decay rate must be positive");
  if (!(width > 0.0)) throw InvalidArgument("mollified_exponential: width must be positive");
  return from_fourier_transform(g, [=](double k) {
    return Complex(amplitude * 2.0 * rate / (rate * rate + k * k) * std::exp(-0.5 * k * k * width * width), 0.0);
  });
}

/// Discrete linear convolution (f1 * f2)(x_k) = sum_j f1(x_k - x_j) f2(x_j) dx.
/// Exact (no wrap-around) when the supports of f1 and f2 each lie in [-L/2, L/2).
inline Field convolve(const Field& f1, const Field& f2) {
  require_same_grid(f1, f2, "convolve");
  Spectrum a = transform(f1);
  const Spectrum b = transform(f2);
  for (std::size_t j = 0; j < a.coeffs.size(); ++j) a.coeffs[j] *= b.coeffs[j];
  const Field circ = inverse(a);
  const std::size_t n = f1.size();
  const double dx = f1.grid.dx();
  Field out(f1.grid);
  for (std::size_t k = 0; k < n; ++k) out[k] = circ[(k + n / 2) % n] * dx;
  return out;
}

/// Seeded random real field containing only modes 0 < j <= max_mode, with
/// normally distributed coefficients.
inline Field random_band_limited(const Grid& g, std::size_t max_mode, std::uint64_t seed) {
  if (max_mode == 0 || max_mode >= g.nyquist()) throw InvalidArgument("random_band_limited: bad max_mode");
  Rng rng(seed);
  Spectrum s{g, std::vector<Complex>(g.modes(), Complex(0.0, 0.0))};
  const double n = static_cast<double>(g.size());
  for (std::size_t j = 1; j <= max_mode; ++j) s.coeffs[j] = Complex(rng.normal(), rng.normal()) * (0.5 * n);
  return inverse(s);
}

/// Conserved H^1 energy, sum (u^2 + u_x^2) dx.
inline double energy(const Field& u, const Field& ux) {
  require_same_grid(u, ux, "energy");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * u[i] + ux[i] * ux[i];
  return s * u.grid.dx();
}

inline double energy(const Field& u) { return energy(u, derivative(u)); }

inline double mass(const Field& u) { return integrate(u); }

/// Ratio of the largest coefficient magnitude in the top 1/16 of the retained
/// (2/3-rule) band to the largest overall: a resolution indicator that stays
/// near round-off while the solution is resolved.
inline double spectral_tail_ratio(const Field& u) {
  const Spectrum s = transform(u);
  const std::size_t keep = (u.size() + 2) / 3;
  const std::size_t band = std::max<std::size_t>(1, u.size() / 32);
  double peak = 0.0;
  double tail = 0.0;
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
    const double a = std::abs(s.coeffs[j]);
    peak = std::max(peak, a);
    if (j < keep && j + band >= keep) tail = std::max(tail, a);
  }
  return peak > 0.0 ? tail / peak : 0.0;
}

}  // namespace chlab
