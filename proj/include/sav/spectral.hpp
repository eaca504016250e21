#pragma once

#include "sav/errors.hpp"
#include "sav/field.hpp"
#include "sav/grid.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

namespace sav {

/// Unnormalized forward-transform coefficients of a real field, full nx*ny
/// spectrum, same row-major layout as Field (mode (ix,iy) at ix*ny+iy).
class Spectrum {
public:
  explicit Spectrum(Grid grid) : grid_(std::move(grid)), buf_(grid_.size()) {}

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return buf_.size(); }
  std::complex<double>* data() { return buf_.data(); }
  const std::complex<double>* data() const { return buf_.data(); }
  std::complex<double>& operator[](std::size_t i) { return buf_[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return buf_[i]; }

private:
  Grid grid_;
  detail::ComplexArray buf_;
};

inline Spectrum forward(const Field& f) {
  const Grid& g = f.grid();
  detail::ComplexArray in(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) in[i] = f[i];
  Spectrum out(g);
  fftw_execute_dft(g.forward_plan(), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

/// Inverse transform with 1/N normalization. The imaginary residue of the
/// output must stay below 1e-10 in max-abs; anything larger indicates a
/// Hermitian-symmetry bug (e.g. an asymmetric symbol table) and raises.
inline Field inverse(const Spectrum& s) {
  const Grid& g = s.grid();
  detail::ComplexArray out(g.size());
  fftw_execute_dft(g.inverse_plan(),
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(s.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(g.size());
  Field f(g);
  double imag_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::complex<double> v = out[i] * scale;
    imag_max = std::max(imag_max, std::abs(v.imag()));
    f[i] = v.real();
  }
  if (!(imag_max <= 1e-10))
    throw numerical_error("inverse transform: imaginary residue " + std::to_string(imag_max) +
                          " exceeds 1e-10 (asymmetric spectrum)");
  ensure_finite(f, "inverse transform");
  return f;
}

/// Constant-coefficient operator as a real multiplier per mode.
class DiagonalSymbol {
public:
  DiagonalSymbol(Grid grid, std::vector<double> multipliers)
      : grid_(std::move(grid)), m_(std::move(multipliers)) {
    if (m_.size() != grid_.size())
      throw std::invalid_argument("DiagonalSymbol: multiplier table size mismatch");
    min_ = std::numeric_limits<double>::infinity();
    for (double v : m_) {
      if (!std::isfinite(v)) throw std::invalid_argument("DiagonalSymbol: non-finite multiplier");
      min_ = std::min(min_, v);
    }
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& multipliers() const { return m_; }
  double operator[](std::size_t i) const { return m_[i]; }
  double min_multiplier() const { return min_; }

private:
  Grid grid_;
  std::vector<double> m_;
  double min_ = 0.0;
};

/// Builds a symbol from fn(kx, ky).
template <class Fn>
DiagonalSymbol make_symbol(const Grid& grid, Fn&& fn) {
  std::vector<double> m(grid.size());
  for (int i = 0; i < grid.nx(); ++i) {
    const double kx = grid.kx()[static_cast<std::size_t>(i)];
    for (int j = 0; j < grid.ny(); ++j)
      m[static_cast<std::size_t>(i) * grid.ny() + j] = fn(kx, grid.ky()[static_cast<std::size_t>(j)]);
  }
  return DiagonalSymbol(grid, std::move(m));
}

/// L2 inner product by collocation quadrature (exact for trigonometric
/// polynomials resolvable on the grid).
inline double inner_product(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "inner_product");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return a.grid().cell_area() * s;
}

/// Same pairing evaluated on spectra via Parseval.
inline double inner_product(const Spectrum& a, const Spectrum& b) {
  require_same_grid(a.grid(), b.grid(), "inner_product");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return a.grid().spectral_weight() * s;
}

inline Spectrum apply_symbol(const DiagonalSymbol& s, const Spectrum& f) {
  require_same_grid(s.grid(), f.grid(), "apply_symbol");
  Spectrum out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = s[i] * f[i];
  return out;
}

inline Field apply_symbol(const DiagonalSymbol& s, const Field& f) {
  require_same_grid(s.grid(), f.grid(), "apply_symbol");
  return inverse(apply_symbol(s, forward(f)));
}

namespace detail {

inline std::string describe_mode(const Grid& g, std::size_t flat) {
  const int i = static_cast<int>(flat) / g.ny();
  const int j = static_cast<int>(flat) % g.ny();
  std::ostringstream os;
  os << "mode (kx=" << g.kx()[static_cast<std::size_t>(i)]
     << ", ky=" << g.ky()[static_cast<std::size_t>(j)] << ")";
  return os.str();
}

/// In-place spectral solve of (a + s(k)) x = rhs. Rejects near-singular modes
/// before dividing. Counts one solve if a counter is supplied.
inline void solve_in_place(double a, const DiagonalSymbol& s, Spectrum& rhs,
                           long long* solve_counter = nullptr) {
  require_same_grid(s.grid(), rhs.grid(), "solve_diagonal");
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    const double den = a + s[i];
    if (std::abs(den) < 1e-14)
      throw numerical_error("solve_diagonal: singular " + describe_mode(rhs.grid(), i) +
                            ", |a + s(k)| = " + std::to_string(std::abs(den)));
    rhs[i] /= den;
  }
  if (solve_counter) ++*solve_counter;
}

} // namespace detail

/// Solves (a*I + S) phi = rhs where S is diagonal in spectral space.
inline Field solve_diagonal(double a, const DiagonalSymbol& s, const Field& rhs) {
  Spectrum r = forward(rhs);
  detail::solve_in_place(a, s, r);
  return inverse(r);
}

/// Quadratic form (G mu, mu) for positive semi-definite G, evaluated
/// spectrally so the result is nonnegative by construction.
inline double dissipation_rate(const DiagonalSymbol& g, const Field& mu) {
  require_same_grid(g.grid(), mu.grid(), "dissipation_rate");
  if (g.min_multiplier() < 0.0)
    throw std::invalid_argument("dissipation_rate: negative multiplier in mobility symbol");
  const Spectrum m = forward(mu);
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += g[i] * std::norm(m[i]);
  return mu.grid().spectral_weight() * s;
}

inline bool mode_kept_by_two_thirds(const Grid& g, std::size_t flat) {
  const int i = static_cast<int>(flat) / g.ny();
  const int j = static_cast<int>(flat) % g.ny();
  return 3 * std::abs(g.freq_x(i)) <= g.nx() && 3 * std::abs(g.freq_y(j)) <= g.ny();
}

/// 2/3-rule truncation: zeroes modes with |frequency index| > n/3 on either axis.
inline void dealias_in_place(Spectrum& s) {
  const Grid& g = s.grid();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!mode_kept_by_two_thirds(g, i)) s[i] = 0.0;
}

inline Field dealias(const Field& f) {
  Spectrum s = forward(f);
  dealias_in_place(s);
  return inverse(s);
}

namespace detail {

/// Multiplies by i*k along one axis. The Nyquist mode is zeroed: for even n
/// the signed layout has no +n/2 partner, so keeping it would make the
/// derivative asymmetric.
inline void derivative_in_place(Spectrum& s, bool along_x) {
  const Grid& g = s.grid();
  const std::complex<double> iu(0.0, 1.0);
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * g.ny() + j;
      if (along_x) {
        const bool nyq = (g.freq_x(i) == -g.nx() / 2);
        s[idx] = nyq ? 0.0 : s[idx] * (iu * g.kx()[static_cast<std::size_t>(i)]);
      } else {
        const bool nyq = (g.freq_y(j) == -g.ny() / 2);
        s[idx] = nyq ? 0.0 : s[idx] * (iu * g.ky()[static_cast<std::size_t>(j)]);
      }
    }
  }
}

} // namespace detail

inline Spectrum derivative_x(const Spectrum& s) {
  Spectrum out = s;
  detail::derivative_in_place(out, true);
  return out;
}

inline Spectrum derivative_y(const Spectrum& s) {
  Spectrum out = s;
  detail::derivative_in_place(out, false);
  return out;
}

inline Field derivative_x(const Field& f) { return inverse(derivative_x(forward(f))); }
inline Field derivative_y(const Field& f) { return inverse(derivative_y(forward(f))); }

} // namespace sav
