#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sav {

namespace detail {

/// FFTW plan creation/destruction is not thread safe; execution via
/// fftw_execute_dft with distinct buffers is. All plan management goes
/// through this lock so independent simulations can run concurrently.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// fftw_malloc-backed complex array so buffers satisfy the alignment the
/// plans were created with.
class ComplexArray {
public:
  explicit ComplexArray(std::size_t n)
      : n_(n),
        p_(static_cast<std::complex<double>*>(fftw_malloc(n * sizeof(std::complex<double>)))) {
    if (!p_) throw std::bad_alloc();
  }
  ComplexArray(const ComplexArray& other) : ComplexArray(other.n_) {
    std::copy(other.p_, other.p_ + n_, p_);
  }
  ComplexArray(ComplexArray&& other) noexcept : n_(other.n_), p_(other.p_) {
    other.p_ = nullptr;
    other.n_ = 0;
  }
  ComplexArray& operator=(ComplexArray other) noexcept {
    std::swap(n_, other.n_);
    std::swap(p_, other.p_);
    return *this;
  }
  ~ComplexArray() {
    if (p_) fftw_free(p_);
  }

  std::size_t size() const { return n_; }
  std::complex<double>* data() { return p_; }
  const std::complex<double>* data() const { return p_; }
  std::complex<double>& operator[](std::size_t i) { return p_[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return p_[i]; }

private:
  std::size_t n_;
  std::complex<double>* p_;
};

struct GridImpl {
  int nx = 0, ny = 0;
  double lx = 0, ly = 0;
  std::vector<double> kx, ky; // wavenumbers per index
  std::vector<int> fx, fy;    // signed integer frequencies per index
  fftw_plan forward_plan = nullptr;
  fftw_plan inverse_plan = nullptr;

  ~GridImpl() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (forward_plan) fftw_destroy_plan(forward_plan);
    if (inverse_plan) fftw_destroy_plan(inverse_plan);
  }
};

} // namespace detail

/// Uniform periodic collocation grid on [0,lx) x [0,ly).
///
/// Immutable and cheaply copyable (shared handle); holds the wavenumber
/// tables and the FFT plans for its size. Layout is row-major with the x
/// index slowest: flat index = ix*ny + iy. Frequencies follow the standard
/// signed layout, with the Nyquist mode of an even transform assigned -n/2.
class Grid {
public:
  Grid() = default;

  int nx() const { return impl_->nx; }
  int ny() const { return impl_->ny; }
  double lx() const { return impl_->lx; }
  double ly() const { return impl_->ly; }
  double dx() const { return impl_->lx / impl_->nx; }
  double dy() const { return impl_->ly / impl_->ny; }
  double cell_area() const { return dx() * dy(); }
  double area() const { return impl_->lx * impl_->ly; }
  std::size_t size() const { return static_cast<std::size_t>(impl_->nx) * impl_->ny; }

  /// Parseval weight: inner products equal this times the sum of
  /// |coefficient|^2 over the unnormalized forward transform.
  double spectral_weight() const { return cell_area() / static_cast<double>(size()); }

  const std::vector<double>& kx() const { return impl_->kx; }
  const std::vector<double>& ky() const { return impl_->ky; }
  int freq_x(int i) const { return impl_->fx[static_cast<std::size_t>(i)]; }
  int freq_y(int j) const { return impl_->fy[static_cast<std::size_t>(j)]; }

  double x(int i) const { return dx() * i; }
  double y(int j) const { return dy() * j; }

  bool same_as(const Grid& other) const { return impl_ == other.impl_; }
  bool valid() const { return impl_ != nullptr; }

  fftw_plan forward_plan() const { return impl_->forward_plan; }
  fftw_plan inverse_plan() const { return impl_->inverse_plan; }

  friend Grid make_grid(int nx, int ny, double lx, double ly);

private:
  std::shared_ptr<const detail::GridImpl> impl_;
};

/// Builds a periodic grid. nx, ny must be even and >= 4; lengths positive.
inline Grid make_grid(int nx, int ny, double lx, double ly) {
  if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0)
    throw std::invalid_argument("make_grid: nx and ny must be even and >= 4, got " +
                                std::to_string(nx) + "x" + std::to_string(ny));
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("make_grid: domain lengths must be positive");

  auto impl = std::make_shared<detail::GridImpl>();
  impl->nx = nx;
  impl->ny = ny;
  impl->lx = lx;
  impl->ly = ly;

  auto fill_freqs = [](int n, double len, std::vector<int>& f, std::vector<double>& k) {
    f.resize(static_cast<std::size_t>(n));
    k.resize(static_cast<std::size_t>(n));
    const double two_pi = 2.0 * M_PI;
    for (int i = 0; i < n; ++i) {
      const int fi = (i <= n / 2 - 1) ? i : i - n; // Nyquist lands on -n/2
      f[static_cast<std::size_t>(i)] = fi;
      k[static_cast<std::size_t>(i)] = two_pi * fi / len;
    }
  };
  fill_freqs(nx, lx, impl->fx, impl->kx);
  fill_freqs(ny, ly, impl->fy, impl->ky);

  {
    detail::ComplexArray in(static_cast<std::size_t>(nx) * ny);
    detail::ComplexArray out(static_cast<std::size_t>(nx) * ny);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    // FFTW_ESTIMATE keeps planning deterministic, so identical configs give
    // bit-identical runs.
    impl->forward_plan =
        fftw_plan_dft_2d(nx, ny, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    impl->inverse_plan =
        fftw_plan_dft_2d(nx, ny, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (!impl->forward_plan || !impl->inverse_plan)
    throw std::runtime_error("make_grid: FFT planning failed");

  Grid g;
  g.impl_ = impl;
  return g;
}

} // namespace sav
