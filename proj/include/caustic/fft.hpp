#pragma once

// Thin RAII wrapper over FFTW's real-to-complex transforms, for double and
// __float128. Coefficients are normalized so that
//   g(j/N) = sum_k c_k exp(2 pi i k j / N),
// i.e. the forward transform divides by N.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <type_traits>
#include <vector>

#include "numeric.hpp"

namespace caustic::fft {

namespace detail {

// The FFTW planner is not reentrant; execution is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class Real>
struct Fftw;

template <>
struct Fftw<double> {
  using complex_t = fftw_complex;
  using plan_t = fftw_plan;
  static void* alloc(std::size_t bytes) { return fftw_malloc(bytes); }
  static void release(void* p) { fftw_free(p); }
  static plan_t r2c(int n, double* in, complex_t* out) {
    return fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  static plan_t c2r(int n, complex_t* in, double* out) {
    return fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
  }
  static void execute(plan_t p) { fftw_execute(p); }
  static void destroy(plan_t p) { fftw_destroy_plan(p); }
};

template <>
struct Fftw<quad> {
  using complex_t = fftwq_complex;
  using plan_t = fftwq_plan;
  static void* alloc(std::size_t bytes) { return fftwq_malloc(bytes); }
  static void release(void* p) { fftwq_free(p); }
  static plan_t r2c(int n, quad* in, complex_t* out) {
    return fftwq_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  static plan_t c2r(int n, complex_t* in, quad* out) {
    return fftwq_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
  }
  static void execute(plan_t p) { fftwq_execute(p); }
  static void destroy(plan_t p) { fftwq_destroy_plan(p); }
};

template <class T, class Api>
class Buffer {
 public:
  explicit Buffer(std::size_t n) : n_(n), data_(static_cast<T*>(Api::alloc(sizeof(T) * (n ? n : 1)))) {}
  ~Buffer() { Api::release(data_); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  T* get() const { return data_; }

 private:
  std::size_t n_;
  T* data_;
};

}  // namespace detail

/// Half spectrum c_0..c_{N/2} of real samples.
template <class Real>
std::vector<std::complex<Real>> rfft(std::span<const Real> samples) {
  using Api = detail::Fftw<Real>;
  const std::size_t n = samples.size();
  const std::size_t nc = n / 2 + 1;
  detail::Buffer<Real, Api> in(n);
  detail::Buffer<typename Api::complex_t, Api> out(nc);
  typename Api::plan_t plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan = Api::r2c(static_cast<int>(n), in.get(), out.get());
  }
  for (std::size_t j = 0; j < n; ++j) in.get()[j] = samples[j];
  Api::execute(plan);
  std::vector<std::complex<Real>> coeffs(nc);
  const Real scale = Real(1) / static_cast<Real>(n);
  for (std::size_t k = 0; k < nc; ++k) {
    coeffs[k] = {out.get()[k][0] * scale, out.get()[k][1] * scale};
  }
  {
    std::lock_guard lock(detail::planner_mutex());
    Api::destroy(plan);
  }
  return coeffs;
}

/// Inverse of rfft for a grid of size n; coeffs.size() must be n/2 + 1.
template <class Real>
std::vector<Real> irfft(std::span<const std::complex<Real>> coeffs, std::size_t n) {
  using Api = detail::Fftw<Real>;
  const std::size_t nc = n / 2 + 1;
  detail::Buffer<typename Api::complex_t, Api> in(nc);
  detail::Buffer<Real, Api> out(n);
  typename Api::plan_t plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan = Api::c2r(static_cast<int>(n), in.get(), out.get());
  }
  for (std::size_t k = 0; k < nc; ++k) {
    const auto c = k < coeffs.size() ? coeffs[k] : std::complex<Real>{};
    in.get()[k][0] = c.real();
    in.get()[k][1] = c.imag();
  }
  // The imaginary parts of the DC and Nyquist bins are ignored by a real
  // signal; zero them so c2r sees a consistent Hermitian input.
  in.get()[0][1] = 0;
  if (n % 2 == 0) in.get()[nc - 1][1] = 0;
  Api::execute(plan);
  std::vector<Real> values(out.get(), out.get() + n);
  {
    std::lock_guard lock(detail::planner_mutex());
    Api::destroy(plan);
  }
  return values;
}

}  // namespace caustic::fft
