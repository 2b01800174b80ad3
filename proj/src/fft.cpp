#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace mcf::detail {

namespace {
// Only fftw_execute_* is thread-safe; planning and destruction are not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;
}  // namespace

RealFft::RealFft(int n, int howmany) {
  real_size_ = static_cast<std::size_t>(n) * static_cast<std::size_t>(howmany);
  const int nc = n / 2 + 1;
  complex_size_ = static_cast<std::size_t>(nc) * static_cast<std::size_t>(howmany);
  std::vector<double> r(real_size_);
  std::vector<std::complex<double>> c(complex_size_);
  auto* cp = reinterpret_cast<fftw_complex*>(c.data());
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_many_dft_r2c(1, &n, howmany, r.data(), nullptr, 1, n, cp, nullptr, 1,
                                         nc, kFlags);
  backward_plan_ = fftw_plan_many_dft_c2r(1, &n, howmany, cp, nullptr, 1, nc, r.data(), nullptr,
                                          1, n, kFlags);
}

RealFft::RealFft(Square, int n) {
  real_size_ = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  complex_size_ = static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
  std::vector<double> r(real_size_);
  std::vector<std::complex<double>> c(complex_size_);
  auto* cp = reinterpret_cast<fftw_complex*>(c.data());
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_2d(n, n, r.data(), cp, kFlags);
  backward_plan_ = fftw_plan_dft_c2r_2d(n, n, cp, r.data(), kFlags);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void RealFft::forward(const double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void RealFft::backward(const std::complex<double>* in, double* out) const {
  // c2r overwrites its input
  std::vector<std::complex<double>> scratch(in, in + complex_size_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

}  // namespace mcf::detail
