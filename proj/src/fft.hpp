#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mcf::detail {

/// Batched real <-> half-complex transforms backed by FFTW. Plans are created
/// once and executed through the new-array interface, so a single instance
/// may be shared between threads.
class RealFft {
 public:
  /// `howmany` independent rows of length `n` (contiguous).
  RealFft(int n, int howmany);
  struct Square {};
  /// 2-D transform of an n x n row-major array.
  RealFft(Square, int n);
  ~RealFft();

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t real_size() const noexcept { return real_size_; }
  std::size_t complex_size() const noexcept { return complex_size_; }

  void forward(const double* in, std::complex<double>* out) const;
  /// Unnormalized inverse; the input is left untouched.
  void backward(const std::complex<double>* in, double* out) const;

 private:
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
  std::size_t real_size_ = 0;
  std::size_t complex_size_ = 0;
};

}  // namespace mcf::detail
