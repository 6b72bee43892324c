#pragma once

#include "eulab/core.hpp"

#include <span>
#include <vector>

namespace eulab {

/// Real-to-complex FFT of rank 1..3 over a row-major array, backed by FFTW.
///
/// The forward transform is unnormalized; backward divides by the total
/// number of points so that backward(forward(f)) == f. The complex layout is
/// the usual half spectrum: the last dimension holds n_last/2 + 1 entries.
/// Plans are cached per shape and shared; execution goes through buffers owned
/// by this object, so instances are cheap to create and not thread-safe.
class RealFft {
 public:
  explicit RealFft(std::vector<int> shape);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  const std::vector<int>& shape() const { return shape_; }
  std::size_t real_size() const { return real_size_; }
  std::size_t complex_size() const { return complex_size_; }

  void forward(std::span<const double> in, std::span<Complex> out);
  void backward(std::span<const Complex> in, std::span<double> out);

  RealArray2 backward(const ComplexArray2& in);
  ComplexArray2 forward(const RealArray2& in);

 private:
  std::vector<int> shape_;
  std::size_t real_size_ = 0;
  std::size_t complex_size_ = 0;
  double* rbuf_ = nullptr;
  Complex* cbuf_ = nullptr;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

/// Number of threads FFTW may use for plans created afterwards.
void set_fft_threads(int threads);

}  // namespace eulab
