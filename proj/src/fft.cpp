#include "eulab/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <functional>
#include <mutex>
#include <numeric>
#include <utility>

namespace eulab {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool threads_initialized = false;

}  // namespace

void set_fft_threads(int threads) {
  std::lock_guard lock(planner_mutex());
  if (!threads_initialized) {
    fftw_init_threads();
    threads_initialized = true;
  }
  fftw_plan_with_nthreads(std::max(1, threads));
}

RealFft::RealFft(std::vector<int> shape) : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 3) throw ValidationError("RealFft: rank must be 1..3");
  for (int n : shape_)
    if (n < 2) throw ValidationError("RealFft: every dimension must be >= 2");
  real_size_ = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  complex_size_ = real_size_ / shape_.back() * (shape_.back() / 2 + 1);

  std::lock_guard lock(planner_mutex());
  rbuf_ = fftw_alloc_real(real_size_);
  cbuf_ = reinterpret_cast<Complex*>(fftw_alloc_complex(complex_size_));
  auto* c = reinterpret_cast<fftw_complex*>(cbuf_);
  // FFTW_ESTIMATE keeps plan selection (and therefore roundoff) reproducible
  // from run to run.
  const int rank = static_cast<int>(shape_.size());
  fwd_ = fftw_plan_dft_r2c(rank, shape_.data(), rbuf_, c, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_c2r(rank, shape_.data(), c, rbuf_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  if (!fwd_) return;
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

RealFft::RealFft(RealFft&& o) noexcept
    : shape_(std::move(o.shape_)),
      real_size_(o.real_size_),
      complex_size_(o.complex_size_),
      rbuf_(std::exchange(o.rbuf_, nullptr)),
      cbuf_(std::exchange(o.cbuf_, nullptr)),
      fwd_(std::exchange(o.fwd_, nullptr)),
      bwd_(std::exchange(o.bwd_, nullptr)) {}

RealFft& RealFft::operator=(RealFft&& o) noexcept {
  std::swap(shape_, o.shape_);
  std::swap(real_size_, o.real_size_);
  std::swap(complex_size_, o.complex_size_);
  std::swap(rbuf_, o.rbuf_);
  std::swap(cbuf_, o.cbuf_);
  std::swap(fwd_, o.fwd_);
  std::swap(bwd_, o.bwd_);
  return *this;
}

void RealFft::forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() != real_size_ || out.size() != complex_size_)
    throw ValidationError("RealFft::forward: size mismatch");
  std::copy(in.begin(), in.end(), rbuf_);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  std::copy(cbuf_, cbuf_ + complex_size_, out.begin());
}

void RealFft::backward(std::span<const Complex> in, std::span<double> out) {
  if (in.size() != complex_size_ || out.size() != real_size_)
    throw ValidationError("RealFft::backward: size mismatch");
  // c2r destroys its input, hence the copy even when the caller would not care.
  std::copy(in.begin(), in.end(), cbuf_);
  fftw_execute(static_cast<fftw_plan>(bwd_));
  const double scale = 1.0 / static_cast<double>(real_size_);
  std::transform(rbuf_, rbuf_ + real_size_, out.begin(), [scale](double v) { return v * scale; });
}

RealArray2 RealFft::backward(const ComplexArray2& in) {
  if (shape_.size() != 2) throw ValidationError("RealFft: 2D overload on non-2D transform");
  RealArray2 out(shape_[0], shape_[1]);
  backward(std::span<const Complex>(in.data(), in.size()), std::span<double>(out.data(), out.size()));
  return out;
}

ComplexArray2 RealFft::forward(const RealArray2& in) {
  if (shape_.size() != 2) throw ValidationError("RealFft: 2D overload on non-2D transform");
  ComplexArray2 out(shape_[0], shape_[1] / 2 + 1);
  forward(std::span<const double>(in.data(), in.size()), std::span<Complex>(out.data(), out.size()));
  return out;
}

}  // namespace eulab
