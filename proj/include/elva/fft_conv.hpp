// Discrete convolution of a value row with a jump-intensity stencil.
// Small stencils are summed directly; wide ones go through FFTW with a
// kernel spectrum computed once. Values beyond the row are extended as
// constants equal to the nearest row end.
#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace elva {

class JumpConvolver {
 public:
  // `weights[k + half_width]` is the intensity of a jump of k grid cells,
  // k in [-half_width, half_width]; weights.size() == 2*half_width + 1.
  static constexpr std::size_t kDirectSumLimit = 128;

  JumpConvolver(std::vector<double> weights, int half_width, std::size_t row_size)
      : w_(std::move(weights)), half_(half_width), row_(row_size) {
    if (w_.size() != static_cast<std::size_t>(2 * half_ + 1))
      throw std::invalid_argument("JumpConvolver: weight/stencil size mismatch");
    if (half_ == 0 || w_.size() <= kDirectSumLimit) return;

    nfft_ = 1;
    while (nfft_ < row_ + 4 * static_cast<std::size_t>(half_) + 1) nfft_ <<= 1;
    auto spectrum = std::make_shared<std::vector<std::complex<double>>>(nfft_ / 2 + 1);

    // Circular layout so that out[i] = ifft(fft(padded) * kernel)[half_ + i].
    std::vector<double> kernel(nfft_, 0.0);
    kernel[0] = w_[half_];
    for (int k = 1; k <= half_; ++k) {
      kernel[static_cast<std::size_t>(k)] = w_[half_ - k];
      kernel[nfft_ - static_cast<std::size_t>(k)] = w_[half_ + k];
    }
    Buffers tmp(nfft_);
    std::copy(kernel.begin(), kernel.end(), tmp.real);
    fftw_execute(tmp.forward);
    for (std::size_t i = 0; i < nfft_ / 2 + 1; ++i)
      (*spectrum)[i] = std::complex<double>(tmp.cplx[2 * i], tmp.cplx[2 * i + 1]);
    kernel_spectrum_ = std::move(spectrum);
    buffers_ = std::make_unique<Buffers>(nfft_);
  }

  JumpConvolver(const JumpConvolver& other)
      : w_(other.w_), half_(other.half_), row_(other.row_), nfft_(other.nfft_),
        kernel_spectrum_(other.kernel_spectrum_) {
    if (kernel_spectrum_) buffers_ = std::make_unique<Buffers>(nfft_);
  }
  JumpConvolver& operator=(const JumpConvolver&) = delete;

  int half_width() const { return half_; }

  // out[i] = sum_k weights[k] * in_ext[i + k], with constant extension.
  void apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != row_ || out.size() != row_)
      throw std::invalid_argument("JumpConvolver: row size mismatch");
    if (half_ == 0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    if (!kernel_spectrum_) {
      direct(in, out);
      return;
    }
    const std::size_t h = static_cast<std::size_t>(half_);
    double* u = buffers_->real;
    for (std::size_t i = 0; i < h; ++i) u[i] = in.front();
    for (std::size_t i = 0; i < row_; ++i) u[h + i] = in[i];
    for (std::size_t i = 0; i < h; ++i) u[h + row_ + i] = in.back();
    std::fill(u + row_ + 2 * h, u + nfft_, 0.0);
    fftw_execute(buffers_->forward);
    const auto& ks = *kernel_spectrum_;
    for (std::size_t i = 0; i < nfft_ / 2 + 1; ++i) {
      const std::complex<double> a(buffers_->cplx[2 * i], buffers_->cplx[2 * i + 1]);
      const std::complex<double> p = a * ks[i];
      buffers_->cplx[2 * i] = p.real();
      buffers_->cplx[2 * i + 1] = p.imag();
    }
    fftw_execute(buffers_->inverse);
    const double scale = 1.0 / static_cast<double>(nfft_);
    for (std::size_t i = 0; i < row_; ++i) out[i] = u[h + i] * scale;
  }

 private:
  struct Buffers {
    explicit Buffers(std::size_t n) : n_(n) {
      real = fftw_alloc_real(n);
      cplx = fftw_alloc_real(2 * (n / 2 + 1));
      forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real,
                                     reinterpret_cast<fftw_complex*>(cplx),
                                     FFTW_ESTIMATE);
      inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                     reinterpret_cast<fftw_complex*>(cplx), real,
                                     FFTW_ESTIMATE);
    }
    ~Buffers() {
      fftw_destroy_plan(forward);
      fftw_destroy_plan(inverse);
      fftw_free(real);
      fftw_free(cplx);
    }
    std::size_t n_;
    double* real;
    double* cplx;
    fftw_plan forward;
    fftw_plan inverse;
  };

  void direct(std::span<const double> in, std::span<double> out) const {
    const int n = static_cast<int>(row_);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int k = -half_; k <= half_; ++k) {
        const int j = i + k;
        const double v = j < 0 ? in.front() : (j >= n ? in.back() : in[j]);
        acc += w_[static_cast<std::size_t>(k + half_)] * v;
      }
      out[i] = acc;
    }
  }

  std::vector<double> w_;
  int half_ = 0;
  std::size_t row_ = 0;
  std::size_t nfft_ = 0;
  std::shared_ptr<const std::vector<std::complex<double>>> kernel_spectrum_;
  std::unique_ptr<Buffers> buffers_;
};

}  // namespace elva
