// Copyright (c) 2026, the jointspace authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "jointspace/error.hpp"

namespace jointspace {

// One-sided power spectrum of a fixed-size real frame. Power-of-two sizes run
// an iterative radix-2 FFT; other sizes fall back to a direct DFT, which is
// fine for the small non-default window sizes tests use. Instances hold
// scratch buffers and are not safe for concurrent compute() calls; parallel
// code gives each worker its own plan.
class RealPowerSpectrum {
 public:
  explicit RealPowerSpectrum(std::size_t n) : n_(n) {
    if (n == 0) throw InvalidParameter("fft: frame size must be >= 1");
    pow2_ = (n & (n - 1)) == 0;
    if (pow2_) {
      bitrev_.resize(n);
      std::size_t log2n = 0;
      while ((std::size_t{1} << log2n) < n) ++log2n;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < log2n; ++b) {
          r = (r << 1) | ((i >> b) & 1);
        }
        bitrev_[i] = r;
      }
      // Master twiddle table: w[k] = exp(-2*pi*i*k / n) for k < n/2.
      tw_cos_.resize(n / 2);
      tw_sin_.resize(n / 2);
      for (std::size_t k = 0; k < n / 2; ++k) {
        const double a = -2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
        tw_cos_[k] = std::cos(a);
        tw_sin_[k] = std::sin(a);
      }
    } else {
      // DFT basis for bins 0..n/2.
      const std::size_t bins = n / 2 + 1;
      dft_cos_.resize(bins * n);
      dft_sin_.resize(bins * n);
      for (std::size_t k = 0; k < bins; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
          const double a = -2.0 * std::numbers::pi * static_cast<double>(k) *
                           static_cast<double>(j) / static_cast<double>(n);
          dft_cos_[k * n + j] = std::cos(a);
          dft_sin_[k * n + j] = std::sin(a);
        }
      }
    }
    re_.resize(n);
    im_.resize(n);
  }

  std::size_t size() const { return n_; }
  std::size_t n_bins() const { return n_ / 2 + 1; }

  // power[k] = |X_k|^2 for k in [0, n/2].
  void compute(std::span<const double> frame, std::span<double> power) {
    if (frame.size() != n_ || power.size() != n_bins())
      throw ShapeError("fft: frame/power size mismatch");
    if (!pow2_) {
      for (std::size_t k = 0; k < n_bins(); ++k) {
        double re = 0.0, im = 0.0;
        const double* c = &dft_cos_[k * n_];
        const double* s = &dft_sin_[k * n_];
        for (std::size_t j = 0; j < n_; ++j) {
          re += frame[j] * c[j];
          im += frame[j] * s[j];
        }
        power[k] = re * re + im * im;
      }
      return;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      re_[bitrev_[i]] = frame[i];
      im_[bitrev_[i]] = 0.0;
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len >> 1;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const double wr = tw_cos_[k * stride];
          const double wi = tw_sin_[k * stride];
          const std::size_t a = start + k;
          const std::size_t b = a + half;
          const double tr = re_[b] * wr - im_[b] * wi;
          const double ti = re_[b] * wi + im_[b] * wr;
          re_[b] = re_[a] - tr;
          im_[b] = im_[a] - ti;
          re_[a] += tr;
          im_[a] += ti;
        }
      }
    }
    for (std::size_t k = 0; k < n_bins(); ++k) {
      power[k] = re_[k] * re_[k] + im_[k] * im_[k];
    }
  }

 private:
  std::size_t n_;
  bool pow2_ = false;
  std::vector<std::size_t> bitrev_;
  std::vector<double> tw_cos_, tw_sin_;
  std::vector<double> dft_cos_, dft_sin_;
  std::vector<double> re_, im_;
};

}  // namespace jointspace
