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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "jointspace/error.hpp"
#include "jointspace/fft.hpp"
#include "jointspace/matrix.hpp"
#include "jointspace/rng.hpp"

namespace jointspace {

// Mono waveform, nominal amplitude in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 0.0;

  double duration_s() const {
    return sample_rate > 0.0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

// Log-mel front-end parameters. Defaults: 44.1 kHz, 1024-sample window,
// 320-sample hop, 64 mel bins spanning 50-8000 Hz.
//
// Conventions frozen here so cached features and goldens stay stable:
//   - periodic Hann window
//   - center alignment with reflect padding
//   - HTK mel scale, mel(f) = 2595 * log10(1 + f/700)
//   - natural log with floor 1e-10 applied to mel power
struct MelParams {
  double sample_rate = 44100.0;
  std::size_t window_size = 1024;
  std::size_t hop_size = 320;
  std::size_t n_mels = 64;
  double f_min = 50.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;

  void validate() const {
    if (sample_rate <= 0.0) throw InvalidParameter("mel: sample_rate must be > 0");
    if (window_size < 1) throw InvalidParameter("mel: window_size must be >= 1");
    if (hop_size < 1 || hop_size > window_size)
      throw InvalidParameter("mel: need 1 <= hop_size <= window_size");
    if (n_mels < 1) throw InvalidParameter("mel: n_mels must be >= 1");
    if (!(0.0 < f_min && f_min < f_max && f_max <= sample_rate / 2.0))
      throw InvalidParameter("mel: need 0 < f_min < f_max <= sample_rate/2");
    if (!(log_floor > 0.0)) throw InvalidParameter("mel: log_floor must be > 0");
  }
};

// Log-power mel spectrogram, n_mels x n_frames.
struct MelSpectrogram {
  Matrix values;
  MelParams params;

  std::size_t n_mels() const { return values.rows; }
  std::size_t n_frames() const { return values.cols; }
};

inline double hz_to_mel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular filterbank over the one-sided FFT bins. Band edges come from
// n_mels + 2 equally-mel-spaced points between f_min and f_max; returned
// matrix is n_mels x (n_fft/2 + 1), unnormalized (HTK style).
inline Matrix mel_filterbank(const MelParams& p, std::size_t n_fft) {
  p.validate();
  const std::size_t n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(p.f_min);
  const double mel_hi = hz_to_mel(p.f_max);
  std::vector<double> edges(p.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(p.n_mels + 1));
  }
  Matrix fb(p.n_mels, n_bins, 0.0);
  for (std::size_t m = 0; m < p.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * p.sample_rate /
                       static_cast<double>(n_fft);
      double w = 0.0;
      if (f > left && f < right) {
        w = f <= center ? (f - left) / (center - left)
                        : (right - f) / (right - center);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

// Center frequencies (Hz) of the filters produced by mel_filterbank.
inline std::vector<double> mel_filter_centers(const MelParams& p) {
  p.validate();
  const double mel_lo = hz_to_mel(p.f_min);
  const double mel_hi = hz_to_mel(p.f_max);
  std::vector<double> centers(p.n_mels);
  for (std::size_t m = 0; m < p.n_mels; ++m) {
    centers[m] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(m + 1) /
                               static_cast<double>(p.n_mels + 1));
  }
  return centers;
}

namespace detail {

// Reflect index mapping without edge repetition: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
inline std::size_t reflect_index(std::int64_t pos, std::size_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * static_cast<std::int64_t>(n) - 2;
  std::int64_t m = pos % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<std::int64_t>(n) ? m
                                                                   : period - m);
}

}  // namespace detail

// Band-limited resampling with a 64-tap windowed-sinc kernel (Blackman
// window, 32 taps per side, cutoff scaled for downsampling). Identical
// source/target rates return the input bit for bit.
inline Waveform resample(const Waveform& w, double target_rate) {
  if (target_rate <= 0.0) throw InvalidParameter("resample: target_rate must be > 0");
  if (w.sample_rate <= 0.0) throw InvalidParameter("resample: source rate must be > 0");
  if (target_rate == w.sample_rate) return w;

  const std::size_t n = w.samples.size();
  Waveform out;
  out.sample_rate = target_rate;
  if (n == 0) return out;

  const double ratio = target_rate / w.sample_rate;
  const std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * ratio));
  out.samples.resize(out_len);

  constexpr int kHalfTaps = 32;
  const double cutoff = std::min(1.0, ratio);
  auto kernel = [&](double x) {
    // x in source-sample units
    const double u = x / kHalfTaps;  // window argument in [-1, 1]
    if (u <= -1.0 || u >= 1.0) return 0.0;
    const double win = 0.42 + 0.5 * std::cos(std::numbers::pi * u) +
                       0.08 * std::cos(2.0 * std::numbers::pi * u);
    const double a = std::numbers::pi * cutoff * x;
    const double sinc = x == 0.0 ? 1.0 : std::sin(a) / a;
    return cutoff * sinc * win;
  };

  for (std::size_t i = 0; i < out_len; ++i) {
    const double t = static_cast<double>(i) / ratio;  // position in source
    const std::int64_t k0 = static_cast<std::int64_t>(std::floor(t));
    double acc = 0.0;
    for (std::int64_t k = k0 - kHalfTaps + 1; k <= k0 + kHalfTaps; ++k) {
      if (k < 0 || k >= static_cast<std::int64_t>(n)) continue;
      acc += w.samples[static_cast<std::size_t>(k)] *
             kernel(t - static_cast<double>(k));
    }
    out.samples[i] = acc;
  }
  return out;
}

// STFT power -> mel filterbank -> natural log with floor.
// Frame count is 1 + floor(len / hop) (center alignment).
inline MelSpectrogram log_mel(const Waveform& w, const MelParams& p) {
  p.validate();
  if (w.sample_rate != p.sample_rate)
    throw InvalidParameter("log_mel: waveform rate does not match MelParams");
  const std::size_t n = w.samples.size();
  if (n < 1) throw InvalidParameter("log_mel: empty waveform");

  const std::size_t win = p.window_size;
  const std::size_t n_frames = 1 + n / p.hop_size;
  std::vector<double> hann(win);
  for (std::size_t j = 0; j < win; ++j) {
    hann[j] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                   static_cast<double>(j) /
                                   static_cast<double>(win));
  }

  RealPowerSpectrum fft(win);
  const Matrix fb = mel_filterbank(p, win);
  const std::size_t n_bins = fft.n_bins();
  std::vector<double> frame(win), power(n_bins);
  const double floor_log = std::log(p.log_floor);

  MelSpectrogram mel;
  mel.params = p;
  mel.values = Matrix(p.n_mels, n_frames, 0.0);
  const std::int64_t half = static_cast<std::int64_t>(win) / 2;

  for (std::size_t t = 0; t < n_frames; ++t) {
    const std::int64_t start =
        static_cast<std::int64_t>(t * p.hop_size) - half;
    for (std::size_t j = 0; j < win; ++j) {
      frame[j] =
          w.samples[detail::reflect_index(start + static_cast<std::int64_t>(j), n)] *
          hann[j];
    }
    fft.compute(frame, power);
    for (std::size_t m = 0; m < p.n_mels; ++m) {
      double acc = 0.0;
      const double* fbrow = fb.data.data() + m * n_bins;
      for (std::size_t k = 0; k < n_bins; ++k) acc += fbrow[k] * power[k];
      mel.values(m, t) = acc > p.log_floor ? std::log(acc) : floor_log;
    }
  }
  return mel;
}

// Exact-length crop: longer inputs take a uniformly random contiguous window;
// shorter inputs are repeated cyclically and cut. Exactly one RNG draw is
// consumed when a crop offset is needed, none otherwise.
inline Waveform random_crop_or_pad(const Waveform& w, double target_s,
                                   Rng& rng) {
  if (target_s <= 0.0) throw InvalidParameter("crop: target_s must be > 0");
  if (w.sample_rate <= 0.0) throw InvalidParameter("crop: invalid sample rate");
  const std::size_t target = static_cast<std::size_t>(
      std::llround(target_s * w.sample_rate));
  if (target == 0) throw InvalidParameter("crop: target shorter than one sample");
  const std::size_t n = w.samples.size();
  if (n == 0) throw InvalidParameter("crop: empty waveform");

  Waveform out;
  out.sample_rate = w.sample_rate;
  if (n == target) {
    out.samples = w.samples;
    return out;
  }
  out.samples.resize(target);
  if (n > target) {
    const std::size_t offset =
        static_cast<std::size_t>(rng.next_below(n - target + 1));
    std::copy(w.samples.begin() + offset, w.samples.begin() + offset + target,
              out.samples.begin());
  } else {
    for (std::size_t i = 0; i < target; ++i) out.samples[i] = w.samples[i % n];
  }
  return out;
}

// Deterministic center crop used at evaluation time (cyclic pad from the
// start when the clip is shorter than the target).
inline Waveform center_crop_or_pad(const Waveform& w, double target_s) {
  if (target_s <= 0.0) throw InvalidParameter("crop: target_s must be > 0");
  const std::size_t target = static_cast<std::size_t>(
      std::llround(target_s * w.sample_rate));
  if (target == 0) throw InvalidParameter("crop: target shorter than one sample");
  const std::size_t n = w.samples.size();
  if (n == 0) throw InvalidParameter("crop: empty waveform");

  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(target);
  if (n >= target) {
    const std::size_t offset = (n - target) / 2;
    std::copy(w.samples.begin() + offset, w.samples.begin() + offset + target,
              out.samples.begin());
  } else {
    for (std::size_t i = 0; i < target; ++i) out.samples[i] = w.samples[i % n];
  }
  return out;
}

}  // namespace jointspace
