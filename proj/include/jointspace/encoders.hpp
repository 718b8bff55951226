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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "jointspace/dsp.hpp"
#include "jointspace/error.hpp"
#include "jointspace/hash.hpp"
#include "jointspace/manifest.hpp"
#include "jointspace/matrix.hpp"
#include "jointspace/parallel.hpp"
#include "jointspace/rng.hpp"
#include "jointspace/text.hpp"
#include "jointspace/wav.hpp"

namespace jointspace {

// Deliberately simple encoders. The joint-space training and the
// concatenation fusion are the point of this library; the encoders behind
// the f_a / f_t interface are pluggable, and these desk-scale stand-ins keep
// the whole pipeline deterministic and dependency-free.

enum class Modality : std::uint8_t { audio, text };

inline const char* to_string(Modality m) {
  return m == Modality::audio ? "audio" : "text";
}

// N x D batch of encoder outputs.
struct FeatureMatrix {
  Matrix values;
  Modality modality = Modality::audio;

  std::size_t size() const { return values.rows; }
  std::size_t dim() const { return values.cols; }
};

enum class EncoderKind : std::uint8_t {
  audio_global_pool,
  audio_chunked_pool,
  audio_concat,
  text_hashed_ngram,
};

inline const char* to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::audio_global_pool: return "audio_global_pool";
    case EncoderKind::audio_chunked_pool: return "audio_chunked_pool";
    case EncoderKind::audio_concat: return "audio_concat";
    case EncoderKind::text_hashed_ngram: return "text_hashed_ngram";
  }
  return "audio_concat";
}

inline EncoderKind encoder_kind_from_string(const std::string& s) {
  if (s == "audio_global_pool") return EncoderKind::audio_global_pool;
  if (s == "audio_chunked_pool") return EncoderKind::audio_chunked_pool;
  if (s == "audio_concat") return EncoderKind::audio_concat;
  if (s == "text_hashed_ngram") return EncoderKind::text_hashed_ngram;
  throw InvalidParameter("unknown encoder kind '" + s + "'");
}

// Audio tower. audio_concat fuses two views of the same clip: a long-crop
// global statistics vector (crop_global_s) and a short-crop chunked vector
// that keeps coarse temporal order (crop_chunked_s). The two crops are drawn
// independently from the caller's RNG stream, global first.
struct AudioEncoderSpec {
  EncoderKind kind = EncoderKind::audio_concat;
  MelParams mel;
  double crop_global_s = 20.0;
  double crop_chunked_s = 10.0;
  std::size_t n_chunks = 4;

  void validate() const {
    mel.validate();
    if (kind == EncoderKind::text_hashed_ngram)
      throw InvalidParameter("text encoder kind used as audio encoder");
    if (crop_global_s <= 0.0 || crop_chunked_s <= 0.0)
      throw InvalidParameter("crop lengths must be > 0");
    if (n_chunks < 1) throw InvalidParameter("n_chunks must be >= 1");
  }

  std::size_t output_dim() const {
    const std::size_t global = 2 * mel.n_mels;
    const std::size_t chunked = n_chunks * mel.n_mels;
    switch (kind) {
      case EncoderKind::audio_global_pool: return global;
      case EncoderKind::audio_chunked_pool: return chunked;
      default: return global + chunked;  // concat = sum of child dims
    }
  }
};

struct TextEncoderSpec {
  EncoderKind kind = EncoderKind::text_hashed_ngram;
  std::size_t n_buckets = 4096;
  std::size_t ngram_lo = 1;
  std::size_t ngram_hi = 2;

  void validate() const {
    if (kind != EncoderKind::text_hashed_ngram)
      throw InvalidParameter("audio encoder kind used as text encoder");
    if (n_buckets < 2) throw InvalidParameter("n_buckets must be >= 2");
    if (ngram_lo < 1 || ngram_lo > ngram_hi)
      throw InvalidParameter("need 1 <= ngram_lo <= ngram_hi");
  }

  std::size_t output_dim() const { return n_buckets; }
};

// Per-mel-bin mean and population standard deviation over time,
// concatenated: [means..., stds...] -> 2F dims.
inline std::vector<double> encode_audio_global(const MelSpectrogram& mel) {
  const std::size_t f = mel.n_mels();
  const std::size_t t = mel.n_frames();
  if (t < 1) throw InvalidParameter("encode_audio_global: empty spectrogram");
  std::vector<double> out(2 * f);
  for (std::size_t m = 0; m < f; ++m) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
      const double v = mel.values(m, j);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / static_cast<double>(t);
    const double var = sq / static_cast<double>(t) - mean * mean;
    out[m] = mean;
    out[f + m] = std::sqrt(var > 0.0 ? var : 0.0);
  }
  return out;
}

// Near-equal contiguous split of `total` frames; the remainder is spread
// over the leading chunks (10 across 4 -> 3,3,2,2).
inline std::vector<std::size_t> chunk_lengths(std::size_t total,
                                              std::size_t n_chunks) {
  std::vector<std::size_t> lengths(n_chunks, total / n_chunks);
  for (std::size_t i = 0; i < total % n_chunks; ++i) ++lengths[i];
  return lengths;
}

// Per-chunk per-bin means concatenated in time order -> n_chunks * F dims.
// Chunks that receive zero frames (fewer frames than chunks) contribute
// zeros.
inline std::vector<double> encode_audio_chunked(const MelSpectrogram& mel,
                                                std::size_t n_chunks) {
  if (n_chunks < 1) throw InvalidParameter("encode_audio_chunked: n_chunks >= 1");
  const std::size_t f = mel.n_mels();
  const std::size_t t = mel.n_frames();
  if (t < 1) throw InvalidParameter("encode_audio_chunked: empty spectrogram");
  const auto lengths = chunk_lengths(t, n_chunks);
  std::vector<double> out(n_chunks * f, 0.0);
  std::size_t start = 0;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t len = lengths[c];
    if (len > 0) {
      for (std::size_t m = 0; m < f; ++m) {
        double sum = 0.0;
        for (std::size_t j = start; j < start + len; ++j) sum += mel.values(m, j);
        out[c * f + m] = sum / static_cast<double>(len);
      }
    }
    start += len;
  }
  return out;
}

// Full audio path for one clip: resample to the mel rate if needed, crop per
// the spec's kind, run the mel front end and the pooled encoder(s). For
// audio_concat the output is [global | chunked] in that fixed order.
inline std::vector<double> encode_audio_clip(const Waveform& clip,
                                             const AudioEncoderSpec& spec,
                                             Rng& rng) {
  spec.validate();
  const Waveform* src = &clip;
  Waveform resampled;
  if (clip.sample_rate != spec.mel.sample_rate) {
    resampled = resample(clip, spec.mel.sample_rate);
    src = &resampled;
  }
  auto run_global = [&]() {
    const Waveform crop = random_crop_or_pad(*src, spec.crop_global_s, rng);
    return encode_audio_global(log_mel(crop, spec.mel));
  };
  auto run_chunked = [&]() {
    const Waveform crop = random_crop_or_pad(*src, spec.crop_chunked_s, rng);
    return encode_audio_chunked(log_mel(crop, spec.mel), spec.n_chunks);
  };
  switch (spec.kind) {
    case EncoderKind::audio_global_pool: return run_global();
    case EncoderKind::audio_chunked_pool: return run_chunked();
    default: {
      std::vector<double> out = run_global();
      const std::vector<double> chunked = run_chunked();
      out.insert(out.end(), chunked.begin(), chunked.end());
      return out;
    }
  }
}

// encode_audio_clip with deterministic center crops instead of random ones.
inline std::vector<double> encode_audio_clip_centered(
    const Waveform& clip, const AudioEncoderSpec& spec) {
  spec.validate();
  const Waveform* src = &clip;
  Waveform resampled;
  if (clip.sample_rate != spec.mel.sample_rate) {
    resampled = resample(clip, spec.mel.sample_rate);
    src = &resampled;
  }
  auto run_global = [&]() {
    return encode_audio_global(
        log_mel(center_crop_or_pad(*src, spec.crop_global_s), spec.mel));
  };
  auto run_chunked = [&]() {
    return encode_audio_chunked(
        log_mel(center_crop_or_pad(*src, spec.crop_chunked_s), spec.mel),
        spec.n_chunks);
  };
  switch (spec.kind) {
    case EncoderKind::audio_global_pool: return run_global();
    case EncoderKind::audio_chunked_pool: return run_chunked();
    default: {
      std::vector<double> out = run_global();
      const std::vector<double> chunked = run_chunked();
      out.insert(out.end(), chunked.begin(), chunked.end());
      return out;
    }
  }
}

// Hashed bag of word n-grams, L2-normalized. Tokens follow the shared
// normalization rule; each n-gram (words joined by a single space) is hashed
// with FNV-1a 64 and bucketed modulo n_buckets.
inline std::vector<double> encode_text_hashed(std::string_view caption,
                                              const TextEncoderSpec& spec) {
  spec.validate();
  const auto tokens = normalize_tokens(caption);
  if (tokens.empty())
    throw DegenerateText("caption is empty after normalization");
  std::vector<double> out(spec.n_buckets, 0.0);
  std::size_t total = 0;
  for (std::size_t n = spec.ngram_lo; n <= spec.ngram_hi; ++n) {
    if (n > tokens.size()) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t j = 1; j < n; ++j) {
        gram += ' ';
        gram += tokens[i + j];
      }
      out[fnv1a64(gram) % spec.n_buckets] += 1.0;
      ++total;
    }
  }
  if (total == 0)
    throw DegenerateText("caption produced no n-grams for the configured range");
  const double norm = l2_norm(out);
  for (double& v : out) v /= norm;
  return out;
}

// --- batch encoding -------------------------------------------------------

// Loads (and resamples) each unique audio file once, then encodes every
// entry with its own crop stream "crop/<entry id>/<stream_tag>". The
// per-entry streams make results independent of worker scheduling, and give
// expanded multi-caption entries independent crops of the shared clip.
inline FeatureMatrix encode_manifest_audio(const PairManifest& manifest,
                                           const AudioEncoderSpec& spec,
                                           std::uint64_t seed,
                                           std::string_view stream_tag,
                                           bool center_crop = false) {
  spec.validate();
  const std::size_t n = manifest.entries.size();

  std::vector<std::string> unique_paths;
  std::unordered_map<std::string, std::size_t> path_index;
  for (const auto& e : manifest.entries) {
    if (path_index.emplace(e.audio_path, unique_paths.size()).second)
      unique_paths.push_back(e.audio_path);
  }
  std::vector<Waveform> clips(unique_paths.size());
  parallel_for(unique_paths.size(), [&](std::size_t i) {
    Waveform w = read_wav(unique_paths[i]);
    if (w.samples.empty())
      throw IoError("'" + unique_paths[i] + "': empty audio");
    clips[i] = w.sample_rate == spec.mel.sample_rate
                   ? std::move(w)
                   : resample(w, spec.mel.sample_rate);
  });

  FeatureMatrix feats;
  feats.modality = Modality::audio;
  feats.values = Matrix(n, spec.output_dim());
  parallel_for(n, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    const Waveform& clip = clips[path_index.at(e.audio_path)];
    std::vector<double> v;
    if (center_crop) {
      v = encode_audio_clip_centered(clip, spec);
    } else {
      Rng rng = substream(seed, "crop/" + e.id + "/" + std::string(stream_tag));
      v = encode_audio_clip(clip, spec, rng);
    }
    std::copy(v.begin(), v.end(), feats.values.row(i).begin());
  });
  return feats;
}

inline FeatureMatrix encode_manifest_text(const PairManifest& manifest,
                                          const TextEncoderSpec& spec) {
  spec.validate();
  const std::size_t n = manifest.entries.size();
  FeatureMatrix feats;
  feats.modality = Modality::text;
  feats.values = Matrix(n, spec.output_dim());
  parallel_for(n, [&](std::size_t i) {
    const auto v = encode_text_hashed(manifest.entries[i].caption, spec);
    std::copy(v.begin(), v.end(), feats.values.row(i).begin());
  });
  return feats;
}

}  // namespace jointspace
