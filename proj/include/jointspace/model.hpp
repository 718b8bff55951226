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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jointspace/encoders.hpp"
#include "jointspace/error.hpp"
#include "jointspace/matrix.hpp"
#include "jointspace/rng.hpp"

namespace jointspace {

// The joint-space model: two learnable linear projections (weights + bias)
// into a shared d-dimensional space, plus a learnable logit scale.
//
// Scale convention: similarities are multiplied by s = exp(log_scale) = 1/tau.
// With the default tau_init = 0.007 that is s ~ 142.86. Multiplying cosines
// by a literal tau of 0.007 would collapse every logit toward zero, so the
// 1/tau convention is the default; the literal reading stays available via
// init_projection_model(..., literal_tau=true), which widens the clamp so a
// scale below one survives the optimizer.
struct ProjectionModel {
  Matrix w_audio;               // d x V
  std::vector<double> b_audio;  // d
  Matrix w_text;                // d x U
  std::vector<double> b_text;   // d
  double log_scale = 0.0;
  double scale_min = 1.0;
  double scale_max = 1000.0;

  std::size_t dim() const { return w_audio.rows; }
  std::size_t audio_input_dim() const { return w_audio.cols; }
  std::size_t text_input_dim() const { return w_text.cols; }
  double scale() const { return std::exp(log_scale); }

  std::size_t parameter_count() const {
    return w_audio.data.size() + b_audio.size() + w_text.data.size() +
           b_text.size() + 1;
  }

  void clamp_scale() {
    const double lo = std::log(scale_min), hi = std::log(scale_max);
    if (log_scale < lo) log_scale = lo;
    if (log_scale > hi) log_scale = hi;
  }

  bool all_finite() const {
    return w_audio.all_finite() && jointspace::all_finite(b_audio) &&
           w_text.all_finite() && jointspace::all_finite(b_text) &&
           std::isfinite(log_scale);
  }
};

// Weights: uniform in +/- sqrt(6 / (fan_in + fan_out)); biases zero. Each
// weight matrix draws from its own named substream, row-major order.
inline ProjectionModel init_projection_model(std::size_t d, std::size_t v,
                                             std::size_t u, double tau_init,
                                             bool literal_tau,
                                             std::uint64_t seed) {
  if (d < 1 || v < 1 || u < 1)
    throw InvalidParameter("init_projection_model: dims must be >= 1");
  if (!(tau_init > 0.0))
    throw InvalidParameter("init_projection_model: tau_init must be > 0");

  ProjectionModel m;
  m.w_audio = Matrix(d, v);
  m.b_audio.assign(d, 0.0);
  m.w_text = Matrix(d, u);
  m.b_text.assign(d, 0.0);

  auto fill = [&](Matrix& w, const char* name) {
    Rng rng = substream(seed, std::string("init/") + name);
    const double bound =
        std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
    for (double& x : w.data) x = rng.next_uniform(-bound, bound);
  };
  fill(m.w_audio, "w_audio");
  fill(m.w_text, "w_text");

  if (literal_tau) {
    m.log_scale = std::log(tau_init);
    m.scale_min = 1e-4;
  } else {
    m.log_scale = std::log(1.0 / tau_init);
  }
  m.clamp_scale();
  return m;
}

// N x d batch of joint-space embeddings; `normalized` records that every row
// has unit L2 norm.
struct EmbeddingMatrix {
  Matrix values;
  bool normalized = false;

  std::size_t size() const { return values.rows; }
  std::size_t dim() const { return values.cols; }
};

// Scaled cosine logits, rows = text, columns = audio.
struct SimilarityMatrix {
  Matrix logits;

  std::size_t size() const { return logits.rows; }
};

struct LossGrads {
  Matrix dw_audio;
  std::vector<double> db_audio;
  Matrix dw_text;
  std::vector<double> db_text;
  double d_log_scale = 0.0;

  bool all_finite() const {
    return dw_audio.all_finite() && jointspace::all_finite(db_audio) &&
           dw_text.all_finite() && jointspace::all_finite(db_text) &&
           std::isfinite(d_log_scale);
  }
};

namespace detail {

// Pre-normalization projection rows: P = X W^T + b.
inline Matrix project_raw(const Matrix& w, std::span<const double> b,
                          const Matrix& x) {
  Matrix p(x.rows, w.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = x.data.data() + i * x.cols;
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double* wr = w.data.data() + r * w.cols;
      double acc = b[r];
      for (std::size_t c = 0; c < w.cols; ++c) acc += wr[c] * xi[c];
      p(i, r) = acc;
    }
  }
  return p;
}

// Row-normalizes p in place and returns the original row norms.
inline std::vector<double> normalize_rows(Matrix& p) {
  std::vector<double> norms(p.rows);
  for (std::size_t i = 0; i < p.rows; ++i) {
    const double n = l2_norm(p.row(i));
    if (!(n > 0.0) || !std::isfinite(n))
      throw Error("projection produced a zero or non-finite row norm");
    norms[i] = n;
    for (double& v : p.row(i)) v /= n;
  }
  return norms;
}

inline double log_sum_exp(std::span<const double> v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

}  // namespace detail

// Linear projection followed by L2 row normalization. The modality picks the
// projection; input dim must match it.
inline EmbeddingMatrix project(const ProjectionModel& model,
                               const FeatureMatrix& feats) {
  const bool audio = feats.modality == Modality::audio;
  const Matrix& w = audio ? model.w_audio : model.w_text;
  const std::vector<double>& b = audio ? model.b_audio : model.b_text;
  if (feats.dim() != w.cols)
    throw ShapeError("project: feature dim " + std::to_string(feats.dim()) +
                     " does not match " + std::string(to_string(feats.modality)) +
                     " projection input " + std::to_string(w.cols));
  EmbeddingMatrix e;
  e.values = detail::project_raw(w, b, feats.values);
  detail::normalize_rows(e.values);
  e.normalized = true;
  return e;
}

// logits[i][j] = scale * <text row i, audio row j>. Both inputs must be
// normalized and of equal shape; on unit rows |logits| <= scale everywhere.
inline SimilarityMatrix similarity(const EmbeddingMatrix& text,
                                   const EmbeddingMatrix& audio,
                                   double scale) {
  if (!text.normalized || !audio.normalized)
    throw InvalidParameter("similarity: embeddings must be normalized");
  if (text.size() != audio.size() || text.dim() != audio.dim())
    throw ShapeError("similarity: embedding shapes differ");
  SimilarityMatrix c;
  c.logits = Matrix(text.size(), text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    for (std::size_t j = 0; j < audio.size(); ++j) {
      c.logits(i, j) = scale * dot(text.values.row(i), audio.values.row(j));
    }
  }
  return c;
}

// Symmetric cross-entropy over the similarity matrix: the mean of a
// texts-as-queries term (softmax over rows) and an audios-as-queries term
// (softmax over columns), with the matched pairs on the diagonal. Returned
// as a quantity to minimize, so always >= 0 for finite input.
inline double contrastive_loss(const SimilarityMatrix& sim) {
  const Matrix& c = sim.logits;
  if (c.rows != c.cols) throw ShapeError("contrastive_loss: matrix not square");
  const std::size_t n = c.rows;
  if (n < 1) throw InvalidParameter("contrastive_loss: empty matrix");
  if (!c.all_finite())
    throw InvalidParameter("contrastive_loss: non-finite logits");

  double row_term = 0.0;
  std::vector<double> col(n);
  for (std::size_t i = 0; i < n; ++i) {
    row_term += c(i, i) - detail::log_sum_exp(c.row(i));
  }
  double col_term = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = c(i, j);
    col_term += c(j, j) - detail::log_sum_exp(col);
  }
  return -0.5 * (row_term + col_term) / static_cast<double>(n);
}

// Loss plus exact analytic gradients with respect to every model parameter.
//
// Backward path: symmetric CE -> scaled similarity -> L2 row normalization
// (Jacobian (I - e e^T)/||p||) -> linear projection. d_log_scale is
// s * dL/ds since s = exp(log_scale). The returned loss is computed by
// contrastive_loss() on the same similarity matrix, so the forward value is
// bit-identical to the plain evaluation path.
inline std::pair<double, LossGrads> loss_gradients(const ProjectionModel& model,
                                                   const FeatureMatrix& audio,
                                                   const FeatureMatrix& text) {
  if (audio.modality != Modality::audio || text.modality != Modality::text)
    throw InvalidParameter("loss_gradients: feature modalities are swapped");
  if (audio.size() != text.size())
    throw ShapeError("loss_gradients: batch sizes differ");
  const std::size_t n = audio.size();
  if (n < 1) throw InvalidParameter("loss_gradients: empty batch");
  if (!model.all_finite() || !audio.values.all_finite() ||
      !text.values.all_finite())
    throw NonFiniteGradient(
        "loss_gradients: non-finite model parameters or features");
  const std::size_t d = model.dim();

  // Forward.
  Matrix e_a = detail::project_raw(model.w_audio, model.b_audio, audio.values);
  const std::vector<double> norm_a = detail::normalize_rows(e_a);
  Matrix e_t = detail::project_raw(model.w_text, model.b_text, text.values);
  const std::vector<double> norm_t = detail::normalize_rows(e_t);

  const double s = model.scale();
  Matrix dots(n, n);  // <e_t_i, e_a_j>, kept for the scale gradient
  SimilarityMatrix sim;
  sim.logits = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dots(i, j) = dot(e_t.row(i), e_a.row(j));
      sim.logits(i, j) = s * dots(i, j);
    }
  }
  const double loss = contrastive_loss(sim);

  // dL/dC = (softmax_rows + softmax_cols - 2 I) / (2N).
  Matrix g(n, n);
  std::vector<double> col(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lse = detail::log_sum_exp(sim.logits.row(i));
    for (std::size_t j = 0; j < n; ++j)
      g(i, j) = std::exp(sim.logits(i, j) - lse);
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = sim.logits(i, j);
    const double lse = detail::log_sum_exp(col);
    for (std::size_t i = 0; i < n; ++i)
      g(i, j) += std::exp(sim.logits(i, j) - lse);
  }
  const double inv2n = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    g(i, i) -= 2.0;
    for (std::size_t j = 0; j < n; ++j) g(i, j) *= inv2n;
  }

  // Scale gradient: dL/ds = sum_ij g_ij * dots_ij; chain through s = e^ls.
  double dl_ds = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) dl_ds += g.data[i] * dots.data[i];

  LossGrads grads;
  grads.dw_audio = Matrix(d, model.audio_input_dim());
  grads.db_audio.assign(d, 0.0);
  grads.dw_text = Matrix(d, model.text_input_dim());
  grads.db_text.assign(d, 0.0);
  grads.d_log_scale = s * dl_ds;

  // Gradients w.r.t. embeddings, then through normalization and projection.
  std::vector<double> ge(d), gp(d);
  for (std::size_t i = 0; i < n; ++i) {  // text rows
    std::fill(ge.begin(), ge.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = s * g(i, j);
      const double* ea = e_a.data.data() + j * d;
      for (std::size_t k = 0; k < d; ++k) ge[k] += w * ea[k];
    }
    const double* et = e_t.data.data() + i * d;
    const double proj = dot(std::span<const double>(ge), e_t.row(i));
    for (std::size_t k = 0; k < d; ++k)
      gp[k] = (ge[k] - proj * et[k]) / norm_t[i];
    const double* x = text.values.data.data() + i * text.dim();
    for (std::size_t k = 0; k < d; ++k) {
      grads.db_text[k] += gp[k];
      double* row = grads.dw_text.data.data() + k * text.dim();
      for (std::size_t c = 0; c < text.dim(); ++c) row[c] += gp[k] * x[c];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {  // audio columns
    std::fill(ge.begin(), ge.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = s * g(i, j);
      const double* et = e_t.data.data() + i * d;
      for (std::size_t k = 0; k < d; ++k) ge[k] += w * et[k];
    }
    const double* ea = e_a.data.data() + j * d;
    const double proj = dot(std::span<const double>(ge), e_a.row(j));
    for (std::size_t k = 0; k < d; ++k)
      gp[k] = (ge[k] - proj * ea[k]) / norm_a[j];
    const double* x = audio.values.data.data() + j * audio.dim();
    for (std::size_t k = 0; k < d; ++k) {
      grads.db_audio[k] += gp[k];
      double* row = grads.dw_audio.data.data() + k * audio.dim();
      for (std::size_t c = 0; c < audio.dim(); ++c) row[c] += gp[k] * x[c];
    }
  }
  return {loss, std::move(grads)};
}

}  // namespace jointspace
