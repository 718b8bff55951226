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
#include <span>
#include <string>
#include <vector>

#include "jointspace/error.hpp"
#include "jointspace/model.hpp"

namespace jointspace {

inline constexpr const char* kDefaultPromptTemplate =
    "this is a sound of {label}";

// Substitutes the label into a prompt template. The template must contain
// the "{label}" placeholder at least once.
inline std::string build_prompt(const std::string& label,
                                const std::string& templ =
                                    kDefaultPromptTemplate) {
  if (trim(label).empty()) throw InvalidParameter("build_prompt: empty label");
  const std::string placeholder = "{label}";
  if (templ.find(placeholder) == std::string::npos)
    throw InvalidParameter("build_prompt: template lacks {label} placeholder");
  std::string out = templ;
  std::size_t pos = 0;
  while ((pos = out.find(placeholder, pos)) != std::string::npos) {
    out.replace(pos, placeholder.size(), label);
    pos += label.size();
  }
  return out;
}

enum class ClassificationHead { softmax, sigmoid };

inline const char* to_string(ClassificationHead h) {
  return h == ClassificationHead::softmax ? "softmax" : "sigmoid";
}

inline ClassificationHead head_from_string(const std::string& s) {
  if (s == "softmax") return ClassificationHead::softmax;
  if (s == "sigmoid") return ClassificationHead::sigmoid;
  throw InvalidParameter("unknown classification head '" + s + "'");
}

struct ZeroShotResult {
  std::vector<double> probabilities;       // one per class
  std::size_t top_class = 0;               // argmax of the logits
  std::vector<bool> above_threshold;       // probability > 0.5, per class
};

// Zero-shot classification: one logit per class text, logit = scale *
// cosine(audio, class embedding). softmax yields a distribution over
// classes (binary/multiclass); sigmoid yields independent per-class
// probabilities (multilabel). The argmax decision is invariant to positive
// rescaling of the logit scale; the probability values are not.
inline ZeroShotResult zero_shot_classify(const ProjectionModel& model,
                                         std::span<const double> audio_embedding,
                                         const std::vector<std::string>& class_texts,
                                         const TextEncoderSpec& text_spec,
                                         ClassificationHead head) {
  if (class_texts.empty())
    throw InvalidParameter("zero_shot_classify: empty class list");
  if (audio_embedding.size() != model.dim())
    throw ShapeError("zero_shot_classify: embedding dim mismatch");
  const double norm = l2_norm(audio_embedding);
  if (std::abs(norm - 1.0) > 1e-6)
    throw InvalidParameter("zero_shot_classify: audio embedding not normalized");

  FeatureMatrix class_feats;
  class_feats.modality = Modality::text;
  class_feats.values = Matrix(class_texts.size(), text_spec.output_dim());
  for (std::size_t i = 0; i < class_texts.size(); ++i) {
    const auto v = encode_text_hashed(class_texts[i], text_spec);
    std::copy(v.begin(), v.end(), class_feats.values.row(i).begin());
  }
  const EmbeddingMatrix class_emb = project(model, class_feats);

  const double s = model.scale();
  std::vector<double> logits(class_texts.size());
  for (std::size_t i = 0; i < class_texts.size(); ++i) {
    logits[i] = s * dot(audio_embedding, class_emb.values.row(i));
  }

  ZeroShotResult result;
  result.probabilities.resize(logits.size());
  result.above_threshold.resize(logits.size());
  result.top_class = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[result.top_class]) result.top_class = i;
  }
  if (head == ClassificationHead::softmax) {
    const double mx = logits[result.top_class];
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - mx);
    for (std::size_t i = 0; i < logits.size(); ++i)
      result.probabilities[i] = std::exp(logits[i] - mx) / denom;
  } else {
    for (std::size_t i = 0; i < logits.size(); ++i)
      result.probabilities[i] = 1.0 / (1.0 + std::exp(-logits[i]));
  }
  for (std::size_t i = 0; i < logits.size(); ++i)
    result.above_threshold[i] = result.probabilities[i] > 0.5;
  return result;
}

}  // namespace jointspace
