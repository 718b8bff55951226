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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jointspace/error.hpp"
#include "jointspace/parallel.hpp"
#include "jointspace/text.hpp"
#include "jointspace/wav.hpp"

namespace jointspace {

enum class Split { train, val, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

enum class CaptionMode { description_only, title_plus_description };

inline const char* to_string(CaptionMode m) {
  return m == CaptionMode::description_only ? "description_only"
                                            : "title_plus_description";
}

inline CaptionMode caption_mode_from_string(const std::string& s) {
  if (s == "description_only") return CaptionMode::description_only;
  if (s == "title_plus_description") return CaptionMode::title_plus_description;
  throw InvalidParameter("unknown caption mode '" + s + "'");
}

// One audio-text pair (or, before expansion, one audio with a caption list).
struct ManifestEntry {
  std::string id;
  std::string audio_path;
  std::string title;
  std::string description;
  std::vector<std::string> tags;
  std::string caption;                 // single caption once cleaned/expanded
  std::vector<std::string> captions;   // multi-caption form, consumed by expand_pairs
  Split split = Split::train;
};

struct PairManifest {
  std::vector<ManifestEntry> entries;
  std::string source_label;
};

struct CleaningReport {
  std::uint64_t dropped_empty_audio = 0;
  std::uint64_t dropped_missing_file = 0;
  std::uint64_t dropped_empty_metadata = 0;
  std::uint64_t kept = 0;
};

struct CorpusStats {
  std::uint64_t n_audios = 0;
  std::uint64_t n_captions = 0;
  double total_duration_s = 0.0;
  double max_duration_s = 0.0;
  double avg_duration_s = 0.0;
  std::uint64_t max_words = 0;
  double avg_words = 0.0;
  std::map<std::string, std::uint64_t> word_frequencies;
};

struct StatsResult {
  CorpusStats stats;
  std::vector<std::string> warnings;
};

// Builds a caption from title/description.
//   description_only        -> trimmed description verbatim
//   title_plus_description  -> "<title>. <description>"; no extra period when
//                              the title already ends in . ! or ?; degrades to
//                              whichever part is present.
inline std::string construct_caption(const std::string& title,
                                     const std::string& description,
                                     CaptionMode mode) {
  const std::string t = trim(title);
  const std::string d = trim(description);
  if (mode == CaptionMode::description_only) {
    if (d.empty()) throw CaptionUnavailable("no description available");
    return d;
  }
  if (t.empty() && d.empty())
    throw CaptionUnavailable("both title and description are empty");
  if (t.empty()) return d;
  if (d.empty()) return t;
  const char last = t.back();
  if (last == '.' || last == '!' || last == '?') return t + " " + d;
  return t + ". " + d;
}

namespace detail {

inline bool entry_can_caption(const ManifestEntry& e, CaptionMode mode) {
  if (!trim(e.caption).empty()) return true;
  for (const auto& c : e.captions) {
    if (!trim(c).empty()) return true;
  }
  try {
    construct_caption(e.title, e.description, mode);
    return true;
  } catch (const CaptionUnavailable&) {
    return false;
  }
}

}  // namespace detail

// Drops entries whose audio is missing/undecodable, decodes to zero samples,
// or whose metadata cannot produce a caption under `mode`. Kept entries get
// their fields trimmed and, for the single-caption form, the caption filled
// in. Problems are counted, never thrown; an entry is counted once under the
// first failing check (file, then audio content, then metadata).
inline std::pair<PairManifest, CleaningReport> clean_manifest(
    const std::vector<ManifestEntry>& entries, CaptionMode mode,
    std::string source_label = "") {
  enum class Verdict { keep, missing_file, empty_audio, empty_metadata };
  std::vector<Verdict> verdicts(entries.size(), Verdict::keep);

  parallel_for(entries.size(), [&](std::size_t i) {
    const ManifestEntry& e = entries[i];
    std::error_code ec;
    if (!std::filesystem::is_regular_file(e.audio_path, ec)) {
      verdicts[i] = Verdict::missing_file;
      return;
    }
    WavInfo info;
    try {
      info = read_wav_info(e.audio_path);
    } catch (const IoError&) {
      verdicts[i] = Verdict::missing_file;  // present but undecodable
      return;
    }
    if (info.frames == 0) {
      verdicts[i] = Verdict::empty_audio;
      return;
    }
    if (!detail::entry_can_caption(e, mode)) {
      verdicts[i] = Verdict::empty_metadata;
    }
  });

  PairManifest out;
  out.source_label = std::move(source_label);
  CleaningReport report;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    switch (verdicts[i]) {
      case Verdict::missing_file: ++report.dropped_missing_file; continue;
      case Verdict::empty_audio: ++report.dropped_empty_audio; continue;
      case Verdict::empty_metadata: ++report.dropped_empty_metadata; continue;
      case Verdict::keep: break;
    }
    ManifestEntry e = entries[i];
    e.title = trim(e.title);
    e.description = trim(e.description);
    e.caption = trim(e.caption);
    std::vector<std::string> caps;
    for (const auto& c : e.captions) {
      std::string t = trim(c);
      if (!t.empty()) caps.push_back(std::move(t));
    }
    e.captions = std::move(caps);
    if (e.caption.empty() && e.captions.empty()) {
      e.caption = construct_caption(e.title, e.description, mode);
    }
    ++report.kept;
    out.entries.push_back(std::move(e));
  }
  return {out, report};
}

// One output entry per (audio, caption) combination. Entries carrying a
// caption list are fanned out with ids "<id>#0", "<id>#1", ...; everything
// else passes through unchanged, so the operation is idempotent.
inline PairManifest expand_pairs(const PairManifest& manifest) {
  PairManifest out;
  out.source_label = manifest.source_label;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.captions.empty()) {
      out.entries.push_back(e);
      continue;
    }
    for (std::size_t k = 0; k < e.captions.size(); ++k) {
      ManifestEntry copy = e;
      copy.id = e.id + "#" + std::to_string(k);
      copy.caption = e.captions[k];
      copy.captions.clear();
      out.entries.push_back(std::move(copy));
    }
  }
  std::unordered_set<std::string> seen;
  for (const auto& e : out.entries) {
    if (!seen.insert(e.id).second)
      throw ManifestError("expand_pairs: duplicate id '" + e.id + "'");
  }
  return out;
}

// Corpus statistics. Durations are computed over unique audio files; word
// counts over captions (lowercased, punctuation stripped, whitespace split);
// word frequencies additionally drop the fixed stop-word list. Entries whose
// audio cannot be read are skipped and reported in warnings.
inline StatsResult compute_stats(const PairManifest& manifest) {
  StatsResult result;
  CorpusStats& s = result.stats;

  // Unique audio paths, first-appearance order.
  std::vector<std::string> unique_paths;
  std::unordered_map<std::string, std::size_t> path_index;
  for (const auto& e : manifest.entries) {
    if (path_index.emplace(e.audio_path, unique_paths.size()).second)
      unique_paths.push_back(e.audio_path);
  }

  std::vector<double> durations(unique_paths.size(), -1.0);
  std::vector<std::string> errors(unique_paths.size());
  parallel_for(unique_paths.size(), [&](std::size_t i) {
    try {
      durations[i] = read_wav_info(unique_paths[i]).duration_s();
    } catch (const IoError& err) {
      errors[i] = err.what();
    }
  });

  std::unordered_set<std::string> bad_paths;
  for (std::size_t i = 0; i < unique_paths.size(); ++i) {
    if (durations[i] < 0.0) {
      bad_paths.insert(unique_paths[i]);
      result.warnings.push_back("skipped unreadable audio: " + errors[i]);
    }
  }

  std::unordered_set<std::string> counted_paths;
  std::uint64_t total_words = 0;
  for (const auto& e : manifest.entries) {
    if (bad_paths.count(e.audio_path)) continue;
    const std::size_t pi = path_index.at(e.audio_path);
    if (counted_paths.insert(e.audio_path).second) {
      ++s.n_audios;
      s.total_duration_s += durations[pi];
      s.max_duration_s = std::max(s.max_duration_s, durations[pi]);
    }
    ++s.n_captions;
    const auto tokens = normalize_tokens(e.caption);
    s.max_words = std::max<std::uint64_t>(s.max_words, tokens.size());
    total_words += tokens.size();
    for (const auto& tok : tokens) {
      if (!is_stop_word(tok)) ++s.word_frequencies[tok];
    }
  }
  if (s.n_audios > 0)
    s.avg_duration_s = s.total_duration_s / static_cast<double>(s.n_audios);
  if (s.n_captions > 0)
    s.avg_words = static_cast<double>(total_words) /
                  static_cast<double>(s.n_captions);
  return result;
}

// --- JSONL manifest format ----------------------------------------------
// One JSON object per line. Recognized fields: id, audio_path, title,
// description, tags, caption, captions, split. A `captions` array marks the
// multi-caption form handled by expand_pairs.

namespace detail {

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  std::size_t line) {
  if (!obj.contains(key) || !obj[key].is_string() ||
      obj[key].get<std::string>().empty()) {
    throw ManifestError("line " + std::to_string(line) +
                        ": missing or empty required string field '" + key +
                        "'");
  }
  return obj[key].get<std::string>();
}

inline std::string optional_string(const nlohmann::json& obj, const char* key,
                                   std::size_t line) {
  if (!obj.contains(key) || obj[key].is_null()) return "";
  if (!obj[key].is_string())
    throw ManifestError("line " + std::to_string(line) + ": field '" + key +
                        "' must be a string");
  return obj[key].get<std::string>();
}

inline std::vector<std::string> optional_string_array(const nlohmann::json& obj,
                                                      const char* key,
                                                      std::size_t line) {
  std::vector<std::string> out;
  if (!obj.contains(key) || obj[key].is_null()) return out;
  if (!obj[key].is_array())
    throw ManifestError("line " + std::to_string(line) + ": field '" + key +
                        "' must be an array of strings");
  for (const auto& v : obj[key]) {
    if (!v.is_string())
      throw ManifestError("line " + std::to_string(line) + ": field '" + key +
                          "' must contain only strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline PairManifest parse_manifest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");

  PairManifest manifest;
  manifest.source_label = path.filename().string();
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ManifestError("line " + std::to_string(line_no) +
                          ": invalid JSON: " + e.what());
    }
    if (!obj.is_object())
      throw ManifestError("line " + std::to_string(line_no) +
                          ": expected a JSON object");
    ManifestEntry e;
    e.id = detail::require_string(obj, "id", line_no);
    e.audio_path = detail::require_string(obj, "audio_path", line_no);
    e.title = detail::optional_string(obj, "title", line_no);
    e.description = detail::optional_string(obj, "description", line_no);
    e.caption = detail::optional_string(obj, "caption", line_no);
    e.tags = detail::optional_string_array(obj, "tags", line_no);
    e.captions = detail::optional_string_array(obj, "captions", line_no);
    const std::string split = detail::optional_string(obj, "split", line_no);
    if (split.empty() || split == "train") {
      e.split = Split::train;
    } else if (split == "val") {
      e.split = Split::val;
    } else if (split == "test") {
      e.split = Split::test;
    } else {
      throw ManifestError("line " + std::to_string(line_no) +
                          ": unknown split '" + split + "'");
    }
    if (!ids.insert(e.id).second)
      throw ManifestError("line " + std::to_string(line_no) +
                          ": duplicate id '" + e.id + "'");
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

inline nlohmann::json entry_to_json(const ManifestEntry& e) {
  nlohmann::json obj;
  obj["id"] = e.id;
  obj["audio_path"] = e.audio_path;
  if (!e.title.empty()) obj["title"] = e.title;
  if (!e.description.empty()) obj["description"] = e.description;
  if (!e.caption.empty()) obj["caption"] = e.caption;
  if (!e.captions.empty()) obj["captions"] = e.captions;
  if (!e.tags.empty()) obj["tags"] = e.tags;
  obj["split"] = to_string(e.split);
  return obj;
}

inline void write_manifest_jsonl(const PairManifest& manifest,
                                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  for (const auto& e : manifest.entries) out << entry_to_json(e).dump() << "\n";
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline nlohmann::json to_json(const CleaningReport& r) {
  return nlohmann::json{{"dropped_empty_audio", r.dropped_empty_audio},
                        {"dropped_missing_file", r.dropped_missing_file},
                        {"dropped_empty_metadata", r.dropped_empty_metadata},
                        {"kept", r.kept}};
}

inline nlohmann::json to_json(const CorpusStats& s) {
  nlohmann::json freq = nlohmann::json::object();
  for (const auto& [word, count] : s.word_frequencies) freq[word] = count;
  return nlohmann::json{{"n_audios", s.n_audios},
                        {"n_captions", s.n_captions},
                        {"total_duration_s", s.total_duration_s},
                        {"max_duration_s", s.max_duration_s},
                        {"avg_duration_s", s.avg_duration_s},
                        {"max_words", s.max_words},
                        {"avg_words", s.avg_words},
                        {"word_frequencies", freq}};
}

}  // namespace jointspace
