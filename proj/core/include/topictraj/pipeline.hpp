#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "topictraj/btm.hpp"
#include "topictraj/corpus.hpp"
#include "topictraj/embedding.hpp"
#include "topictraj/lsirm.hpp"

namespace topictraj {

enum class Stage { ingest, embed, btm, select, lsirm, align, render };

const std::vector<Stage>& all_stages();
std::string stage_name(Stage stage);
std::optional<Stage> parse_stage(const std::string& name);

struct WordselectConfig {
  int from_level = 60;
  int to_level = 40;
  int step = 1;
  std::size_t histogram_bins = 40;
  double logprob_cutoff = -11.0;
};

struct AlignConfig {
  double oblimin_gamma = 0.0;
  double tolerance = 1e-6;
  std::size_t max_iterations = 1000;
};

struct RenderConfig {
  std::size_t top_words = 30;
};

struct PipelineConfig {
  std::filesystem::path input;                 // JSONL document file
  std::optional<std::filesystem::path> stoplist;
  std::optional<std::filesystem::path> topic_labels;
  std::filesystem::path output_dir = "out";

  FilterConfig filter;
  EmbeddingConfig embedding;
  std::size_t expansion_k = 10;
  BtmConfig btm;
  std::size_t btm_max_doc_tokens = 0;
  bool btm_save_retained_counts = false;
  WordselectConfig wordselect;
  LsirmConfig lsirm;
  AlignConfig align;
  RenderConfig render;

  std::uint64_t master_seed = 1;
  std::size_t threads = 1;

  // Relative paths in the file resolve against the file's directory.
  static PipelineConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  void validate() const;
};

struct StageRecord {
  std::string config_fingerprint;
  std::map<std::string, std::string> input_hashes;   // path -> content hash
  std::map<std::string, std::string> output_hashes;
  std::uint64_t seed = 0;
  std::string timestamp;
  bool skipped = false;
};

struct RunManifest {
  std::string version;
  std::map<std::string, StageRecord> stages;

  static RunManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// Executes the requested stages in pipeline order. A stage is skipped when
// the manifest records the same config fingerprint and every input and
// output file still hashes to its recorded value.
RunManifest run_pipeline(const PipelineConfig& config, const std::set<Stage>& stages);

std::string hash_file(const std::filesystem::path& path);

}  // namespace topictraj
