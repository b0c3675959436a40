#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hqc/embedding.hpp"
#include "hqc/hqc_engine.hpp"
#include "hqc/statdist.hpp"

namespace hqc {

inline constexpr const char* kVersion = "0.1.0";

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "HQC_OUTPUT_DIR";

/// Alternative distance run through the same merge loop as MMD.
struct Baseline {
  enum class Kind { none, jaccard, overlap, ks, ad };
  Kind kind = Kind::none;
  std::string column;  // feature column for ks/ad

  /// Accepts none | jaccard | overlap | ks:<column> | ad:<column>.
  static Baseline parse(const std::string& text);
  std::string to_string() const;
};

struct RunConfig {
  std::filesystem::path input;
  std::string label_column;
  std::vector<std::string> feature_columns;  // empty: all numeric columns
  std::optional<std::size_t> top_k;
  std::size_t min_count = 2;
  GammaMode gamma_mode = GammaMode::unit_variance_default;
  double gamma = 0.5;  // used when gamma_mode == fixed
  std::optional<std::size_t> cap;
  std::uint64_t seed = 0;
  std::size_t bootstrap_b = 0;  // 0 disables merge p-values
  std::filesystem::path output_dir;
  Baseline baseline;
  std::string context_column;  // token column for jaccard/overlap baselines
  unsigned threads = 0;        // 0: hardware concurrency
};

/// Throws ConfigError on out-of-range values or missing required fields.
void validate(const RunConfig& config);

std::string gamma_mode_name(GammaMode mode);
GammaMode parse_gamma_mode(const std::string& text);

/// `$HQC_OUTPUT_DIR` if set and non-empty, otherwise "hqc_out".
std::filesystem::path default_output_dir();

struct PipelineResult {
  Dataset dataset;  // filtered and standardized
  std::vector<ValueGroup> groups;
  KernelConfig kernel;
  HqcResult clustering;
  std::optional<Embedding2D> embedding;
  std::vector<double> merge_pvalues;  // one per linkage record when bootstrap_b > 0
  std::optional<HqcResult> baseline;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> files;  // file name -> contents, as written
  double wall_time_seconds = 0.0;
};

/// Load, filter, standardize, cluster, embed, and serialize. Artifacts are
/// first written to temporary names in the output directory and renamed only
/// after every file was written, so a failed run leaves no partial outputs.
PipelineResult run_pipeline(const RunConfig& config);

/// In-memory part of run_pipeline: everything except writing files.
PipelineResult compute_pipeline(const RunConfig& config);

/// 2 for ConfigError, 3 for DataError, 4 for anything else.
int exit_code_for(const std::exception& e);

}  // namespace hqc
