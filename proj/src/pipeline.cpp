#include "hqc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numeric>

#include <json.hpp>

#include "hqc/error.hpp"
#include "hqc/io.hpp"
#include "hqc/random.hpp"

namespace hqc {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::uint64_t kBootstrapStream = 0x626f6f74ULL;

std::vector<std::size_t> retained_rows(const std::vector<ValueGroup>& groups) {
  std::vector<std::size_t> rows;
  for (const auto& g : groups) rows.insert(rows.end(), g.row_indices.begin(), g.row_indices.end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

ojson config_json(const RunConfig& c) {
  ojson j;
  j["input"] = c.input.string();
  j["label_column"] = c.label_column;
  j["feature_columns"] = c.feature_columns;
  j["top_k"] = c.top_k ? ojson(*c.top_k) : ojson(nullptr);
  j["min_count"] = c.min_count;
  j["gamma_mode"] = gamma_mode_name(c.gamma_mode);
  j["gamma"] = c.gamma;
  j["cap"] = c.cap ? ojson(*c.cap) : ojson(nullptr);
  j["seed"] = c.seed;
  j["bootstrap_b"] = c.bootstrap_b;
  j["output_dir"] = c.output_dir.string();
  j["baseline"] = c.baseline.to_string();
  j["context_column"] = c.context_column;
  j["threads"] = c.threads;
  return j;
}

std::vector<std::string> leaf_values(const std::vector<ValueGroup>& groups) {
  std::vector<std::string> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(g.value);
  return out;
}

std::string merge_pvalues_csv(const std::vector<LinkageRecord>& linkage, const std::vector<double>& raw,
                              const std::vector<double>& pvalues) {
  std::string out = "id,child1,child2,raw_mmd2,p_value\r\n";
  for (std::size_t i = 0; i < linkage.size(); ++i) {
    const auto& r = linkage[i];
    out += std::to_string(r.new_id) + "," + std::to_string(r.child1) + "," + std::to_string(r.child2) + "," +
           io::format_g(raw[i], 10) + "," + io::format_g(pvalues[i], 6) + "\r\n";
  }
  return out;
}

void write_atomically(const std::filesystem::path& dir, const std::map<std::string, std::string>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&] {
    for (const auto& [tmp, _] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [name, contents] : files) {
    const fs::path final_path = dir / name;
    const fs::path tmp = dir / ("." + name + ".tmp");
    staged.emplace_back(tmp, final_path);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << contents;
    out.close();
    if (!out) {
      cleanup();
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  for (const auto& [tmp, final_path] : staged) {
    fs::rename(tmp, final_path, ec);
    if (ec) {
      cleanup();
      throw Error("failed renaming '" + tmp.string() + "': " + ec.message());
    }
  }
}

}  // namespace

Baseline Baseline::parse(const std::string& text) {
  Baseline b;
  if (text.empty() || text == "none") return b;
  if (text == "jaccard") {
    b.kind = Kind::jaccard;
  } else if (text == "overlap") {
    b.kind = Kind::overlap;
  } else if (text.rfind("ks:", 0) == 0 && text.size() > 3) {
    b.kind = Kind::ks;
    b.column = text.substr(3);
  } else if (text.rfind("ad:", 0) == 0 && text.size() > 3) {
    b.kind = Kind::ad;
    b.column = text.substr(3);
  } else {
    throw ConfigError("unknown baseline '" + text + "' (expected none, jaccard, overlap, ks:<column>, ad:<column>)");
  }
  return b;
}

std::string Baseline::to_string() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::jaccard: return "jaccard";
    case Kind::overlap: return "overlap";
    case Kind::ks: return "ks:" + column;
    case Kind::ad: return "ad:" + column;
  }
  return "none";
}

std::string gamma_mode_name(GammaMode mode) {
  switch (mode) {
    case GammaMode::fixed: return "fixed";
    case GammaMode::unit_variance_default: return "unit";
    case GammaMode::median_heuristic: return "median";
  }
  return "unit";
}

GammaMode parse_gamma_mode(const std::string& text) {
  if (text == "fixed") return GammaMode::fixed;
  if (text == "unit" || text == "unit_variance_default") return GammaMode::unit_variance_default;
  if (text == "median" || text == "median_heuristic") return GammaMode::median_heuristic;
  throw ConfigError("unknown gamma mode '" + text + "' (expected unit, median, fixed)");
}

std::filesystem::path default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  if (env != nullptr && *env != '\0') return env;
  return "hqc_out";
}

void validate(const RunConfig& c) {
  if (c.input.empty()) throw ConfigError("an input CSV is required");
  if (c.label_column.empty()) throw ConfigError("a label column is required");
  if (c.min_count < 2) throw ConfigError("min-count must be at least 2");
  if (c.top_k && *c.top_k < 2) throw ConfigError("top-k must be at least 2");
  if (c.cap && *c.cap < 2) throw ConfigError("cap must be at least 2");
  if (c.gamma_mode == GammaMode::fixed && !(c.gamma > 0.0 && std::isfinite(c.gamma))) {
    throw ConfigError("gamma must be positive and finite");
  }
  if (c.output_dir.empty()) throw ConfigError("an output directory is required");
  const bool token_baseline = c.baseline.kind == Baseline::Kind::jaccard || c.baseline.kind == Baseline::Kind::overlap;
  if (token_baseline && c.context_column.empty()) {
    throw ConfigError("baseline '" + c.baseline.to_string() + "' needs --context-column");
  }
  if (!c.context_column.empty() && c.context_column == c.label_column) {
    throw ConfigError("context column must differ from the label column");
  }
}

PipelineResult compute_pipeline(const RunConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  if (config.threads > 0) set_thread_count(config.threads);

  PipelineResult out;
  LoadOptions load;
  load.label_column = config.label_column;
  load.feature_columns = config.feature_columns;
  if (!config.context_column.empty()) load.auxiliary_columns.push_back(config.context_column);
  const Dataset raw = load_csv(config.input, load);

  // Filter to the retained values first, then standardize what is clustered.
  const auto first_pass = group_by_value(raw, config.top_k, config.min_count);
  const auto keep = retained_rows(first_pass);
  out.dataset = standardize(select_rows(raw, keep));
  out.groups = group_by_value(out.dataset, config.top_k, config.min_count);

  for (const auto& col : out.dataset.zero_variance_columns) {
    out.warnings.push_back("column '" + col + "' has zero variance and was set to 0");
  }
  for (const auto& g : out.groups) {
    if (g.count < kSmallGroupWarning) {
      out.warnings.push_back("value '" + g.value + "' has only " + std::to_string(g.count) +
                             " rows; small samples can make squared MMD negative");
    }
  }

  switch (config.gamma_mode) {
    case GammaMode::fixed: out.kernel = KernelConfig::fixed(config.gamma); break;
    case GammaMode::unit_variance_default: out.kernel = KernelConfig::unit_variance_default(); break;
    case GammaMode::median_heuristic: {
      std::vector<std::size_t> all(out.dataset.rows());
      std::iota(all.begin(), all.end(), std::size_t{0});
      out.kernel = resolve_median_gamma(out.dataset, all, config.seed);
      break;
    }
  }

  out.clustering = run_hqc(out.dataset, out.groups, HqcOptions{out.kernel, config.cap, config.seed});
  const auto& linkage = out.clustering.linkage;
  const auto values = leaf_values(out.groups);

  std::vector<double> merge_raw;
  if (config.bootstrap_b > 0) {
    for (const auto& r : linkage) {
      const auto& n1 = out.clustering.nodes[static_cast<std::size_t>(r.child1)];
      const auto& n2 = out.clustering.nodes[static_cast<std::size_t>(r.child2)];
      const Sample s1 = draw_sample(out.dataset, n1.row_indices, config.cap,
                                    rng::derive_seed(config.seed, static_cast<std::uint64_t>(n1.id)));
      const Sample s2 = draw_sample(out.dataset, n2.row_indices, config.cap,
                                    rng::derive_seed(config.seed, static_cast<std::uint64_t>(n2.id)));
      merge_raw.push_back(mmd2_unbiased(s1, s2, out.kernel));
      out.merge_pvalues.push_back(bootstrap_pvalue(
          s1, s2, out.kernel, config.bootstrap_b,
          rng::derive_seed(config.seed ^ kBootstrapStream, static_cast<std::uint64_t>(r.new_id))));
    }
  }

  if (out.groups.size() >= 3) {
    out.embedding = embed_dissimilarity(out.clustering.initial, values);
  } else {
    out.warnings.push_back("fewer than 3 clusters; embedding and scatter plot skipped");
  }

  if (config.baseline.kind != Baseline::Kind::none) {
    std::unique_ptr<ClusterDistance> dist;
    switch (config.baseline.kind) {
      case Baseline::Kind::jaccard:
      case Baseline::Kind::overlap:
        dist = std::make_unique<TokenSetDistance>(
            out.dataset, config.context_column,
            config.baseline.kind == Baseline::Kind::jaccard ? TokenSetDistance::Kind::jaccard
                                                           : TokenSetDistance::Kind::overlap);
        break;
      case Baseline::Kind::ks:
      case Baseline::Kind::ad: {
        const auto col = out.dataset.column_index(config.baseline.column);
        if (!col) throw ConfigError("baseline column '" + config.baseline.column + "' is not a feature column");
        dist = std::make_unique<UnivariateDistance>(
            out.dataset, *col,
            config.baseline.kind == Baseline::Kind::ks ? UnivariateDistance::Kind::ks : UnivariateDistance::Kind::ad);
        break;
      }
      case Baseline::Kind::none: break;
    }
    out.baseline = run_hqc(make_leaves(out.groups), *dist);
  }

  // Serialized artifacts.
  auto& files = out.files;
  files["linkage.csv"] = io::write_linkage_csv(linkage);
  files["dissimilarity.csv"] = io::write_dissimilarity_csv(out.clustering.initial.entries(), values);
  files["dendrogram.json"] = io::dendrogram_json(linkage, values);
  const auto dendro = io::render_dendrogram(linkage, values);
  files["dendrogram.svg"] = dendro.svg;
  files["dendrogram.dot"] = dendro.dot;
  if (out.embedding) {
    files["embedding.csv"] = io::write_embedding_csv(*out.embedding);
    files["scatter.svg"] = io::render_scatter_svg(*out.embedding);
  }
  if (!out.merge_pvalues.empty()) files["merge_pvalues.csv"] = merge_pvalues_csv(linkage, merge_raw, out.merge_pvalues);
  if (out.baseline) {
    files["baseline_linkage.csv"] = io::write_linkage_csv(out.baseline->linkage);
    files["baseline_dissimilarity.csv"] = io::write_dissimilarity_csv(out.baseline->initial.entries(), values);
  }

  out.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ojson manifest;
  manifest["tool"] = "hqc";
  manifest["version"] = kVersion;
  manifest["config"] = config_json(config);
  manifest["gamma_resolved"] = out.kernel.gamma;
  manifest["rows_loaded"] = raw.rows();
  manifest["rows_dropped_missing"] = raw.dropped_rows;
  manifest["rows_excluded_by_filter"] = raw.rows() - keep.size();
  manifest["rows_clustered"] = out.dataset.rows();
  manifest["feature_columns_used"] = out.dataset.column_names;
  manifest["zero_variance_columns"] = out.dataset.zero_variance_columns;
  ojson groups = ojson::array();
  for (std::size_t i = 0; i < out.groups.size(); ++i) {
    groups.push_back({{"id", i}, {"value", out.groups[i].value}, {"count", out.groups[i].count}});
  }
  manifest["groups"] = groups;
  manifest["warnings"] = out.warnings;
  manifest["wall_time_seconds"] = out.wall_time_seconds;
  std::vector<std::string> names;
  for (const auto& [name, _] : files) names.push_back(name);
  names.push_back("run_manifest.json");
  std::sort(names.begin(), names.end());
  manifest["files"] = names;
  files["run_manifest.json"] = manifest.dump(2) + "\n";
  return out;
}

PipelineResult run_pipeline(const RunConfig& config) {
  PipelineResult result = compute_pipeline(config);
  write_atomically(config.output_dir, result.files);
  return result;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const DataError*>(&e) != nullptr) return 3;
  return 4;
}

}  // namespace hqc
