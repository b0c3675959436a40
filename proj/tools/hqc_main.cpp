// hqc: cluster the values of a qualitative column by the MMD between their
// conditional quantitative distributions.
//
//   hqc run   --input songs.csv --label-column artists --top-k 30 --output-dir out
//   hqc cut   --run-dir out --threshold 0.4
//   hqc synth --output synthetic.csv --groups 30 --rows 11500 --features 14

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hqc/error.hpp"
#include "hqc/io.hpp"
#include "hqc/pipeline.hpp"
#include "hqc/synthetic.hpp"

namespace {

int run_cut(const std::filesystem::path& run_dir, double threshold) {
  std::ifstream linkage_in(run_dir / "linkage.csv", std::ios::binary);
  std::ifstream dissim_in(run_dir / "dissimilarity.csv", std::ios::binary);
  if (!linkage_in || !dissim_in) {
    throw hqc::ConfigError("run directory '" + run_dir.string() + "' lacks linkage.csv or dissimilarity.csv");
  }
  const auto records = hqc::io::parse_linkage_csv(linkage_in);
  const auto labels = hqc::io::parse_dissimilarity_csv(dissim_in).labels;
  for (const auto& cluster : hqc::cut_linkage(records, labels, threshold)) {
    for (std::size_t i = 0; i < cluster.size(); ++i) std::cout << (i ? "; " : "") << cluster[i];
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical clustering of qualitative values by maximum mean discrepancy"};
  app.set_version_flag("--version", hqc::kVersion);
  app.require_subcommand(1);

  hqc::RunConfig config;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> cap;
  std::string gamma_mode = "unit";
  std::string baseline = "none";
  std::string output_dir;
  std::string feature_columns;

  auto* run = app.add_subcommand("run", "Cluster a CSV and write all artifacts");
  run->add_option("--input", config.input, "Input CSV with a header row")->required();
  run->add_option("--label-column", config.label_column, "Qualitative column to cluster")->required();
  run->add_option("--feature-columns", feature_columns,
                  "Comma-separated quantitative columns (default: every numeric column)");
  run->add_option("--top-k", top_k, "Keep only the K most frequent values");
  run->add_option("--min-count", config.min_count, "Minimum rows per value")->capture_default_str();
  run->add_option("--gamma-mode", gamma_mode, "RBF bandwidth: unit (1/2), median, fixed")
      ->check(CLI::IsMember({"unit", "median", "fixed"}))
      ->capture_default_str();
  run->add_option("--gamma", config.gamma, "RBF gamma for --gamma-mode fixed")->capture_default_str();
  run->add_option("--cap", cap, "Subsample each cluster to at most this many rows");
  run->add_option("--seed", config.seed, "Seed for subsampling and bootstrap")->capture_default_str();
  run->add_option("--bootstrap-b", config.bootstrap_b, "Permutations per merge p-value (0: off)")
      ->capture_default_str();
  run->add_option("--output-dir", output_dir, std::string("Output directory (default: $") + hqc::kOutputDirEnv +
                                                  " or hqc_out)");
  run->add_option("--baseline", baseline, "none | jaccard | overlap | ks:<column> | ad:<column>")
      ->capture_default_str();
  run->add_option("--context-column", config.context_column, "Token column for jaccard/overlap baselines");
  run->add_option("--threads", config.threads, "Worker threads (0: all cores)")->capture_default_str();

  std::filesystem::path run_dir;
  double threshold = 0.0;
  auto* cut = app.add_subcommand("cut", "Print the flat clusters below a distance threshold");
  cut->add_option("--run-dir", run_dir, "Directory of a previous run")->required();
  cut->add_option("--threshold", threshold, "Apply merges with distance < threshold")->required();

  std::filesystem::path synth_out;
  std::size_t synth_groups = 30;
  std::size_t synth_rows = 11500;
  std::size_t synth_features = 14;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic mixed-type CSV");
  synth->add_option("--output", synth_out, "Output CSV path")->required();
  synth->add_option("--groups", synth_groups)->capture_default_str();
  synth->add_option("--rows", synth_rows)->capture_default_str();
  synth->add_option("--features", synth_features)->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      config.top_k = top_k;
      config.cap = cap;
      config.gamma_mode = hqc::parse_gamma_mode(gamma_mode);
      config.baseline = hqc::Baseline::parse(baseline);
      config.output_dir = output_dir.empty() ? hqc::default_output_dir() : std::filesystem::path(output_dir);
      if (!feature_columns.empty()) {
        std::string cur;
        for (char c : feature_columns + ",") {
          if (c == ',') {
            if (!cur.empty()) config.feature_columns.push_back(cur);
            cur.clear();
          } else {
            cur.push_back(c);
          }
        }
      }
      const auto result = hqc::run_pipeline(config);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cerr << "clustered " << result.groups.size() << " values over " << result.dataset.rows()
                << " rows in " << hqc::io::format_g(result.wall_time_seconds, 3) << " s; wrote "
                << result.files.size() << " files to " << config.output_dir.string() << '\n';
      return 0;
    }
    if (*cut) return run_cut(run_dir, threshold);
    if (*synth) {
      const auto groups = hqc::synthetic::benchmark_groups(synth_groups, synth_rows, synth_features, synth_seed);
      std::ofstream out(synth_out, std::ios::binary);
      if (!out) throw hqc::ConfigError("cannot write '" + synth_out.string() + "'");
      out << hqc::synthetic::make_csv(groups, synth_seed);
      return out ? 0 : 4;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hqc::exit_code_for(e);
  }
  return 4;
}
