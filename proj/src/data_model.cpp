#include "hqc/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hqc/csv.hpp"
#include "hqc/error.hpp"
#include "hqc/random.hpp"

namespace hqc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool is_blank_record(const csv::Record& rec) {
  return rec.fields.size() == 1 && rec.fields[0].empty();
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const char* role) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ConfigError(std::string(role) + " column '" + name + "' not found in CSV header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::optional<std::size_t> Dataset::column_index(const std::string& name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - column_names.begin());
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

Dataset load_csv(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file '" + path.string() + "'");
  return load_csv(in, options);
}

Dataset load_csv(std::istream& in, const LoadOptions& options) {
  csv::Reader reader(in);
  auto header_rec = reader.next();
  if (!header_rec) throw DataError("CSV input is empty");
  const std::vector<std::string>& header = header_rec->fields;

  const std::size_t label_col = find_column(header, options.label_column, "label");
  std::vector<std::size_t> aux_cols;
  for (const auto& name : options.auxiliary_columns) {
    aux_cols.push_back(find_column(header, name, "auxiliary"));
  }

  std::vector<csv::Record> records;
  while (auto rec = reader.next()) {
    if (is_blank_record(*rec)) continue;
    if (rec->fields.size() != header.size()) {
      throw ParseError(rec->line, "expected " + std::to_string(header.size()) +
                                      " fields, found " + std::to_string(rec->fields.size()));
    }
    records.push_back(std::move(*rec));
  }

  auto column_is_numeric = [&](std::size_t col) {
    bool any = false;
    for (const auto& rec : records) {
      const std::string_view cell = trim(rec.fields[col]);
      if (cell.empty()) continue;
      if (!parse_number(cell)) return false;
      any = true;
    }
    return any;
  };

  std::vector<std::size_t> feature_cols;
  if (options.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_col) continue;
      if (std::find(aux_cols.begin(), aux_cols.end(), c) != aux_cols.end()) continue;
      if (column_is_numeric(c)) feature_cols.push_back(c);
    }
  } else {
    for (const auto& name : options.feature_columns) {
      const std::size_t c = find_column(header, name, "feature");
      if (c == label_col) throw ConfigError("feature column '" + name + "' is the label column");
      const bool parses_somewhere = std::any_of(records.begin(), records.end(), [&](const auto& r) {
        return parse_number(r.fields[c]).has_value();
      });
      if (parses_somewhere) feature_cols.push_back(c);
    }
  }
  if (feature_cols.empty()) throw DataError("zero numeric columns selected");

  Dataset ds;
  ds.label_name = options.label_column;
  for (std::size_t c : feature_cols) ds.column_names.push_back(header[c]);
  for (const auto& name : options.auxiliary_columns) ds.auxiliary[name];

  std::vector<double> values;
  values.reserve(records.size() * feature_cols.size());
  std::vector<double> row(feature_cols.size());
  for (const auto& rec : records) {
    const std::string& label = rec.fields[label_col];
    bool ok = !trim(label).empty();
    for (std::size_t j = 0; ok && j < feature_cols.size(); ++j) {
      const auto v = parse_number(rec.fields[feature_cols[j]]);
      if (!v) {
        ok = false;
      } else {
        row[j] = *v;
      }
    }
    if (!ok) {
      ++ds.dropped_rows;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    ds.qualitative.push_back(label);
    for (std::size_t a = 0; a < aux_cols.size(); ++a) {
      ds.auxiliary[options.auxiliary_columns[a]].push_back(rec.fields[aux_cols[a]]);
    }
  }
  if (ds.qualitative.empty()) throw DataError("zero rows survive ingestion");

  ds.quantitative = Eigen::Map<const RowMatrix>(
      values.data(), static_cast<Eigen::Index>(ds.qualitative.size()),
      static_cast<Eigen::Index>(feature_cols.size()));
  return ds;
}

Dataset standardize(const Dataset& dataset) {
  const auto n = dataset.quantitative.rows();
  if (n < 2) throw DataError("standardization needs at least 2 rows");

  Dataset out = dataset;
  out.zero_variance_columns.clear();
  for (Eigen::Index c = 0; c < out.quantitative.cols(); ++c) {
    auto col = out.quantitative.col(c);
    const double mean = col.sum() / static_cast<double>(n);
    const double ss = (col.array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double scale = std::max(1.0, col.cwiseAbs().maxCoeff());
    if (!(sd > 1e-12 * scale)) {
      col.setZero();
      out.zero_variance_columns.push_back(out.column_names[static_cast<std::size_t>(c)]);
    } else {
      col = (col.array() - mean) / sd;
    }
  }
  out.standardized = true;
  return out;
}

std::vector<ValueGroup> group_by_value(const Dataset& dataset, std::optional<std::size_t> top_k,
                                       std::size_t min_count) {
  if (min_count < 2) throw ConfigError("min_count must be at least 2");
  if (top_k && *top_k == 0) throw ConfigError("top_k must be positive");

  std::map<std::string, std::vector<std::size_t>> by_value;
  for (std::size_t i = 0; i < dataset.qualitative.size(); ++i) {
    by_value[dataset.qualitative[i]].push_back(i);
  }

  std::vector<ValueGroup> groups;
  groups.reserve(by_value.size());
  for (auto& [value, rows] : by_value) {
    const std::size_t count = rows.size();
    groups.push_back({value, std::move(rows), count});
  }
  // by_value iterates in value order, so a stable sort on count keeps ties lexicographic.
  std::stable_sort(groups.begin(), groups.end(),
                   [](const ValueGroup& a, const ValueGroup& b) { return a.count > b.count; });

  if (top_k && groups.size() > *top_k) groups.resize(*top_k);
  std::erase_if(groups, [&](const ValueGroup& g) { return g.count < min_count; });

  if (groups.size() < 2) {
    throw DataError("fewer than 2 value groups with at least " + std::to_string(min_count) +
                    " rows; clustering needs at least 2 initial clusters");
  }
  return groups;
}

Dataset select_rows(const Dataset& dataset, std::span<const std::size_t> rows) {
  Dataset out;
  out.column_names = dataset.column_names;
  out.label_name = dataset.label_name;
  out.dropped_rows = dataset.dropped_rows;
  out.zero_variance_columns = dataset.zero_variance_columns;
  out.standardized = dataset.standardized;
  out.quantitative.resize(static_cast<Eigen::Index>(rows.size()), dataset.quantitative.cols());
  out.qualitative.reserve(rows.size());
  for (const auto& [name, col] : dataset.auxiliary) out.auxiliary[name].reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= dataset.rows()) throw std::out_of_range("row index out of range");
    out.quantitative.row(static_cast<Eigen::Index>(i)) =
        dataset.quantitative.row(static_cast<Eigen::Index>(rows[i]));
    out.qualitative.push_back(dataset.qualitative[rows[i]]);
    for (const auto& [name, col] : dataset.auxiliary) out.auxiliary[name].push_back(col[rows[i]]);
  }
  return out;
}

Sample draw_sample(const Dataset& dataset, std::span<const std::size_t> rows,
                   std::optional<std::size_t> cap, std::uint64_t stream_seed) {
  if (rows.empty()) throw std::invalid_argument("cannot draw a sample from zero rows");
  if (cap && *cap < 2) throw std::invalid_argument("subsample cap must be at least 2");

  std::vector<std::size_t> chosen(rows.begin(), rows.end());
  if (cap && chosen.size() > *cap) {
    // Partial Fisher-Yates over positions, then restore the original order.
    std::vector<std::size_t> pos(chosen.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::mt19937_64 gen(stream_seed);
    for (std::size_t i = 0; i < *cap; ++i) {
      const auto j = i + rng::uniform_below(gen, pos.size() - i);
      std::swap(pos[i], pos[j]);
    }
    pos.resize(*cap);
    std::sort(pos.begin(), pos.end());
    std::vector<std::size_t> picked;
    picked.reserve(*cap);
    for (std::size_t p : pos) picked.push_back(chosen[p]);
    chosen = std::move(picked);
  }

  RowMatrix m(static_cast<Eigen::Index>(chosen.size()), dataset.quantitative.cols());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) =
        dataset.quantitative.row(static_cast<Eigen::Index>(chosen[i]));
  }
  return Sample(std::move(m));
}

Sample sample_for(std::span<const ValueGroup> groups, const Dataset& dataset,
                  std::optional<std::size_t> cap, std::uint64_t seed) {
  std::vector<std::size_t> rows;
  std::uint64_t identity = rng::fnv1a("");
  for (const auto& g : groups) {
    rows.insert(rows.end(), g.row_indices.begin(), g.row_indices.end());
    identity = rng::fnv1a(g.value, identity);
    identity = rng::fnv1a("\x1f", identity);
  }
  return draw_sample(dataset, rows, cap, rng::derive_seed(seed, identity));
}

}  // namespace hqc
