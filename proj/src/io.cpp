#include "hqc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hqc/csv.hpp"
#include "hqc/error.hpp"

namespace hqc::io {

namespace {

constexpr const char* kLinkageHeader[] = {"id", "child1", "child2", "distance", "size", "values"};

template <typename Int>
Int parse_int(const std::string& text, std::size_t line, const char* what) {
  Int value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& text, std::size_t line, const char* what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty() || !std::isfinite(value)) {
    throw ParseError(line, std::string("invalid ") + what + " '" + text + "'");
  }
  return value;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct LinkageTree {
  std::size_t leaves = 0;
  std::span<const LinkageRecord> records;

  const LinkageRecord& record(int id) const {
    return records[static_cast<std::size_t>(id) - leaves];
  }
  bool is_leaf(int id) const { return static_cast<std::size_t>(id) < leaves; }
  int root() const { return records.empty() ? 0 : records.back().new_id; }
};

LinkageTree make_tree(std::span<const LinkageRecord> records, std::size_t leaf_count) {
  if (leaf_count == 0) throw std::invalid_argument("dendrogram needs at least one leaf");
  if (records.size() + 1 != leaf_count) {
    throw std::invalid_argument("linkage must hold exactly K-1 records for K leaves");
  }
  std::vector<bool> used(leaf_count + records.size(), false);
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto& r = records[t];
    if (r.new_id != static_cast<int>(leaf_count + t) || r.child1 < 0 || r.child2 < 0 ||
        r.child1 >= r.new_id || r.child2 >= r.new_id || r.child1 == r.child2 ||
        used[static_cast<std::size_t>(r.child1)] || used[static_cast<std::size_t>(r.child2)]) {
      throw std::invalid_argument("malformed linkage record " + std::to_string(r.new_id));
    }
    used[static_cast<std::size_t>(r.child1)] = used[static_cast<std::size_t>(r.child2)] = true;
  }
  return {leaf_count, records};
}

std::string leaf_label(std::span<const std::string> labels, int id) {
  return labels[static_cast<std::size_t>(id)] + " [" + std::to_string(id) + "]";
}

}  // namespace

std::string format_g(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, value);
  return buf;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linkage CSV

std::string join_values(std::span<const std::string> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(';');
    for (char c : values[i]) {
      if (c == '\\' || c == ';') out.push_back('\\');
      out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> split_values(const std::string& joined) {
  std::vector<std::string> out;
  if (joined.empty()) return out;
  std::string cur;
  for (std::size_t i = 0; i < joined.size(); ++i) {
    const char c = joined[i];
    if (c == '\\') {
      if (i + 1 == joined.size()) throw std::invalid_argument("dangling escape in value list");
      cur.push_back(joined[++i]);
    } else if (c == ';') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string write_linkage_csv(std::span<const LinkageRecord> records) {
  std::string out = csv::join({std::begin(kLinkageHeader), std::end(kLinkageHeader)});
  out += "\r\n";
  for (const auto& r : records) {
    std::vector<std::string> values = r.values;
    std::sort(values.begin(), values.end());
    out += csv::join({std::to_string(r.new_id), std::to_string(r.child1), std::to_string(r.child2),
                      format_g(r.distance, 6), std::to_string(r.size), join_values(values)});
    out += "\r\n";
  }
  return out;
}

std::vector<LinkageRecord> parse_linkage_csv(std::istream& in) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || header->fields != std::vector<std::string>(std::begin(kLinkageHeader), std::end(kLinkageHeader))) {
    throw ParseError(1, "expected header id,child1,child2,distance,size,values");
  }
  std::vector<LinkageRecord> records;
  while (auto rec = reader.next()) {
    const auto& f = rec->fields;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 6) {
      throw ParseError(rec->line, "expected 6 fields, found " + std::to_string(f.size()));
    }
    LinkageRecord r;
    r.new_id = parse_int<int>(f[0], rec->line, "id");
    r.child1 = parse_int<int>(f[1], rec->line, "child1");
    r.child2 = parse_int<int>(f[2], rec->line, "child2");
    r.distance = parse_real(f[3], rec->line, "distance");
    r.size = parse_int<std::size_t>(f[4], rec->line, "size");
    try {
      r.values = split_values(f[5]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(rec->line, e.what());
    }
    if (r.distance < 0.0) throw ParseError(rec->line, "negative distance");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<LinkageRecord> parse_linkage_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_linkage_csv(in);
}

// ---------------------------------------------------------------------------
// Dissimilarity / embedding CSV

std::string write_dissimilarity_csv(const Eigen::MatrixXd& matrix, std::span<const std::string> labels) {
  if (matrix.rows() != matrix.cols() || static_cast<std::size_t>(matrix.rows()) != labels.size()) {
    throw std::invalid_argument("dissimilarity matrix and labels disagree in size");
  }
  std::vector<std::string> fields{"label"};
  fields.insert(fields.end(), labels.begin(), labels.end());
  std::string out = csv::join(fields) + "\r\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    fields.assign({labels[static_cast<std::size_t>(i)]});
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) fields.push_back(format_g(matrix(i, j), 17));
    out += csv::join(fields) + "\r\n";
  }
  return out;
}

LabeledMatrix parse_dissimilarity_csv(std::istream& in) {
  const auto records = csv::read_all(in);
  if (records.empty() || records[0].fields.empty() || records[0].fields[0] != "label") {
    throw ParseError(1, "expected a header starting with 'label'");
  }
  LabeledMatrix out;
  out.labels.assign(records[0].fields.begin() + 1, records[0].fields.end());
  const auto k = static_cast<Eigen::Index>(out.labels.size());
  out.entries = Eigen::MatrixXd::Zero(k, k);
  Eigen::Index row = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    if (row >= k || rec.fields.size() != out.labels.size() + 1) {
      throw ParseError(rec.line, "dissimilarity row has the wrong shape");
    }
    if (rec.fields[0] != out.labels[static_cast<std::size_t>(row)]) {
      throw ParseError(rec.line, "row label does not match header order");
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      out.entries(row, j) = parse_real(rec.fields[static_cast<std::size_t>(j) + 1], rec.line, "distance");
    }
    ++row;
  }
  if (row != k) throw ParseError(records.back().line, "dissimilarity matrix is missing rows");
  return out;
}

std::string write_embedding_csv(const Embedding2D& embedding) {
  std::string out = "label,pc1,pc2\r\n";
  for (std::size_t i = 0; i < embedding.labels.size(); ++i) {
    out += csv::join({embedding.labels[i], format_g(embedding.coords[i][0], 12),
                      format_g(embedding.coords[i][1], 12)});
    out += "\r\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dendrogram

std::vector<int> dendrogram_leaf_order(std::span<const LinkageRecord> records, std::size_t leaf_count) {
  const LinkageTree tree = make_tree(records, leaf_count);
  std::vector<int> order;
  order.reserve(leaf_count);
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (tree.is_leaf(id)) {
      order.push_back(id);
    } else {
      const auto& r = tree.record(id);
      stack.push_back(r.child2);
      stack.push_back(r.child1);
    }
  }
  if (order.size() != leaf_count) throw std::invalid_argument("linkage does not form a single tree");
  return order;
}

std::string dendrogram_json(std::span<const LinkageRecord> records, std::span<const std::string> leaf_labels) {
  const LinkageTree tree = make_tree(records, leaf_labels.size());
  using ojson = nlohmann::ordered_json;
  std::function<ojson(int)> build = [&](int id) -> ojson {
    ojson node;
    node["id"] = id;
    if (tree.is_leaf(id)) {
      node["value_set"] = ojson::array({leaf_labels[static_cast<std::size_t>(id)]});
      node["height"] = 0.0;
      node["children"] = ojson::array();
    } else {
      const auto& r = tree.record(id);
      std::vector<std::string> values = r.values;
      std::sort(values.begin(), values.end());
      node["value_set"] = values;
      node["height"] = r.distance;
      node["children"] = ojson::array({build(r.child1), build(r.child2)});
    }
    return node;
  };
  return build(tree.root()).dump(2) + "\n";
}

DendrogramDocuments render_dendrogram(std::span<const LinkageRecord> records,
                                      std::span<const std::string> leaf_labels) {
  const std::size_t k = leaf_labels.size();
  make_tree(records, k);
  const auto order = dendrogram_leaf_order(records, k);

  std::size_t longest = 0;
  for (std::size_t i = 0; i < k; ++i) {
    longest = std::max(longest, leaf_label(leaf_labels, static_cast<int>(i)).size());
  }
  const double label_width = static_cast<double>(longest) * kCharWidth + 16.0;
  const double x0 = label_width;
  double hmax = 0.0;
  for (const auto& r : records) hmax = std::max(hmax, r.distance);
  const double scale = hmax > 0.0 ? kPlotWidth / hmax : 0.0;
  const double width = x0 + kPlotWidth + kMarginRight;
  const double axis_y = kMarginTop + static_cast<double>(k - 1) * kLeafSpacing + kLeafSpacing;
  const double height = axis_y + kMarginBottom;

  std::vector<double> node_x(k + records.size());
  std::vector<double> node_y(k + records.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto id = static_cast<std::size_t>(order[pos]);
    node_x[id] = x0;
    node_y[id] = kMarginTop + static_cast<double>(pos) * kLeafSpacing;
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed2(width) << "\" height=\""
      << fixed2(height) << "\" viewBox=\"0 0 " << fixed2(width) << ' ' << fixed2(height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int id = order[pos];
    svg << "<text class=\"leaf\" data-id=\"" << id << "\" x=\"" << fixed2(x0 - 6.0) << "\" y=\""
        << fixed2(node_y[static_cast<std::size_t>(id)] + 4.0) << "\" text-anchor=\"end\">"
        << xml_escape(leaf_label(leaf_labels, id)) << "</text>\n";
  }
  for (const auto& r : records) {
    const auto id = static_cast<std::size_t>(r.new_id);
    const auto c1 = static_cast<std::size_t>(r.child1);
    const auto c2 = static_cast<std::size_t>(r.child2);
    const double jx = x0 + r.distance * scale;
    node_x[id] = jx;
    node_y[id] = 0.5 * (node_y[c1] + node_y[c2]);
    svg << "<path class=\"joint\" data-id=\"" << r.new_id << "\" data-height=\"" << format_g(r.distance, 6)
        << "\" d=\"M " << fixed2(node_x[c1]) << ' ' << fixed2(node_y[c1]) << " H " << fixed2(jx) << " V "
        << fixed2(node_y[c2]) << " H " << fixed2(node_x[c2])
        << "\" fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"1.5\"/>\n";
  }
  // Bottom axis with five intervals.
  svg << "<line class=\"axis\" x1=\"" << fixed2(x0) << "\" y1=\"" << fixed2(axis_y) << "\" x2=\""
      << fixed2(x0 + kPlotWidth) << "\" y2=\"" << fixed2(axis_y) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double x = x0 + kPlotWidth * t / 5.0;
    svg << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(axis_y) << "\" x2=\"" << fixed2(x) << "\" y2=\""
        << fixed2(axis_y + 5.0) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed2(x) << "\" y=\"" << fixed2(axis_y + 18.0) << "\" text-anchor=\"middle\">"
        << format_g(hmax * t / 5.0, 3) << "</text>\n";
  }
  svg << "<text x=\"" << fixed2(x0 + kPlotWidth / 2.0) << "\" y=\"" << fixed2(axis_y + 40.0)
      << "\" text-anchor=\"middle\">dissimilarity</text>\n";
  svg << "</svg>\n";

  std::ostringstream dot;
  auto dot_quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    return out + "\"";
  };
  dot << "digraph dendrogram {\n  rankdir=RL;\n  node [shape=box, fontname=\"sans-serif\"];\n";
  for (std::size_t i = 0; i < k; ++i) {
    dot << "  n" << i << " [label=" << dot_quote(leaf_label(leaf_labels, static_cast<int>(i))) << "];\n";
  }
  for (const auto& r : records) {
    dot << "  n" << r.new_id << " [shape=ellipse, label=" << dot_quote(std::to_string(r.new_id) + "\\n" + format_g(r.distance, 6))
        << ", height=" << format_g(r.distance, 6) << ", size=" << r.size << "];\n";
  }
  for (const auto& r : records) {
    for (int child : {r.child1, r.child2}) {
      dot << "  n" << r.new_id << " -> n" << child << " [distance=" << format_g(r.distance, 6)
          << ", label=\"" << format_g(r.distance, 3) << "\"];\n";
    }
  }
  dot << "}\n";
  return {svg.str(), dot.str()};
}

std::string render_scatter_svg(const Embedding2D& embedding) {
  constexpr double kWidth = 720.0;
  constexpr double kHeight = 540.0;
  constexpr double kMargin = 60.0;
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  for (std::size_t i = 0; i < embedding.coords.size(); ++i) {
    const auto& c = embedding.coords[i];
    if (i == 0) {
      xmin = xmax = c[0];
      ymin = ymax = c[1];
    }
    xmin = std::min(xmin, c[0]);
    xmax = std::max(xmax, c[0]);
    ymin = std::min(ymin, c[1]);
    ymax = std::max(ymax, c[1]);
  }
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    if (span <= 0.0) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      lo -= 0.05 * span;
      hi += 0.05 * span;
    }
  };
  pad(xmin, xmax);
  pad(ymin, ymax);
  auto sx = [&](double x) { return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin); };
  auto sy = [&](double y) { return kHeight - kMargin - (y - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
      << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < embedding.labels.size(); ++i) {
    const double x = sx(embedding.coords[i][0]);
    const double y = sy(embedding.coords[i][1]);
    svg << "<circle class=\"point\" cx=\"" << fixed2(x) << "\" cy=\"" << fixed2(y)
        << "\" r=\"4\" fill=\"#c0504d\"/>\n";
    svg << "<text x=\"" << fixed2(x + 6.0) << "\" y=\"" << fixed2(y - 4.0) << "\">"
        << xml_escape(embedding.labels[i]) << "</text>\n";
  }
  auto pct = [](double r) { return format_g(100.0 * r, 3) + "%"; };
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 20 << "\" text-anchor=\"middle\">PC1 ("
      << pct(embedding.explained_variance_ratio[0]) << ")</text>\n";
  svg << "<text x=\"20\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << kHeight / 2 << ")\">PC2 (" << pct(embedding.explained_variance_ratio[1]) << ")</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace hqc::io
