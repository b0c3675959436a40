#include <doctest.h>

#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "hqc/data_model.hpp"
#include "hqc/error.hpp"
#include "support/oracles.hpp"

using namespace hqc;

namespace {

Dataset load_text(const std::string& text, LoadOptions opt) {
  std::istringstream in(text);
  return load_csv(in, opt);
}

const char* kSongs =
    "artists,tempo,energy,name\n"
    "Queen,120,0.8,Bohemian Rhapsody\n"
    "\"Earth, Wind & Fire\",125.5,0.9,September\n"
    "Queen,,0.7,Untitled\n"
    "ABBA,100,0.6,\"Dancing Queen\"\n";

Dataset labelled(const std::vector<std::string>& labels) {
  Dataset ds;
  ds.label_name = "label";
  ds.column_names = {"x"};
  ds.quantitative = RowMatrix::Zero(static_cast<Eigen::Index>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) ds.quantitative(static_cast<Eigen::Index>(i), 0) = double(i);
  ds.qualitative = labels;
  return ds;
}

}  // namespace

TEST_CASE("load: numeric columns auto-selected, missing cell drops the row") {
  const auto ds = load_text(kSongs, {"artists", {}, {}});
  CHECK(ds.rows() == 3);
  CHECK(ds.dims() == 2);
  CHECK(ds.column_names == std::vector<std::string>{"tempo", "energy"});
  CHECK(ds.dropped_rows == 1);
  CHECK(ds.qualitative == std::vector<std::string>{"Queen", "Earth, Wind & Fire", "ABBA"});
  CHECK(ds.quantitative(1, 0) == 125.5);
  CHECK(ds.column_index("energy") == 1);
  CHECK_FALSE(ds.column_index("name").has_value());
}

TEST_CASE("load: complete four-row file keeps every row") {
  const auto ds = load_text("g,a,b\nx,1,2\ny,3,4\nx,5,6\ny,7,8\n", {"g", {}, {}});
  CHECK(ds.rows() == 4);
  CHECK(ds.dims() == 2);
  CHECK(ds.dropped_rows == 0);
}

TEST_CASE("load: explicit feature list and auxiliary column") {
  const auto ds = load_text(kSongs, {"artists", {"energy"}, {"name"}});
  CHECK(ds.dims() == 1);
  CHECK(ds.rows() == 4);  // tempo is not used, so its empty cell does not matter
  CHECK(ds.auxiliary.at("name")[3] == "Dancing Queen");
}

TEST_CASE("load: errors") {
  SUBCASE("missing label column names the column") {
    try {
      load_text(kSongs, {"genre", {}, {}});
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("genre") != std::string::npos);
    }
  }
  SUBCASE("unknown feature column") { CHECK_THROWS_AS(load_text(kSongs, {"artists", {"loudness"}, {}}), ConfigError); }
  SUBCASE("only non-numeric features") {
    CHECK_THROWS_WITH_AS(load_text("g,name\na,x\nb,y\n", {"g", {}, {}}), "zero numeric columns selected", DataError);
    CHECK_THROWS_AS(load_text("g,name\na,x\nb,y\n", {"g", {"name"}, {}}), DataError);
  }
  SUBCASE("ragged row reports the line") {
    try {
      load_text("g,a\nx,1\ny,2,3\n", {"g", {}, {}});
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("no surviving rows") { CHECK_THROWS_AS(load_text("g,a,b\nx,1,\n,2,3\n", {"g", {}, {}}), DataError); }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_csv("/nonexistent/in.csv", {"g", {}, {}}), ConfigError); }
}

TEST_CASE("parse_number") {
  CHECK(parse_number("1.5") == 1.5);
  CHECK(parse_number(" -2e3 ") == -2000.0);
  CHECK(parse_number("+4") == 4.0);
  CHECK_FALSE(parse_number("").has_value());
  CHECK_FALSE(parse_number("abc").has_value());
  CHECK_FALSE(parse_number("1.5x").has_value());
  CHECK_FALSE(parse_number("nan").has_value());
  CHECK_FALSE(parse_number("inf").has_value());
}

TEST_CASE("standardize: examples") {
  Dataset ds = labelled({"a", "b", "c"});
  ds.column_names = {"x", "flat"};
  ds.quantitative.resize(3, 2);
  ds.quantitative << 1, 5, 2, 5, 3, 5;
  const auto z = standardize(ds);
  CHECK(z.quantitative(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(z.quantitative(1, 0) == doctest::Approx(0.0));
  CHECK(z.quantitative(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) CHECK(z.quantitative(i, 1) == 0.0);
  CHECK(z.zero_variance_columns == std::vector<std::string>{"flat"});
  CHECK(z.standardized);

  Dataset one = labelled({"a"});
  CHECK_THROWS_AS(standardize(one), DataError);
}

TEST_CASE("standardize: moments and idempotence on random data") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = 3 + rng::uniform_below(gen, 50);
    const auto d = 1 + rng::uniform_below(gen, 5);
    Dataset ds = labelled(std::vector<std::string>(n, "v"));
    ds.quantitative.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    ds.column_names.assign(d, "c");
    for (Eigen::Index i = 0; i < ds.quantitative.size(); ++i)
      ds.quantitative.data()[i] = 100.0 * rng::uniform01(gen) - 30.0;
    const auto z = standardize(ds);
    for (Eigen::Index j = 0; j < z.quantitative.cols(); ++j) {
      const auto col = z.quantitative.col(j);
      const double mean = col.mean();
      const double var = (col.array() - mean).square().sum() / double(n - 1);
      CHECK(std::abs(mean) < 1e-12);
      CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto zz = standardize(z);
    CHECK((zz.quantitative - z.quantitative).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("group_by_value: examples and filters") {
  const auto ds = labelled({"a", "b", "a", "c", "b", "a"});
  const auto g = group_by_value(ds, 2, 2);
  REQUIRE(g.size() == 2);
  CHECK(g[0].value == "a");
  CHECK(g[0].count == 3);
  CHECK(g[0].row_indices == std::vector<std::size_t>{0, 2, 5});
  CHECK(g[1].value == "b");
  CHECK(g[1].count == 2);

  CHECK_THROWS_AS(group_by_value(labelled({"a", "b"}), std::nullopt, 2), DataError);
  CHECK_THROWS_AS(group_by_value(ds, std::nullopt, 1), ConfigError);
  CHECK_THROWS_AS(group_by_value(ds, 0, 2), ConfigError);

  // equal counts: lexicographic order
  const auto tie = group_by_value(labelled({"z", "y", "z", "y", "x", "x"}), std::nullopt, 2);
  CHECK(tie[0].value == "x");
  CHECK(tie[1].value == "y");
  CHECK(tie[2].value == "z");
}

TEST_CASE("group_by_value: partition property") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> labels;
    const auto n = 10 + rng::uniform_below(gen, 100);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::string(1, char('a' + rng::uniform_below(gen, 6))));
    const auto ds = labelled(labels);
    std::vector<ValueGroup> groups;
    try {
      groups = group_by_value(ds, std::nullopt, 2);
    } catch (const DataError&) {
      continue;
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    std::set<std::size_t> seen;
    std::size_t kept = 0;
    for (const auto& g : groups) {
      CHECK(g.count == counts[g.value]);
      CHECK(g.count == g.row_indices.size());
      CHECK(std::is_sorted(g.row_indices.begin(), g.row_indices.end()));
      for (auto r : g.row_indices) {
        CHECK(labels[r] == g.value);
        CHECK(seen.insert(r).second);
      }
      kept += g.count;
    }
    std::size_t expected = 0;
    for (const auto& [v, c] : counts) expected += c >= 2 ? c : 0;
    CHECK(kept == expected);
    for (std::size_t i = 1; i < groups.size(); ++i) CHECK(groups[i - 1].count >= groups[i].count);
  }
}

TEST_CASE("sampling: uncapped, capped, deterministic") {
  const auto ds = labelled(std::vector<std::string>(1000, "v"));
  std::vector<std::size_t> rows(1000);
  std::iota(rows.begin(), rows.end(), 0);
  CHECK(draw_sample(ds, std::span(rows).first(3), std::nullopt, 1).n() == 3);

  const auto a = draw_sample(ds, rows, 500, 42);
  const auto b = draw_sample(ds, rows, 500, 42);
  const auto c = draw_sample(ds, rows, 500, 43);
  CHECK(a.n() == 500);
  CHECK(a.rows == b.rows);
  CHECK(a.rows != c.rows);
  std::set<double> distinct;
  for (std::size_t i = 0; i < a.n(); ++i) distinct.insert(a.rows(static_cast<Eigen::Index>(i), 0));
  CHECK(distinct.size() == 500);
  for (std::size_t i = 1; i < a.n(); ++i) CHECK(a.row(i - 1)[0] < a.row(i)[0]);

  CHECK_THROWS_AS(draw_sample(ds, rows, 1, 0), std::invalid_argument);
}

TEST_CASE("sample_for concatenates groups") {
  const auto ds = labelled({"a", "a", "b", "b", "b"});
  const auto groups = group_by_value(ds, std::nullopt, 2);
  const auto s = sample_for(groups, ds, std::nullopt, 0);
  CHECK(s.n() == 5);
  const auto capped = sample_for(groups, ds, 4, 9);
  CHECK(capped.n() == 4);
  CHECK(capped.rows == sample_for(groups, ds, 4, 9).rows);
}

TEST_CASE("select_rows keeps order and metadata") {
  auto ds = labelled({"a", "b", "c", "d"});
  ds.dropped_rows = 2;
  const std::vector<std::size_t> keep{3, 1};
  const auto sub = select_rows(ds, keep);
  CHECK(sub.qualitative == std::vector<std::string>{"d", "b"});
  CHECK(sub.quantitative(0, 0) == 3.0);
  CHECK(sub.dropped_rows == 2);
}
