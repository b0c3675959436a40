#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <set>
#include <sstream>

#include "hqc/data_model.hpp"
#include "hqc/embedding.hpp"
#include "hqc/error.hpp"
#include "hqc/hqc_engine.hpp"
#include "hqc/io.hpp"
#include "hqc/pipeline.hpp"
#include "hqc/statdist.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

hqc::Sample to_sample(const Eigen::Ref<const hqc::RowMatrix>& m) { return hqc::Sample(hqc::RowMatrix(m)); }

hqc::KernelConfig kernel(double gamma) { return hqc::KernelConfig::fixed(gamma); }

}  // namespace

PYBIND11_MODULE(_hqc, m) {
  m.doc() = "Hierarchical clustering of qualitative values by MMD";
  m.attr("__version__") = hqc::kVersion;

  auto base = py::register_exception<hqc::Error>(m, "HqcError", PyExc_RuntimeError);
  py::register_exception<hqc::ConfigError>(m, "ConfigError", base.ptr());
  auto data = py::register_exception<hqc::DataError>(m, "DataError", base.ptr());
  py::register_exception<hqc::ParseError>(m, "ParseError", data.ptr());

  py::class_<hqc::Dataset>(m, "Dataset")
      .def_property_readonly("quantitative", [](const hqc::Dataset& d) { return d.quantitative; })
      .def_readonly("qualitative", &hqc::Dataset::qualitative)
      .def_readonly("column_names", &hqc::Dataset::column_names)
      .def_readonly("label_name", &hqc::Dataset::label_name)
      .def_readonly("auxiliary", &hqc::Dataset::auxiliary)
      .def_readonly("dropped_rows", &hqc::Dataset::dropped_rows)
      .def_readonly("zero_variance_columns", &hqc::Dataset::zero_variance_columns)
      .def_readonly("standardized", &hqc::Dataset::standardized)
      .def_property_readonly("rows", &hqc::Dataset::rows)
      .def_property_readonly("dims", &hqc::Dataset::dims);

  py::class_<hqc::ValueGroup>(m, "ValueGroup")
      .def_readonly("value", &hqc::ValueGroup::value)
      .def_readonly("row_indices", &hqc::ValueGroup::row_indices)
      .def_readonly("count", &hqc::ValueGroup::count)
      .def("__repr__", [](const hqc::ValueGroup& g) {
        return "ValueGroup(" + g.value + ", count=" + std::to_string(g.count) + ")";
      });

  m.def(
      "load_csv",
      [](const std::filesystem::path& path, const std::string& label_column,
         std::vector<std::string> feature_columns, std::vector<std::string> auxiliary_columns) {
        return hqc::load_csv(path, {label_column, std::move(feature_columns), std::move(auxiliary_columns)});
      },
      "path"_a, "label_column"_a, "feature_columns"_a = std::vector<std::string>{},
      "auxiliary_columns"_a = std::vector<std::string>{});
  m.def(
      "load_csv_text",
      [](const std::string& text, const std::string& label_column, std::vector<std::string> feature_columns) {
        std::istringstream in(text);
        return hqc::load_csv(in, {label_column, std::move(feature_columns), {}});
      },
      "text"_a, "label_column"_a, "feature_columns"_a = std::vector<std::string>{});
  m.def("standardize", &hqc::standardize, "dataset"_a);
  m.def("group_by_value", &hqc::group_by_value, "dataset"_a, "top_k"_a = py::none(), "min_count"_a = 2);

  m.def(
      "mmd2_unbiased",
      [](const Eigen::Ref<const hqc::RowMatrix>& p, const Eigen::Ref<const hqc::RowMatrix>& q, double gamma) {
        return hqc::mmd2_unbiased(to_sample(p), to_sample(q), kernel(gamma));
      },
      "p"_a, "q"_a, "gamma"_a = 0.5);
  m.def(
      "mmd_distance",
      [](const Eigen::Ref<const hqc::RowMatrix>& p, const Eigen::Ref<const hqc::RowMatrix>& q, double gamma) {
        return hqc::mmd_distance(to_sample(p), to_sample(q), kernel(gamma)).statistic;
      },
      "p"_a, "q"_a, "gamma"_a = 0.5);
  m.def(
      "bootstrap_pvalue",
      [](const Eigen::Ref<const hqc::RowMatrix>& p, const Eigen::Ref<const hqc::RowMatrix>& q, double gamma,
         std::size_t b, std::uint64_t seed) {
        const auto sp = to_sample(p);
        const auto sq = to_sample(q);
        py::gil_scoped_release release;
        return hqc::bootstrap_pvalue(sp, sq, kernel(gamma), b, seed);
      },
      "p"_a, "q"_a, "gamma"_a = 0.5, "b"_a = 99, "seed"_a = 0);
  m.def("ks_statistic", [](const std::vector<double>& p, const std::vector<double>& q) {
    return hqc::ks_statistic(p, q);
  });
  m.def("ad_statistic", [](const std::vector<double>& p, const std::vector<double>& q) {
    return hqc::ad_statistic(p, q);
  });
  m.def("jaccard_distance", [](const std::set<std::string>& a, const std::set<std::string>& b) {
    return hqc::jaccard_distance(a, b);
  });
  m.def("overlap_dissimilarity", [](const std::set<std::string>& a, const std::set<std::string>& b) {
    return hqc::overlap_dissimilarity(a, b);
  });

  py::class_<hqc::LinkageRecord>(m, "LinkageRecord")
      .def(py::init<>())
      .def_readwrite("new_id", &hqc::LinkageRecord::new_id)
      .def_readwrite("child1", &hqc::LinkageRecord::child1)
      .def_readwrite("child2", &hqc::LinkageRecord::child2)
      .def_readwrite("distance", &hqc::LinkageRecord::distance)
      .def_readwrite("size", &hqc::LinkageRecord::size)
      .def_readwrite("values", &hqc::LinkageRecord::values)
      .def("__eq__", [](const hqc::LinkageRecord& a, const hqc::LinkageRecord& b) { return a == b; })
      .def("__repr__", [](const hqc::LinkageRecord& r) {
        return "LinkageRecord(" + std::to_string(r.new_id) + ", " + std::to_string(r.child1) + ", " +
               std::to_string(r.child2) + ", " + hqc::io::format_g(r.distance, 6) + ")";
      });

  m.def(
      "run_hqc",
      [](const hqc::Dataset& ds, const std::vector<hqc::ValueGroup>& groups, double gamma,
         std::optional<std::size_t> cap, std::uint64_t seed) {
        hqc::HqcOptions options{kernel(gamma), cap, seed};
        hqc::HqcResult result;
        {
          py::gil_scoped_release release;
          result = hqc::run_hqc(ds, groups, options);
        }
        return py::make_tuple(result.linkage, Eigen::MatrixXd(result.initial.entries()));
      },
      "dataset"_a, "groups"_a, "gamma"_a = 0.5, "cap"_a = py::none(), "seed"_a = 0,
      "Returns (linkage records, initial K x K dissimilarity matrix).");
  m.def(
      "cut_linkage",
      [](const std::vector<hqc::LinkageRecord>& records, const std::vector<std::string>& leaf_values,
         double threshold) { return hqc::cut_linkage(records, leaf_values, threshold); },
      "records"_a, "leaf_values"_a, "threshold"_a);
  m.def(
      "embed_dissimilarity",
      [](const Eigen::MatrixXd& matrix, std::vector<std::string> labels) {
        const auto e = hqc::embed_dissimilarity(matrix, std::move(labels));
        Eigen::MatrixXd coords(static_cast<Eigen::Index>(e.coords.size()), 2);
        for (std::size_t i = 0; i < e.coords.size(); ++i) {
          coords(static_cast<Eigen::Index>(i), 0) = e.coords[i][0];
          coords(static_cast<Eigen::Index>(i), 1) = e.coords[i][1];
        }
        return py::make_tuple(coords, e.explained_variance_ratio);
      },
      "matrix"_a, "labels"_a, "Returns (K x 2 coordinates, explained variance ratio pair).");
  m.def("write_linkage_csv",
        [](const std::vector<hqc::LinkageRecord>& records) { return hqc::io::write_linkage_csv(records); });
  m.def("parse_linkage_csv", [](const std::string& text) { return hqc::io::parse_linkage_csv(text); });

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& input, const std::string& label_column, const std::filesystem::path& output_dir,
         std::vector<std::string> feature_columns, std::optional<std::size_t> top_k, std::size_t min_count,
         const std::string& gamma_mode, double gamma, std::optional<std::size_t> cap, std::uint64_t seed,
         std::size_t bootstrap_b, const std::string& baseline, const std::string& context_column) {
        hqc::RunConfig config;
        config.input = input;
        config.label_column = label_column;
        config.output_dir = output_dir;
        config.feature_columns = std::move(feature_columns);
        config.top_k = top_k;
        config.min_count = min_count;
        config.gamma_mode = hqc::parse_gamma_mode(gamma_mode);
        config.gamma = gamma;
        config.cap = cap;
        config.seed = seed;
        config.bootstrap_b = bootstrap_b;
        config.baseline = hqc::Baseline::parse(baseline);
        config.context_column = context_column;
        hqc::PipelineResult result;
        {
          py::gil_scoped_release release;
          result = hqc::run_pipeline(config);
        }
        py::dict out;
        out["linkage"] = result.clustering.linkage;
        std::vector<std::string> labels;
        for (const auto& g : result.groups) labels.push_back(g.value);
        out["labels"] = labels;
        out["warnings"] = result.warnings;
        std::vector<std::string> files;
        for (const auto& [name, _] : result.files) files.push_back(name);
        out["files"] = files;
        out["gamma"] = result.kernel.gamma;
        return out;
      },
      "input"_a, "label_column"_a, "output_dir"_a, "feature_columns"_a = std::vector<std::string>{},
      "top_k"_a = py::none(), "min_count"_a = 2, "gamma_mode"_a = "unit", "gamma"_a = 0.5, "cap"_a = py::none(),
      "seed"_a = 0, "bootstrap_b"_a = 0, "baseline"_a = "none", "context_column"_a = "");
}
