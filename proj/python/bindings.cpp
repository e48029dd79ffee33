#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "infogain/data.hpp"
#include "infogain/entropy.hpp"
#include "infogain/error.hpp"
#include "infogain/experiments.hpp"
#include "infogain/forest.hpp"
#include "infogain/neighbors.hpp"
#include "infogain/numerics.hpp"

namespace py = pybind11;
using namespace infogain;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) {
    Matrix m(static_cast<std::size_t>(a.shape(0)), 1);
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
  }
  if (a.ndim() != 2) throw py::value_error("expected a 1-d or 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

ClassHistogram histogram(const std::vector<std::uint64_t>& counts) { return ClassHistogram(counts); }

EstimatorKind estimator(const std::string& name, std::size_t subsample, const std::string& variant) {
  EstimatorKind e = EstimatorKind::parse(name);
  e.subsample_size = subsample;
  if (variant == "as-printed") e.umvue_variant = UmvueVariant::AsPrinted;
  else if (variant != "centered") throw ConfigError("unknown UMVUE variant '" + variant + "'");
  e.validate();
  return e;
}

TrainConfig config(const std::string& est, std::size_t n_trees, std::size_t n_tests, std::size_t min_samples_split,
                   std::size_t min_samples_leaf, std::optional<std::size_t> max_depth, double kde_lambda,
                   std::uint64_t seed, std::size_t subsample, const std::string& variant) {
  TrainConfig c;
  c.estimator = estimator(est, subsample, variant);
  c.n_trees = n_trees;
  c.n_tests = n_tests;
  c.min_samples_split = min_samples_split;
  c.min_samples_leaf = min_samples_leaf;
  c.max_depth = max_depth;
  c.kde_lambda = kde_lambda;
  c.master_seed = seed;
  c.validate();
  return c;
}

std::span<const double> row_of(const Array& x, std::size_t expected) {
  if (x.ndim() != 1 || static_cast<std::size_t>(x.shape(0)) != expected)
    throw py::value_error("expected a feature vector of length " + std::to_string(expected));
  return {x.data(), expected};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Decision forests with bias-corrected information gain estimates";

  auto base = py::register_exception<Error>(m, "InfogainError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto data_error = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InsufficientSamplesError>(m, "InsufficientSamplesError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", data_error.ptr());

  m.def("digamma", &digamma, py::arg("x"));
  m.def("ln_gamma", &ln_gamma, py::arg("x"));
  m.def("unit_ball_volume", &unit_ball_volume, py::arg("d"));

  m.def("naive_entropy", [](const std::vector<std::uint64_t>& c) { return naive_entropy(histogram(c)); },
        py::arg("counts"));
  m.def("miller_entropy", [](const std::vector<std::uint64_t>& c) { return miller_entropy(histogram(c)); },
        py::arg("counts"));
  m.def("grassberger_entropy",
        [](const std::vector<std::uint64_t>& c) { return grassberger_entropy(histogram(c)); }, py::arg("counts"));
  m.def("grassberger_g", &grassberger_g, py::arg("h"));
  m.def(
      "split_score",
      [](const std::vector<std::uint64_t>& left, const std::vector<std::uint64_t>& right, const std::string& est) {
        return split_score(histogram(left), histogram(right), EstimatorKind::parse(est));
      },
      py::arg("left"), py::arg("right"), py::arg("estimator") = "naive");

  m.def("mvn_plugin_entropy", [](const Array& y) { return mvn_plugin_entropy(to_matrix(y)).value; },
        py::arg("samples"));
  m.def("mvn_diag_entropy", [](const Array& y) { return mvn_diag_entropy(to_matrix(y)).value; },
        py::arg("samples"));
  m.def(
      "mvn_umvue_entropy",
      [](const Array& y, const std::string& variant) {
        return mvn_umvue_entropy(to_matrix(y), estimator("mvn-umvue", 256, variant).umvue_variant).value;
      },
      py::arg("samples"), py::arg("variant") = "centered");
  m.def(
      "one_nn_entropy",
      [](const Array& y, std::uint64_t seed, std::size_t subsample) {
        Rng rng(seed);
        return one_nn_entropy(to_matrix(y), rng, subsample).value;
      },
      py::arg("samples"), py::arg("seed") = 0, py::arg("subsample_size") = 256);
  m.def("all_1nn_distances", [](const Array& y) { return all_1nn_distances(to_matrix(y)); }, py::arg("points"));
  m.def("brute_force_1nn", [](const Array& y) { return brute_force_1nn(to_matrix(y)); }, py::arg("points"));
  m.def(
      "multinomial_info_gain_exact",
      [](const std::vector<std::array<double, 2>>& table) {
        return multinomial_info_gain_exact(JointClassSplitDistribution(table));
      },
      py::arg("table"));

  m.def(
      "simulate_bias",
      [](std::size_t classes, std::size_t replicates, std::optional<std::vector<std::size_t>> sizes,
         std::uint64_t seed, std::uint64_t table_seed) {
        BiasSimConfig cfg = BiasSimConfig::make_default(classes, table_seed);
        cfg.replicates = replicates;
        if (sizes) cfg.sample_sizes = *sizes;
        cfg.seed = seed;
        py::list out;
        for (const auto& r : simulate_bias(cfg)) {
          py::dict d;
          d["n"] = r.n;
          d["estimator"] = r.estimator;
          d["mean_gain"] = r.mean_gain;
          d["std_gain"] = r.std_gain;
          d["true_gain"] = r.true_gain;
          out.append(d);
        }
        return out;
      },
      py::arg("classes") = 40, py::arg("replicates") = 500, py::arg("sizes") = py::none(), py::arg("seed") = 1,
      py::arg("table_seed") = kDefaultBiasTableSeed);

  py::class_<Forest>(m, "Forest")
      .def_static(
          "train_classifier",
          [](const Array& x, const std::vector<std::size_t>& labels, const std::string& est, std::size_t n_trees,
             std::size_t n_tests, std::size_t min_samples_split, std::size_t min_samples_leaf,
             std::optional<std::size_t> max_depth, std::uint64_t seed) {
            Dataset ds;
            ds.features = to_matrix(x);
            ds.labels = labels;
            std::size_t k = 0;
            for (std::size_t l : labels) k = std::max(k, l + 1);
            ds.n_classes = k;
            ds.validate();
            py::gil_scoped_release release;
            return train_forest(ds, config(est, n_trees, n_tests, min_samples_split, min_samples_leaf, max_depth,
                                           1e-2, seed, 256, "centered"));
          },
          py::arg("features"), py::arg("labels"), py::arg("estimator") = "naive", py::arg("n_trees") = 8,
          py::arg("n_tests") = 256, py::arg("min_samples_split") = 2, py::arg("min_samples_leaf") = 1,
          py::arg("max_depth") = py::none(), py::arg("seed") = 0)
      .def_static(
          "train_regressor",
          [](const Array& x, const Array& y, const std::string& est, std::size_t n_trees, std::size_t n_tests,
             std::size_t min_samples_split, std::size_t min_samples_leaf, std::optional<std::size_t> max_depth,
             double kde_lambda, std::uint64_t seed, std::size_t subsample, const std::string& variant) {
            Dataset ds;
            ds.task = Task::Regression;
            ds.features = to_matrix(x);
            ds.targets = to_matrix(y);
            ds.validate();
            py::gil_scoped_release release;
            return train_forest(ds, config(est, n_trees, n_tests, min_samples_split, min_samples_leaf, max_depth,
                                           kde_lambda, seed, subsample, variant));
          },
          py::arg("features"), py::arg("targets"), py::arg("estimator") = "mvn-plugin", py::arg("n_trees") = 8,
          py::arg("n_tests") = 256, py::arg("min_samples_split") = 2, py::arg("min_samples_leaf") = 16,
          py::arg("max_depth") = py::none(), py::arg("kde_lambda") = 1e-2, py::arg("seed") = 0,
          py::arg("subsample_size") = 256, py::arg("umvue_variant") = "centered")
      .def_property_readonly("task", [](const Forest& f) { return std::string(to_string(f.task)); })
      .def_property_readonly("n_trees", [](const Forest& f) { return f.trees.size(); })
      .def_property_readonly("n_features", [](const Forest& f) { return f.n_features; })
      .def(
          "predict",
          [](const Forest& f, const Array& x, std::uint64_t seed) -> py::object {
            Matrix m = to_matrix(x);
            if (x.ndim() == 1) {
              // A single feature vector.
              Matrix single(1, m.rows());
              std::copy(m.data().begin(), m.data().end(), single.data().begin());
              m = std::move(single);
            }
            if (f.task == Task::Classification) {
              Rng rng(seed);
              std::vector<std::size_t> out;
              for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(predict_class(f, m.row(i), rng));
              return py::cast(out);
            }
            Matrix out(m.rows(), f.target_dim);
            for (std::size_t i = 0; i < m.rows(); ++i) {
              const auto p = predict_regression(f, m.row(i));
              std::copy(p.begin(), p.end(), out.row(i).begin());
            }
            return to_array(out);
          },
          py::arg("features"), py::arg("seed") = 0)
      .def(
          "log_density",
          [](const Forest& f, const Array& x, const Array& y) {
            return forest_log_density(f, row_of(x, f.n_features), row_of(y, f.target_dim));
          },
          py::arg("x"), py::arg("y"))
      .def("to_json", &serialize)
      .def_static("from_json", [](const std::string& doc) { return deserialize(doc); }, py::arg("document"))
      .def("save", [](const Forest& f, const std::string& path) { save_forest(f, path); }, py::arg("path"))
      .def_static("load", &load_forest, py::arg("path"));
}
