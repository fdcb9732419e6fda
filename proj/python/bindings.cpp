#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccf/cca.hpp"
#include "ccf/cli.hpp"
#include "ccf/errors.hpp"
#include "ccf/forest.hpp"
#include "ccf/pipeline.hpp"
#include "ccf/synth.hpp"

namespace py = pybind11;
using namespace ccf;

namespace {

using RowMatrix = FeatureMatrix;

py::tuple training_tuple(const TrainingSet& set) { return py::make_tuple(set.features, set.labels, set.class_names); }

TrainingSet make_set(const RowMatrix& features, const std::vector<int>& labels, std::vector<std::string> class_names) {
  TrainingSet set{features, labels, std::move(class_names)};
  if (set.class_names.empty()) {
    int k = 0;
    for (int label : labels) k = std::max(k, label + 1);
    for (int i = 0; i < k; ++i) set.class_names.push_back(std::to_string(i));
  }
  return set;
}

RowMatrix proba_rows(const Forest& forest, const RowMatrix& x) {
  RowMatrix out(x.rows(), static_cast<Eigen::Index>(forest.n_classes()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto p = predict_proba(forest, std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())));
    for (std::size_t c = 0; c < p.size(); ++c) out(i, static_cast<Eigen::Index>(c)) = p[c];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Canonical correlation forests and multispectral pixel classification";

  auto input_error = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  auto parse_error = py::register_exception<ParseError>(m, "ParseError", input_error.ptr());
  py::register_exception<UnsupportedVersionError>(m, "UnsupportedVersionError", parse_error.ptr());
  py::register_exception<LoadError>(m, "LoadError", input_error.ptr());
  py::register_exception<ImbalanceError>(m, "ImbalanceError", input_error.ptr());
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", input_error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", input_error.ptr());

  py::class_<CcaResult>(m, "CcaResult")
      .def_readonly("projections_x", &CcaResult::projections_x)
      .def_readonly("projections_y", &CcaResult::projections_y)
      .def_readonly("correlations", &CcaResult::correlations)
      .def_readonly("rank", &CcaResult::rank);

  m.def(
      "canonical_correlation",
      [](const Matrix& x, const Matrix& y, double gamma, bool relative) {
        return canonical_correlation(x, y, gamma, relative ? RidgeScale::kRelative : RidgeScale::kAbsolute);
      },
      py::arg("x"), py::arg("y"), py::arg("gamma") = 1e-6, py::arg("relative") = false);

  m.def(
      "one_hot", [](const std::vector<int>& labels, std::size_t k) { return one_hot(labels, k); }, py::arg("labels"),
      py::arg("n_classes"));

  py::class_<ForestParams>(m, "ForestParams")
      .def(py::init<>())
      .def_readwrite("n_trees", &ForestParams::n_trees)
      .def_readwrite("feature_subsample", &ForestParams::feature_subsample)
      .def_readwrite("min_node_size", &ForestParams::min_node_size)
      .def_readwrite("max_depth", &ForestParams::max_depth)
      .def_readwrite("gamma", &ForestParams::gamma)
      .def_readwrite("seed", &ForestParams::seed)
      .def_property(
          "impurity", [](const ForestParams& p) { return std::string(to_string(p.impurity)); },
          [](ForestParams& p, const std::string& v) { p.impurity = parse_impurity(v); })
      .def_property(
          "mode", [](const ForestParams& p) { return std::string(to_string(p.mode)); },
          [](ForestParams& p, const std::string& v) { p.mode = parse_split_mode(v); });

  py::class_<Forest>(m, "Forest")
      .def_readonly("params", &Forest::params)
      .def_readonly("n_features", &Forest::n_features)
      .def_readonly("class_names", &Forest::class_names)
      .def_property_readonly("n_trees", [](const Forest& f) { return f.trees.size(); })
      .def("node_counts",
           [](const Forest& f) {
             std::vector<std::size_t> out;
             for (const Tree& t : f.trees) out.push_back(t.nodes.size());
             return out;
           })
      .def("predict_proba", &proba_rows, py::arg("x"))
      .def(
          "predict",
          [](const Forest& f, const RowMatrix& x) {
            std::vector<int> out;
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
              out.push_back(predict_class(f, std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols()))));
            }
            return out;
          },
          py::arg("x"))
      .def("serialize", [](const Forest& f) { return serialize(f); })
      .def("save", [](const Forest& f, const std::string& path) { save_forest(f, path); }, py::arg("path"));

  m.def(
      "train_forest",
      [](const RowMatrix& x, const std::vector<int>& labels, const ForestParams& params,
         std::vector<std::string> class_names, unsigned n_threads) {
        const TrainingSet set = make_set(x, labels, std::move(class_names));
        py::gil_scoped_release release;
        return train_forest(set, params, n_threads);
      },
      py::arg("x"), py::arg("labels"), py::arg("params") = ForestParams{},
      py::arg("class_names") = std::vector<std::string>{}, py::arg("n_threads") = 0u);
  m.def("deserialize", [](const std::string& text) { return deserialize(text); }, py::arg("text"));
  m.def("load_forest", &load_forest, py::arg("path"));

  m.def(
      "generate_samples",
      [](std::size_t n_per_class, std::uint64_t seed) {
        return training_tuple(to_training_set(generate_samples(default_prototypes(), n_per_class, seed)));
      },
      py::arg("n_per_class"), py::arg("seed"));
  m.def(
      "rotated_two_class",
      [](std::size_t n, double angle, std::uint64_t seed, double noise) {
        return training_tuple(rotated_two_class(n, angle, seed, noise));
      },
      py::arg("n"), py::arg("angle_degrees"), py::arg("seed"), py::arg("noise") = 0.05);
  m.def("prototypes_json", [] { return prototypes_json(default_prototypes()); });

  m.def(
      "map_survey_class",
      [](const std::string& answer) -> std::optional<std::string> {
        const SurveyMapping mapping = map_survey_class(answer);
        if (!mapping.material) return std::nullopt;
        return std::string(material_name(*mapping.material));
      },
      py::arg("answer"));
  m.def("normalize_reflectance", &normalize_reflectance, py::arg("raw"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
