#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "qintent/checkpoint.hpp"
#include "qintent/corpus.hpp"
#include "qintent/error.hpp"
#include "qintent/fingerprint.hpp"
#include "qintent/gold.hpp"
#include "qintent/models.hpp"
#include "qintent/nn/layers.hpp"
#include "qintent/nn/loss.hpp"
#include "qintent/train_eval.hpp"
#include "qintent/weak_label.hpp"

namespace py = pybind11;
using namespace qintent;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

std::tuple<int, int, int> bits_of(const MultiHotLabel& l) {
  return {l.bits()[0], l.bits()[1], l.bits()[2]};
}

std::array<double, 3> weights_of(const IntentDistribution& d) { return d.weights(); }

IntentDistribution to_dist(const std::array<double, 3>& w) { return IntentDistribution(w); }

Labeler make_labeler(const std::string& version, const std::string& rules_path, const std::string& row_mapping,
                     const std::string& stopwords_path, const std::string& synonyms_path) {
  const auto v = parse_version(version);
  auto rules_in = open_in(rules_path);
  const auto mapping = row_mapping.empty()
                           ? (v >= LabelerVersion::V4 ? RowMapping::SwappedTN : RowMapping::AsPrinted)
                           : parse_row_mapping(row_mapping);
  auto rules = make_rule_set(v, read_keyword_sections(rules_in), mapping);
  if (!stopwords_path.empty()) {
    auto in = open_in(stopwords_path);
    rules.stopwords = read_word_list(in);
  }
  if (!synonyms_path.empty()) {
    auto in = open_in(synonyms_path);
    rules.synonyms = read_synonyms(in);
  }
  if (rules.policy != MatchPolicy::LastMatchSingle && rules.policy != MatchPolicy::AllMatches)
    throw InvariantError("similarity versions need an embedding; use the command-line tool");
  return Labeler(std::move(rules));
}

py::list gold_rows(const GoldSet& g) {
  py::list rows;
  for (const auto& e : g.entries) rows.append(py::make_tuple(e.query_id, e.tokens, weights_of(e.target)));
  return rows;
}

}  // namespace

PYBIND11_MODULE(_qintent, m) {
  m.doc() = "Bindings for the qintent query-intent library";

  static py::exception<Error> base(m, "QintentError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("tokenize", [](const std::string& s) { return tokenize(s); }, "Query tokens, or None when nothing survives");
  m.def("fingerprint", [](const std::string& s) { return fingerprint_of(s); });

  m.def("count_params", [](const std::string& arch, std::size_t input_dim) {
    return count_params(ModelSpec::reference(parse_arch(arch), input_dim));
  }, py::arg("arch"), py::arg("input_dim"));
  m.def("parameter_layout", [](const std::string& arch, std::size_t input_dim) {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
    for (const auto& p : parameter_layout(ModelSpec::reference(parse_arch(arch), input_dim)))
      out.emplace_back(p.name, p.shape);
    return out;
  });

  m.def("accuracy_threshold", &accuracy_threshold);
  m.def("multi_modal_accuracy", [](const std::array<double, 3>& y, const std::array<double, 3>& t) {
    return multi_modal_accuracy(to_dist(y), to_dist(t));
  }, py::arg("prediction"), py::arg("target"));
  m.def("softmax", [](const std::vector<double>& z) { return nn::softmax(z); });
  m.def("cross_entropy", [](const std::vector<double>& y, const std::vector<double>& t) {
    return nn::cross_entropy(y, t);
  });
  m.def("entropy", [](const std::vector<double>& t) { return nn::entropy(t); });
  m.def("distance", [](const std::vector<double>& u, const std::vector<double>& v, const std::string& kind) {
    return distance(u, v, parse_distance(kind));
  }, py::arg("u"), py::arg("v"), py::arg("kind") = "squared-l2");

  py::class_<Labeler>(m, "Labeler")
      .def(py::init(&make_labeler), py::arg("version"), py::arg("rules"), py::arg("row_mapping") = "",
           py::arg("stopwords") = "", py::arg("synonyms") = "")
      .def("label", [](const Labeler& l, const std::vector<std::string>& tokens) -> std::optional<std::tuple<int, int, int>> {
        if (auto r = l.label(tokens)) return bits_of(*r);
        return std::nullopt;
      })
      .def("label_text", [](const Labeler& l, const std::string& text) -> std::optional<std::tuple<int, int, int>> {
        const auto tokens = tokenize(text);
        if (!tokens) return std::nullopt;
        if (auto r = l.label(*tokens)) return bits_of(*r);
        return std::nullopt;
      })
      .def("match_phrases", [](const Labeler& l, const std::vector<std::string>& tokens) {
        std::vector<std::tuple<std::string, std::string, std::size_t>> out;
        for (const auto& x : l.match_phrases(tokens))
          out.emplace_back(x.phrase, std::string(intent_name(x.intent)), x.position);
        return out;
      });

  m.def("build_gold", [](const std::string& annotations, const std::string& queries) {
    auto a = open_in(annotations);
    auto q = open_in(queries);
    const auto b = build_gold(read_annotations(a), read_query_texts(q));
    py::dict out;
    out["gt2"] = gold_rows(b.gt2);
    out["gt3"] = gold_rows(b.gt3);
    out["gt2_excluded"] = b.gt2.excluded;
    out["gt3_excluded"] = b.gt3.excluded;
    out["invalid"] = b.validation;
    return out;
  }, py::arg("annotations"), py::arg("queries"));

  m.def("checkpoint_hash", [](const std::string& path) { return load_checkpoint(path).hash(); });
}
