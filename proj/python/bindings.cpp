#include <array>
#include <memory>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dysalign/aligner.hpp"
#include "dysalign/corpus_io.hpp"
#include "dysalign/errors.hpp"
#include "dysalign/lexicon.hpp"
#include "dysalign/simulator.hpp"
#include "dysalign/sta.hpp"
#include "dysalign/training.hpp"

namespace py = pybind11;
using namespace dysalign;

namespace {

py::dict labels_dict(const JointLabelEncoding& labels, const TokenSequence& ref, const TokenSequence& dys) {
    py::dict d;
    d["ref_labels"] = std::vector<int>(labels.ref_labels.begin(), labels.ref_labels.end());
    d["dys_labels"] = std::vector<int>(labels.dys_labels.begin(), labels.dys_labels.end());
    d["flat"] = serialize_flat(labels, ref, dys);
    d["groups"] = render_groups(alignment_from_labels(labels, ref, dys), ref, dys);
    return d;
}

Aligner make_aligner(const std::string& method, const std::shared_ptr<const NeuralAligner>& model) {
    const Method m = parse_method(method);
    switch (m) {
        case Method::Hard: return Aligner::hard();
        case Method::Soft: return Aligner::soft();
        case Method::Dtw: return Aligner::dtw();
        case Method::Neural:
            if (!model) throw DataError("the neural method needs a model");
            return Aligner::neural(model);
    }
    return Aligner::hard();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dysfluent sequence alignment";
    m.attr("__version__") = DYSALIGN_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
    py::register_exception<InventoryError>(m, "InventoryError", base.ptr());
    py::register_exception<CodecError>(m, "CodecError", base.ptr());
    py::register_exception<ModelError>(m, "ModelError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());

    m.def("inventory", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (Phoneme p : inventory()) out.emplace_back(std::string(p.symbol()), std::string(category_name(p.category())));
        return out;
    }, "(symbol, category) for the 39 phonemes");
    m.def("category_of", [](const std::string& s) { return std::string(category_name(category_of(s))); });
    m.def("similar", [](const std::string& a, const std::string& b) { return std::string(relation_name(similar(a, b))); });
    m.def("focal_loss_value", &focal_loss_value, py::arg("p_true"), py::arg("alpha"), py::arg("gamma"));

    py::class_<NeuralAligner, std::shared_ptr<NeuralAligner>>(m, "Model")
        .def_static("load", [](const std::string& path) {
            return std::make_shared<NeuralAligner>(load_checkpoint(path).model);
        })
        .def_property_readonly("parameter_count", &NeuralAligner::parameter_count)
        .def_property_readonly("level", [](const NeuralAligner& n) { return std::string(level_name(n.tokenizer().level())); })
        .def("probabilities", [](const NeuralAligner& n, const std::string& ref, const std::string& dys) {
            const Level level = n.tokenizer().level();
            std::vector<ClassProbs> rp, dp;
            n.probabilities(TokenSequence::parse(ref, level), TokenSequence::parse(dys, level), rp, dp);
            return std::make_pair(rp, dp);
        });

    m.def("align",
          [](const std::string& ref_text, const std::string& dys_text, const std::string& method,
             const std::string& level_text, std::shared_ptr<NeuralAligner> model) {
              const Level level = parse_level(level_text);
              const auto ref = TokenSequence::parse(ref_text, level);
              const auto dys = TokenSequence::parse(dys_text, level);
              const auto labels = make_aligner(method, model).align(ref, dys);
              return labels_dict(labels, ref, dys);
          },
          py::arg("ref"), py::arg("dys"), py::arg("method") = "soft", py::arg("level") = "phoneme",
          py::arg("model") = nullptr);

    m.def("simulate_json",
          [](const std::vector<std::string>& texts, std::size_t n, std::uint64_t seed, const std::string& level_text,
             std::array<double, 4> proportions) {
              SimulationConfig cfg;
              cfg.level = parse_level(level_text);
              cfg.seed = seed;
              cfg.proportions = proportions;
              std::vector<TokenSequence> refs;
              for (const auto& t : texts) refs.push_back(reference_from_text(t, cfg.level));
              std::vector<std::string> out;
              for (const auto& r : simulate_corpus(refs, cfg, n)) out.push_back(to_json(r).dump());
              return out;
          },
          py::arg("texts"), py::arg("n"), py::arg("seed") = 0, py::arg("level") = "phoneme",
          py::arg("proportions") = std::array<double, 4>{1, 1, 1, 1});

    m.def("demo_sentences", [](std::size_t n, std::uint64_t seed) { return demo_sentences(n, seed); },
          py::arg("n"), py::arg("seed") = 0);

    m.def("ctc_greedy_decode", [](const std::vector<std::vector<double>>& posteriors, double frame_ms) {
        EmissionMatrix e;
        e.frame_ms = frame_ms;
        e.frames = posteriors.size();
        for (const auto& row : posteriors) {
            if (row.size() != e.classes) throw DataError("each frame needs " + std::to_string(e.classes) + " posteriors");
            e.data.insert(e.data.end(), row.begin(), row.end());
        }
        const auto d = ctc_greedy_decode(e);
        std::vector<std::tuple<std::string, std::size_t, std::size_t>> spans;
        for (const auto& s : d.spans) spans.emplace_back(s.token.value(), s.start_frame, s.end_frame);
        return spans;
    }, py::arg("posteriors"), py::arg("frame_ms") = 20.0);
}
