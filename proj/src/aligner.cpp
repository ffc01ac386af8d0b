#include "dysalign/aligner.hpp"

#include "dysalign/errors.hpp"

namespace dysalign {

std::string_view method_name(Method m) {
    switch (m) {
        case Method::Hard: return "hard";
        case Method::Soft: return "soft";
        case Method::Dtw: return "dtw";
        case Method::Neural: return "neural";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    for (Method m : {Method::Hard, Method::Soft, Method::Dtw, Method::Neural})
        if (method_name(m) == text) return m;
    throw DataError("unknown alignment method '" + std::string(text) + "' (hard, soft, dtw, neural)");
}

Aligner Aligner::hard() { return Aligner{}; }

Aligner Aligner::soft(ScoringScheme scheme) {
    scheme.validate();
    Aligner a;
    a.method_ = Method::Soft;
    a.scheme_ = scheme;
    return a;
}

Aligner Aligner::dtw(DtwDistance distance) {
    Aligner a;
    a.method_ = Method::Dtw;
    a.distance_ = distance;
    return a;
}

Aligner Aligner::neural(std::shared_ptr<const NeuralAligner> model) {
    if (!model) throw ModelError("neural aligner needs a model");
    Aligner a;
    a.method_ = Method::Neural;
    a.model_ = std::move(model);
    return a;
}

JointLabelEncoding Aligner::align(const TokenSequence& ref, const TokenSequence& dys) const {
    switch (method_) {
        case Method::Hard: return hard_lcs(ref, dys).labels;
        case Method::Soft: return soft_lcs(ref, dys, scheme_).labels;
        case Method::Dtw: return dtw_align(ref, dys, distance_).labels;
        case Method::Neural:
            if (ref.level != dys.level) throw AlignError("reference and dysfluent levels differ");
            if (ref.level != model_->tokenizer().level())
                throw ModelError("model was trained at " + std::string(level_name(model_->tokenizer().level())) +
                                 " level");
            return model_->predict(ref, dys).labels;
    }
    throw AlignError("unknown method");
}

}  // namespace dysalign
