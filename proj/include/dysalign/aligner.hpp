#pragma once

#include <memory>
#include <string_view>

#include "dysalign/classic_align.hpp"
#include "dysalign/labels.hpp"
#include "dysalign/neural.hpp"

namespace dysalign {

enum class Method { Hard, Soft, Dtw, Neural };

std::string_view method_name(Method m);
/// "hard", "soft", "dtw", "neural". Throws DataError.
Method parse_method(std::string_view text);

/// Uniform front end over the classic and neural aligners: every method
/// produces a consistent JointLabelEncoding.
class Aligner {
public:
    static Aligner hard();
    static Aligner soft(ScoringScheme scheme = {});
    static Aligner dtw(DtwDistance distance = {});
    static Aligner neural(std::shared_ptr<const NeuralAligner> model);

    Method method() const { return method_; }
    JointLabelEncoding align(const TokenSequence& ref, const TokenSequence& dys) const;

private:
    Method method_ = Method::Hard;
    ScoringScheme scheme_;
    DtwDistance distance_;
    std::shared_ptr<const NeuralAligner> model_;
};

}  // namespace dysalign
