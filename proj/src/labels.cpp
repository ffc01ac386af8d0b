#include "dysalign/labels.hpp"

#include <algorithm>
#include <sstream>

#include "dysalign/errors.hpp"

namespace dysalign {

std::size_t JointLabelEncoding::present_count() const {
    return static_cast<std::size_t>(std::count(ref_labels.begin(), ref_labels.end(), kPresent));
}

std::size_t JointLabelEncoding::boundary_count() const {
    return static_cast<std::size_t>(std::count(dys_labels.begin(), dys_labels.end(), kBoundary));
}

bool JointLabelEncoding::consistent() const {
    for (auto l : ref_labels)
        if (l != kPresent && l != kMissing) return false;
    for (auto l : dys_labels)
        if (l != kDysfluent && l != kBoundary) return false;
    return present_count() == boundary_count();
}

void validate(const GoldAlignment& gold, std::size_t ref_len, std::size_t dys_len) {
    if (gold.groups.size() != ref_len)
        throw AlignmentError("alignment has " + std::to_string(gold.groups.size()) +
                             " groups for " + std::to_string(ref_len) + " reference tokens");
    std::size_t cursor = 0;
    bool any = false;
    for (std::size_t i = 0; i < gold.groups.size(); ++i) {
        const Group& g = gold.groups[i];
        if (g.begin > g.end || g.end > dys_len)
            throw AlignmentError("group " + std::to_string(i) + " has an invalid span");
        if (g.empty()) {
            if (g.boundary) throw AlignmentError("empty group " + std::to_string(i) + " has a boundary");
            continue;
        }
        if (g.begin != cursor)
            throw AlignmentError("group " + std::to_string(i) + " is not contiguous with its predecessor");
        if (!g.boundary || *g.boundary < g.begin || *g.boundary >= g.end)
            throw AlignmentError("group " + std::to_string(i) + " boundary outside its span");
        cursor = g.end;
        any = true;
    }
    if (any && cursor != dys_len) throw AlignmentError("groups do not cover the dysfluent sequence");
}

std::size_t pick_boundary(const Token& reference, const TokenSequence& dys, std::size_t begin,
                          std::size_t end) {
    std::optional<std::size_t> similar_hit;
    for (std::size_t j = end; j-- > begin;) {
        const Relation r = relate(reference, dys[j]);
        if (r == Relation::Exact) return j;
        if (r == Relation::Similar && !similar_hit) similar_hit = j;
    }
    return similar_hit.value_or(end - 1);
}

JointLabelEncoding gold_labels_from_alignment(const GoldAlignment& gold, const TokenSequence& ref,
                                              const TokenSequence& dys) {
    validate(gold, ref.size(), dys.size());
    JointLabelEncoding out;
    out.ref_labels.assign(ref.size(), kPresent);
    out.dys_labels.assign(dys.size(), kDysfluent);
    for (std::size_t i = 0; i < gold.groups.size(); ++i) {
        const Group& g = gold.groups[i];
        if (g.empty())
            out.ref_labels[i] = kMissing;
        else
            out.dys_labels[*g.boundary] = kBoundary;
    }
    return out;
}

GoldAlignment alignment_from_labels(const JointLabelEncoding& labels, const TokenSequence& ref,
                                    const TokenSequence& dys) {
    if (labels.ref_labels.size() != ref.size() || labels.dys_labels.size() != dys.size())
        throw CodecError("label lengths do not match the sequences");
    if (!labels.consistent())
        throw CodecError("label counts disagree: " + std::to_string(labels.present_count()) +
                         " present reference tokens vs " + std::to_string(labels.boundary_count()) +
                         " boundaries");

    std::vector<std::size_t> present, boundaries;
    for (std::size_t i = 0; i < ref.size(); ++i)
        if (labels.ref_labels[i] == kPresent) present.push_back(i);
    for (std::size_t j = 0; j < dys.size(); ++j)
        if (labels.dys_labels[j] == kBoundary) boundaries.push_back(j);

    GoldAlignment out;
    out.groups.assign(ref.size(), Group{});
    if (present.empty()) return out;

    const std::size_t k_count = present.size();
    // starts[k]: first dys index owned by the k-th present token.
    std::vector<std::size_t> starts(k_count + 1);
    starts[0] = 0;
    starts[k_count] = dys.size();
    for (std::size_t k = 1; k < k_count; ++k) {
        const std::size_t prev_b = boundaries[k - 1];
        const std::size_t next_b = boundaries[k];
        const Token& next_ref = ref[present[k]];
        std::size_t split = next_b;
        while (split > prev_b + 1 && relate(next_ref, dys[split - 1]) != Relation::Dissimilar) --split;
        starts[k] = split;
    }

    std::size_t cursor = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (labels.ref_labels[i] == kMissing) {
            out.groups[i] = Group{cursor, cursor, std::nullopt};
            continue;
        }
        out.groups[i] = Group{starts[k], starts[k + 1], boundaries[k]};
        cursor = starts[k + 1];
        ++k;
    }
    return out;
}

std::string serialize_flat(const JointLabelEncoding& labels, const GoldAlignment& gold) {
    // Walk groups in order; a missing token is emitted after the previous
    // group's span.
    std::vector<std::string> items;
    std::size_t emitted = 0;
    for (std::size_t i = 0; i < gold.groups.size(); ++i) {
        const Group& g = gold.groups[i];
        if (g.empty()) {
            for (; emitted < g.begin; ++emitted) items.push_back(std::to_string(labels.dys_labels[emitted]));
            items.emplace_back("2");
            continue;
        }
        for (; emitted < g.end; ++emitted) items.push_back(std::to_string(labels.dys_labels[emitted]));
    }
    for (; emitted < labels.dys_labels.size(); ++emitted)
        items.push_back(std::to_string(labels.dys_labels[emitted]));
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.push_back(' ');
        out += items[i];
    }
    return out;
}

std::string serialize_flat(const JointLabelEncoding& labels, const TokenSequence& ref,
                           const TokenSequence& dys) {
    return serialize_flat(labels, alignment_from_labels(labels, ref, dys));
}

JointLabelEncoding parse_flat(std::string_view flat, std::size_t ref_len, std::size_t dys_len) {
    std::istringstream in{std::string(flat)};
    std::string item;
    JointLabelEncoding out;
    out.ref_labels.reserve(ref_len);
    // The k-th 1 or 2 in reading order belongs to the k-th reference token.
    while (in >> item) {
        if (item == "0") {
            out.dys_labels.push_back(kDysfluent);
        } else if (item == "1") {
            out.dys_labels.push_back(kBoundary);
            out.ref_labels.push_back(kPresent);
        } else if (item == "2") {
            out.ref_labels.push_back(kMissing);
        } else {
            throw CodecError("invalid flat label '" + item + "'");
        }
    }
    if (out.ref_labels.size() != ref_len || out.dys_labels.size() != dys_len)
        throw CodecError("flat label string does not match the sequence lengths");
    return out;
}

std::string render_groups(const GoldAlignment& gold, const TokenSequence& ref,
                          const TokenSequence& dys) {
    std::string out;
    for (std::size_t i = 0; i < gold.groups.size(); ++i) {
        if (i) out.push_back(' ');
        out += ref[i].value();
        out += "-(";
        const Group& g = gold.groups[i];
        for (std::size_t j = g.begin; j < g.end; ++j) {
            if (j > g.begin) out.push_back(' ');
            out += dys[j].value();
        }
        out.push_back(')');
    }
    return out;
}

}  // namespace dysalign
