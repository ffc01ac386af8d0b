#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dysalign/token.hpp"

namespace dysalign {

/// Reference-side labels.
inline constexpr std::uint8_t kPresent = 1;
inline constexpr std::uint8_t kMissing = 2;
/// Dysfluent-side labels.
inline constexpr std::uint8_t kDysfluent = 0;
inline constexpr std::uint8_t kBoundary = 1;

/// Canonical alignment representation: one label per reference token
/// ({1 present, 2 missing}) and one per dysfluent token ({1 boundary,
/// 0 dysfluent}).
struct JointLabelEncoding {
    std::vector<std::uint8_t> ref_labels;
    std::vector<std::uint8_t> dys_labels;

    /// Every value in range and #present == #boundaries.
    bool consistent() const;
    std::size_t present_count() const;
    std::size_t boundary_count() const;

    friend bool operator==(const JointLabelEncoding&, const JointLabelEncoding&) = default;
};

/// Contiguous run of dysfluent indices [begin, end) attributed to one
/// reference token. Empty (begin == end) iff the token was not realized.
struct Group {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::optional<std::size_t> boundary;

    bool empty() const { return begin == end; }
    std::size_t size() const { return end - begin; }

    friend bool operator==(const Group&, const Group&) = default;
};

struct GoldAlignment {
    std::vector<Group> groups;  // one per reference token

    friend bool operator==(const GoldAlignment&, const GoldAlignment&) = default;
};

/// Throws AlignmentError unless `gold` has one group per reference token,
/// non-empty groups are ordered, disjoint and cover [0, dys_len), and every
/// non-empty group has its boundary inside its span. An alignment with only
/// empty groups is accepted for any dys_len (nothing could be attributed).
void validate(const GoldAlignment& gold, std::size_t ref_len, std::size_t dys_len);

/// Boundary of a group: last member Exact to the reference token, else the
/// last Similar member, else the last member.
std::size_t pick_boundary(const Token& reference, const TokenSequence& dys, std::size_t begin,
                          std::size_t end);

JointLabelEncoding gold_labels_from_alignment(const GoldAlignment& gold, const TokenSequence& ref,
                                              const TokenSequence& dys);

/// Inverse codec. The k-th present reference token owns the k-th boundary.
/// A 0-run between two boundaries joins the earlier group, except for its
/// longest suffix of tokens Exact/Similar to the next present reference
/// token, which joins the later group. Leading zeros join the first group,
/// trailing zeros the last. Throws CodecError if the counts disagree.
GoldAlignment alignment_from_labels(const JointLabelEncoding& labels, const TokenSequence& ref,
                                    const TokenSequence& dys);

/// Reading-order label string: dysfluent labels with a "2" for each missing
/// reference token, placed after the previous group's span.
std::string serialize_flat(const JointLabelEncoding& labels, const GoldAlignment& gold);
std::string serialize_flat(const JointLabelEncoding& labels, const TokenSequence& ref,
                           const TokenSequence& dys);

/// Inverse of serialize_flat given the two sequence lengths.
JointLabelEncoding parse_flat(std::string_view flat, std::size_t ref_len, std::size_t dys_len);

/// "P-(P) EH-(EH K) N-()" style rendering.
std::string render_groups(const GoldAlignment& gold, const TokenSequence& ref,
                          const TokenSequence& dys);

}  // namespace dysalign
