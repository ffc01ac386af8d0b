#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dysalign/labels.hpp"
#include "dysalign/random.hpp"
#include "dysalign/token.hpp"

namespace dysalign {

enum class DysfluencyKind : std::uint8_t { Repetition, Insertion, Deletion, Substitution };

inline constexpr std::array<DysfluencyKind, 4> kAllKinds = {
    DysfluencyKind::Repetition, DysfluencyKind::Insertion, DysfluencyKind::Deletion,
    DysfluencyKind::Substitution};

std::string_view kind_name(DysfluencyKind kind);
/// "repetition", "rep", "Repetition", ... Throws DataError.
DysfluencyKind parse_kind(std::string_view text);

/// Set of kinds as a 4-bit mask.
class KindSet {
public:
    KindSet() = default;
    void insert(DysfluencyKind k) { bits_ |= bit(k); }
    bool contains(DysfluencyKind k) const { return (bits_ & bit(k)) != 0; }
    std::size_t size() const;
    bool empty() const { return bits_ == 0; }
    std::string str() const;
    friend bool operator==(KindSet, KindSet) = default;

private:
    static std::uint8_t bit(DysfluencyKind k) { return std::uint8_t(1u << unsigned(k)); }
    std::uint8_t bits_ = 0;
};

struct DysfluencyEvent {
    DysfluencyKind kind = DysfluencyKind::Repetition;
    std::size_t ref_index = 0;
    std::vector<Token> inserted_tokens;  // copies, inserted units or the substitute
    std::string detail;

    friend bool operator==(const DysfluencyEvent&, const DysfluencyEvent&) = default;
};

struct SimulationConfig {
    Level level = Level::Phoneme;
    /// Weights over [Repetition, Insertion, Deletion, Substitution].
    std::array<double, 4> proportions{1.0, 1.0, 1.0, 1.0};
    std::size_t events_min = 1;
    std::size_t events_max = 3;
    std::size_t max_repeat = 3;
    std::uint64_t seed = 0;

    /// Throws DataError on invalid values.
    void validate() const;
};

struct CorpusRecord {
    std::string id;
    Level level = Level::Phoneme;
    TokenSequence reference;
    TokenSequence dysfluent;
    JointLabelEncoding labels;
    GoldAlignment gold;
    std::vector<DysfluencyEvent> events;
    std::vector<std::string> warnings;

    KindSet kinds() const;
};

/// Injects dysfluencies into `reference` (either level).
///
/// Event count is drawn from [events_min, events_max] and truncated to the
/// reference length. Positions are distinct. Throws DataError when the
/// reference has fewer than two tokens or cfg is invalid.
CorpusRecord inject(const TokenSequence& reference, const SimulationConfig& cfg, std::string id = {});

/// Word-level entry point; throws DataError if the reference is not word-level.
CorpusRecord inject_word_level(const TokenSequence& reference, const SimulationConfig& cfg,
                               std::string id = {});

/// Applies the grapheme confusion table to one or two letters of `word`.
/// Returns a word that is Similar (and not equal) to the input, or the input
/// unchanged if no rewrite is possible.
std::string confuse_word(std::string_view word, Rng& rng);

/// Generates `count` records from `texts` (cycled), seeding record i with
/// Rng::derive(cfg.seed, i). Ids are "rec-000000", ...
std::vector<CorpusRecord> simulate_corpus(const std::vector<TokenSequence>& texts,
                                          const SimulationConfig& cfg, std::size_t count);

}  // namespace dysalign
