#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dysalign/token.hpp"

namespace dysalign {

struct LexiconEntry {
    std::string_view word;
    std::string_view pronunciation;  // space-separated CMU symbols
};

/// Small built-in word -> phoneme table used for demo corpora and for
/// phoneme-level simulation from raw text.
std::span<const LexiconEntry> demo_lexicon();

std::optional<std::vector<Phoneme>> lookup_pronunciation(std::string_view word);

/// Lowercase words of a text line with punctuation stripped.
std::vector<std::string> split_words(std::string_view line);

/// Interprets a text line as a reference sequence.
///
/// Word level: the words of the line. Phoneme level: either space-separated
/// CMU symbols, or words looked up in the demo lexicon. Throws DataError for
/// words outside the lexicon.
TokenSequence reference_from_text(std::string_view line, Level level);

/// Deterministic pseudo-sentences drawn from the demo lexicon.
std::vector<std::string> demo_sentences(std::size_t count, std::uint64_t seed,
                                        std::size_t min_words = 3, std::size_t max_words = 8);

}  // namespace dysalign
