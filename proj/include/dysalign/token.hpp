#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dysalign/phoneme.hpp"

namespace dysalign {

enum class Level : std::uint8_t { Phoneme, Word };

std::string_view level_name(Level level);
/// Accepts "phoneme" / "word" (case-insensitive). Throws DataError.
Level parse_level(std::string_view text);

/// A phoneme symbol or a lowercase word.
class Token {
public:
    static Token phoneme(std::string_view symbol);
    static Token phoneme(Phoneme p);
    /// Lowercases; throws InventoryError on empty or whitespace-containing input.
    static Token word(std::string_view text);
    static Token parse(std::string_view text, Level level);

    Level level() const { return level_; }
    const std::string& value() const { return value_; }
    /// Only valid for phoneme-level tokens.
    Phoneme as_phoneme() const;

    friend bool operator==(const Token& a, const Token& b) {
        return a.level_ == b.level_ && a.value_ == b.value_;
    }

private:
    Token(Level level, std::string value, std::optional<Phoneme> ph)
        : level_(level), value_(std::move(value)), phoneme_(ph) {}

    Level level_;
    std::string value_;
    std::optional<Phoneme> phoneme_;
};

/// Homogeneous ordered token list.
struct TokenSequence {
    Level level = Level::Phoneme;
    std::vector<Token> tokens;

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
    const Token& operator[](std::size_t i) const { return tokens[i]; }

    /// Space-separated tokens. Throws InventoryError on invalid symbols.
    static TokenSequence parse(std::string_view text, Level level);
    std::string str() const;

    friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Exact / Similar / Dissimilar for two tokens of the same level.
///
/// Phonemes use category membership. Words are Similar when their edit
/// distance is at most max(1, longer_length / 2).
Relation relate(const Token& a, const Token& b);

std::size_t levenshtein(std::string_view a, std::string_view b);

}  // namespace dysalign
