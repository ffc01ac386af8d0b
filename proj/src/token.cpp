#include "dysalign/token.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "dysalign/errors.hpp"

namespace dysalign {

std::string_view level_name(Level level) {
    return level == Level::Phoneme ? "phoneme" : "word";
}

Level parse_level(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "phoneme") return Level::Phoneme;
    if (s == "word") return Level::Word;
    throw DataError("unknown level '" + std::string(text) + "' (expected phoneme|word)");
}

Token Token::phoneme(std::string_view symbol) {
    const Phoneme p = Phoneme::parse(symbol);
    return Token(Level::Phoneme, std::string(p.symbol()), p);
}

Token Token::phoneme(Phoneme p) { return Token(Level::Phoneme, std::string(p.symbol()), p); }

Token Token::word(std::string_view text) {
    if (text.empty()) throw InventoryError("empty word token");
    std::string s;
    s.reserve(text.size());
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)))
            throw InventoryError("word token contains whitespace: '" + std::string(text) + "'");
        s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return Token(Level::Word, std::move(s), std::nullopt);
}

Token Token::parse(std::string_view text, Level level) {
    return level == Level::Phoneme ? phoneme(text) : word(text);
}

Phoneme Token::as_phoneme() const {
    if (!phoneme_) throw InventoryError("token '" + value_ + "' is not a phoneme");
    return *phoneme_;
}

TokenSequence TokenSequence::parse(std::string_view text, Level level) {
    TokenSequence seq{level, {}};
    std::istringstream in{std::string(text)};
    std::string item;
    while (in >> item) seq.tokens.push_back(Token::parse(item, level));
    return seq;
}

std::string TokenSequence::str() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i].value();
    }
    return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

Relation relate(const Token& a, const Token& b) {
    if (a.level() != b.level()) throw InventoryError("cannot relate tokens of different levels");
    if (a.level() == Level::Phoneme) return similar(a.as_phoneme(), b.as_phoneme());
    if (a.value() == b.value()) return Relation::Exact;
    const std::size_t longest = std::max(a.value().size(), b.value().size());
    const std::size_t limit = std::max<std::size_t>(1, longest / 2);
    return levenshtein(a.value(), b.value()) <= limit ? Relation::Similar : Relation::Dissimilar;
}

}  // namespace dysalign
