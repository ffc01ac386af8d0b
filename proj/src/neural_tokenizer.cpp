#include <algorithm>
#include <map>
#include <set>

#include "dysalign/errors.hpp"
#include "dysalign/neural.hpp"
#include "dysalign/simulator.hpp"

namespace dysalign {

TokenizerSpec::TokenizerSpec(Level level, std::vector<std::string> symbols, std::vector<std::string> chars)
    : level_(level), symbols_(std::move(symbols)), chars_(std::move(chars)) {
    if (symbols_.size() < 3 || symbols_[kPad] != "<pad>" || symbols_[kSep] != "<sep>" ||
        symbols_[kUnk] != "<unk>")
        throw ModelError("tokenizer vocabulary must start with <pad>, <sep>, <unk>");
    for (std::size_t i = 0; i < symbols_.size(); ++i)
        if (!index_.emplace(symbols_[i], static_cast<int>(i)).second)
            throw ModelError("duplicate tokenizer symbol '" + symbols_[i] + "'");
    if (level_ == Level::Word) {
        if (chars_.size() < 2 || chars_[kCharPad] != "<pad>" || chars_[kCharUnk] != "<unk>")
            throw ModelError("character vocabulary must start with <pad>, <unk>");
        for (std::size_t i = 0; i < chars_.size(); ++i)
            if (!char_index_.emplace(chars_[i], static_cast<int>(i)).second)
                throw ModelError("duplicate tokenizer character '" + chars_[i] + "'");
    }
}

TokenizerSpec TokenizerSpec::phoneme() {
    std::vector<std::string> symbols{"<pad>", "<sep>", "<unk>"};
    for (Phoneme p : inventory()) symbols.emplace_back(p.symbol());
    return TokenizerSpec(Level::Phoneme, std::move(symbols), {});
}

TokenizerSpec TokenizerSpec::word(const std::vector<CorpusRecord>& corpus, std::size_t min_count) {
    std::map<std::string, std::size_t> counts;
    std::set<char> letters;
    auto visit = [&](const TokenSequence& seq) {
        for (const auto& t : seq.tokens) {
            ++counts[t.value()];
            letters.insert(t.value().begin(), t.value().end());
        }
    };
    for (const auto& r : corpus) {
        if (r.level != Level::Word) throw ModelError("word tokenizer built from a phoneme corpus");
        visit(r.reference);
        visit(r.dysfluent);
    }
    std::vector<std::string> symbols{"<pad>", "<sep>", "<unk>"};
    for (const auto& [w, c] : counts)
        if (c >= min_count) symbols.push_back(w);
    std::vector<std::string> chars{"<pad>", "<unk>"};
    for (char c : letters) chars.emplace_back(1, c);
    return TokenizerSpec(Level::Word, std::move(symbols), std::move(chars));
}

int TokenizerSpec::encode(const Token& token) const {
    const auto it = index_.find(token.value());
    return it == index_.end() ? kUnk : it->second;
}

std::vector<int> TokenizerSpec::encode(const TokenSequence& seq) const {
    if (seq.level != level_) throw ModelError("sequence level does not match the tokenizer");
    std::vector<int> ids;
    ids.reserve(seq.size());
    for (const auto& t : seq.tokens) ids.push_back(encode(t));
    return ids;
}

const std::string& TokenizerSpec::decode(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) throw ModelError("token id out of range");
    return symbols_[static_cast<std::size_t>(id)];
}

std::vector<int> TokenizerSpec::encode_chars(std::string_view word) const {
    std::vector<int> ids;
    ids.reserve(word.size());
    for (char c : word) {
        const auto it = char_index_.find(std::string(1, c));
        ids.push_back(it == char_index_.end() ? kCharUnk : it->second);
    }
    return ids;
}

}  // namespace dysalign
