#include "dysalign/lexicon.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "dysalign/errors.hpp"
#include "dysalign/random.hpp"

namespace dysalign {
namespace {

// Sorted by word; stress digits already removed.
constexpr std::array kLexicon = std::to_array<LexiconEntry>({
    {"a", "AH"},
    {"about", "AH B AW T"},
    {"after", "AE F T ER"},
    {"again", "AH G EH N"},
    {"all", "AO L"},
    {"also", "AO L S OW"},
    {"always", "AO L W EY Z"},
    {"an", "AE N"},
    {"and", "AH N D"},
    {"animal", "AE N AH M AH L"},
    {"another", "AH N AH DH ER"},
    {"any", "EH N IY"},
    {"apple", "AE P AH L"},
    {"are", "AA R"},
    {"around", "ER AW N D"},
    {"as", "AE Z"},
    {"ask", "AE S K"},
    {"at", "AE T"},
    {"away", "AH W EY"},
    {"baby", "B EY B IY"},
    {"back", "B AE K"},
    {"bad", "B AE D"},
    {"ball", "B AO L"},
    {"bank", "B AE NG K"},
    {"be", "B IY"},
    {"because", "B IH K AO Z"},
    {"bed", "B EH D"},
    {"been", "B IH N"},
    {"before", "B IH F AO R"},
    {"big", "B IH G"},
    {"bird", "B ER D"},
    {"black", "B L AE K"},
    {"blue", "B L UW"},
    {"boat", "B OW T"},
    {"book", "B UH K"},
    {"both", "B OW TH"},
    {"box", "B AA K S"},
    {"boy", "B OY"},
    {"bread", "B R EH D"},
    {"bring", "B R IH NG"},
    {"brother", "B R AH DH ER"},
    {"brown", "B R AW N"},
    {"but", "B AH T"},
    {"buy", "B AY"},
    {"by", "B AY"},
    {"call", "K AO L"},
    {"came", "K EY M"},
    {"can", "K AE N"},
    {"car", "K AA R"},
    {"cat", "K AE T"},
    {"chair", "CH EH R"},
    {"cheese", "CH IY Z"},
    {"child", "CH AY L D"},
    {"city", "S IH T IY"},
    {"clean", "K L IY N"},
    {"close", "K L OW Z"},
    {"cold", "K OW L D"},
    {"come", "K AH M"},
    {"could", "K UH D"},
    {"cup", "K AH P"},
    {"day", "D EY"},
    {"did", "D IH D"},
    {"dinner", "D IH N ER"},
    {"do", "D UW"},
    {"dog", "D AO G"},
    {"door", "D AO R"},
    {"down", "D AW N"},
    {"drink", "D R IH NG K"},
    {"each", "IY CH"},
    {"early", "ER L IY"},
    {"eat", "IY T"},
    {"egg", "EH G"},
    {"every", "EH V R IY"},
    {"face", "F EY S"},
    {"family", "F AE M AH L IY"},
    {"far", "F AA R"},
    {"farm", "F AA R M"},
    {"fast", "F AE S T"},
    {"father", "F AA DH ER"},
    {"find", "F AY N D"},
    {"fish", "F IH SH"},
    {"five", "F AY V"},
    {"floor", "F L AO R"},
    {"flower", "F L AW ER"},
    {"food", "F UW D"},
    {"for", "F AO R"},
    {"friend", "F R EH N D"},
    {"from", "F R AH M"},
    {"fruit", "F R UW T"},
    {"full", "F UH L"},
    {"game", "G EY M"},
    {"garden", "G AA R D AH N"},
    {"girl", "G ER L"},
    {"give", "G IH V"},
    {"go", "G OW"},
    {"good", "G UH D"},
    {"grandfather", "G R AE N D F AA DH ER"},
    {"grass", "G R AE S"},
    {"great", "G R EY T"},
    {"green", "G R IY N"},
    {"had", "HH AE D"},
    {"hand", "HH AE N D"},
    {"happy", "HH AE P IY"},
    {"has", "HH AE Z"},
    {"hat", "HH AE T"},
    {"have", "HH AE V"},
    {"he", "HH IY"},
    {"head", "HH EH D"},
    {"hear", "HH IH R"},
    {"help", "HH EH L P"},
    {"her", "HH ER"},
    {"here", "HH IH R"},
    {"high", "HH AY"},
    {"his", "HH IH Z"},
    {"home", "HH OW M"},
    {"horse", "HH AO R S"},
    {"hot", "HH AA T"},
    {"house", "HH AW S"},
    {"how", "HH AW"},
    {"i", "AY"},
    {"if", "IH F"},
    {"in", "IH N"},
    {"into", "IH N T UW"},
    {"is", "IH Z"},
    {"it", "IH T"},
    {"joy", "JH OY"},
    {"judge", "JH AH JH"},
    {"jump", "JH AH M P"},
    {"just", "JH AH S T"},
    {"keep", "K IY P"},
    {"kind", "K AY N D"},
    {"king", "K IH NG"},
    {"kitchen", "K IH CH AH N"},
    {"know", "N OW"},
    {"lake", "L EY K"},
    {"last", "L AE S T"},
    {"late", "L EY T"},
    {"leg", "L EH G"},
    {"letter", "L EH T ER"},
    {"light", "L AY T"},
    {"like", "L AY K"},
    {"little", "L IH T AH L"},
    {"live", "L IH V"},
    {"long", "L AO NG"},
    {"look", "L UH K"},
    {"love", "L AH V"},
    {"made", "M EY D"},
    {"make", "M EY K"},
    {"man", "M AE N"},
    {"many", "M EH N IY"},
    {"may", "M EY"},
    {"me", "M IY"},
    {"measure", "M EH ZH ER"},
    {"milk", "M IH L K"},
    {"money", "M AH N IY"},
    {"moon", "M UW N"},
    {"more", "M AO R"},
    {"morning", "M AO R N IH NG"},
    {"mother", "M AH DH ER"},
    {"much", "M AH CH"},
    {"music", "M Y UW Z IH K"},
    {"my", "M AY"},
    {"name", "N EY M"},
    {"near", "N IH R"},
    {"never", "N EH V ER"},
    {"new", "N UW"},
    {"next", "N EH K S T"},
    {"nice", "N AY S"},
    {"night", "N AY T"},
    {"no", "N OW"},
    {"not", "N AA T"},
    {"now", "N AW"},
    {"of", "AH V"},
    {"off", "AO F"},
    {"old", "OW L D"},
    {"on", "AA N"},
    {"one", "W AH N"},
    {"open", "OW P AH N"},
    {"or", "AO R"},
    {"orange", "AO R AH N JH"},
    {"other", "AH DH ER"},
    {"our", "AW ER"},
    {"out", "AW T"},
    {"over", "OW V ER"},
    {"paper", "P EY P ER"},
    {"park", "P AA R K"},
    {"pen", "P EH N"},
    {"people", "P IY P AH L"},
    {"pick", "P IH K"},
    {"play", "P L EY"},
    {"please", "P L IY Z"},
    {"put", "P UH T"},
    {"rain", "R EY N"},
    {"read", "R IY D"},
    {"red", "R EH D"},
    {"ride", "R AY D"},
    {"right", "R AY T"},
    {"river", "R IH V ER"},
    {"road", "R OW D"},
    {"room", "R UW M"},
    {"run", "R AH N"},
    {"said", "S EH D"},
    {"same", "S EY M"},
    {"school", "S K UW L"},
    {"sea", "S IY"},
    {"see", "S IY"},
    {"sell", "S EH L"},
    {"seven", "S EH V AH N"},
    {"she", "SH IY"},
    {"ship", "SH IH P"},
    {"shoe", "SH UW"},
    {"shop", "SH AA P"},
    {"sing", "S IH NG"},
    {"sister", "S IH S T ER"},
    {"sit", "S IH T"},
    {"six", "S IH K S"},
    {"sleep", "S L IY P"},
    {"small", "S M AO L"},
    {"snow", "S N OW"},
    {"so", "S OW"},
    {"some", "S AH M"},
    {"song", "S AO NG"},
    {"soon", "S UW N"},
    {"stop", "S T AA P"},
    {"street", "S T R IY T"},
    {"sun", "S AH N"},
    {"table", "T EY B AH L"},
    {"take", "T EY K"},
    {"talk", "T AO K"},
    {"tea", "T IY"},
    {"teacher", "T IY CH ER"},
    {"ten", "T EH N"},
    {"than", "DH AE N"},
    {"thank", "TH AE NG K"},
    {"that", "DH AE T"},
    {"the", "DH AH"},
    {"their", "DH EH R"},
    {"them", "DH EH M"},
    {"then", "DH EH N"},
    {"there", "DH EH R"},
    {"these", "DH IY Z"},
    {"they", "DH EY"},
    {"thin", "TH IH N"},
    {"thing", "TH IH NG"},
    {"think", "TH IH NG K"},
    {"this", "DH IH S"},
    {"three", "TH R IY"},
    {"time", "T AY M"},
    {"to", "T UW"},
    {"today", "T AH D EY"},
    {"together", "T AH G EH DH ER"},
    {"too", "T UW"},
    {"top", "T AA P"},
    {"town", "T AW N"},
    {"tree", "T R IY"},
    {"two", "T UW"},
    {"under", "AH N D ER"},
    {"up", "AH P"},
    {"us", "AH S"},
    {"very", "V EH R IY"},
    {"vision", "V IH ZH AH N"},
    {"voice", "V OY S"},
    {"walk", "W AO K"},
    {"want", "W AA N T"},
    {"warm", "W AO R M"},
    {"was", "W AA Z"},
    {"watch", "W AA CH"},
    {"water", "W AO T ER"},
    {"way", "W EY"},
    {"we", "W IY"},
    {"well", "W EH L"},
    {"went", "W EH N T"},
    {"were", "W ER"},
    {"what", "W AH T"},
    {"when", "W EH N"},
    {"where", "W EH R"},
    {"white", "W AY T"},
    {"who", "HH UW"},
    {"why", "W AY"},
    {"will", "W IH L"},
    {"window", "W IH N D OW"},
    {"with", "W IH DH"},
    {"woman", "W UH M AH N"},
    {"word", "W ER D"},
    {"work", "W ER K"},
    {"world", "W ER L D"},
    {"would", "W UH D"},
    {"write", "R AY T"},
    {"year", "Y IH R"},
    {"yellow", "Y EH L OW"},
    {"yes", "Y EH S"},
    {"you", "Y UW"},
    {"young", "Y AH NG"},
    {"your", "Y AO R"},
    {"zero", "Z IH R OW"},
    {"zoo", "Z UW"},
});

}  // namespace

std::span<const LexiconEntry> demo_lexicon() { return kLexicon; }

std::optional<std::vector<Phoneme>> lookup_pronunciation(std::string_view word) {
    std::string key(word);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto it = std::lower_bound(kLexicon.begin(), kLexicon.end(), key,
                                     [](const LexiconEntry& e, const std::string& k) { return e.word < k; });
    if (it == kLexicon.end() || it->word != key) return std::nullopt;
    std::vector<Phoneme> out;
    std::istringstream in{std::string(it->pronunciation)};
    std::string sym;
    while (in >> sym) out.push_back(Phoneme::parse(sym));
    return out;
}

std::vector<std::string> split_words(std::string_view line) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : line) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '\'') {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

namespace {

bool looks_like_phonemes(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::string item;
    bool any = false;
    while (in >> item) {
        any = true;
        if (std::any_of(item.begin(), item.end(),
                        [](unsigned char c) { return std::islower(c); }))
            return false;
        try {
            Phoneme::parse(item);
        } catch (const InventoryError&) {
            return false;
        }
    }
    return any;
}

}  // namespace

TokenSequence reference_from_text(std::string_view line, Level level) {
    TokenSequence seq{level, {}};
    if (level == Level::Word) {
        for (const auto& w : split_words(line)) seq.tokens.push_back(Token::word(w));
        return seq;
    }
    if (looks_like_phonemes(line)) return TokenSequence::parse(line, Level::Phoneme);
    for (const auto& w : split_words(line)) {
        const auto pron = lookup_pronunciation(w);
        if (!pron) throw DataError("word '" + w + "' is not in the demo lexicon");
        for (Phoneme p : *pron) seq.tokens.push_back(Token::phoneme(p));
    }
    return seq;
}

std::vector<std::string> demo_sentences(std::size_t count, std::uint64_t seed, std::size_t min_words,
                                        std::size_t max_words) {
    if (min_words == 0 || min_words > max_words) throw DataError("invalid sentence length range");
    Rng rng(seed);
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto n = static_cast<std::size_t>(
            rng.between(static_cast<std::int64_t>(min_words), static_cast<std::int64_t>(max_words)));
        std::string line;
        for (std::size_t k = 0; k < n; ++k) {
            if (k) line.push_back(' ');
            line += kLexicon[rng.index(kLexicon.size())].word;
        }
        out.push_back(std::move(line));
    }
    return out;
}

}  // namespace dysalign
