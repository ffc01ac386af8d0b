#include "dysalign/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <numeric>

#include "dysalign/errors.hpp"
#include "dysalign/lexicon.hpp"

namespace dysalign {

std::string_view kind_name(DysfluencyKind kind) {
    switch (kind) {
        case DysfluencyKind::Repetition: return "repetition";
        case DysfluencyKind::Insertion: return "insertion";
        case DysfluencyKind::Deletion: return "deletion";
        case DysfluencyKind::Substitution: return "substitution";
    }
    return "?";
}

DysfluencyKind parse_kind(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    for (auto k : kAllKinds) {
        const auto name = kind_name(k);
        if (s == name || s == name.substr(0, 3)) return k;
    }
    throw DataError("unknown dysfluency kind '" + std::string(text) + "'");
}

std::size_t KindSet::size() const {
    std::size_t n = 0;
    for (auto k : kAllKinds) n += contains(k) ? 1 : 0;
    return n;
}

std::string KindSet::str() const {
    std::string out;
    for (auto k : kAllKinds) {
        if (!contains(k)) continue;
        if (!out.empty()) out.push_back(',');
        out += kind_name(k);
    }
    return out.empty() ? "none" : out;
}

void SimulationConfig::validate() const {
    double total = 0.0;
    for (double w : proportions) {
        if (!(w >= 0.0)) throw DataError("proportions must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw DataError("proportions must not all be zero");
    if (events_min > events_max) throw DataError("events_per_sentence: min > max");
    if (max_repeat < 1) throw DataError("max_repeat must be >= 1");
}

KindSet CorpusRecord::kinds() const {
    KindSet out;
    for (const auto& e : events) out.insert(e.kind);
    return out;
}

namespace {

struct GraphemeRule {
    std::string_view from;
    std::string_view to;
};

// Letter confusions mirroring the phoneme categories: voicing pairs among
// plosives and fricatives, affricates, nasals, liquids, glides, vowels.
constexpr GraphemeRule kGraphemeRules[] = {
    {"sh", "zh"}, {"zh", "sh"}, {"ch", "j"}, {"j", "ch"}, {"p", "b"}, {"b", "p"}, {"t", "d"},
    {"d", "t"},   {"k", "g"},   {"k", "c"},  {"g", "k"},  {"c", "k"}, {"f", "v"}, {"v", "f"},
    {"s", "z"},   {"z", "s"},   {"m", "n"},  {"n", "m"},  {"l", "r"}, {"r", "l"}, {"w", "y"},
    {"y", "w"},   {"a", "e"},   {"a", "i"},  {"a", "o"},  {"a", "u"}, {"e", "a"}, {"e", "i"},
    {"e", "o"},   {"e", "u"},   {"i", "a"},  {"i", "e"},  {"i", "o"}, {"i", "u"}, {"o", "a"},
    {"o", "e"},   {"o", "i"},   {"o", "u"},  {"u", "a"},  {"u", "e"}, {"u", "i"}, {"u", "o"},
};

struct Site {
    std::size_t pos;
    const GraphemeRule* rule;
};

std::vector<Site> grapheme_sites(std::string_view word) {
    std::vector<Site> sites;
    for (std::size_t pos = 0; pos < word.size(); ++pos)
        for (const auto& rule : kGraphemeRules)
            if (word.substr(pos, rule.from.size()) == rule.from) sites.push_back({pos, &rule});
    return sites;
}

std::string apply_sites(std::string_view word, std::vector<Site> chosen) {
    std::sort(chosen.begin(), chosen.end(), [](const Site& a, const Site& b) { return a.pos < b.pos; });
    std::string out;
    std::size_t pos = 0;
    for (const auto& s : chosen) {
        out.append(word.substr(pos, s.pos - pos));
        out.append(s.rule->to);
        pos = s.pos + s.rule->from.size();
    }
    out.append(word.substr(pos));
    return out;
}

bool dissimilar_to_all(const Token& t, std::initializer_list<const Token*> others) {
    for (const Token* o : others)
        if (o && relate(t, *o) != Relation::Dissimilar) return false;
    return true;
}

Token draw_inserted_phoneme(const Token& host, const Token* next, Rng& rng) {
    std::vector<Phoneme> pool;
    for (Phoneme p : inventory()) {
        const Token t = Token::phoneme(p);
        if (dissimilar_to_all(t, {&host, next})) pool.push_back(p);
    }
    return Token::phoneme(pool[rng.index(pool.size())]);
}

Token draw_inserted_word(const TokenSequence& ref, std::size_t i, const Token* next, Rng& rng) {
    const Token& host = ref[i];
    // Neighbours by increasing distance, skipping the host and the next token.
    std::vector<std::size_t> order;
    for (std::size_t d = 1; d < ref.size(); ++d) {
        if (i >= d) order.push_back(i - d);
        if (i + d < ref.size() && d >= 2) order.push_back(i + d);
    }
    for (std::size_t idx : order) {
        const Token candidate = Token::word(confuse_word(ref[idx].value(), rng));
        if (dissimilar_to_all(candidate, {&host, next})) return candidate;
    }
    const auto lex = demo_lexicon();
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Token candidate = Token::word(lex[rng.index(lex.size())].word);
        if (dissimilar_to_all(candidate, {&host, next})) return candidate;
    }
    return Token::word("xq");
}

}  // namespace

std::string confuse_word(std::string_view word, Rng& rng) {
    const auto sites = grapheme_sites(word);
    if (sites.empty()) return std::string(word);
    const Token original = Token::word(word);
    for (int attempt = 0; attempt < 16; ++attempt) {
        const std::size_t edits = word.size() >= 4 ? static_cast<std::size_t>(rng.between(1, 2)) : 1;
        std::vector<Site> chosen;
        std::vector<std::size_t> order(sites.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t k = 0; k < order.size() && chosen.size() < edits; ++k) {
            std::swap(order[k], order[k + rng.index(order.size() - k)]);
            const Site& s = sites[order[k]];
            const bool overlaps = std::any_of(chosen.begin(), chosen.end(), [&](const Site& c) {
                return s.pos < c.pos + c.rule->from.size() && c.pos < s.pos + s.rule->from.size();
            });
            if (!overlaps) chosen.push_back(s);
        }
        std::string out = apply_sites(word, chosen);
        if (out.empty()) continue;
        if (relate(original, Token::word(out)) == Relation::Similar) return out;
    }
    return std::string(word);
}

CorpusRecord inject(const TokenSequence& reference, const SimulationConfig& cfg, std::string id) {
    cfg.validate();
    if (reference.level != cfg.level)
        throw DataError("reference level does not match the simulation level");
    if (reference.size() < 2) throw DataError("reference needs at least two tokens");
    for (const auto& t : reference.tokens)
        if (t.level() != reference.level) throw DataError("mixed-level reference sequence");

    Rng rng(cfg.seed);
    const std::size_t len = reference.size();

    CorpusRecord rec;
    rec.id = std::move(id);
    rec.level = cfg.level;
    rec.reference = reference;
    rec.dysfluent.level = cfg.level;

    std::size_t n_events = static_cast<std::size_t>(
        rng.between(static_cast<std::int64_t>(cfg.events_min), static_cast<std::int64_t>(cfg.events_max)));
    if (n_events > len) {
        rec.warnings.push_back("requested " + std::to_string(n_events) + " events for " +
                               std::to_string(len) + " tokens; truncated");
        n_events = len;
    }

    // Distinct positions: partial Fisher-Yates.
    std::vector<std::size_t> slots(len);
    std::iota(slots.begin(), slots.end(), 0);
    for (std::size_t k = 0; k < n_events; ++k) std::swap(slots[k], slots[k + rng.index(len - k)]);
    std::vector<std::size_t> positions(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(n_events));
    std::sort(positions.begin(), positions.end());

    std::vector<std::optional<DysfluencyKind>> kind_at(len);
    for (std::size_t pos : positions) kind_at[pos] = kAllKinds[rng.weighted(cfg.proportions)];

    // Keep at least one realized token, and only substitute words that the
    // grapheme table can rewrite.
    auto redraw_without = [&](std::size_t pos, DysfluencyKind banned) {
        auto weights = cfg.proportions;
        weights[std::size_t(banned)] = 0.0;
        if (std::accumulate(weights.begin(), weights.end(), 0.0) > 0.0) {
            kind_at[pos] = kAllKinds[rng.weighted(weights)];
        } else {
            rec.warnings.push_back("dropped " + std::string(kind_name(banned)) + " at " + std::to_string(pos));
            kind_at[pos].reset();
        }
    };
    std::vector<std::optional<Token>> substitute(len);
    for (std::size_t pos : positions) {
        if (kind_at[pos] != DysfluencyKind::Substitution) continue;
        const Token& tok = reference[pos];
        Token replacement = cfg.level == Level::Phoneme
                                ? Token::phoneme(sample_confusable(tok.as_phoneme(), rng))
                                : Token::word(confuse_word(tok.value(), rng));
        if (replacement == tok)
            redraw_without(pos, DysfluencyKind::Substitution);
        else
            substitute[pos] = std::move(replacement);
    }
    if (std::all_of(kind_at.begin(), kind_at.end(),
                    [](const auto& k) { return k == DysfluencyKind::Deletion; }))
        redraw_without(positions.back(), DysfluencyKind::Deletion);
    if (!positions.empty() && kind_at[positions.back()] == DysfluencyKind::Substitution &&
        !substitute[positions.back()])
        kind_at[positions.back()].reset();

    auto next_realized = [&](std::size_t i) -> const Token* {
        for (std::size_t k = i + 1; k < len; ++k)
            if (kind_at[k] != DysfluencyKind::Deletion) return &reference[k];
        return nullptr;
    };

    auto& dys = rec.dysfluent.tokens;
    rec.gold.groups.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
        const Token& tok = reference[i];
        const std::size_t begin = dys.size();
        if (!kind_at[i]) {
            dys.push_back(tok);
        } else {
            switch (*kind_at[i]) {
                case DysfluencyKind::Repetition: {
                    const auto copies = static_cast<std::size_t>(
                        rng.between(1, static_cast<std::int64_t>(cfg.max_repeat)));
                    std::vector<Token> inserted(copies, tok);
                    for (std::size_t c = 0; c < copies; ++c) dys.push_back(tok);
                    dys.push_back(tok);
                    rec.events.push_back({DysfluencyKind::Repetition, i, std::move(inserted),
                                          "copies=" + std::to_string(copies)});
                    break;
                }
                case DysfluencyKind::Insertion: {
                    dys.push_back(tok);
                    const Token* next = next_realized(i);
                    const std::size_t count =
                        cfg.level == Level::Phoneme ? static_cast<std::size_t>(rng.between(1, 2)) : 1;
                    std::vector<Token> inserted;
                    for (std::size_t c = 0; c < count; ++c) {
                        inserted.push_back(cfg.level == Level::Phoneme
                                               ? draw_inserted_phoneme(tok, next, rng)
                                               : draw_inserted_word(reference, i, next, rng));
                        dys.push_back(inserted.back());
                    }
                    rec.events.push_back({DysfluencyKind::Insertion, i, std::move(inserted),
                                          "inserted=" + std::to_string(count)});
                    break;
                }
                case DysfluencyKind::Deletion:
                    rec.events.push_back({DysfluencyKind::Deletion, i, {}, {}});
                    break;
                case DysfluencyKind::Substitution: {
                    const Token& replacement = *substitute[i];
                    dys.push_back(replacement);
                    rec.events.push_back({DysfluencyKind::Substitution, i, {replacement},
                                          tok.value() + "->" + replacement.value()});
                    break;
                }
            }
        }
        const std::size_t end = dys.size();
        Group& g = rec.gold.groups[i];
        g.begin = begin;
        g.end = end;
        if (end > begin) g.boundary = pick_boundary(tok, rec.dysfluent, begin, end);
    }

    rec.labels = gold_labels_from_alignment(rec.gold, rec.reference, rec.dysfluent);
    return rec;
}

CorpusRecord inject_word_level(const TokenSequence& reference, const SimulationConfig& cfg, std::string id) {
    if (reference.level != Level::Word || cfg.level != Level::Word)
        throw DataError("inject_word_level needs a word-level reference and config");
    return inject(reference, cfg, std::move(id));
}

std::vector<CorpusRecord> simulate_corpus(const std::vector<TokenSequence>& texts,
                                          const SimulationConfig& cfg, std::size_t count) {
    cfg.validate();
    std::vector<const TokenSequence*> usable;
    for (const auto& t : texts)
        if (t.size() >= 2) usable.push_back(&t);
    if (usable.empty()) throw DataError("no reference text with at least two tokens");

    std::vector<CorpusRecord> out;
    out.reserve(count);
    char id[32];
    for (std::size_t i = 0; i < count; ++i) {
        SimulationConfig rc = cfg;
        rc.seed = Rng::derive(cfg.seed, i);
        std::snprintf(id, sizeof id, "rec-%06zu", i);
        out.push_back(inject(*usable[i % usable.size()], rc, id));
    }
    return out;
}

}  // namespace dysalign
