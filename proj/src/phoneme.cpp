#include "dysalign/phoneme.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "dysalign/errors.hpp"
#include "dysalign/random.hpp"

namespace dysalign {
namespace {

struct Entry {
    std::string_view symbol;
    Category category;
};

// Category table. HH is not listed in the category table we follow and is
// placed with the fricatives.
constexpr std::array<Entry, kPhonemeCount> kTable{{
    {"P", Category::Plosive},    {"B", Category::Plosive},    {"T", Category::Plosive},
    {"D", Category::Plosive},    {"K", Category::Plosive},    {"G", Category::Plosive},
    {"F", Category::Fricative},  {"V", Category::Fricative},  {"TH", Category::Fricative},
    {"DH", Category::Fricative}, {"S", Category::Fricative},  {"Z", Category::Fricative},
    {"SH", Category::Fricative}, {"ZH", Category::Fricative}, {"HH", Category::Fricative},
    {"CH", Category::Affricate}, {"JH", Category::Affricate}, {"M", Category::Nasal},
    {"N", Category::Nasal},      {"NG", Category::Nasal},     {"L", Category::Liquid},
    {"R", Category::Liquid},     {"W", Category::Glide},      {"Y", Category::Glide},
    {"AA", Category::Vowel},     {"AE", Category::Vowel},     {"AH", Category::Vowel},
    {"AO", Category::Vowel},     {"AW", Category::Vowel},     {"AY", Category::Vowel},
    {"EH", Category::Vowel},     {"ER", Category::Vowel},     {"EY", Category::Vowel},
    {"IH", Category::Vowel},     {"IY", Category::Vowel},     {"OW", Category::Vowel},
    {"OY", Category::Vowel},     {"UH", Category::Vowel},     {"UW", Category::Vowel},
}};

struct Tables {
    std::vector<Phoneme> all;
    std::array<std::vector<Phoneme>, kCategoryCount> by_category;
};

const Tables& tables() {
    static const Tables t = [] {
        Tables out;
        for (std::size_t i = 0; i < kPhonemeCount; ++i) {
            out.all.push_back(Phoneme::from_index(i));
            out.by_category[std::size_t(kTable[i].category)].push_back(out.all.back());
        }
        return out;
    }();
    return t;
}

}  // namespace

std::string_view category_name(Category c) {
    switch (c) {
        case Category::Plosive: return "Plosive";
        case Category::Fricative: return "Fricative";
        case Category::Affricate: return "Affricate";
        case Category::Nasal: return "Nasal";
        case Category::Liquid: return "Liquid";
        case Category::Glide: return "Glide";
        case Category::Vowel: return "Vowel";
    }
    return "?";
}

std::string_view relation_name(Relation r) {
    switch (r) {
        case Relation::Exact: return "Exact";
        case Relation::Similar: return "Similar";
        case Relation::Dissimilar: return "Dissimilar";
    }
    return "?";
}

Phoneme Phoneme::parse(std::string_view symbol) {
    std::string s;
    s.reserve(symbol.size());
    for (char c : symbol) {
        if (std::isdigit(static_cast<unsigned char>(c))) continue;
        s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    for (std::size_t i = 0; i < kPhonemeCount; ++i)
        if (kTable[i].symbol == s) return Phoneme(static_cast<std::uint8_t>(i));
    throw InventoryError("unknown phoneme symbol '" + std::string(symbol) + "'");
}

Phoneme Phoneme::from_index(std::size_t index) {
    if (index >= kPhonemeCount) throw InventoryError("phoneme index out of range");
    return Phoneme(static_cast<std::uint8_t>(index));
}

std::string_view Phoneme::symbol() const { return kTable[index_].symbol; }

Category Phoneme::category() const { return kTable[index_].category; }

std::span<const Phoneme> inventory() { return tables().all; }

std::span<const Phoneme> members(Category c) { return tables().by_category[std::size_t(c)]; }

Category category_of(Phoneme p) { return p.category(); }

Category category_of(std::string_view symbol) { return Phoneme::parse(symbol).category(); }

Relation similar(Phoneme a, Phoneme b) {
    if (a == b) return Relation::Exact;
    return a.category() == b.category() ? Relation::Similar : Relation::Dissimilar;
}

Relation similar(std::string_view a, std::string_view b) {
    return similar(Phoneme::parse(a), Phoneme::parse(b));
}

Phoneme sample_confusable(Phoneme p, Rng& rng) {
    const auto group = members(p.category());
    if (group.size() >= 2) {
        // Draw among the other members: skip over p's own slot.
        const auto self = std::find(group.begin(), group.end(), p) - group.begin();
        auto k = static_cast<std::ptrdiff_t>(rng.index(group.size() - 1));
        if (k >= self) ++k;
        return group[static_cast<std::size_t>(k)];
    }
    auto k = rng.index(kPhonemeCount - 1);
    if (k >= p.index()) ++k;
    return Phoneme::from_index(k);
}

}  // namespace dysalign
