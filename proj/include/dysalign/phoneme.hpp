#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dysalign {

class Rng;

/// Articulatory categories used for phoneme similarity.
enum class Category : std::uint8_t { Plosive, Fricative, Affricate, Nasal, Liquid, Glide, Vowel };

inline constexpr std::size_t kCategoryCount = 7;

enum class Relation : std::uint8_t { Exact, Similar, Dissimilar };

std::string_view category_name(Category c);
std::string_view relation_name(Relation r);

/// One of the 39 CMU phonemes, stress-free. Cheap value type (index into the
/// static inventory).
class Phoneme {
public:
    /// Parses "AH", "ah1", "EY0", ... Stress digits are stripped.
    /// Throws InventoryError for anything outside the inventory.
    static Phoneme parse(std::string_view symbol);

    /// Phoneme at inventory position `index` (0..38).
    static Phoneme from_index(std::size_t index);

    std::string_view symbol() const;
    std::size_t index() const { return index_; }
    Category category() const;

    friend auto operator<=>(const Phoneme&, const Phoneme&) = default;

private:
    explicit Phoneme(std::uint8_t index) : index_(index) {}
    std::uint8_t index_ = 0;
};

inline constexpr std::size_t kPhonemeCount = 39;

/// The full inventory in canonical order (categories in declaration order).
std::span<const Phoneme> inventory();

std::span<const Phoneme> members(Category c);

Category category_of(Phoneme p);
Category category_of(std::string_view symbol);

Relation similar(Phoneme a, Phoneme b);
Relation similar(std::string_view a, std::string_view b);

/// A different phoneme from p's category, uniformly. Falls back to any other
/// phoneme if the category is a singleton.
Phoneme sample_confusable(Phoneme p, Rng& rng);

}  // namespace dysalign
