#pragma once

#include <string>
#include <vector>

#include "dysalign/labels.hpp"
#include "dysalign/lexicon.hpp"
#include "dysalign/phoneme.hpp"
#include "dysalign/random.hpp"
#include "dysalign/simulator.hpp"
#include "dysalign/token.hpp"

namespace testkit {

inline dysalign::TokenSequence ph(const std::string& s) {
    return dysalign::TokenSequence::parse(s, dysalign::Level::Phoneme);
}

inline dysalign::TokenSequence words(const std::string& s) {
    return dysalign::TokenSequence::parse(s, dysalign::Level::Word);
}

inline std::vector<std::uint8_t> u8(std::initializer_list<int> v) {
    return std::vector<std::uint8_t>(v.begin(), v.end());
}

/// Random phoneme sequence over the first `alphabet` inventory symbols.
inline dysalign::TokenSequence random_phonemes(dysalign::Rng& rng, std::size_t len, std::size_t alphabet = 39) {
    dysalign::TokenSequence s{dysalign::Level::Phoneme, {}};
    for (std::size_t i = 0; i < len; ++i)
        s.tokens.push_back(dysalign::Token::phoneme(dysalign::inventory()[rng.index(alphabet)]));
    return s;
}

inline std::vector<dysalign::TokenSequence> demo_refs(std::size_t n, std::uint64_t seed,
                                                      dysalign::Level level = dysalign::Level::Phoneme) {
    std::vector<dysalign::TokenSequence> out;
    for (const auto& t : dysalign::demo_sentences(n, seed)) out.push_back(dysalign::reference_from_text(t, level));
    return out;
}

inline dysalign::GoldAlignment groups(std::initializer_list<std::pair<std::size_t, std::size_t>> spans,
                                      const dysalign::TokenSequence& ref, const dysalign::TokenSequence& dys) {
    dysalign::GoldAlignment g;
    std::size_t i = 0;
    for (auto [b, e] : spans) {
        dysalign::Group grp{b, e, std::nullopt};
        if (e > b) grp.boundary = dysalign::pick_boundary(ref[i], dys, b, e);
        g.groups.push_back(grp);
        ++i;
    }
    return g;
}

}  // namespace testkit

#include <filesystem>
#include <random>

namespace testkit {

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::string path;
    TempDir() {
        std::random_device rd;
        auto p = std::filesystem::temp_directory_path() / ("dysalign-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(p);
        path = p.string();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testkit
