#include <doctest.h>

#include <functional>

#include "dysalign/errors.hpp"
#include "helpers.hpp"

using namespace dysalign;
using testkit::ph;
using testkit::u8;

namespace {

SimulationConfig only(DysfluencyKind k, Level level = Level::Phoneme) {
    SimulationConfig cfg;
    cfg.level = level;
    cfg.proportions = {0, 0, 0, 0};
    cfg.proportions[std::size_t(k)] = 1.0;
    cfg.events_min = cfg.events_max = 1;
    return cfg;
}

/// First seed whose record satisfies `pred`.
CorpusRecord find_record(const TokenSequence& ref, SimulationConfig cfg,
                         const std::function<bool(const CorpusRecord&)>& pred) {
    for (std::uint64_t s = 0; s < 5000; ++s) {
        cfg.seed = s;
        auto rec = inject(ref, cfg);
        if (pred(rec)) return rec;
    }
    FAIL("no seed produced the requested record");
    return {};
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("single repetition at the first token") {
    const auto rec = find_record(ph("P EH N"), only(DysfluencyKind::Repetition), [](const CorpusRecord& r) {
        return r.events[0].ref_index == 0 && r.events[0].inserted_tokens.size() == 1;
    });
    CHECK(rec.dysfluent.str() == "P P EH N");
    CHECK(rec.labels.ref_labels == u8({1, 1, 1}));
    CHECK(rec.labels.dys_labels == u8({0, 1, 1, 1}));
}

TEST_CASE("single deletion at the first token") {
    const auto rec = find_record(ph("DH AH"), only(DysfluencyKind::Deletion),
                                 [](const CorpusRecord& r) { return r.events[0].ref_index == 0; });
    CHECK(rec.dysfluent.str() == "AH");
    CHECK(rec.labels.ref_labels == u8({2, 1}));
    CHECK(rec.labels.dys_labels == u8({1}));
}

TEST_CASE("zero events leave the reference untouched") {
    SimulationConfig cfg;
    cfg.events_min = cfg.events_max = 0;
    const auto rec = inject(ph("P EH N"), cfg);
    CHECK(rec.dysfluent == rec.reference);
    CHECK(rec.labels.ref_labels == u8({1, 1, 1}));
    CHECK(rec.labels.dys_labels == u8({1, 1, 1}));
    CHECK(rec.kinds().empty());
}

TEST_CASE("word level repetition and substitution") {
    const auto rep = find_record(testkit::words("a pen"), only(DysfluencyKind::Repetition, Level::Word),
                                 [](const CorpusRecord& r) {
                                     return r.events[0].ref_index == 0 && r.events[0].inserted_tokens.size() == 1;
                                 });
    CHECK(rep.dysfluent.str() == "a a pen");

    const auto sub = find_record(testkit::words("a pen"), only(DysfluencyKind::Substitution, Level::Word),
                                 [](const CorpusRecord& r) {
                                     return !r.events.empty() && r.events[0].ref_index == 1 &&
                                            r.dysfluent[1].value() == "ben";
                                 });
    CHECK(sub.events[0].detail == "pen->ben");
    Rng rng(4);
    bool saw_soo = false;
    for (int i = 0; i < 200; ++i) saw_soo |= confuse_word("zoo", rng) == "soo";
    CHECK(saw_soo);
    for (int i = 0; i < 200; ++i) {
        const std::string w = confuse_word("pen", rng);
        CHECK(w != "pen");
        CHECK(relate(Token::word("pen"), Token::word(w)) == Relation::Similar);
    }
    CHECK_THROWS_AS(inject_word_level(ph("P EH"), only(DysfluencyKind::Repetition, Level::Word)), DataError);
}

TEST_CASE("substitutes are similar, insertions dissimilar") {
    SimulationConfig cfg;
    cfg.events_max = 3;
    const auto refs = testkit::demo_refs(40, 8);
    for (const auto& rec : simulate_corpus(refs, cfg, 1500)) {
        for (const auto& e : rec.events) {
            const Token& host = rec.reference[e.ref_index];
            switch (e.kind) {
                case DysfluencyKind::Substitution:
                    REQUIRE(e.inserted_tokens.size() == 1);
                    CHECK(relate(host, e.inserted_tokens[0]) == Relation::Similar);
                    break;
                case DysfluencyKind::Insertion:
                    for (const auto& t : e.inserted_tokens) CHECK(relate(host, t) == Relation::Dissimilar);
                    break;
                case DysfluencyKind::Repetition:
                    CHECK(e.inserted_tokens.size() >= 1);
                    CHECK(e.inserted_tokens.size() <= cfg.max_repeat);
                    for (const auto& t : e.inserted_tokens) CHECK(t == host);
                    break;
                case DysfluencyKind::Deletion:
                    CHECK(rec.gold.groups[e.ref_index].empty());
                    break;
            }
        }
        CHECK(rec.events.size() <= cfg.events_max);
        CHECK_FALSE(rec.dysfluent.empty());
        CHECK_NOTHROW(validate(rec.gold, rec.reference.size(), rec.dysfluent.size()));
    }
}

TEST_CASE("generation is deterministic per seed") {
    SimulationConfig cfg;
    cfg.seed = 99;
    const auto refs = testkit::demo_refs(10, 1);
    const auto a = simulate_corpus(refs, cfg, 50);
    const auto b = simulate_corpus(refs, cfg, 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].dysfluent == b[i].dysfluent);
        CHECK(a[i].labels == b[i].labels);
        CHECK(a[i].events == b[i].events);
    }
    CHECK(a[0].id == "rec-000000");
}

TEST_CASE("event count is truncated to the reference length") {
    SimulationConfig cfg;
    cfg.events_min = cfg.events_max = 5;
    cfg.proportions = {1, 1, 0, 1};
    const auto rec = inject(ph("P EH"), cfg);
    CHECK(rec.events.size() <= 2);
    CHECK_FALSE(rec.warnings.empty());
}

TEST_CASE("invalid configurations") {
    SimulationConfig cfg;
    cfg.proportions = {0, 0, 0, 0};
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = {};
    cfg.events_min = 4;
    cfg.events_max = 2;
    CHECK_THROWS_AS(cfg.validate(), DataError);
    CHECK_THROWS_AS(inject(ph("P"), SimulationConfig{}), DataError);
    CHECK(parse_kind("rep") == DysfluencyKind::Repetition);
    CHECK_THROWS_AS(parse_kind("stutter"), DataError);
}

}
