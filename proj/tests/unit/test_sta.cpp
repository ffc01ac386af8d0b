#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dysalign/errors.hpp"
#include "dysalign/corpus_io.hpp"
#include "dysalign/sta.hpp"
#include "helpers.hpp"

using namespace dysalign;
using testkit::ph;

namespace {

/// One-hot emissions from a frame string such as "- P P - EH".
EmissionMatrix frames(const std::string& spec) {
    EmissionMatrix e;
    std::istringstream in(spec);
    std::string sym;
    while (in >> sym) {
        const std::size_t cls = sym == "-" ? 0 : Phoneme::parse(sym).index() + 1;
        for (std::size_t c = 0; c < e.classes; ++c) e.data.push_back(c == cls ? 1.0 : 0.0);
        ++e.frames;
    }
    return e;
}

using Span = std::pair<std::size_t, std::size_t>;

std::vector<Span> spans_of(const std::vector<FrameSpan>& s) {
    std::vector<Span> out;
    for (const auto& f : s) out.emplace_back(f.start_frame, f.end_frame);
    return out;
}

}  // namespace

TEST_SUITE("sta") {

TEST_CASE("greedy decode collapses repeats and drops blanks") {
    const auto d = ctc_greedy_decode(frames("- P P - EH EH N"));
    CHECK(d.tokens.str() == "P EH N");
    CHECK(spans_of(d.spans) == std::vector<Span>{{1, 3}, {4, 6}, {6, 7}});
    const auto one = ctc_greedy_decode(frames("P P P"));
    CHECK(one.tokens.str() == "P");
    CHECK(spans_of(one.spans) == std::vector<Span>{{0, 3}});
    CHECK(ctc_greedy_decode(frames("P - P")).tokens.str() == "P P");
    CHECK(ctc_greedy_decode(frames("- -")).tokens.empty());
}

TEST_CASE("noiseless synthesis is exact") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto dys = testkit::random_phonemes(rng, 1 + rng.index(10));
        DurationModel dm;
        dm.seed = std::uint64_t(trial);
        const auto s = synthesize_emissions(dys, dm, EmissionNoise{});
        CHECK_NOTHROW(s.matrix.validate());
        REQUIRE(s.gold.size() == dys.size());
        for (std::size_t i = 0; i < dys.size(); ++i) {
            const auto& g = s.gold[i];
            CHECK(g.token == dys[i]);
            CHECK(g.end_frame - g.start_frame >= dm.min_frames);
            CHECK(g.end_frame - g.start_frame <= dm.max_frames);
            for (std::size_t t = g.start_frame; t < g.end_frame; ++t)
                CHECK(s.matrix.argmax(t) == dys[i].as_phoneme().index() + 1);
        }
        const auto d = ctc_greedy_decode(s.matrix);
        CHECK(d.tokens == dys);
        CHECK(d.spans == s.gold);
    }
}

TEST_CASE("noisy synthesis keeps the argmax for small epsilon") {
    const auto dys = ph("P EH N K AA T");
    DurationModel dm;
    dm.seed = 7;
    EmissionNoise noise;
    noise.epsilon = 0.3;
    const auto a = synthesize_emissions(dys, dm, noise);
    const auto b = synthesize_emissions(dys, dm, noise);
    CHECK(a.matrix.data == b.matrix.data);
    CHECK_NOTHROW(a.matrix.validate());
    CHECK(ctc_greedy_decode(a.matrix).tokens == dys);
    const std::size_t t = a.gold[0].start_frame;
    CHECK(a.matrix.at(t, a.matrix.argmax(t)) == doctest::Approx(0.7));
    EmissionNoise bad;
    bad.epsilon = 1.5;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("projection merges groups and anchors missing tokens") {
    const auto ref = ph("P EH N");
    const auto dys = ph("P P N");
    const std::vector<FrameSpan> spans{{dys[0], 0, 5}, {dys[1], 6, 10}, {dys[2], 11, 15}};
    const GoldAlignment g = testkit::groups({{0, 2}, {2, 2}, {2, 3}}, ref, dys);
    const auto seg = project_segmentation(g, spans, 20.0);
    CHECK(seg.entries[0] == SegmentEntry{false, 0.0, 200.0});
    CHECK(seg.entries[1] == SegmentEntry{true, 200.0, 200.0});
    CHECK(seg.entries[2] == SegmentEntry{false, 220.0, 300.0});
    const GoldAlignment lead = testkit::groups({{0, 0}, {0, 2}, {2, 3}}, ref, dys);
    CHECK(project_segmentation(lead, spans, 20.0).entries[0] == SegmentEntry{true, 0.0, 0.0});
}

TEST_CASE("identity record segments onto its gold spans") {
    const auto ref = ph("DH AH K AE T");
    DurationModel dm;
    dm.seed = 3;
    const auto s = synthesize_emissions(ref, dm, EmissionNoise{});
    const auto seg = segment(ref, s.matrix, Aligner::soft());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK_FALSE(seg.entries[i].missing);
        CHECK(seg.entries[i].start_ms == doctest::Approx(20.0 * double(s.gold[i].start_frame)));
        CHECK(seg.entries[i].end_ms == doctest::Approx(20.0 * double(s.gold[i].end_frame)));
    }
    const auto blank = frames("- - -");
    for (const auto& e : segment(ref, blank, Aligner::hard()).entries) CHECK(e.missing);
}

TEST_CASE("boundary loss arithmetic") {
    Segmentation gold{{{false, 0, 100}, {false, 120, 200}, {false, 220, 300}}};
    const std::vector<DysfluencyEvent> events{{DysfluencyKind::Repetition, 1, {}, {}}};
    CHECK(boundary_loss(gold, gold, events).sum_squared_ms == 0.0);
    Segmentation shifted = gold;
    shifted.entries[1].start_ms += 20.0;
    shifted.entries[1].end_ms += 20.0;
    const auto bl = boundary_loss(shifted, gold, events);
    CHECK(bl.endpoints == 2);
    CHECK(bl.mse() == doctest::Approx(400.0));
    CHECK(bl.rmse() == doctest::Approx(20.0));
    shifted.entries[0].start_ms = 50.0;
    CHECK(boundary_loss(shifted, gold, events).mse() == doctest::Approx(400.0));
    CHECK_FALSE(boundary_loss(shifted, gold, events, DysfluencyKind::Deletion).defined());
    CHECK_FALSE(boundary_loss(gold, gold, {}).defined());
    Segmentation shorter{{{false, 0, 1}}};
    CHECK_THROWS_AS(boundary_loss(shorter, gold, events), EvalError);
}

TEST_CASE("emission and span files round trip") {
    const testkit::TempDir dir;
    DurationModel dm;
    EmissionNoise noise;
    noise.epsilon = 0.1;
    const auto s = synthesize_emissions(ph("P EH N"), dm, noise, 10.0);
    write_emissions(dir.path + "/e.bin", s.matrix);
    const auto back = read_emissions(dir.path + "/e.bin");
    CHECK(back.frames == s.matrix.frames);
    CHECK(back.classes == kEmissionClasses);
    CHECK(back.frame_ms == 10.0);
    for (std::size_t i = 0; i < back.data.size(); ++i) CHECK(back.data[i] == double(float(s.matrix.data[i])));
    write_gold_spans(dir.path + "/g.json", s.gold, 10.0);
    CHECK(read_gold_spans(dir.path + "/g.json") == s.gold);
    write_file_atomic(dir.path + "/bad.bin", "DYSEMIT");
    CHECK_THROWS_AS(read_emissions(dir.path + "/bad.bin"), DataError);
}

}
