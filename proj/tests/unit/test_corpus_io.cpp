#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dysalign/corpus_io.hpp"
#include "dysalign/errors.hpp"
#include "helpers.hpp"

using namespace dysalign;

TEST_SUITE("corpus_io") {

TEST_CASE("corpus round trip at both levels") {
    for (Level level : {Level::Phoneme, Level::Word}) {
        SimulationConfig cfg;
        cfg.level = level;
        cfg.seed = 12;
        const auto corpus = simulate_corpus(testkit::demo_refs(10, 5, level), cfg, 80);
        std::stringstream buf;
        write_corpus(buf, corpus);
        const std::string text = buf.str();
        const auto back = read_corpus(buf);
        REQUIRE(back.size() == corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            CHECK(back[i].id == corpus[i].id);
            CHECK(back[i].level == level);
            CHECK(back[i].reference == corpus[i].reference);
            CHECK(back[i].dysfluent == corpus[i].dysfluent);
            CHECK(back[i].labels == corpus[i].labels);
            CHECK(back[i].gold == corpus[i].gold);
            CHECK(back[i].events == corpus[i].events);
        }
        std::stringstream again;
        write_corpus(again, back);
        CHECK(again.str() == text);
    }
}

TEST_CASE("record fields") {
    SimulationConfig cfg;
    const auto rec = simulate_corpus(testkit::demo_refs(1, 1), cfg, 1)[0];
    const auto j = to_json(rec);
    for (const char* key : {"id", "level", "ref", "dys", "ref_labels", "dys_labels", "flat", "groups", "kinds", "events"})
        CHECK(j.contains(key));
    CHECK(j["flat"] == serialize_flat(rec.labels, rec.reference, rec.dysfluent));
}

TEST_CASE("malformed lines report their number") {
    SimulationConfig cfg;
    const auto corpus = simulate_corpus(testkit::demo_refs(3, 1), cfg, 2);
    std::stringstream buf;
    write_corpus(buf, corpus);
    std::string text = buf.str() + "{\"id\": \"x\"}\n";
    std::istringstream in(text);
    CHECK_THROWS_WITH_AS(read_corpus(in), doctest::Contains("line 3"), DataError);
    std::istringstream junk("\nnot json\n");
    CHECK_THROWS_WITH_AS(read_corpus(junk), doctest::Contains("line 2"), DataError);

    auto j = nlohmann::json::parse(to_json(corpus[0]).dump());
    j["ref_labels"] = std::vector<int>(corpus[0].reference.size(), 2);
    CHECK_THROWS_AS(record_from_json(j), DataError);
    CHECK_THROWS_AS(read_corpus(std::string("/nonexistent/c.jsonl")), DataError);
}

TEST_CASE("predictions and texts on disk") {
    const testkit::TempDir dir;
    const std::vector<PredictionRecord> preds{{"a", {{1, 2}, {1}}}, {"b", {{1}, {0, 1}}}};
    write_predictions(dir.path + "/p.jsonl", preds);
    const auto back = read_predictions(dir.path + "/p.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[1].id == "b");
    CHECK(back[1].labels == preds[1].labels);

    write_file_atomic(dir.path + "/sub/t.txt", "P EH N\n\nthe cat\n");
    CHECK(read_file(dir.path + "/sub/t.txt") == "P EH N\n\nthe cat\n");
    std::ofstream(dir.path + "/w.txt") << "the cat\nhello world\n";
    const auto texts = read_texts(dir.path + "/w.txt", Level::Word);
    REQUIRE(texts.size() == 2);
    CHECK(texts[1].str() == "hello world");
}

TEST_CASE("report serialization") {
    AlignmentAccuracyReport r;
    r.method = "soft";
    r.sequence_exact_match = 0.5;
    const auto j = to_json(r);
    CHECK(j["method"] == "soft");
    CHECK(j["sequence_exact_match"] == 0.5);
    StaReport s;
    const auto sj = to_json(s);
    CHECK(sj["overall"]["rmse_ms"].is_null());
}

}
