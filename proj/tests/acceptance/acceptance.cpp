// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dysalign/classic_align.hpp"
#include "dysalign/corpus_io.hpp"
#include "dysalign/evalkit.hpp"
#include "dysalign/lexicon.hpp"
#include "dysalign/sta.hpp"
#include "dysalign/training.hpp"

using namespace dysalign;

namespace {

// Tolerances and budgets.
constexpr double kFocalTol = 1e-6;
constexpr double kCrossEntropyTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kOverfitAccuracy = 0.98;
constexpr double kNeuralFloor = 0.60;
constexpr double kMargin = 0.10;
constexpr double kRecoveryFloor = 0.95;
constexpr double kNoisyRmseCeilingMs = 40.0;
constexpr double kClassificationFloor = 0.99;

// Seeds.
constexpr std::uint64_t kSeedPairs = 101;
constexpr std::uint64_t kSeedCodec = 202;
constexpr std::uint64_t kSeedGrad = 303;
constexpr std::uint64_t kSeedOverfit = 404;
constexpr std::uint64_t kSeedTable = 505;
constexpr std::uint64_t kSeedWord = 606;
constexpr std::uint64_t kSeedSta = 707;
constexpr std::uint64_t kSeedTypes = 808;
constexpr std::uint64_t kSeedAblation = 909;

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Options {
    bool fast = false;
    std::string out_dir = "acceptance_out";
    std::set<int> only;
    std::size_t table_records = 20000;
    std::size_t table_epochs = 0;  // 0: TrainConfig default
};

std::vector<TokenSequence> texts(Level level, std::uint64_t seed) {
    std::vector<TokenSequence> out;
    for (const auto& s : demo_sentences(500, seed)) out.push_back(reference_from_text(s, level));
    return out;
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string corpus_text(const std::vector<CorpusRecord>& corpus) {
    std::ostringstream out;
    write_corpus(out, corpus);
    return out.str();
}

TokenSequence random_phonemes(Rng& rng, std::size_t len) {
    TokenSequence s{Level::Phoneme, {}};
    for (std::size_t i = 0; i < len; ++i) s.tokens.push_back(Token::phoneme(inventory()[rng.index(inventory().size())]));
    return s;
}

// ---------------------------------------------------------------------------

Outcome lcs_oracle() {
    Rng rng(kSeedPairs);
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto a = random_phonemes(rng, 1 + rng.index(12));
        const auto b = random_phonemes(rng, 1 + rng.index(12));
        if (hard_lcs(a, b).matched_pairs.size() != lcs_bruteforce_oracle(a, b)) ++bad;
    }
    return {bad == 0, "10000 pairs, " + std::to_string(bad) + " mismatches"};
}

std::vector<CorpusRecord> codec_corpus() {
    SimulationConfig cfg;
    cfg.seed = kSeedCodec;
    cfg.events_max = 3;
    return simulate_corpus(texts(Level::Phoneme, kSeedCodec), cfg, 10000);
}

Outcome codec_roundtrip(std::string* fingerprint) {
    const auto corpus = codec_corpus();
    std::size_t bad = 0;
    std::array<std::size_t, kBucketCount> buckets{};
    for (const auto& r : corpus) {
        const bool counts = r.labels.consistent() && r.labels.present_count() == r.labels.boundary_count();
        const auto back = alignment_from_labels(r.labels, r.reference, r.dysfluent);
        if (!counts || back != r.gold || gold_labels_from_alignment(back, r.reference, r.dysfluent) != r.labels) ++bad;
        const KindSet k = r.kinds();
        if (k.size() > 1) ++buckets[std::size_t(TypeBucket::Mix)];
        else
            for (auto kind : kAllKinds)
                if (k.contains(kind)) ++buckets[std::size_t(kind)];
    }
    bool all_kinds = true;
    std::string seen;
    for (std::size_t b = 0; b < kBucketCount; ++b) {
        all_kinds &= buckets[b] > 0;
        seen += std::string(b ? " " : "") + std::string(bucket_name(TypeBucket(b))) + "=" + std::to_string(buckets[b]);
    }
    if (fingerprint) *fingerprint = corpus_text(corpus);
    return {bad == 0 && all_kinds, "10000 records, " + std::to_string(bad) + " failures; " + seen};
}

Outcome focal_values() {
    const FocalLossConfig defaults;
    const bool defaults_ok = defaults.alpha == std::array<double, 3>{0.5, 0.1, 0.8} && defaults.gamma == 3.0;
    const double zero = focal_loss_value(1.0, 0.8, 3.0) + 0.0;
    const double half = focal_loss_value(0.5, 0.8, 3.0);
    double worst = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double p = double(k) / 100.0;
        worst = std::max(worst, std::abs(focal_loss_value(p, 1.0, 0.0) + std::log(p)));
    }
    const bool ok = defaults_ok && zero == 0.0 && std::abs(half - 0.069315) <= kFocalTol && worst <= kCrossEntropyTol;
    return {ok, "p=1 -> " + fmt(zero, 6) + ", p=0.5 -> " + fmt(half, 7) + ", max |FL - CE| = " +
                    std::to_string(worst)};
}

Outcome gradients() {
    Rng rng(kSeedGrad);
    double worst = 0.0;
    std::size_t checked = 0, skipped = 0;
    for (int i = 0; i < 20; ++i) {
        EncoderConfig c;
        c.heads = 1 + rng.index(2);
        c.embed_dim = c.heads * (4 + rng.index(4));
        c.context_layers = 1 + rng.index(2);
        c.fusion_layers = rng.index(2) + (c.context_layers == 1 ? 1 : 0);
        c.ffn_hidden = rng.index(6);
        c.rel_distance = rng.index(4);
        c.relation_bias = rng.index(2) == 1;
        c.conv_kernel = 1 + 2 * rng.index(2);
        c.conv_channels = 2 + rng.index(6);
        c.mlp_hidden = 2 + rng.index(6);
        c.max_len = 8;
        c.char_dim = 2 + rng.index(3);
        FocalLossConfig loss;
        loss.gamma = double(rng.index(4));
        const Level level = i % 4 == 3 ? Level::Word : Level::Phoneme;
        const auto r = grad_check(c, loss, Rng::derive(kSeedGrad, std::uint64_t(i)), 1e-5, level);
        worst = std::max(worst, r.max_relative_error);
        if (std::getenv("DYSALIGN_VERBOSE")) std::cerr << "  config " << i << " err " << r.max_relative_error << std::endl;
        checked += r.checked;
        skipped += r.skipped;
    }
    return {worst < kGradTol, "20 configs, max rel err " + std::to_string(worst) + " (" + std::to_string(checked) +
                                  " checked, " + std::to_string(skipped) + " skipped at kinks)"};
}

Outcome overfit() {
    SimulationConfig sim;
    sim.seed = kSeedOverfit;
    const auto corpus = simulate_corpus(texts(Level::Phoneme, kSeedOverfit), sim, 50);
    TrainConfig tc;
    tc.epochs = 200;
    tc.seed = kSeedOverfit;
    const auto trained = std::make_shared<const NeuralAligner>(
        train(corpus, TokenizerSpec::phoneme(), EncoderConfig{}, tc, FocalLossConfig{}).model);
    const double acc =
        alignment_accuracy(predict_corpus(Aligner::neural(trained), corpus), corpus).token_label_accuracy;
    const std::size_t epoch = tc.epochs;
    return {acc >= kOverfitAccuracy, "token accuracy " + fmt(acc) + " after " + std::to_string(epoch) + " epochs"};
}

struct TableResult {
    AlignmentAccuracyReport neural, hard, dtw, soft;
    std::shared_ptr<const NeuralAligner> model;
    std::vector<unsigned char> checkpoint;
    std::string corpus;
    std::string report;
    double train_seconds = 0.0;
};

TableResult run_table(Level level, std::uint64_t seed, std::size_t records, std::size_t epochs) {
    SimulationConfig sim;
    sim.level = level;
    sim.seed = seed;
    const auto corpus = simulate_corpus(texts(level, seed), sim, records);
    auto [train_set, test_set] = train_test_split(corpus, 0.1, seed);
    TrainConfig tc;
    tc.seed = seed;
    if (epochs) tc.epochs = epochs;
    const TokenizerSpec tok = level == Level::Phoneme ? TokenizerSpec::phoneme() : TokenizerSpec::word(train_set);
    const auto t0 = Clock::now();
    TrainedModel trained = train(train_set, tok, EncoderConfig{}, tc, FocalLossConfig{}, [](std::size_t e, double l) {
        std::cerr << "  epoch " << e << " loss " << l << std::endl;
    });
    TableResult out;
    out.train_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    CheckpointMetadata meta{tc.seed, tc.epochs, trained.report.epoch_loss.back(), trained.report.epoch_loss};
    out.checkpoint = checkpoint_bytes(trained.model, meta);
    out.model = std::make_shared<const NeuralAligner>(std::move(trained.model));
    out.neural = alignment_accuracy(predict_corpus(Aligner::neural(out.model), test_set), test_set, "neural");
    out.hard = alignment_accuracy(predict_corpus(Aligner::hard(), test_set), test_set, "hard");
    out.dtw = alignment_accuracy(predict_corpus(Aligner::dtw(), test_set), test_set, "dtw");
    out.soft = alignment_accuracy(predict_corpus(Aligner::soft(), test_set), test_set, "soft");
    out.corpus = corpus_text(corpus);
    nlohmann::ordered_json rep = nlohmann::ordered_json::array();
    for (const auto* r : {&out.neural, &out.hard, &out.dtw, &out.soft}) rep.push_back(to_json(*r));
    out.report = rep.dump(2);
    return out;
}

std::string table_line(const TableResult& t) {
    return "exact neural " + fmt(t.neural.sequence_exact_match) + " hard " + fmt(t.hard.sequence_exact_match) +
           " dtw " + fmt(t.dtw.sequence_exact_match) + " (soft " + fmt(t.soft.sequence_exact_match) +
           "); token neural " + fmt(t.neural.token_label_accuracy) + "; n_test " +
           std::to_string(t.neural.n_records) + "; train " + fmt(t.train_seconds, 0) + " s";
}

Outcome phoneme_table(const TableResult& t) {
    const double n = t.neural.sequence_exact_match;
    const bool floor = n >= kNeuralFloor;
    const bool over_hard = n >= t.hard.sequence_exact_match + kMargin;
    const bool over_dtw = n >= t.dtw.sequence_exact_match + kMargin;
    std::string checks = std::string(" [floor ") + (floor ? "ok" : "FAIL") + ", +10 over hard " +
                         (over_hard ? "ok" : "FAIL") + ", +10 over dtw " + (over_dtw ? "ok" : "FAIL") + "]";
    return {floor && over_hard && over_dtw, table_line(t) + checks};
}

Outcome word_table(const TableResult& t) {
    const double n = t.neural.sequence_exact_match;
    const bool ok = n >= t.hard.sequence_exact_match && n >= t.dtw.sequence_exact_match;
    return {ok, table_line(t)};
}

std::vector<CorpusRecord> sta_corpus(std::size_t n) {
    SimulationConfig sim;
    sim.seed = kSeedSta;
    return simulate_corpus(texts(Level::Phoneme, kSeedSta), sim, n);
}

Outcome ctc_exact(std::string* fingerprint) {
    const auto corpus = sta_corpus(1000);
    std::size_t bad = 0;
    nlohmann::ordered_json spans = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < corpus.size(); ++r) {
        DurationModel dm;
        dm.seed = Rng::derive(kSeedSta, r);
        const auto s = synthesize_emissions(corpus[r].dysfluent, dm, EmissionNoise{});
        const auto d = ctc_greedy_decode(s.matrix);
        if (d.tokens != corpus[r].dysfluent || d.spans != s.gold) ++bad;
        for (const auto& f : d.spans) spans.push_back({f.start_frame, f.end_frame});
    }
    if (fingerprint) *fingerprint = spans.dump();
    return {bad == 0, "1000 records, " + std::to_string(bad) + " mismatches"};
}

Outcome sta_boundaries(const std::shared_ptr<const NeuralAligner>& model) {
    const auto corpus = sta_corpus(1000);
    StaSettings clean;
    clean.seed = kSeedSta;
    const StaReport soft = run_sta(corpus, Aligner::soft(), clean);
    bool zero_on_recovered = true;
    for (const auto& r : soft.records)
        if (r.alignment_recovered && r.overall.sum_squared_ms != 0.0) zero_on_recovered = false;
    std::string detail = "eps=0 soft: recovery " + fmt(soft.recovery_rate()) + ", recovered RMSE " +
                         fmt(soft.overall_recovered.rmse(), 2) + " ms";
    bool ok = zero_on_recovered && soft.recovery_rate() >= kRecoveryFloor;
    if (!model) return {false, detail + "; no trained model for eps=0.1"};
    StaSettings noisy = clean;
    noisy.noise.epsilon = 0.1;
    const StaReport neural = run_sta(corpus, Aligner::neural(model), noisy);
    detail += "; eps=0.1 neural: RMSE " + fmt(neural.overall.rmse(), 2) + " ms, recovery " + fmt(neural.recovery_rate());
    ok = ok && neural.overall.rmse() <= kNoisyRmseCeilingMs;
    return {ok, detail};
}

Outcome type_classification() {
    SimulationConfig sim;
    sim.seed = kSeedTypes;
    sim.events_max = 3;
    const auto corpus = simulate_corpus(texts(Level::Phoneme, kSeedTypes), sim, 10000);
    const auto bad = gold_classification_mismatches(corpus);
    const double rate = 1.0 - double(bad.size()) / double(corpus.size());
    return {rate >= kClassificationFloor, "10000 records, agreement " + fmt(rate)};
}

Outcome ablation(const Options& opt) {
    AblationSettings s;
    s.records_per_cell = opt.fast ? 1000 : 5000;
    s.simulation.seed = kSeedAblation;
    s.training.seed = kSeedAblation;
    const auto rows = run_ablation(texts(Level::Phoneme, kSeedAblation), AblationSpec::standard(), s,
                                   [](const std::string& msg) { std::cerr << "  " << msg << std::endl; });
    const std::string csv = ablation_csv(rows);
    const std::string path = opt.out_dir + "/ablation.csv";
    write_file_atomic(path, csv);
    bool ok = rows.size() == 5;
    std::string detail;
    for (const auto& r : rows) {
        const double rep = r.report[TypeBucket::Rep].accuracy(), ins = r.report[TypeBucket::Ins].accuracy();
        ok = ok && !r.failed && rep >= ins;
        detail += r.proportions.name + " Rep " + fmt(rep, 3) + " Ins " + fmt(ins, 3) + (r.failed ? " (failed)" : "") + "; ";
    }
    return {ok, detail + std::to_string(s.records_per_cell) + "-record cells, grid in " + path};
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    std::vector<int> only;
    CLI::App app{"Acceptance checks for dysalign"};
    app.add_flag("--fast", opt.fast, "1k-record ablation cells; shorter determinism replay of the alignment table");
    app.add_option("--out-dir", opt.out_dir, "Where reports and the ablation grid are written");
    app.add_option("--only", only, "Run only these criteria (1-12)")->delimiter(',');
    app.add_option("--table-records", opt.table_records, "Corpus size for criteria 6 and 7");
    app.add_option("--table-epochs", opt.table_epochs, "Override training epochs for criteria 6 and 7");
    CLI11_PARSE(app, argc, argv);
    opt.only.insert(only.begin(), only.end());
    std::filesystem::create_directories(opt.out_dir);

    auto wanted = [&](int id) { return opt.only.empty() || opt.only.count(id) > 0; };
    int failures = 0;
    auto report = [&](int id, const std::string& name, double budget_s, const std::function<Outcome()>& fn) {
        if (!wanted(id)) return;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        const bool in_time = secs <= budget_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::cout << (pass ? "PASS" : "FAIL") << "  " << id << ". " << name << ": " << o.detail << " ["
                  << fmt(secs, 1) << " s" << (in_time ? "" : ", over budget of " + fmt(budget_s, 0) + " s") << "]"
                  << std::endl;
    };

    std::string codec_a, ctc_a;
    std::optional<TableResult> phoneme;

    report(1, "LCS oracle equivalence", 60, lcs_oracle);
    report(2, "codec round trip", 30, [&] { return codec_roundtrip(&codec_a); });
    report(3, "focal loss values", 1, focal_values);
    report(4, "gradient correctness", 120, gradients);
    report(5, "overfit sanity", 600, overfit);
    const bool need_table = wanted(6) || wanted(9) || wanted(12);
    if (need_table) {
        report(6, "phoneme-level alignment table", 7200, [&] {
            phoneme = run_table(Level::Phoneme, kSeedTable, opt.table_records, opt.table_epochs);
            write_file_atomic(opt.out_dir + "/table_phoneme.json", phoneme->report);
            return phoneme_table(*phoneme);
        });
    }
    report(7, "word-level ordering", 7200, [&] {
        const auto t = run_table(Level::Word, kSeedWord, opt.table_records, opt.table_epochs);
        write_file_atomic(opt.out_dir + "/table_word.json", t.report);
        return word_table(t);
    });
    report(8, "CTC exactness", 30, [&] { return ctc_exact(&ctc_a); });
    report(9, "STA boundary loss", 1200, [&] { return sta_boundaries(phoneme ? phoneme->model : nullptr); });
    report(10, "type classification on gold", 30, type_classification);
    report(11, "ablation trend", opt.fast ? 3600 : 8 * 3600, [&] { return ablation(opt); });
    report(12, "determinism", 4 * 3600, [&]() -> Outcome {
        std::string codec_b, ctc_b;
        if (codec_a.empty()) codec_roundtrip(&codec_a);
        codec_roundtrip(&codec_b);
        if (ctc_a.empty()) ctc_exact(&ctc_a);
        ctc_exact(&ctc_b);
        const bool codec_same = codec_a == codec_b, ctc_same = ctc_a == ctc_b;
        bool table_same = false;
        std::string table_note;
        if (opt.fast) {
            const auto a = run_table(Level::Phoneme, kSeedTable, opt.table_records, 1);
            const auto b = run_table(Level::Phoneme, kSeedTable, opt.table_records, 1);
            table_same = a.corpus == b.corpus && a.checkpoint == b.checkpoint && a.report == b.report;
            table_note = "table replay (1 epoch)";
        } else {
            if (!phoneme) phoneme = run_table(Level::Phoneme, kSeedTable, opt.table_records, opt.table_epochs);
            const auto b = run_table(Level::Phoneme, kSeedTable, opt.table_records, opt.table_epochs);
            table_same = phoneme->corpus == b.corpus && phoneme->checkpoint == b.checkpoint &&
                         phoneme->report == b.report;
            table_note = "table replay (full)";
        }
        return {codec_same && ctc_same && table_same,
                std::string("codec corpus ") + (codec_same ? "identical" : "DIFFERS") + ", CTC spans " +
                    (ctc_same ? "identical" : "DIFFER") + ", " + table_note + " " +
                    (table_same ? "identical" : "DIFFERS")};
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
