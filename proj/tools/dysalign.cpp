// dysalign command-line front end.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "dysalign/aligner.hpp"
#include "dysalign/corpus_io.hpp"
#include "dysalign/errors.hpp"
#include "dysalign/evalkit.hpp"
#include "dysalign/lexicon.hpp"
#include "dysalign/phoneme.hpp"
#include "dysalign/simulator.hpp"
#include "dysalign/sta.hpp"
#include "dysalign/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dysalign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

bool g_quiet = false;

void log(const std::string& msg) {
    if (!g_quiet) std::cerr << "[dysalign] " << msg << '\n';
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Options shared by several subcommands

struct TextSource {
    std::string input;
    std::size_t demo_count = 500;
    std::uint64_t demo_seed = 1;

    void add(CLI::App* app) {
        app->add_option("--input", input, "Text file, one reference per line (default: demo sentences)");
        app->add_option("--demo-count", demo_count, "Demo sentences to generate when no --input is given")
            ->capture_default_str();
        app->add_option("--demo-seed", demo_seed, "Seed for the demo sentences")->capture_default_str();
    }

    std::vector<TokenSequence> load(Level level) const {
        if (!input.empty()) return read_texts(input, level);
        std::vector<TokenSequence> out;
        for (const auto& line : demo_sentences(demo_count, demo_seed)) out.push_back(reference_from_text(line, level));
        return out;
    }
};

struct ModelOptions {
    EncoderConfig enc;
    TrainConfig train;
    FocalLossConfig loss;
    std::vector<double> alpha{0.5, 0.1, 0.8};

    void add(CLI::App* app) {
        app->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
        app->add_option("--batch-size", train.batch_size, "Records per update")->capture_default_str();
        app->add_option("--lr", train.learning_rate, "Adam learning rate")->capture_default_str();
        app->add_option("--embed-dim", enc.embed_dim, "Model width")->capture_default_str();
        app->add_option("--heads", enc.heads, "Attention heads")->capture_default_str();
        app->add_option("--rel-distance", enc.rel_distance, "Clip distance of relative attention biases (0: off)")
            ->capture_default_str();
        app->add_option("--ffn-hidden", enc.ffn_hidden, "Feed-forward width (0 disables)")->capture_default_str();
        app->add_option("--context-layers", enc.context_layers, "Shared encoder layers")->capture_default_str();
        app->add_option("--fusion-layers", enc.fusion_layers, "Joint attention layers")->capture_default_str();
        app->add_option("--conv-kernel", enc.conv_kernel, "Head convolution width (odd)")->capture_default_str();
        app->add_option("--conv-channels", enc.conv_channels, "Head convolution channels")->capture_default_str();
        app->add_option("--mlp-hidden", enc.mlp_hidden, "Head MLP width")->capture_default_str();
        app->add_option("--max-len", enc.max_len, "Longest sequence the model accepts")->capture_default_str();
        app->add_option("--alpha", alpha, "Focal loss class weights for labels 0,1,2")
            ->delimiter(',')
            ->expected(3)
            ->capture_default_str();
        app->add_option("--gamma", loss.gamma, "Focal loss focusing exponent")->capture_default_str();
    }

    void finalize() {
        std::copy(alpha.begin(), alpha.end(), loss.alpha.begin());
        enc.validate();
        train.validate();
        loss.validate();
    }
};

Level level_option(const std::string& text) { return parse_level(text); }

std::shared_ptr<const NeuralAligner> load_model(const std::string& path) {
    if (path.empty()) throw DataError("the neural method needs --model");
    try {
        return std::make_shared<const NeuralAligner>(load_checkpoint(path).model);
    } catch (const ModelError& e) {
        throw DataError(e.what());
    }
}

Aligner make_aligner(const std::string& method, const std::string& model_path) {
    switch (parse_method(method)) {
        case Method::Hard: return Aligner::hard();
        case Method::Soft: return Aligner::soft();
        case Method::Dtw: return Aligner::dtw();
        case Method::Neural: return Aligner::neural(load_model(model_path));
    }
    throw DataError("unknown method");
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_file_atomic(out, text);
}

// ---------------------------------------------------------------------------
// Run manifest

struct RunContext {
    std::string subcommand;
    std::vector<std::string> argv;
    std::string resolved_config;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    json seeds = json::object();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

void write_manifest(const RunContext& ctx) {
    for (const auto& out : ctx.outputs) {
        if (out.empty() || out == "-") continue;
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
        json m{{"tool", "dysalign"},
               {"version", DYSALIGN_VERSION},
               {"subcommand", ctx.subcommand},
               {"argv", ctx.argv},
               {"resolved_config", ctx.resolved_config},
               {"seeds", ctx.seeds},
               {"inputs", ctx.inputs},
               {"outputs", ctx.outputs},
               {"wall_time_s", wall}};
        write_file_atomic(out + ".manifest.json", m.dump(2) + "\n");
    }
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_phonemes(const std::string& format) {
    if (format == "json") {
        json arr = json::array();
        for (Phoneme p : inventory())
            arr.push_back({{"symbol", p.symbol()}, {"index", p.index()}, {"category", category_name(p.category())}});
        std::cout << arr.dump(2) << '\n';
    } else {
        const char sep = format == "csv" ? ',' : '\t';
        std::cout << "symbol" << sep << "index" << sep << "category\n";
        for (Phoneme p : inventory())
            std::cout << p.symbol() << sep << p.index() << sep << category_name(p.category()) << '\n';
    }
    return kExitOk;
}

json alignment_json(const std::string& method, const TokenSequence& ref, const TokenSequence& dys,
                    const JointLabelEncoding& labels) {
    const GoldAlignment groups = alignment_from_labels(labels, ref, dys);
    return json{{"method", method},
                {"level", level_name(ref.level)},
                {"ref", ref.str()},
                {"dys", dys.str()},
                {"ref_labels", labels.ref_labels},
                {"dys_labels", labels.dys_labels},
                {"flat", serialize_flat(labels, groups)},
                {"groups", render_groups(groups, ref, dys)},
                {"kinds", classify_types(groups, ref, dys).str()}};
}

std::string join_labels(const std::vector<std::uint8_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(int(v[i]));
    return s;
}

}  // namespace

int run(std::vector<std::string> args);

namespace {

int rerun(const std::string& manifest_path) {
    json m;
    try {
        m = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw DataError("malformed manifest '" + manifest_path + "': " + e.what());
    }
    const auto sub = m.at("subcommand").get<std::string>();
    const auto config = m.at("resolved_config").get<std::string>();
    const fs::path tmp = fs::temp_directory_path() / ("dysalign-rerun-" + std::to_string(::getpid()) + ".toml");
    {
        std::ofstream out(tmp);
        out << config;
    }
    std::vector<std::string> args{"dysalign", "--config", tmp.string(), sub};
    log("re-running '" + sub + "' from " + manifest_path);
    const int code = run(args);
    fs::remove(tmp);
    return code;
}

}  // namespace

int run(std::vector<std::string> args) {
    CLI::App app{"Dysfluent sequence alignment toolkit", "dysalign"};
    app.set_version_flag("--version", std::string(DYSALIGN_VERSION));
    app.set_config("--config", "", "TOML configuration file (flags override it)")->envname("DYSALIGN_CONFIG");
    app.add_flag("-q,--quiet", g_quiet, "Suppress progress messages");
    app.require_subcommand(1);
    app.fallthrough();

    // phonemes
    std::string ph_format = "tsv";
    auto* ph = app.add_subcommand("phonemes", "Print the phoneme inventory");
    ph->add_option("--format", ph_format, "tsv, csv or json")
        ->check(CLI::IsMember({"tsv", "csv", "json", "pretty"}))
        ->capture_default_str();

    // simulate
    TextSource sim_texts;
    SimulationConfig sim_cfg;
    std::string sim_level = "phoneme", sim_out;
    std::vector<double> sim_props{1, 1, 1, 1};
    std::size_t sim_n = 1000;
    auto* sim = app.add_subcommand("simulate", "Inject dysfluencies into reference texts");
    sim_texts.add(sim);
    sim->add_option("--level", sim_level, "phoneme or word")
        ->check(CLI::IsMember({"phoneme", "word"}))
        ->capture_default_str();
    sim->add_option("--proportions", sim_props, "Weights for rep,ins,del,sub")
        ->delimiter(',')
        ->expected(4)
        ->capture_default_str();
    sim->add_option("--n", sim_n, "Number of records")->capture_default_str();
    sim->add_option("--events-min", sim_cfg.events_min, "Fewest events per record")->capture_default_str();
    sim->add_option("--events-max", sim_cfg.events_max, "Most events per record")->capture_default_str();
    sim->add_option("--max-repeat", sim_cfg.max_repeat, "Most copies per repetition")->capture_default_str();
    sim->add_option("--seed", sim_cfg.seed, "Random seed")->capture_default_str();
    sim->add_option("--out", sim_out, "Output JSONL (default: stdout)");

    // train
    std::string tr_corpus, tr_level = "phoneme", tr_out;
    std::size_t tr_min_count = 1;
    ModelOptions tr_opts;
    auto* tr = app.add_subcommand("train", "Train a neural aligner");
    tr->add_option("--corpus", tr_corpus, "Training corpus (JSONL)")->required();
    tr->add_option("--level", tr_level, "phoneme or word")
        ->check(CLI::IsMember({"phoneme", "word"}))
        ->capture_default_str();
    tr->add_option("--out", tr_out, "Checkpoint path")->required();
    tr->add_option("--seed", tr_opts.train.seed, "Random seed")->capture_default_str();
    tr->add_option("--min-count", tr_min_count, "Word vocabulary frequency cutoff")->capture_default_str();
    tr_opts.add(tr);

    // align
    std::string al_method = "hard", al_ref, al_dys, al_level = "phoneme", al_model, al_corpus, al_out;
    std::string al_format = "pretty";
    std::uint64_t al_seed = 0;
    auto* al = app.add_subcommand("align", "Align dysfluent sequences to references");
    al->add_option("--method", al_method, "hard, soft, dtw or neural")
        ->check(CLI::IsMember({"hard", "soft", "dtw", "neural"}))
        ->capture_default_str();
    al->add_option("--ref", al_ref, "Reference tokens (space separated)");
    al->add_option("--dys", al_dys, "Dysfluent tokens (space separated)");
    al->add_option("--level", al_level, "phoneme or word")
        ->check(CLI::IsMember({"phoneme", "word"}))
        ->capture_default_str();
    al->add_option("--model", al_model, "Checkpoint for --method neural");
    al->add_option("--corpus", al_corpus, "Align every record of a corpus instead");
    al->add_option("--out", al_out, "Predictions JSONL for --corpus (default: stdout)");
    al->add_option("--format", al_format, "pretty or json")
        ->check(CLI::IsMember({"pretty", "json"}))
        ->capture_default_str();
    al->add_option("--seed", al_seed, "Accepted for uniformity; alignment is deterministic");

    // sta
    std::string st_corpus, st_aligner = "soft", st_model, st_report, st_emit_dir;
    StaSettings st_settings;
    bool st_per_record = false;
    auto* st = app.add_subcommand("sta", "Speech-text alignment on synthesized emissions");
    st->add_option("--corpus", st_corpus, "Phoneme-level corpus (JSONL)")->required();
    st->add_option("--noise", st_settings.noise.epsilon, "Leaked posterior mass per frame")->capture_default_str();
    st->add_option("--confusion-bias", st_settings.noise.confusion_bias, "Share of the leak kept in-category")
        ->capture_default_str();
    st->add_option("--aligner", st_aligner, "hard, soft, dtw or neural")
        ->check(CLI::IsMember({"hard", "soft", "dtw", "neural"}))
        ->capture_default_str();
    st->add_option("--model", st_model, "Checkpoint for --aligner neural");
    st->add_option("--frame-ms", st_settings.frame_ms, "Frame hop in ms")->capture_default_str();
    st->add_option("--seed", st_settings.seed, "Duration seed")->capture_default_str();
    st->add_option("--report", st_report, "Report JSON (default: stdout)");
    st->add_option("--emit-dir", st_emit_dir, "Also write each record's emissions and gold spans here");
    st->add_flag("--per-record", st_per_record, "Include per-record results in the report");

    // eval
    std::string ev_pred, ev_gold, ev_out, ev_method, ev_format = "json";
    std::uint64_t ev_seed = 0;
    auto* ev = app.add_subcommand("eval", "Score predictions against a gold corpus");
    ev->add_option("--pred", ev_pred, "Predictions JSONL")->required();
    ev->add_option("--gold", ev_gold, "Gold corpus JSONL")->required();
    ev->add_option("--out", ev_out, "Report path (default: stdout)");
    ev->add_option("--method", ev_method, "Method name recorded in the report");
    ev->add_option("--format", ev_format, "json, csv or pretty")
        ->check(CLI::IsMember({"json", "csv", "pretty"}))
        ->capture_default_str();
    ev->add_option("--seed", ev_seed, "Accepted for uniformity; evaluation is deterministic");

    // ablation
    std::string ab_spec, ab_out, ab_level = "phoneme";
    TextSource ab_texts;
    AblationSettings ab_settings;
    ModelOptions ab_opts;
    bool ab_fast = false;
    auto* ab = app.add_subcommand("ablation", "Proportion ablation grid (type-specific accuracy)");
    ab->add_option("--spec", ab_spec, "TOML file with [[row]] name/proportions entries (default: standard grid)");
    ab->add_option("--out", ab_out, "CSV path (default: stdout)");
    ab->add_option("--level", ab_level, "phoneme or word")
        ->check(CLI::IsMember({"phoneme", "word"}))
        ->capture_default_str();
    ab->add_option("--records", ab_settings.records_per_cell, "Records simulated per row")->capture_default_str();
    ab->add_option("--test-fraction", ab_settings.test_fraction, "Held-out share per row")->capture_default_str();
    ab->add_option("--seed", ab_settings.simulation.seed, "Simulation and split seed")->capture_default_str();
    ab->add_flag("--fast", ab_fast, "1000-record rows");
    ab_texts.add(ab);
    ab_opts.add(ab);

    // report
    std::string rp_corpus, rp_model, rp_out, rp_format = "json";
    auto* rp = app.add_subcommand("report", "Compare every aligner on a corpus");
    rp->add_option("--corpus", rp_corpus, "Test corpus (JSONL)")->required();
    rp->add_option("--model", rp_model, "Checkpoint; adds the neural aligner");
    rp->add_option("--out", rp_out, "Report path (default: stdout)");
    rp->add_option("--format", rp_format, "json, csv or pretty")
        ->check(CLI::IsMember({"json", "csv", "pretty"}))
        ->capture_default_str();

    // rerun
    std::string rr_manifest;
    auto* rr = app.add_subcommand("rerun", "Repeat a run from its manifest");
    rr->add_option("manifest", rr_manifest, "Manifest written next to an output")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        const auto subs = app.get_subcommands();
        std::cerr << '\n' << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    RunContext ctx;
    ctx.argv = args;
    CLI::App* sub = app.get_subcommands().front();
    ctx.subcommand = sub->get_name();
    {
        std::istringstream all(app.config_to_str(true, false));
        const std::string prefix = ctx.subcommand + ".";
        for (std::string line; std::getline(all, line);)
            if (line.rfind(prefix, 0) == 0) ctx.resolved_config += line + "\n";
    }

    if (sub == ph) return cmd_phonemes(ph_format);
    if (sub == rr) return rerun(rr_manifest);

    if (sub == sim) {
        sim_cfg.level = level_option(sim_level);
        std::copy(sim_props.begin(), sim_props.end(), sim_cfg.proportions.begin());
        sim_cfg.validate();
        const auto texts = sim_texts.load(sim_cfg.level);
        log("simulating " + std::to_string(sim_n) + " records from " + std::to_string(texts.size()) + " texts");
        const auto corpus = simulate_corpus(texts, sim_cfg, sim_n);
        std::size_t warned = 0;
        for (const auto& r : corpus) warned += r.warnings.empty() ? 0 : 1;
        if (warned) log(std::to_string(warned) + " records had their event count truncated");
        std::ostringstream os;
        write_corpus(os, corpus);
        emit(sim_out, os.str());
        ctx.seeds = {{"simulation", sim_cfg.seed}, {"demo", sim_texts.demo_seed}};
        if (!sim_texts.input.empty()) ctx.inputs.push_back(sim_texts.input);
        ctx.outputs.push_back(sim_out);
    } else if (sub == tr) {
        tr_opts.finalize();
        const Level level = level_option(tr_level);
        const auto corpus = read_corpus(tr_corpus);
        if (corpus.empty()) throw DataError("corpus '" + tr_corpus + "' is empty");
        for (const auto& r : corpus)
            if (r.level != level)
                throw DataError("record " + r.id + " is " + std::string(level_name(r.level)) + "-level");
        const TokenizerSpec tok =
            level == Level::Word ? TokenizerSpec::word(corpus, tr_min_count) : TokenizerSpec::phoneme();
        log("training on " + std::to_string(corpus.size()) + " records");
        TrainedModel trained = train(corpus, tok, tr_opts.enc, tr_opts.train, tr_opts.loss,
                                     [](std::size_t epoch, double loss) {
                                         log("epoch " + std::to_string(epoch) + " loss " + format_double(loss));
                                     });
        CheckpointMetadata meta{tr_opts.train.seed, tr_opts.train.epochs, trained.report.epoch_loss.back(),
                                trained.report.epoch_loss};
        save_checkpoint(tr_out, trained.model, meta);
        log("wrote " + tr_out);
        ctx.seeds = {{"train", tr_opts.train.seed}};
        ctx.inputs.push_back(tr_corpus);
        ctx.outputs.push_back(tr_out);
    } else if (sub == al) {
        const Aligner aligner = make_aligner(al_method, al_model);
        if (!al_corpus.empty()) {
            const auto corpus = read_corpus(al_corpus);
            const auto preds = predict_corpus(aligner, corpus);
            if (al_out.empty() || al_out == "-") {
                for (const auto& p : preds)
                    std::cout << json{{"id", p.id}, {"ref_labels", p.labels.ref_labels}, {"dys_labels", p.labels.dys_labels}}
                                     .dump()
                              << '\n';
            } else {
                write_predictions(al_out, preds);
            }
            ctx.inputs.push_back(al_corpus);
            ctx.outputs.push_back(al_out);
        } else {
            if (al_ref.empty() || al_dys.empty()) throw CLI::RequiredError("--ref and --dys (or --corpus)");
            const Level level = level_option(al_level);
            const TokenSequence ref = TokenSequence::parse(al_ref, level);
            const TokenSequence dys = TokenSequence::parse(al_dys, level);
            const JointLabelEncoding labels = aligner.align(ref, dys);
            const json j = alignment_json(al_method, ref, dys, labels);
            if (al_format == "json") {
                std::cout << j.dump(2) << '\n';
            } else {
                std::cout << j["groups"].get<std::string>() << '\n'
                          << "ref_labels: " << join_labels(labels.ref_labels) << '\n'
                          << "dys_labels: " << join_labels(labels.dys_labels) << '\n'
                          << "flat:       " << j["flat"].get<std::string>() << '\n'
                          << "kinds:      " << j["kinds"].get<std::string>() << '\n';
            }
        }
        if (!al_model.empty()) ctx.inputs.push_back(al_model);
    } else if (sub == st) {
        const Aligner aligner = make_aligner(st_aligner, st_model);
        const auto corpus = read_corpus(st_corpus);
        const StaReport report = run_sta(corpus, aligner, st_settings);
        if (!st_emit_dir.empty()) {
            for (std::size_t r = 0; r < corpus.size(); ++r) {
                DurationModel d = st_settings.durations;
                d.seed = Rng::derive(st_settings.seed, r);
                const auto synth =
                    synthesize_emissions(corpus[r].dysfluent, d, st_settings.noise, st_settings.frame_ms);
                const fs::path base = fs::path(st_emit_dir) / corpus[r].id;
                write_emissions(base.string() + ".emit", synth.matrix);
                write_gold_spans(base.string() + ".spans.json", synth.gold, st_settings.frame_ms);
            }
        }
        log("recovery rate " + format_double(report.recovery_rate()) + ", overall RMSE " +
            (report.overall.defined() ? format_double(report.overall.rmse()) + " ms" : std::string("undefined")));
        emit(st_report, to_json(report, st_per_record).dump(2) + "\n");
        ctx.seeds = {{"durations", st_settings.seed}};
        ctx.inputs.push_back(st_corpus);
        if (!st_model.empty()) ctx.inputs.push_back(st_model);
        ctx.outputs.push_back(st_report);
    } else if (sub == ev) {
        const auto preds = read_predictions(ev_pred);
        const auto gold = read_corpus(ev_gold);
        const auto acc = alignment_accuracy(preds, gold, ev_method);
        const auto types = type_specific_accuracy(preds, gold);
        std::string text;
        if (ev_format == "json") {
            text = json{{"alignment", to_json(acc)}, {"types", to_json(types)}}.dump(2) + "\n";
        } else if (ev_format == "csv") {
            text = "method,level,sequence_exact_match,token_label_accuracy,n_records,Rep,Ins,Del,Sub,Mix\n";
            text += acc.method + "," + std::string(level_name(acc.level)) + "," +
                    format_double(acc.sequence_exact_match) + "," + format_double(acc.token_label_accuracy) + "," +
                    std::to_string(acc.n_records);
            for (const auto& c : types.cells) text += "," + (c.total ? format_double(c.accuracy()) : "");
            text += "\n";
        } else {
            text = "sequence exact match  " + format_double(acc.sequence_exact_match) + "\n" +
                   "token label accuracy  " + format_double(acc.token_label_accuracy) + "\n" +
                   "records               " + std::to_string(acc.n_records) + "\n";
            for (std::size_t b = 0; b < kBucketCount; ++b)
                text += std::string(bucket_name(TypeBucket(b))) + "  " +
                        (types.cells[b].total ? format_double(types.cells[b].accuracy()) : "-") +
                        "  (n=" + std::to_string(types.cells[b].total) + ")\n";
        }
        emit(ev_out, text);
        ctx.inputs = {ev_pred, ev_gold};
        ctx.outputs.push_back(ev_out);
    } else if (sub == ab) {
        ab_opts.finalize();
        ab_settings.level = level_option(ab_level);
        ab_settings.encoder = ab_opts.enc;
        ab_settings.training = ab_opts.train;
        ab_settings.training.seed = ab_settings.simulation.seed;
        ab_settings.loss = ab_opts.loss;
        if (ab_fast && ab->get_option("--records")->count() == 0) ab_settings.records_per_cell = 1000;
        AblationSpec spec = AblationSpec::standard();
        if (!ab_spec.empty()) {
            spec.rows.clear();
            try {
                const toml::table tbl = toml::parse_file(ab_spec);
                const toml::array* rows = tbl["row"].as_array();
                if (!rows) throw DataError(ab_spec + ": expected [[row]] entries");
                for (const auto& node : *rows) {
                    const toml::table* t = node.as_table();
                    if (!t) throw DataError(ab_spec + ": each row must be a table");
                    ProportionRow row;
                    row.name = (*t)["name"].value_or(std::string{});
                    const toml::array* p = (*t)["proportions"].as_array();
                    if (!p || p->size() != 4) throw DataError(ab_spec + ": row '" + row.name + "' needs 4 proportions");
                    for (std::size_t k = 0; k < 4; ++k) {
                        const auto v = (*p)[k].value<double>();
                        if (!v) throw DataError(ab_spec + ": non-numeric proportion in row '" + row.name + "'");
                        row.proportions[k] = *v;
                    }
                    spec.rows.push_back(row);
                }
            } catch (const toml::parse_error& e) {
                throw DataError(ab_spec + ": " + std::string(e.description()));
            }
            ctx.inputs.push_back(ab_spec);
        }
        spec.validate();
        const auto texts = ab_texts.load(ab_settings.level);
        const auto rows = run_ablation(texts, spec, ab_settings, [](const std::string& msg) { log(msg); });
        emit(ab_out, ablation_csv(rows));
        ctx.seeds = {{"simulation", ab_settings.simulation.seed}, {"demo", ab_texts.demo_seed}};
        ctx.outputs.push_back(ab_out);
    } else if (sub == rp) {
        const auto corpus = read_corpus(rp_corpus);
        std::vector<Aligner> aligners{Aligner::hard(), Aligner::soft(), Aligner::dtw()};
        if (!rp_model.empty()) aligners.push_back(Aligner::neural(load_model(rp_model)));
        json methods = json::array();
        std::string csv = "method,level,sequence_exact_match,token_label_accuracy,n_records,Rep,Ins,Del,Sub,Mix\n";
        std::string pretty;
        for (const auto& a : aligners) {
            const auto preds = predict_corpus(a, corpus);
            const std::string name(method_name(a.method()));
            const auto acc = alignment_accuracy(preds, corpus, name);
            const auto types = type_specific_accuracy(preds, corpus);
            methods.push_back(json{{"alignment", to_json(acc)}, {"types", to_json(types)}});
            csv += name + "," + std::string(level_name(acc.level)) + "," + format_double(acc.sequence_exact_match) +
                   "," + format_double(acc.token_label_accuracy) + "," + std::to_string(acc.n_records);
            for (const auto& c : types.cells) csv += "," + (c.total ? format_double(c.accuracy()) : "");
            csv += "\n";
            pretty += name + std::string(8 - std::min<std::size_t>(7, name.size()), ' ') + "exact " +
                      format_double(acc.sequence_exact_match) + "  token " + format_double(acc.token_label_accuracy) +
                      "\n";
        }
        const std::string text = rp_format == "json" ? json{{"corpus", rp_corpus}, {"methods", methods}}.dump(2) + "\n"
                                 : rp_format == "csv" ? csv
                                                      : pretty;
        emit(rp_out, text);
        ctx.inputs.push_back(rp_corpus);
        if (!rp_model.empty()) ctx.inputs.push_back(rp_model);
        ctx.outputs.push_back(rp_out);
    }
    write_manifest(ctx);
    return kExitOk;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    try {
        return run(args);
    } catch (const CLI::Error& e) {
        std::cerr << "dysalign: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "dysalign: " << e.what() << '\n';
        return kExitData;
    } catch (const TrainError& e) {
        std::cerr << "dysalign: training failed: " << e.what() << '\n';
        return kExitInternal;
    } catch (const Error& e) {
        std::cerr << "dysalign: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "dysalign: internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
