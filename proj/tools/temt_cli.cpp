// temt: command-line pipeline over the temt library.
//
//   temt preprocess       --data RAW --out DIR
//   temt split-inductive  --data DIR --out DIR
//   temt emit-sentences   --data DIR --out DIR [--variant N|ND]
//   temt train            --data DIR --out DIR [--encoder hash:<seed>|table:<path>]
//   temt predict          --data DIR --out DIR [--checkpoint FILE]
//   temt evaluate         --data DIR --out DIR [--k 1 --k 10]
//   temt classify-triples --data DIR --out DIR
//
// Every option may also come from --config (flat key=value lines, keys are
// the long option names) or from TEMT_<NAME> environment variables.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "temt/dataset.hpp"
#include "temt/error.hpp"
#include "temt/inductive_split.hpp"
#include "temt/inference.hpp"
#include "temt/text_encoding.hpp"
#include "temt/trainer.hpp"
#include "temt/triple_classification.hpp"

namespace fs = std::filesystem;
using namespace temt;

namespace {

struct Options {
    std::string data;
    std::string out = ".";
    std::string variant = "ND";
    std::string encoder = "hash:0";
    std::size_t text_dim = 768;
    std::string checkpoint;   // default <out>/model.ckpt
    std::string predictions;  // default <out>/predictions.tsv
    std::string split = "test";
    std::size_t k = 10;
    std::vector<std::size_t> eval_k;
    double theta = 0.65;
    std::string negative_type = "time";
    TrainConfig train;
    SplitConfig split_config{1, 1, 100, 0};
    std::size_t seed = 0;
};

// Key/value run report written next to each subcommand's artifacts.
class RunReport {
   public:
    explicit RunReport(std::string subcommand) : start_(std::chrono::steady_clock::now()) {
        add("subcommand", std::move(subcommand));
    }
    void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
    void warn(const std::string& w) { add("warning", w); }
    void checksums(const fs::path& dir) {
        if (!fs::is_directory(dir)) return;
        std::set<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().filename().string().rfind("run_report", 0) != 0) files.insert(e.path());
        for (const auto& f : files) add("checksum." + f.filename().string(), "fnv1a64:" + file_checksum(f));
    }
    void write(const fs::path& file) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::ofstream out(file);
        for (const auto& [k, v] : lines_) out << k << '=' << v << '\n';
        out << "wall_time_s=" << secs << '\n';
        if (!out) throw Error("cannot write run report " + file.string());
    }

   private:
    std::chrono::steady_clock::time_point start_;
    std::vector<std::pair<std::string, std::string>> lines_;
};

std::unique_ptr<TextEncoder> make_encoder(const std::string& choice, std::size_t dim) {
    if (choice.rfind("table:", 0) == 0) {
        const fs::path p = choice.substr(6);
        if (!fs::exists(p))
            throw Error("embedding table " + p.string() +
                        " not found; produce it with the embedding extractor from `temt emit-sentences` output");
        return std::make_unique<TableEncoder>(TableEncoder::load(p));
    }
    if (choice.rfind("hash:", 0) == 0) {
        std::uint64_t seed = 0;
        try {
            std::size_t used = 0;
            seed = std::stoull(choice.substr(5), &used);
            if (used != choice.size() - 5) throw std::invalid_argument(choice);
        } catch (const std::exception&) {
            throw ConfigError("encoder seed must be an unsigned integer: " + choice);
        }
        return std::make_unique<HashingEncoder>(dim, seed);
    }
    throw ConfigError("encoder must be table:<path> or hash:<seed>, got " + choice);
}

void validate_encoder_choice(const std::string& choice) {
    if (choice.rfind("table:", 0) != 0 && choice.rfind("hash:", 0) != 0)
        throw ConfigError("encoder must be table:<path> or hash:<seed>, got " + choice);
}

Dataset require_dataset(const Options& o, const char* producer) {
    if (o.data.empty()) throw ConfigError("--data is required");
    if (!fs::is_directory(o.data))
        throw Error("dataset directory " + o.data + " not found; run `temt " + producer + "` first");
    return load_dataset(o.data);
}

fs::path out_file(const Options& o, const std::string& name) {
    fs::create_directories(o.out);
    return fs::path(o.out) / name;
}

const std::vector<Quadruple>& split_of(const Dataset& ds, const std::string& name) {
    if (name == "test") return ds.test;
    if (name == "valid") return ds.valid;
    throw ConfigError("split must be valid or test, got " + name);
}

void echo(RunReport& r, const CLI::App& app) {
    for (const CLI::Option* opt : app.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config") continue;
        const auto& results = opt->results();
        std::string value;
        for (const auto& v : results) value += (value.empty() ? "" : ",") + v;
        if (results.empty()) value = opt->get_default_str();
        r.add("config." + name, value);
    }
}

void report_dataset(RunReport& r, const Dataset& ds) {
    r.add("dataset.entities", std::to_string(ds.entities.size()));
    r.add("dataset.relations", std::to_string(ds.relations.size()));
    r.add("dataset.train", std::to_string(ds.train.size()));
    r.add("dataset.valid", std::to_string(ds.valid.size()));
    r.add("dataset.test", std::to_string(ds.test.size()));
    r.add("dataset.t_min", std::to_string(ds.range.t_min));
    r.add("dataset.t_max", std::to_string(ds.range.t_max));
    for (const auto& w : ds.warnings) r.warn(w);
}

// ---------------------------------------------------------------- subcommands

void cmd_preprocess(const Options& o, RunReport& r) {
    if (o.data.empty()) throw ConfigError("--data is required");
    if (!fs::is_directory(o.data)) throw Error("raw dataset directory " + o.data + " not found");
    const auto ds = load_dataset(o.data);
    r.checksums(o.data);
    report_dataset(r, ds);
    fs::create_directories(o.out);
    write_dataset(ds, o.out);
    std::cout << "wrote " << ds.train.size() << '/' << ds.valid.size() << '/' << ds.test.size()
              << " train/valid/test facts to " << o.out << '\n';
}

void cmd_split(const Options& o, RunReport& r) {
    const auto ds = require_dataset(o, "preprocess");
    r.checksums(o.data);
    report_dataset(r, ds);
    const auto split = make_inductive_split(ds, o.split_config);
    fs::create_directories(o.out);
    write_dataset(split.dataset, o.out);
    write_split_report(split, fs::path(o.out) / "split_report.txt");
    r.add("split.candidates_tried", std::to_string(split.report.candidates_tried));
    r.add("split.candidates_rejected", std::to_string(split.report.candidates_rejected));
    std::cout << "removed " << split.report.valid_removed.size() << " valid and " << split.report.test_removed.size()
              << " test entities; " << split.dataset.valid.size() << '/' << split.dataset.test.size()
              << " valid/test facts\n";
}

void cmd_emit(const Options& o, RunReport& r) {
    const auto ds = require_dataset(o, "preprocess");
    r.checksums(o.data);
    report_dataset(r, ds);
    const Variant variant = parse_variant(o.variant);
    std::set<Triple> seen;
    std::set<std::uint64_t> keys;
    const auto file = out_file(o, "sentences." + std::string(to_string(variant)) + ".tsv");
    std::ofstream out(file, std::ios::binary);
    for (const auto* s : {&ds.train, &ds.valid, &ds.test})
        for (const auto& q : *s) {
            if (!seen.insert(q.triple()).second) continue;
            const auto sentence = build_sentence(q, ds, variant);
            const auto key = sentence_key(sentence.text);
            if (!keys.insert(key).second) continue;
            out << hex64(key) << '\t' << sentence.text << '\n';
        }
    if (!out) throw Error("cannot write " + file.string());
    r.add("sentences", std::to_string(keys.size()));
    std::cout << "wrote " << keys.size() << " sentences to " << file.string() << '\n';
}

fs::path checkpoint_path(const Options& o) {
    return o.checkpoint.empty() ? fs::path(o.out) / "model.ckpt" : fs::path(o.checkpoint);
}

void cmd_train(const Options& o, RunReport& r) {
    const auto ds = require_dataset(o, "preprocess");
    r.checksums(o.data);
    report_dataset(r, ds);
    const Variant variant = parse_variant(o.variant);
    const auto encoder = make_encoder(o.encoder, o.text_dim);
    const auto result = train(ds, *encoder, variant, o.train, [](std::size_t epoch, double loss) {
        std::cerr << "epoch " << epoch + 1 << " loss " << loss << '\n';
    });
    for (std::size_t e = 0; e < result.report.epoch_loss.size(); ++e) {
        std::ostringstream v;
        v.precision(17);
        v << result.report.epoch_loss[e];
        r.add("epoch_loss." + std::to_string(e + 1), v.str());
    }
    r.add("training_points", std::to_string(result.report.training_points));
    r.add("adam_steps", std::to_string(result.report.steps));
    for (const auto& n : result.report.notes) r.warn(n);

    Checkpoint ck{result.params, ds.range, o.train.echo()};
    ck.meta["variant"] = std::string(to_string(variant));
    ck.meta["encoder"] = o.encoder;
    const auto file = checkpoint_path(o);
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    save_checkpoint(ck, file);
    std::cout << "wrote checkpoint " << file.string() << '\n';
}

void cmd_predict(const Options& o, RunReport& r) {
    const auto ds = require_dataset(o, "preprocess");
    r.checksums(o.data);
    report_dataset(r, ds);
    const Variant variant = parse_variant(o.variant);
    const auto ck_file = checkpoint_path(o);
    const auto ck = load_checkpoint(ck_file);
    if (auto it = ck.meta.find("variant"); it != ck.meta.end() && it->second != to_string(variant))
        throw ConfigError("checkpoint was trained with variant " + it->second + "; pass --variant " + it->second);
    r.add("checkpoint", ck_file.string());
    r.add("checksum.checkpoint", "fnv1a64:" + file_checksum(ck_file));
    const auto encoder = make_encoder(o.encoder, o.text_dim);
    const auto facts = filter_evaluable(split_of(ds, o.split));
    if (facts.empty()) r.warn("no facts with a known interval in split " + o.split);
    const auto preds = predict(facts, ds, *encoder, variant, ck.params, ck.range, o.k, o.theta);
    const auto file = o.predictions.empty() ? out_file(o, "predictions.tsv") : fs::path(o.predictions);
    write_predictions(file, preds);
    r.add("predicted_facts", std::to_string(preds.size()));
    std::cout << "wrote predictions for " << preds.size() << " facts to " << file.string() << '\n';
}

void cmd_evaluate(const Options& o, RunReport& r) {
    const auto ds = require_dataset(o, "preprocess");
    r.checksums(o.data);
    report_dataset(r, ds);
    const fs::path pred_file = o.predictions.empty() ? fs::path(o.out) / "predictions.tsv" : fs::path(o.predictions);
    if (!fs::exists(pred_file)) throw Error("predictions " + pred_file.string() + " not found; run `temt predict` first");
    r.add("checksum.predictions", "fnv1a64:" + file_checksum(pred_file));
    const auto facts = filter_evaluable(split_of(ds, o.split));
    const auto preds = read_predictions(pred_file);
    std::vector<Interval> gold;
    for (const auto& q : facts) gold.push_back({*q.interval.start(), *q.interval.end()});
    std::vector<std::vector<PredictedInterval>> by_fact(facts.size());
    std::vector<bool> present(facts.size(), false);
    for (const auto& p : preds) {
        if (p.fact_id >= facts.size())
            throw Error("prediction for fact " + std::to_string(p.fact_id) + " but split " + o.split + " has " +
                        std::to_string(facts.size()) + " evaluable facts; rerun `temt predict`");
        by_fact[p.fact_id] = p.intervals;
        present[p.fact_id] = true;
    }
    for (std::size_t i = 0; i < present.size(); ++i)
        if (!present[i]) throw Error("no prediction for fact " + std::to_string(i) + "; rerun `temt predict`");
    std::vector<std::size_t> ks = o.eval_k.empty() ? std::vector<std::size_t>{1, 10} : o.eval_k;
    const auto rows = evaluate(gold, by_fact, ks);
    write_metric_report(out_file(o, "metrics.tsv"), rows);
    for (const auto& row : rows) {
        std::ostringstream v;
        v.precision(17);
        v << row.value;
        r.add("metric." + row.metric + "@" + std::to_string(row.k), v.str());
    }
    std::cout << format_metric_table(rows);
}

void cmd_classify(const Options& o, RunReport& r) {
    const auto ds = require_dataset(o, "preprocess");
    r.checksums(o.data);
    report_dataset(r, ds);
    const auto encoder = make_encoder(o.encoder, o.text_dim);
    const auto result = triple_classification(ds, *encoder, parse_variant(o.variant), ClassifierConfig{}, o.seed);
    std::ostringstream acc;
    acc.precision(17);
    acc << result.accuracy;
    std::ofstream out(out_file(o, "classification.txt"));
    out << "accuracy=" << acc.str() << "\ntrain_size=" << result.train_size << "\ntest_size=" << result.test_size
        << "\nepochs=" << result.epochs << '\n';
    r.add("accuracy", acc.str());
    std::cout << "accuracy " << acc.str() << " on " << result.test_size << " test triples\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal knowledge graph interval prediction"};
    app.set_config("--config", "", "Flat key=value config file");
    app.allow_config_extras(false);
    app.require_subcommand(1);
    Options o;

    const auto env = [](CLI::Option* opt) {
        std::string name = opt->get_single_name();
        for (auto& c : name) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        opt->envname("TEMT_" + name);
        return opt;
    };
    env(app.add_option("--data", o.data, "Dataset directory"));
    env(app.add_option("--out", o.out, "Output directory")->capture_default_str());
    env(app.add_option("--variant", o.variant, "Sentence variant: N or ND")->capture_default_str());
    env(app.add_option("--encoder", o.encoder, "hash:<seed> or table:<path>")->capture_default_str());
    env(app.add_option("--text-dim", o.text_dim, "Hashing encoder dimension")->capture_default_str());
    env(app.add_option("--checkpoint", o.checkpoint, "Checkpoint file (default <out>/model.ckpt)"));
    env(app.add_option("--predictions", o.predictions, "Prediction dump (default <out>/predictions.tsv)"));
    env(app.add_option("--split", o.split, "Evaluation split: valid or test")->capture_default_str());
    env(app.add_option("--k", o.eval_k, "evaluate: metric cut-offs (repeatable, default 1 and 10)"));
    env(app.add_option("--top", o.k, "predict: intervals per fact")->capture_default_str());
    env(app.add_option("--theta", o.theta, "Greedy-coalescing threshold")->capture_default_str());
    env(app.add_option("--lr", o.train.learning_rate, "Adam learning rate")->capture_default_str());
    env(app.add_option("--epochs", o.train.epochs, "Training epochs")->capture_default_str());
    env(app.add_option("--margin", o.train.margin, "Margin gamma")->capture_default_str());
    env(app.add_option("--negatives", o.train.negatives, "Negatives per positive")->capture_default_str());
    env(app.add_option("--negative-type", o.negative_type, "time or entity")->capture_default_str());
    env(app.add_option("--batch-size", o.train.batch_size, "Positives per Adam step")->capture_default_str());
    env(app.add_option("--hidden", o.train.hidden, "Scorer hidden width")->capture_default_str());
    env(app.add_option("--time-dim", o.train.time_dim, "Time encoding dimension")->capture_default_str());
    env(app.add_option("--valid-entities", o.split_config.valid_entities, "Entities removed for valid")
            ->capture_default_str());
    env(app.add_option("--test-entities", o.split_config.test_entities, "Entities removed for test")
            ->capture_default_str());
    env(app.add_option("--min-relation-edges", o.split_config.min_relation_edges, "Relation edge floor")
            ->capture_default_str());
    env(app.add_option("--seed", o.seed, "Random seed")->capture_default_str());

    using Handler = void (*)(const Options&, RunReport&);
    const std::pair<const char*, Handler> commands[] = {
        {"preprocess", cmd_preprocess}, {"split-inductive", cmd_split}, {"emit-sentences", cmd_emit},
        {"train", cmd_train},           {"predict", cmd_predict},       {"evaluate", cmd_evaluate},
        {"classify-triples", cmd_classify},
    };
    const char* help[] = {"Normalise a raw dataset and write a manifest",
                          "Entity-removal inductive split",
                          "Write keyed sentences for every distinct triple",
                          "Train the scorer and write a checkpoint",
                          "Predict intervals for the evaluation split",
                          "Score predictions with gIOU, aeIOU and gaeIOU",
                          "Triple classification with an MLP probe"};
    for (std::size_t i = 0; i < std::size(commands); ++i) app.add_subcommand(commands[i].first, help[i])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    Handler handler = nullptr;
    for (const auto& [name, h] : commands)
        if (sub->get_name() == name) handler = h;

    RunReport report(sub->get_name());
    try {
        // everything is validated before any work starts
        o.train.negative_type = parse_negative_type(o.negative_type);
        o.train.seed = o.seed;
        o.split_config.seed = o.seed;
        o.train.validate();
        o.split_config.validate();
        parse_variant(o.variant);
        validate_encoder_choice(o.encoder);
        if (o.text_dim == 0) throw ConfigError("text-dim must be >= 1");
        if (o.k == 0) throw ConfigError("top must be >= 1");
        for (auto k : o.eval_k)
            if (k == 0) throw ConfigError("k must be >= 1");
        if (!(o.theta > 0.0 && o.theta <= 1.0)) throw ConfigError("theta must be in (0, 1]");
        if (o.split != "valid" && o.split != "test") throw ConfigError("split must be valid or test");
        echo(report, app);

        handler(o, report);
        report.write(out_file(o, "run_report." + sub->get_name() + ".txt"));
        return 0;
    } catch (const Error& e) {
        std::cerr << "temt " << sub->get_name() << ": " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "temt " << sub->get_name() << ": " << e.what() << '\n';
        return 3;
    }
}
