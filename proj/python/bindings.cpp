#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <tuple>

#include "temt/dataset.hpp"
#include "temt/error.hpp"
#include "temt/inductive_split.hpp"
#include "temt/inference.hpp"
#include "temt/intervals.hpp"
#include "temt/text_encoding.hpp"
#include "temt/time_encoding.hpp"
#include "temt/trainer.hpp"
#include "temt/triple_classification.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace temt;

namespace {

using Row = std::tuple<EntityId, RelationId, EntityId, std::optional<Year>, std::optional<Year>>;
using Span = std::pair<Year, Year>;

Interval to_interval(const Span& s) { return {s.first, s.second}; }
Span to_span(const Interval& i) { return {i.start, i.end}; }

std::vector<Row> rows(const std::vector<Quadruple>& qs) {
    std::vector<Row> out;
    out.reserve(qs.size());
    for (const auto& q : qs) out.emplace_back(q.subject, q.relation, q.object, q.interval.start(), q.interval.end());
    return out;
}

std::vector<Quadruple> quads(const std::vector<Row>& rs) {
    std::vector<Quadruple> out;
    out.reserve(rs.size());
    for (const auto& [s, r, o, a, b] : rs) out.push_back({s, r, o, TimeInterval::make(a, b)});
    return out;
}

py::dict split_report(const SplitReport& r) {
    return py::dict("valid_removed"_a = r.valid_removed, "test_removed"_a = r.test_removed,
                    "candidates_tried"_a = r.candidates_tried, "candidates_rejected"_a = r.candidates_rejected,
                    "seed"_a = r.seed);
}

std::unordered_map<std::uint64_t, std::vector<float>> table_rows(const std::map<std::string, std::vector<float>>& in) {
    std::unordered_map<std::uint64_t, std::vector<float>> out;
    for (const auto& [key, v] : in) {
        std::size_t used = 0;
        const auto k = std::stoull(key, &used, 16);
        if (used != key.size() || key.size() != 16) throw ConfigError("embedding key must be 16 hex digits: " + key);
        out.emplace(k, v);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_temt, m) {
    m.doc() = "Temporal knowledge graph interval prediction";

    py::register_exception<Error>(m, "TemtError", PyExc_RuntimeError);

    // intervals
    m.def("interval_length", [](const Span& i) { return interval_length(to_interval(i)); });
    m.def("hull", [](const Span& a, const Span& b) { return to_span(hull(to_interval(a), to_interval(b))); });
    m.def("overlap", [](const Span& a, const Span& b) { return to_span(overlap(to_interval(a), to_interval(b))); });
    m.def("gap", [](const Span& a, const Span& b) { return to_span(gap(to_interval(a), to_interval(b))); });
    m.def("giou", [](const Span& p, const Span& g) { return giou(to_interval(p), to_interval(g)); }, "predicted"_a, "gold"_a);
    m.def("aeiou", [](const Span& p, const Span& g) { return aeiou(to_interval(p), to_interval(g)); }, "predicted"_a, "gold"_a);
    m.def("gaeiou", [](const Span& p, const Span& g) { return gaeiou(to_interval(p), to_interval(g)); }, "predicted"_a, "gold"_a);

    // dataset
    m.def("normalize_granularity", &normalize_granularity, "raw_date"_a);
    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_property_readonly("entities",
                               [](const Dataset& d) {
                                   std::vector<std::tuple<std::string, std::string, std::string>> out;
                                   for (const auto& e : d.entities) out.emplace_back(e.key, e.name, e.description);
                                   return out;
                               })
        .def_property_readonly("relations",
                               [](const Dataset& d) {
                                   std::vector<std::pair<std::string, std::string>> out;
                                   for (const auto& r : d.relations) out.emplace_back(r.key, r.name);
                                   return out;
                               })
        .def_property("train", [](const Dataset& d) { return rows(d.train); },
                      [](Dataset& d, const std::vector<Row>& r) { d.train = quads(r); })
        .def_property("valid", [](const Dataset& d) { return rows(d.valid); },
                      [](Dataset& d, const std::vector<Row>& r) { d.valid = quads(r); })
        .def_property("test", [](const Dataset& d) { return rows(d.test); },
                      [](Dataset& d, const std::vector<Row>& r) { d.test = quads(r); })
        .def_property_readonly("range", [](const Dataset& d) { return Span{d.range.t_min, d.range.t_max}; })
        .def_readonly("warnings", &Dataset::warnings)
        .def("add_entity",
             [](Dataset& d, const std::string& key, const std::string& name, const std::string& description) {
                 d.entities.push_back({static_cast<EntityId>(d.entities.size()), key, name, description});
                 return d.entities.back().id;
             },
             "key"_a, "name"_a, "description"_a = "")
        .def("add_relation",
             [](Dataset& d, const std::string& key, const std::string& name) {
                 d.relations.push_back({static_cast<RelationId>(d.relations.size()), key, name});
                 return d.relations.back().id;
             })
        .def("recompute_range", [](Dataset& d) { d.range = compute_time_range(d.train); });
    m.def("load_dataset", [](const std::filesystem::path& dir) { return load_dataset(dir); }, "directory"_a);
    m.def("write_dataset", [](const Dataset& d, const std::filesystem::path& dir) { write_dataset(d, dir); },
          "dataset"_a, "directory"_a);
    m.def("make_inductive_split",
          [](const Dataset& d, std::size_t valid, std::size_t test, std::size_t min_edges, std::uint64_t seed) {
              auto split = make_inductive_split(d, {valid, test, min_edges, seed});
              return py::make_tuple(std::move(split.dataset), split_report(split.report));
          },
          "dataset"_a, "valid_entities"_a = 1, "test_entities"_a = 1, "min_relation_edges"_a = 100, "seed"_a = 0);

    // text
    m.def("build_sentence",
          [](const Dataset& d, EntityId s, RelationId r, EntityId o, const std::string& variant) {
              return build_sentence(Triple{s, r, o}, d, parse_variant(variant)).text;
          },
          "dataset"_a, "subject"_a, "relation"_a, "object"_a, "variant"_a = "ND");
    m.def("sentence_key", [](const std::string& text) { return hex64(sentence_key(text)); });
    py::class_<TextEncoder>(m, "TextEncoder")
        .def_property_readonly("dim", &TextEncoder::dim)
        .def("encode", [](const TextEncoder& e, const std::string& text) { return e.encode({text}); });
    py::class_<HashingEncoder, TextEncoder>(m, "HashingEncoder")
        .def(py::init<std::size_t, std::uint64_t>(), "dim"_a = 768, "seed"_a = 0);
    py::class_<TableEncoder, TextEncoder>(m, "TableEncoder")
        .def(py::init([](std::size_t dim, const std::map<std::string, std::vector<float>>& rows) {
                 return TableEncoder(dim, table_rows(rows));
             }),
             "dim"_a, "rows"_a)
        .def_static("load", &TableEncoder::load, "path"_a)
        .def("__len__", &TableEncoder::size);
    m.def("write_embedding_table",
          [](const std::filesystem::path& path, std::size_t dim, const std::map<std::string, std::vector<float>>& rows) {
              write_embedding_table(path, dim, table_rows(rows));
          },
          "path"_a, "dim"_a, "rows"_a, "Rows map 16-hex-digit sentence keys to vectors. Binary when path ends in .bin.");

    // time
    m.def("encode_time", py::overload_cast<Year, Year, std::size_t>(&encode_time), "t"_a, "t_min"_a, "dim"_a = 64);

    // scorer and training
    py::class_<ScorerParams>(m, "ScorerParams")
        .def_static("initialize", &ScorerParams::initialize, "text_dim"_a, "time_dim"_a, "hidden"_a, "seed"_a = 0)
        .def_readonly("text_dim", &ScorerParams::text_dim)
        .def_readonly("time_dim", &ScorerParams::time_dim)
        .def_readonly("hidden", &ScorerParams::hidden)
        .def_readwrite("w1", &ScorerParams::w1)
        .def_readwrite("b1", &ScorerParams::b1)
        .def_readwrite("w2", &ScorerParams::w2)
        .def_readwrite("b2", &ScorerParams::b2)
        .def("score", [](const ScorerParams& p, const std::vector<double>& text, const std::vector<double>& time) {
            return score(text, time, p);
        });
    m.def("train",
          [](const Dataset& d, const TextEncoder& enc, const std::string& variant, double learning_rate,
             std::size_t epochs, double margin, std::size_t negatives, const std::string& negative_type,
             std::size_t batch_size, std::size_t hidden, std::size_t time_dim, std::uint64_t seed) {
              TrainConfig c;
              c.learning_rate = learning_rate;
              c.epochs = epochs;
              c.margin = margin;
              c.negatives = negatives;
              c.negative_type = parse_negative_type(negative_type);
              c.batch_size = batch_size;
              c.hidden = hidden;
              c.time_dim = time_dim;
              c.seed = seed;
              TrainResult r;
              {
                  py::gil_scoped_release release;
                  r = train(d, enc, parse_variant(variant), c);
              }
              return py::make_tuple(std::move(r.params),
                                    py::dict("epoch_loss"_a = r.report.epoch_loss,
                                             "training_points"_a = r.report.training_points,
                                             "steps"_a = r.report.steps, "notes"_a = r.report.notes));
          },
          "dataset"_a, "encoder"_a, "variant"_a = "ND", "learning_rate"_a = 0.001, "epochs"_a = 50, "margin"_a = 2.0,
          "negatives"_a = 128, "negative_type"_a = "time", "batch_size"_a = 512, "hidden"_a = 64, "time_dim"_a = 64,
          "seed"_a = 0);
    m.def("save_checkpoint",
          [](const ScorerParams& p, const Span& range, const std::filesystem::path& path) {
              save_checkpoint({p, {range.first, range.second}, {}}, path);
          },
          "params"_a, "range"_a, "path"_a);
    m.def("load_checkpoint", [](const std::filesystem::path& path) {
        auto ck = load_checkpoint(path);
        return py::make_tuple(std::move(ck.params), Span{ck.range.t_min, ck.range.t_max}, ck.meta);
    });

    // inference
    m.def("softmax", [](const std::vector<double>& s) { return softmax(s); });
    m.def("year_distribution",
          [](const std::vector<double>& text, const ScorerParams& p, const Span& range) {
              return year_distribution(text, p, {range.first, range.second}).prob;
          },
          "text"_a, "params"_a, "range"_a);
    m.def("greedy_coalesce",
          [](const std::vector<double>& prob, Year t_min, std::size_t k, double theta) {
              const YearDistribution dist{{t_min, t_min + static_cast<Year>(prob.size()) - 1}, prob};
              std::vector<std::tuple<Year, Year, double>> out;
              for (const auto& p : greedy_coalesce(dist, k, theta))
                  out.emplace_back(p.interval.start, p.interval.end, p.cum_prob);
              return out;
          },
          "prob"_a, "t_min"_a, "k"_a = 10, "theta"_a = 0.65);
    m.def("evaluate",
          [](const std::vector<Span>& gold, const std::vector<std::vector<std::tuple<Year, Year, double>>>& preds,
             const std::vector<std::size_t>& ks) {
              std::vector<Interval> g;
              for (const auto& s : gold) g.push_back(to_interval(s));
              std::vector<std::vector<PredictedInterval>> p;
              for (const auto& fact : preds) {
                  auto& v = p.emplace_back();
                  for (const auto& [a, b, c] : fact) v.push_back({{a, b}, c});
              }
              std::vector<std::tuple<std::string, std::size_t, double>> out;
              for (const auto& r : evaluate(g, p, ks)) out.emplace_back(r.metric, r.k, r.value);
              return out;
          },
          "gold"_a, "predictions"_a, "ks"_a = std::vector<std::size_t>{1, 10});
    m.def("triple_classification",
          [](const Dataset& d, const TextEncoder& enc, const std::string& variant, std::uint64_t seed) {
              const auto r = triple_classification(d, enc, parse_variant(variant), ClassifierConfig{}, seed);
              return py::dict("accuracy"_a = r.accuracy, "train_size"_a = r.train_size, "test_size"_a = r.test_size,
                              "epochs"_a = r.epochs);
          },
          "dataset"_a, "encoder"_a, "variant"_a = "ND", "seed"_a = 0);
}
