#include "temt/inductive_split.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "temt/error.hpp"
#include "temt/rng.hpp"

namespace temt {

void SplitConfig::validate() const {
    if (valid_entities == 0 || test_entities == 0) throw ConfigError("split targets must be > 0");
    if (min_relation_edges == 0) throw ConfigError("minimum relation edge count must be >= 1");
}

namespace {

// Undirected multigraph over distinct triples. Self-loops count once towards
// their entity's degree.
struct TripleGraph {
    std::vector<Triple> triples;
    std::vector<bool> alive;
    std::vector<std::vector<std::size_t>> incident;  // entity -> triple indices
    std::vector<std::size_t> degree;
    std::vector<std::size_t> relation_edges;

    TripleGraph(const Dataset& ds) {
        std::set<Triple> distinct;
        for (const auto* split : {&ds.train, &ds.valid, &ds.test})
            for (const auto& q : *split) distinct.insert(q.triple());
        triples.assign(distinct.begin(), distinct.end());
        alive.assign(triples.size(), true);
        incident.resize(ds.entities.size());
        degree.assign(ds.entities.size(), 0);
        relation_edges.assign(ds.relations.size(), 0);
        for (std::size_t i = 0; i < triples.size(); ++i) {
            const auto& t = triples[i];
            incident[static_cast<std::size_t>(t.subject)].push_back(i);
            ++degree[static_cast<std::size_t>(t.subject)];
            if (t.object != t.subject) {
                incident[static_cast<std::size_t>(t.object)].push_back(i);
                ++degree[static_cast<std::size_t>(t.object)];
            }
            ++relation_edges[static_cast<std::size_t>(t.relation)];
        }
    }

    std::vector<std::size_t> live_edges(EntityId e) const {
        std::vector<std::size_t> out;
        for (auto i : incident[static_cast<std::size_t>(e)])
            if (alive[i]) out.push_back(i);
        return out;
    }

    // Checks the post-removal state; removes and returns the edges on success.
    std::optional<std::vector<std::size_t>> try_remove(EntityId e, std::size_t min_edges) {
        const auto edges = live_edges(e);
        if (edges.empty()) return std::nullopt;
        std::map<EntityId, std::size_t> neighbour_loss;
        std::map<RelationId, std::size_t> relation_loss;
        for (auto i : edges) {
            const auto& t = triples[i];
            if (t.subject != e) ++neighbour_loss[t.subject];
            if (t.object != e) ++neighbour_loss[t.object];
            ++relation_loss[t.relation];
        }
        for (const auto& [n, lost] : neighbour_loss)
            if (degree[static_cast<std::size_t>(n)] - lost == 0) return std::nullopt;
        for (const auto& [r, lost] : relation_loss)
            if (relation_edges[static_cast<std::size_t>(r)] - lost < min_edges) return std::nullopt;
        for (const auto& [n, lost] : neighbour_loss) degree[static_cast<std::size_t>(n)] -= lost;
        for (const auto& [r, lost] : relation_loss) relation_edges[static_cast<std::size_t>(r)] -= lost;
        degree[static_cast<std::size_t>(e)] = 0;
        for (auto i : edges) alive[i] = false;
        return edges;
    }
};

enum class Bucket : unsigned char { train, valid, test };

}  // namespace

InductiveSplit make_inductive_split(const Dataset& dataset, const SplitConfig& config) {
    config.validate();
    TripleGraph graph(dataset);
    std::vector<Bucket> bucket(graph.triples.size(), Bucket::train);

    std::vector<EntityId> candidates;
    for (const auto& e : dataset.entities)
        if (graph.degree[static_cast<std::size_t>(e.id)] > 0) candidates.push_back(e.id);
    Rng rng(config.seed);
    rng.shuffle(std::span<EntityId>(candidates));

    SplitReport report;
    report.seed = config.seed;
    bool next_valid = true;
    for (EntityId e : candidates) {
        const bool need_valid = report.valid_removed.size() < config.valid_entities;
        const bool need_test = report.test_removed.size() < config.test_entities;
        if (!need_valid && !need_test) break;
        ++report.candidates_tried;
        const auto removed = graph.try_remove(e, config.min_relation_edges);
        if (!removed) {
            ++report.candidates_rejected;
            continue;
        }
        const bool to_valid = need_valid && (next_valid || !need_test);
        next_valid = !to_valid;
        for (auto i : *removed) bucket[i] = to_valid ? Bucket::valid : Bucket::test;
        (to_valid ? report.valid_removed : report.test_removed).push_back(e);
    }
    if (report.valid_removed.size() < config.valid_entities || report.test_removed.size() < config.test_entities)
        throw SplitError("inductive split incomplete after " + std::to_string(report.candidates_tried) +
                             " candidates: removed " + std::to_string(report.valid_removed.size()) + "/" +
                             std::to_string(config.valid_entities) + " valid and " +
                             std::to_string(report.test_removed.size()) + "/" +
                             std::to_string(config.test_entities) + " test entities",
                         report.valid_removed.size(), report.test_removed.size());

    std::unordered_map<Triple, Bucket, TripleHash> assignment;
    for (std::size_t i = 0; i < graph.triples.size(); ++i) assignment.emplace(graph.triples[i], bucket[i]);

    InductiveSplit out;
    out.report = std::move(report);
    Dataset& ds = out.dataset;
    ds.entities = dataset.entities;
    ds.relations = dataset.relations;
    for (const auto* split : {&dataset.train, &dataset.valid, &dataset.test}) {
        for (const auto& q : *split) {
            switch (assignment.at(q.triple())) {
                case Bucket::train:
                    ds.train.push_back(q);
                    break;
                case Bucket::valid:
                    ds.valid.push_back(q);
                    break;
                case Bucket::test:
                    ds.test.push_back(q);
                    break;
            }
        }
    }
    ds.range = compute_time_range(ds.train);
    return out;
}

void write_split_report(const InductiveSplit& split, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    const auto& r = split.report;
    out << "seed=" << r.seed << '\n'
        << "candidates_tried=" << r.candidates_tried << '\n'
        << "candidates_rejected=" << r.candidates_rejected << '\n'
        << "valid_entities=" << r.valid_removed.size() << '\n'
        << "test_entities=" << r.test_removed.size() << '\n'
        << "train_facts=" << split.dataset.train.size() << '\n'
        << "valid_facts=" << split.dataset.valid.size() << '\n'
        << "test_facts=" << split.dataset.test.size() << '\n';
    const auto& ents = split.dataset.entities;
    for (auto e : r.valid_removed) out << "removed\tvalid\t" << ents[static_cast<std::size_t>(e)].key << '\n';
    for (auto e : r.test_removed) out << "removed\ttest\t" << ents[static_cast<std::size_t>(e)].key << '\n';
}

}  // namespace temt
