#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "temt/dataset.hpp"

namespace temt {

struct SplitConfig {
    std::size_t valid_entities = 1;  // removed entities whose edges form the valid split
    std::size_t test_entities = 1;
    std::size_t min_relation_edges = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitReport {
    std::vector<EntityId> valid_removed;
    std::vector<EntityId> test_removed;
    std::size_t candidates_tried = 0;
    std::size_t candidates_rejected = 0;
    std::uint64_t seed = 0;
};

struct InductiveSplit {
    Dataset dataset;
    SplitReport report;
};

// Entity-removal split over the static (interval-free) view of all facts.
// An entity is removed only if no neighbour becomes isolated and no relation
// it touches drops below `min_relation_edges`. Removed entities alternate
// between valid and test; their facts, with intervals, form those splits.
// Throws SplitError when the candidates run out before both targets are met.
InductiveSplit make_inductive_split(const Dataset& dataset, const SplitConfig& config);

void write_split_report(const InductiveSplit& split, const std::filesystem::path& file);

}  // namespace temt
