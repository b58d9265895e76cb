#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace temt {

using Year = int;
using EntityId = int;
using RelationId = int;

enum class IntervalCategory { closed, left_open, right_open };

std::string_view to_string(IntervalCategory c);

// Validity interval of a fact. At least one endpoint is known; a closed
// interval has start <= end. Construct through `make`, which enforces this.
class TimeInterval {
   public:
    static TimeInterval make(std::optional<Year> start, std::optional<Year> end);
    static TimeInterval closed(Year start, Year end) { return make(start, end); }

    const std::optional<Year>& start() const noexcept { return start_; }
    const std::optional<Year>& end() const noexcept { return end_; }
    IntervalCategory category() const noexcept;
    bool is_closed() const noexcept { return start_ && end_; }

    // True when `t` is a known time point of this interval: any year of a
    // closed interval, or the single known endpoint of an open one.
    bool covers(Year t) const noexcept;

    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;

   private:
    TimeInterval(std::optional<Year> s, std::optional<Year> e) : start_(s), end_(e) {}
    std::optional<Year> start_;
    std::optional<Year> end_;
};

struct Triple {
    EntityId subject = 0;
    RelationId relation = 0;
    EntityId object = 0;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t h = static_cast<std::uint32_t>(t.subject);
        h = h * 0x9E3779B97F4A7C15ULL + static_cast<std::uint32_t>(t.relation);
        h = h * 0x9E3779B97F4A7C15ULL + static_cast<std::uint32_t>(t.object);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

struct Quadruple {
    EntityId subject = 0;
    RelationId relation = 0;
    EntityId object = 0;
    TimeInterval interval = TimeInterval::make(0, 0);

    Triple triple() const noexcept { return {subject, relation, object}; }
    friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

struct EntityRecord {
    EntityId id = 0;
    std::string key;  // identifier used in the source files
    std::string name;
    std::string description;
};

struct RelationRecord {
    RelationId id = 0;
    std::string key;
    std::string name;
};

struct TimeRange {
    Year t_min = 0;
    Year t_max = 0;

    bool contains(Year t) const noexcept { return t >= t_min && t <= t_max; }
    Year clamp(Year t) const noexcept { return t < t_min ? t_min : (t > t_max ? t_max : t); }
    int size() const noexcept { return t_max - t_min + 1; }
};

struct Dataset {
    std::vector<EntityRecord> entities;
    std::vector<RelationRecord> relations;
    std::vector<Quadruple> train;
    std::vector<Quadruple> valid;
    std::vector<Quadruple> test;
    TimeRange range;
    // Load-time events worth surfacing in a run report (clamping, dropped rows).
    std::vector<std::string> warnings;

    std::optional<EntityId> find_entity(std::string_view key) const;
    std::optional<RelationId> find_relation(std::string_view key) const;
};

enum class Endpoint { start, end };

struct TrainingPoint {
    std::size_t quadruple = 0;  // index into the train split
    Year year = 0;
    Endpoint endpoint = Endpoint::start;

    friend bool operator==(const TrainingPoint&, const TrainingPoint&) = default;
};

struct IngestionConfig {
    std::string train_file = "train.tsv";
    std::string valid_file = "valid.tsv";
    std::string test_file = "test.tsv";
    std::string entity_file = "entities.tsv";
    std::string relation_file = "relations.tsv";
    std::string description_file = "descriptions.tsv";
    // Tokens treated as an unknown endpoint.
    std::vector<std::string> unknown_tokens = {"-", "####"};
};

// Year component of YYYY, YYYY-MM or YYYY-MM-DD. Month/day may be "##".
Year normalize_granularity(std::string_view raw_date);

Dataset load_dataset(const std::filesystem::path& dir, const IngestionConfig& config = {});

// Writes the dataset in the ingestion layout plus `manifest.txt`. Loading the
// result reproduces identical ids and quadruple lists.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir,
                   const IngestionConfig& config = {});

// Time range over the known endpoints of `quads`. Throws if none are known.
TimeRange compute_time_range(std::span<const Quadruple> quads);

// Closed interval -> start and end points (one point when start == end);
// open interval -> its known endpoint.
std::vector<TrainingPoint> expand_training_points(std::span<const Quadruple> train);

// Closed-interval quadruples only.
std::vector<Quadruple> filter_evaluable(std::span<const Quadruple> test);

// FNV-1a 64 over bytes; used for manifest checksums and sentence keys.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);
std::string file_checksum(const std::filesystem::path& file);

}  // namespace temt
