#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "temt/dataset.hpp"
#include "temt/rng.hpp"

namespace temt {

// D+: the known time points of every training fact. A (triple, year) pair is
// positive when some training interval of that triple covers the year.
class PositiveIndex {
   public:
    explicit PositiveIndex(std::span<const Quadruple> train);

    bool contains(const Triple& triple, Year year) const;
    std::size_t triple_count() const noexcept { return intervals_.size(); }

   private:
    std::unordered_map<Triple, std::vector<TimeInterval>, TripleHash> intervals_;
};

struct Negative {
    Triple triple;
    Year year = 0;

    friend bool operator==(const Negative&, const Negative&) = default;
};

using NegativeSet = std::vector<Negative>;

// Years of `range` a time-corrupted negative of `positive` may take:
// t' < start (right-open), t' > end (left-open), t' outside [start, end]
// (closed), minus any year already positive for the triple.
std::vector<Year> eligible_negative_years(const Quadruple& positive, const TimeRange& range,
                                          const PositiveIndex& positives);

// n draws, uniform over the eligible years. Throws SamplingError when none exist.
NegativeSet sample_time_corrupted(const Quadruple& positive, std::span<const Year> eligible, std::size_t n,
                                  Rng& rng);
NegativeSet sample_time_corrupted(const Quadruple& positive, const TimeRange& range,
                                  const PositiveIndex& positives, std::size_t n, Rng& rng);

// n draws replacing subject or object (side chosen by a fair coin) with a
// uniform entity, rejecting corruptions found in D+. Throws SamplingError once
// `max_attempts` draws have been spent (0 selects 64 * n + 256).
NegativeSet sample_entity_corrupted(const Triple& triple, Year year, std::size_t entity_count,
                                    const PositiveIndex& positives, std::size_t n, Rng& rng,
                                    std::size_t max_attempts = 0);

}  // namespace temt
