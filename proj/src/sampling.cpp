#include "temt/sampling.hpp"

#include "temt/error.hpp"

namespace temt {

PositiveIndex::PositiveIndex(std::span<const Quadruple> train) {
    for (const auto& q : train) intervals_[q.triple()].push_back(q.interval);
}

bool PositiveIndex::contains(const Triple& triple, Year year) const {
    const auto it = intervals_.find(triple);
    if (it == intervals_.end()) return false;
    for (const auto& iv : it->second)
        if (iv.covers(year)) return true;
    return false;
}

std::vector<Year> eligible_negative_years(const Quadruple& positive, const TimeRange& range,
                                          const PositiveIndex& positives) {
    const auto& iv = positive.interval;
    std::vector<Year> years;
    for (Year t = range.t_min; t <= range.t_max; ++t) {
        bool ok = false;
        switch (iv.category()) {
            case IntervalCategory::right_open:
                ok = t < *iv.start();
                break;
            case IntervalCategory::left_open:
                ok = t > *iv.end();
                break;
            case IntervalCategory::closed:
                ok = t < *iv.start() || t > *iv.end();
                break;
        }
        if (ok && !positives.contains(positive.triple(), t)) years.push_back(t);
    }
    return years;
}

NegativeSet sample_time_corrupted(const Quadruple& positive, std::span<const Year> eligible, std::size_t n,
                                  Rng& rng) {
    if (n == 0) throw ConfigError("number of negatives must be >= 1");
    if (eligible.empty()) {
        const auto& iv = positive.interval;
        throw SamplingError("no time-corrupted negative exists for " + std::string(to_string(iv.category())) +
                            " interval [" + (iv.start() ? std::to_string(*iv.start()) : "-") + ", " +
                            (iv.end() ? std::to_string(*iv.end()) : "-") + "]");
    }
    NegativeSet out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({positive.triple(), eligible[rng.below(eligible.size())]});
    return out;
}

NegativeSet sample_time_corrupted(const Quadruple& positive, const TimeRange& range,
                                  const PositiveIndex& positives, std::size_t n, Rng& rng) {
    if (n == 0) throw ConfigError("number of negatives must be >= 1");
    const auto years = eligible_negative_years(positive, range, positives);
    try {
        return sample_time_corrupted(positive, years, n, rng);
    } catch (const SamplingError& e) {
        throw SamplingError(std::string(e.what()) + " within range [" + std::to_string(range.t_min) + ", " +
                            std::to_string(range.t_max) + "]");
    }
}

NegativeSet sample_entity_corrupted(const Triple& triple, Year year, std::size_t entity_count,
                                    const PositiveIndex& positives, std::size_t n, Rng& rng,
                                    std::size_t max_attempts) {
    if (n == 0) throw ConfigError("number of negatives must be >= 1");
    if (entity_count == 0) throw SamplingError("no entities to corrupt with");
    if (max_attempts == 0) max_attempts = 64 * n + 256;
    NegativeSet out;
    out.reserve(n);
    std::size_t attempts = 0;
    while (out.size() < n) {
        if (attempts++ == max_attempts)
            throw SamplingError("entity-corrupted sampling gave up after " + std::to_string(max_attempts) +
                                " draws with " + std::to_string(out.size()) + "/" + std::to_string(n) +
                                " negatives");
        Triple t = triple;
        const auto e = static_cast<EntityId>(rng.below(entity_count));
        if (rng.coin())
            t.subject = e;
        else
            t.object = e;
        if (positives.contains(t, year)) continue;
        out.push_back({t, year});
    }
    return out;
}

}  // namespace temt
