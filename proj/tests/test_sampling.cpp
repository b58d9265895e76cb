#include <map>
#include <set>

#include "doctest.h"
#include "synthetic.hpp"
#include "temt/error.hpp"
#include "temt/sampling.hpp"

using namespace temt;

TEST_SUITE("scorer") {
    TEST_CASE("eligible years follow the category rule") {
        const TimeRange range{2000, 2010};
        const PositiveIndex none(std::span<const Quadruple>{});
        const Quadruple closed{0, 0, 1, TimeInterval::closed(2004, 2008)};
        CHECK(eligible_negative_years(closed, range, none) == std::vector<Year>{2000, 2001, 2002, 2003, 2009, 2010});
        const Quadruple right_open{0, 0, 1, TimeInterval::make(2005, std::nullopt)};
        CHECK(eligible_negative_years(right_open, range, none) == std::vector<Year>{2000, 2001, 2002, 2003, 2004});
        const Quadruple left_open{0, 0, 1, TimeInterval::make(std::nullopt, 2008)};
        CHECK(eligible_negative_years(left_open, range, none) == std::vector<Year>{2009, 2010});
    }

    TEST_CASE("years covered by another fact of the same triple are excluded") {
        const std::vector<Quadruple> train = {{0, 0, 1, TimeInterval::closed(2004, 2008)},
                                              {0, 0, 1, TimeInterval::closed(2001, 2002)}};
        const PositiveIndex pos(train);
        CHECK(eligible_negative_years(train[0], {2000, 2010}, pos) == std::vector<Year>{2000, 2003, 2009, 2010});
    }

    TEST_CASE("interval spanning the whole range has no time negatives") {
        const TimeRange range{2000, 2010};
        const Quadruple q{0, 0, 1, TimeInterval::closed(2000, 2010)};
        const PositiveIndex pos(std::span<const Quadruple>(&q, 1));
        Rng rng(1);
        CHECK_THROWS_AS(sample_time_corrupted(q, range, pos, 4, rng), SamplingError);
    }

    TEST_CASE("time-corrupted draws are uniform over eligible years") {
        const TimeRange range{2000, 2010};
        const Quadruple q{0, 0, 1, TimeInterval::closed(2004, 2008)};
        const PositiveIndex pos(std::span<const Quadruple>(&q, 1));
        Rng rng(2);
        const auto negs = sample_time_corrupted(q, range, pos, 60000, rng);
        std::map<Year, int> counts;
        for (const auto& n : negs) {
            CHECK(n.triple == q.triple());
            ++counts[n.year];
        }
        REQUIRE(counts.size() == 6);
        for (const auto& [y, c] : counts) CHECK(c == doctest::Approx(10000).epsilon(0.05));
    }

    TEST_CASE("entity corruption exhausts on a saturated graph") {
        // every (s, r, o) over 3 entities is a fact at 2000
        auto ds = testing::empty_dataset(3, 1);
        for (EntityId s = 0; s < 3; ++s)
            for (EntityId o = 0; o < 3; ++o) ds.train.push_back({s, 0, o, TimeInterval::closed(2000, 2000)});
        const PositiveIndex pos(ds.train);
        Rng rng(3);
        CHECK_THROWS_AS(sample_entity_corrupted({0, 0, 1}, 2000, 3, pos, 1, rng), SamplingError);
    }

    TEST_CASE("entity corruption avoids D+ and changes one side") {
        const auto ds = testing::random_dataset(10000, 5, 30000, 4);
        const PositiveIndex pos(ds.train);
        Rng rng(5);
        const auto& q = ds.train[17];
        const auto negs = sample_entity_corrupted(q.triple(), *q.interval.start(), ds.entities.size(), pos, 128, rng);
        CHECK(negs.size() == 128);
        std::size_t subject_side = 0;
        for (const auto& n : negs) {
            CHECK(!pos.contains(n.triple, n.year));
            CHECK(n.triple.relation == q.relation);
            CHECK((n.triple.subject == q.subject || n.triple.object == q.object));
            subject_side += n.triple.subject != q.subject;
        }
        CHECK(subject_side > 32);
        CHECK(subject_side < 96);
    }

    TEST_CASE("n must be positive") {
        const Quadruple q{0, 0, 1, TimeInterval::closed(2004, 2008)};
        const PositiveIndex pos(std::span<const Quadruple>(&q, 1));
        Rng rng(1);
        CHECK_THROWS_AS(sample_time_corrupted(q, {2000, 2010}, pos, 0, rng), ConfigError);
        CHECK_THROWS_AS(sample_entity_corrupted(q.triple(), 2004, 10, pos, 0, rng), ConfigError);
    }
}
