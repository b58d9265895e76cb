#pragma once

#include "temt/dataset.hpp"

namespace temt {

// Closed year interval [start, end]. May be inverted (end < start), in which
// case it is empty and has length 0.
struct Interval {
    Year start = 0;
    Year end = 0;

    friend bool operator==(const Interval&, const Interval&) = default;
};

// end - start + 1, or 0 for an inverted interval.
int interval_length(const Interval& i) noexcept;

// The pair ordered by start year, then end year.
std::pair<Interval, Interval> canonical_order(const Interval& a, const Interval& b) noexcept;

Interval hull(const Interval& a, const Interval& b) noexcept;
Interval overlap(const Interval& a, const Interval& b) noexcept;
// [earlier.end, later.start] for disjoint intervals. Overlapping intervals have
// no gap; an empty interval is returned.
Interval gap(const Interval& a, const Interval& b) noexcept;

double iou(const Interval& predicted, const Interval& gold) noexcept;
double giou(const Interval& predicted, const Interval& gold) noexcept;
double aeiou(const Interval& predicted, const Interval& gold) noexcept;
double gaeiou(const Interval& predicted, const Interval& gold) noexcept;

}  // namespace temt
