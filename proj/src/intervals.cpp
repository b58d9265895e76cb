#include "temt/intervals.hpp"

#include <algorithm>

namespace temt {

int interval_length(const Interval& i) noexcept { return i.end < i.start ? 0 : i.end - i.start + 1; }

std::pair<Interval, Interval> canonical_order(const Interval& a, const Interval& b) noexcept {
    if (b.start < a.start || (b.start == a.start && b.end < a.end)) return {b, a};
    return {a, b};
}

Interval hull(const Interval& a, const Interval& b) noexcept {
    return {std::min(a.start, b.start), std::max(a.end, b.end)};
}

Interval overlap(const Interval& a, const Interval& b) noexcept {
    return {std::max(a.start, b.start), std::min(a.end, b.end)};
}

Interval gap(const Interval& a, const Interval& b) noexcept {
    const auto [first, second] = canonical_order(a, b);
    if (interval_length(overlap(first, second)) > 0) return {second.start, second.start - 1};
    return {first.end, second.start};
}

double iou(const Interval& p, const Interval& g) noexcept {
    const double ov = interval_length(overlap(p, g));
    return ov / (interval_length(p) + interval_length(g) - ov);
}

double giou(const Interval& p, const Interval& g) noexcept {
    return iou(p, g) - static_cast<double>(interval_length(gap(p, g))) / interval_length(hull(p, g));
}

double aeiou(const Interval& p, const Interval& g) noexcept {
    const int ov = interval_length(overlap(p, g));
    const double h = interval_length(hull(p, g));
    return ov > 0 ? ov / h : 1.0 / h;
}

double gaeiou(const Interval& p, const Interval& g) noexcept {
    const int ov = interval_length(overlap(p, g));
    const double h = interval_length(hull(p, g));
    if (ov > 0) return ov / h;
    return 1.0 / (interval_length(gap(p, g)) * h);
}

}  // namespace temt
