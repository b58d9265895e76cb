#pragma once

#include <cstddef>
#include <vector>

#include "temt/dataset.hpp"

namespace temt {

// Sinusoidal embedding of a year's offset from the range origin:
//   [2i]   = sin((t - t_min) / 10000^(i/d'))
//   [2i+1] = cos((t - t_min) / 10000^(i/d'))
// `dim` must be even.
std::vector<double> encode_time(Year t, Year t_min, std::size_t dim);

inline std::vector<double> encode_time(Year t, const TimeRange& range, std::size_t dim) {
    return encode_time(t, range.t_min, dim);
}

// Row-major (range.size() x dim) table of every year's embedding.
std::vector<double> time_table(const TimeRange& range, std::size_t dim);

}  // namespace temt
