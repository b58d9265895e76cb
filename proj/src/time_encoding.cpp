#include "temt/time_encoding.hpp"

#include <cmath>

#include "temt/error.hpp"

namespace temt {

std::vector<double> encode_time(Year t, Year t_min, std::size_t dim) {
    if (dim == 0 || dim % 2 != 0) throw ConfigError("time embedding dimension must be even and > 0");
    const double pos = static_cast<double>(t) - static_cast<double>(t_min);
    std::vector<double> e(dim);
    for (std::size_t i = 0; 2 * i < dim; ++i) {
        const double angle = pos / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(dim));
        e[2 * i] = std::sin(angle);
        e[2 * i + 1] = std::cos(angle);
    }
    return e;
}

std::vector<double> time_table(const TimeRange& range, std::size_t dim) {
    std::vector<double> table;
    table.reserve(static_cast<std::size_t>(range.size()) * dim);
    for (Year t = range.t_min; t <= range.t_max; ++t) {
        const auto e = encode_time(t, range.t_min, dim);
        table.insert(table.end(), e.begin(), e.end());
    }
    return table;
}

}  // namespace temt
