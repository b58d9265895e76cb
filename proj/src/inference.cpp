#include "temt/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "temt/error.hpp"
#include "temt/time_encoding.hpp"

namespace temt {

std::vector<double> softmax(std::span<const double> scores) {
    std::vector<double> p(scores.begin(), scores.end());
    if (p.empty()) return p;
    const double mx = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (auto& x : p) sum += (x = std::exp(x - mx));
    for (auto& x : p) x /= sum;
    return p;
}

YearDistribution year_distribution(std::span<const double> text, const ScorerParams& params, const TimeRange& range) {
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(range.size()));
    for (Year t = range.t_min; t <= range.t_max; ++t)
        scores.push_back(score(text, encode_time(t, range, params.time_dim), params));
    return {range, softmax(scores)};
}

std::vector<PredictedInterval> greedy_coalesce(const YearDistribution& dist, std::size_t k, double theta) {
    if (k == 0) throw ConfigError("k must be >= 1");
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("coalescing threshold must be in (0, 1]");
    // Absorbs rounding in sums such as 0.1 * 10 against theta = 1.
    constexpr double slack = 1e-12;
    const auto& p = dist.prob;
    const std::size_t n = p.size();
    std::vector<bool> used(n, false);
    std::vector<PredictedInterval> out;
    while (out.size() < k) {
        std::size_t seed = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!used[i] && (seed == n || p[i] > p[seed])) seed = i;
        if (seed == n) break;
        std::size_t lo = seed, hi = seed;
        used[seed] = true;
        double mass = p[seed];
        while (mass < theta - slack) {
            const bool left = lo > 0 && !used[lo - 1];
            const bool right = hi + 1 < n && !used[hi + 1];
            if (!left && !right) break;
            if (right && (!left || p[hi + 1] >= p[lo - 1])) {
                used[++hi] = true;
                mass += p[hi];
            } else {
                used[--lo] = true;
                mass += p[lo];
            }
        }
        out.push_back({{dist.year(lo), dist.year(hi)}, mass});
    }
    return out;
}

std::vector<MetricRow> evaluate(std::span<const Interval> gold, std::span<const std::vector<PredictedInterval>> preds,
                                std::span<const std::size_t> ks) {
    if (gold.empty()) throw Error("cannot evaluate an empty test set");
    if (gold.size() != preds.size()) throw ShapeError("gold and prediction counts differ");
    using Metric = double (*)(const Interval&, const Interval&) noexcept;
    const std::pair<const char*, Metric> metrics[] = {{"gIOU", &giou}, {"aeIOU", &aeiou}, {"gaeIOU", &gaeiou}};
    std::vector<MetricRow> rows;
    for (std::size_t k : ks) {
        if (k == 0) throw ConfigError("k must be >= 1");
        for (const auto& [name, fn] : metrics) {
            double total = 0.0;
            for (std::size_t i = 0; i < gold.size(); ++i) {
                double best = -std::numeric_limits<double>::infinity();
                const std::size_t m = std::min(k, preds[i].size());
                for (std::size_t r = 0; r < m; ++r) best = std::max(best, fn(preds[i][r].interval, gold[i]));
                if (m == 0) throw Error("fact " + std::to_string(i) + " has no predicted interval");
                total += best;
            }
            rows.push_back({name, k, total / static_cast<double>(gold.size())});
        }
    }
    return rows;
}

std::vector<FactPrediction> predict(std::span<const Quadruple> facts, const Dataset& dataset,
                                    const TextEncoder& encoder, Variant variant, const ScorerParams& params,
                                    const TimeRange& range, std::size_t k, double theta) {
    std::vector<FactPrediction> out;
    out.reserve(facts.size());
    for (std::size_t i = 0; i < facts.size(); ++i) {
        const auto text = encoder.encode(build_sentence(facts[i], dataset, variant));
        out.push_back({i, greedy_coalesce(year_distribution(text, params, range), k, theta)});
    }
    return out;
}

void write_predictions(const std::filesystem::path& file, std::span<const FactPrediction> predictions) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    char buf[64];
    for (const auto& fp : predictions) {
        for (std::size_t r = 0; r < fp.intervals.size(); ++r) {
            const auto& pi = fp.intervals[r];
            std::snprintf(buf, sizeof buf, "%.17g", pi.cum_prob);
            out << fp.fact_id << '\t' << (r + 1) << '\t' << pi.interval.start << '\t' << pi.interval.end << '\t' << buf
                << '\n';
        }
    }
}

std::vector<FactPrediction> read_predictions(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open predictions " + file.string() + " (run `predict` first)");
    std::map<std::size_t, std::vector<std::pair<std::size_t, PredictedInterval>>> by_fact;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t fact = 0, rank = 0;
        PredictedInterval pi;
        if (!(row >> fact >> rank >> pi.interval.start >> pi.interval.end >> pi.cum_prob))
            throw IngestionError(file.string(), lineno, "expected fact_id rank start end cum_prob");
        by_fact[fact].emplace_back(rank, pi);
    }
    std::vector<FactPrediction> out;
    for (auto& [fact, rows] : by_fact) {
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        FactPrediction fp{fact, {}};
        for (auto& [rank, pi] : rows) fp.intervals.push_back(pi);
        out.push_back(std::move(fp));
    }
    return out;
}

void write_metric_report(const std::filesystem::path& file, std::span<const MetricRow> rows) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    char buf[64];
    out << "metric\tk\tvalue\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10f", r.value);
        out << r.metric << '\t' << r.k << '\t' << buf << '\n';
    }
}

std::string format_metric_table(std::span<const MetricRow> rows) {
    std::ostringstream out;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-10s %10s\n", "metric", "value");
    out << buf;
    for (const auto& r : rows) {
        const std::string label = r.metric + "@" + std::to_string(r.k);
        std::snprintf(buf, sizeof buf, "%-10s %10.4f\n", label.c_str(), r.value);
        out << buf;
    }
    return out.str();
}

}  // namespace temt
