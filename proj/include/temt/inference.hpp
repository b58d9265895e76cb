#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "temt/dataset.hpp"
#include "temt/intervals.hpp"
#include "temt/scorer.hpp"
#include "temt/text_encoding.hpp"

namespace temt {

struct YearDistribution {
    TimeRange range;
    std::vector<double> prob;  // prob[i] is year range.t_min + i

    Year year(std::size_t i) const noexcept { return range.t_min + static_cast<Year>(i); }
};

std::vector<double> softmax(std::span<const double> scores);

// Softmax of the scores of every year in `range` for one triple embedding.
YearDistribution year_distribution(std::span<const double> text, const ScorerParams& params, const TimeRange& range);

struct PredictedInterval {
    Interval interval;
    double cum_prob = 0.0;
};

// Up to k disjoint intervals. Each starts at the most probable unused year
// (earlier year on ties) and absorbs the more probable adjacent unused year
// (right on ties) until its mass reaches theta or it cannot grow.
std::vector<PredictedInterval> greedy_coalesce(const YearDistribution& dist, std::size_t k, double theta);

struct MetricRow {
    std::string metric;
    std::size_t k = 0;
    double value = 0.0;
};

// Mean over facts of the best score among each fact's top-k predictions,
// for gIOU, aeIOU and gaeIOU at every requested k.
std::vector<MetricRow> evaluate(std::span<const Interval> gold,
                                std::span<const std::vector<PredictedInterval>> predictions,
                                std::span<const std::size_t> ks);

struct FactPrediction {
    std::size_t fact_id = 0;
    std::vector<PredictedInterval> intervals;
};

// Predicts intervals for every fact, encoding its sentence with `encoder`.
std::vector<FactPrediction> predict(std::span<const Quadruple> facts, const Dataset& dataset,
                                    const TextEncoder& encoder, Variant variant, const ScorerParams& params,
                                    const TimeRange& range, std::size_t k, double theta);

// TSV `fact_id rank start end cum_prob`, rank starting at 1.
void write_predictions(const std::filesystem::path& file, std::span<const FactPrediction> predictions);
std::vector<FactPrediction> read_predictions(const std::filesystem::path& file);

// TSV `metric k value`.
void write_metric_report(const std::filesystem::path& file, std::span<const MetricRow> rows);
std::string format_metric_table(std::span<const MetricRow> rows);

}  // namespace temt
