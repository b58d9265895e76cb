// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "classification_data.hpp"
#include "gradient_oracle.hpp"
#include "split_checks.hpp"
#include "synthetic.hpp"
#include "temt/error.hpp"
#include "temt/inductive_split.hpp"
#include "temt/inference.hpp"
#include "temt/intervals.hpp"
#include "temt/sampling.hpp"
#include "temt/scorer.hpp"
#include "temt/text_encoding.hpp"
#include "temt/time_encoding.hpp"
#include "temt/trainer.hpp"
#include "temt/triple_classification.hpp"

using namespace temt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------- metrics

Outcome metric_oracles() {
    struct Case {
        Interval p, g;
        double giou, aeiou, gaeiou;
    };
    const Case cases[] = {
        {{2002, 2006}, {2004, 2008}, 3.0 / 7, 3.0 / 7, 3.0 / 7},
        {{2001, 2003}, {2005, 2008}, -3.0 / 8, 1.0 / 8, 1.0 / 24},
        {{2003, 2007}, {2003, 2007}, 1.0, 1.0, 1.0},
        {{2001, 2004}, {2005, 2008}, -2.0 / 8, 1.0 / 8, 1.0 / 16},
    };
    if (hull({2002, 2006}, {2004, 2008}) != Interval{2002, 2008}) return fail("hull of overlapping pair");
    if (overlap({2002, 2006}, {2004, 2008}) != Interval{2004, 2006}) return fail("overlap of overlapping pair");
    if (hull({2001, 2003}, {2005, 2008}) != Interval{2001, 2008}) return fail("hull of disjoint pair");
    if (gap({2001, 2003}, {2005, 2008}) != Interval{2003, 2005}) return fail("gap of disjoint pair");
    if (interval_length(gap({2003, 2007}, {2003, 2007})) != 0) return fail("gap of identical pair");
    if (overlap({2003, 2007}, {2003, 2007}) != Interval{2003, 2007}) return fail("overlap of identical pair");
    double worst = 0.0;
    for (const auto& c : cases) {
        worst = std::max({worst, std::abs(giou(c.p, c.g) - c.giou), std::abs(aeiou(c.p, c.g) - c.aeiou),
                          std::abs(gaeiou(c.p, c.g) - c.gaeiou)});
        // symmetric usage
        worst = std::max({worst, std::abs(giou(c.g, c.p) - c.giou), std::abs(gaeiou(c.g, c.p) - c.gaeiou)});
    }
    if (worst > 1e-12) return fail("max abs error " + fmt("%.3g", worst));
    return {true, "4 pairs, max abs error " + fmt("%.3g", worst)};
}

// ---------------------------------------------------------------- gradient

Outcome gradient_check() {
    Rng rng(2024);
    double worst = 0.0;
    std::size_t configs = 0, attempts = 0, active = 0;
    while (configs < 100) {
        if (++attempts > 100000) return fail("could not sample configurations away from kinks");
        const std::size_t d = 2 + rng.below(10), dt = 2 * (1 + rng.below(4)), hidden = 1 + rng.below(8);
        const std::size_t n_neg = 1 + rng.below(6);
        const double margin = rng.uniform(0.1, 3.0);
        auto params = ScorerParams::initialize(d, dt, hidden, rng.next());
        for (auto& b : params.b1) b = rng.uniform(-0.5, 0.5);
        params.b2 = rng.uniform(-0.5, 0.5);
        std::vector<std::vector<double>> store;
        const auto vec = [&](std::size_t n) {
            std::vector<double> v(n);
            for (auto& x : v) x = rng.normal();
            return v;
        };
        for (std::size_t i = 0; i < 2 * (n_neg + 1); ++i) store.push_back(vec(i % 2 ? dt : d));
        const ScoringInput pos{store[0], store[1]};
        std::vector<ScoringInput> negs;
        for (std::size_t i = 1; i <= n_neg; ++i) negs.push_back({store[2 * i], store[2 * i + 1]});
        if (!testing::away_from_kinks(pos, negs, params, margin, 1e-3)) continue;

        const auto analytic = testing::flatten(margin_loss_gradient(pos, negs, params, margin).grad);
        const auto numeric = testing::numeric_gradient(pos, negs, params, margin, 1e-5);
        double diff = 0, na = 0, nn = 0;
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
            na += analytic[i] * analytic[i];
            nn += numeric[i] * numeric[i];
        }
        const double scale = std::max(std::sqrt(std::max(na, nn)), 1e-12);
        const double rel = na == 0.0 && nn == 0.0 ? 0.0 : std::sqrt(diff) / scale;
        worst = std::max(worst, rel);
        active += na > 0.0;
        ++configs;
    }
    if (active < 50) return fail("only " + std::to_string(active) + " configurations had an active hinge");
    if (worst >= 1e-4) return fail("max relative error " + fmt("%.3g", worst));
    return {true, "100 configs (" + std::to_string(active) + " with active hinges), max relative error " +
                      fmt("%.3g", worst)};
}

// ---------------------------------------------------------------- time encoding

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Outcome time_encoder() {
    constexpr std::size_t dim = 64;
    // <e(t), e(t+k)> = sum_i cos(k / 10000^(i/d'))
    const auto expected = [&](int k) {
        double s = 0;
        for (std::size_t i = 0; i < dim / 2; ++i)
            s += std::cos(k / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(dim)));
        return s;
    };
    Rng rng(5);
    double worst = 0;
    for (int n = 0; n < 50; ++n) {
        const int t = static_cast<int>(rng.below(600)), k = static_cast<int>(rng.below(200));
        const double v = dot(encode_time(1500 + t, 1500, dim), encode_time(1500 + t + k, 1500, dim));
        worst = std::max(worst, std::abs(v - expected(k)));
    }
    if (worst > 1e-9) return fail("translation invariance error " + fmt("%.3g", worst));

    const TimeRange range{1400, 1999};
    const auto table = time_table(range, dim);
    double min_dist = INFINITY;
    for (int i = 0; i < range.size(); ++i)
        for (int j = i + 1; j < range.size(); ++j) {
            double s = 0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double x = table[i * dim + c] - table[j * dim + c];
                s += x * x;
            }
            min_dist = std::min(min_dist, std::sqrt(s));
        }
    if (!(min_dist > 1e-6)) return fail("two years share an encoding, min distance " + fmt("%.3g", min_dist));

    const auto e0 = encode_time(0, 0, dim);
    double prev = INFINITY;
    for (int k = 0; k <= 10; ++k) {
        const double v = dot(e0, encode_time(k, 0, dim));
        if (!(v < prev)) return fail("inner product does not decrease at offset " + std::to_string(k));
        prev = v;
    }
    return {true, "invariance error " + fmt("%.2g", worst) + ", 600 years min distance " + fmt("%.3g", min_dist) +
                      ", decay monotone 0..10"};
}

// ---------------------------------------------------------------- samplers

// D+ rebuilt from the raw quadruples: every year of a closed interval and the
// known endpoint of an open one.
struct PositiveOracle {
    std::set<std::tuple<int, int, int, int>> years;
    explicit PositiveOracle(const std::vector<Quadruple>& train) {
        for (const auto& q : train) {
            const auto& iv = q.interval;
            const int lo = iv.start() ? *iv.start() : *iv.end();
            const int hi = iv.end() ? *iv.end() : *iv.start();
            for (int y = lo; y <= hi; ++y) years.insert({q.subject, q.relation, q.object, y});
        }
    }
    bool contains(const Triple& t, int y) const { return years.count({t.subject, t.relation, t.object, y}) > 0; }
};

bool category_rule(const TimeInterval& iv, Year y) {
    if (iv.start() && iv.end()) return y < *iv.start() || y > *iv.end();
    if (iv.start()) return y < *iv.start();
    return y > *iv.end();
}

Outcome samplers() {
    auto ds = testing::random_dataset(1000, 3, 6000, 11);
    // a second, later interval for some triples so D+ spans several intervals
    for (std::size_t i = 0; i < 600; i += 2) {
        const auto& q = ds.train[i];
        if (!q.interval.is_closed() || *q.interval.end() > 1985) continue;
        ds.train.push_back({q.subject, q.relation, q.object,
                            TimeInterval::closed(*q.interval.end() + 5, *q.interval.end() + 12)});
    }
    ds.range = compute_time_range(ds.train);
    const PositiveOracle oracle(ds.train);
    const PositiveIndex index(ds.train);
    Rng rng(99);

    std::size_t time_draws = 0, time_bad_dplus = 0, time_bad_rule = 0, empty = 0, out_of_range = 0;
    for (std::size_t i = 0; time_draws < 100000; i = (i + 1) % ds.train.size()) {
        const auto& q = ds.train[i];
        try {
            for (const auto& n : sample_time_corrupted(q, ds.range, index, 100, rng)) {
                ++time_draws;
                time_bad_dplus += oracle.contains(n.triple, n.year);
                time_bad_rule += !category_rule(q.interval, n.year) || n.triple != q.triple();
                out_of_range += !ds.range.contains(n.year);
            }
        } catch (const SamplingError&) {
            ++empty;
            // must really have no eligible year
            for (Year y = ds.range.t_min; y <= ds.range.t_max; ++y)
                if (category_rule(q.interval, y) && !oracle.contains(q.triple(), y))
                    return fail("SamplingError although year " + std::to_string(y) + " is eligible");
        }
    }

    std::size_t ent_draws = 0, ent_bad = 0, ent_shape = 0;
    for (std::size_t i = 0; ent_draws < 100000; i = (i + 1) % ds.train.size()) {
        const auto& q = ds.train[i];
        const Year y = q.interval.start() ? *q.interval.start() : *q.interval.end();
        for (const auto& n : sample_entity_corrupted(q.triple(), y, ds.entities.size(), index, 100, rng)) {
            ++ent_draws;
            ent_bad += oracle.contains(n.triple, n.year);
            const bool one_side = (n.triple.subject == q.subject) != (n.triple.object == q.object) ||
                                  n.triple == q.triple();
            ent_shape += n.year != y || n.triple.relation != q.relation || !one_side;
        }
    }
    if (time_bad_dplus || time_bad_rule || out_of_range)
        return fail("time-corrupted: " + std::to_string(time_bad_dplus) + " in D+, " + std::to_string(time_bad_rule) +
                    " break the category rule, " + std::to_string(out_of_range) + " out of range");
    if (ent_bad || ent_shape)
        return fail("entity-corrupted: " + std::to_string(ent_bad) + " in D+, " + std::to_string(ent_shape) +
                    " malformed");
    return {true, std::to_string(time_draws) + " time + " + std::to_string(ent_draws) +
                      " entity draws, 0 in D+, 0 rule violations (" + std::to_string(empty) +
                      " facts with no eligible year)"};
}

// ---------------------------------------------------------------- greedy coalescing

Outcome greedy_contract() {
    Rng rng(31);
    std::size_t total_intervals = 0;
    for (int n = 0; n < 1000; ++n) {
        const int T = 1 + static_cast<int>(rng.below(150));
        YearDistribution dist{{1900, 1900 + T - 1}, std::vector<double>(T)};
        const double temperature = rng.uniform(0.1, 5.0);
        const bool sparse = rng.below(4) == 0;
        double total = 0;
        for (auto& p : dist.prob) total += p = sparse && rng.below(3) == 0 ? 0.0 : std::exp(temperature * rng.normal());
        if (total == 0) dist.prob[0] = total = 1;
        for (auto& p : dist.prob) p /= total;
        const std::size_t k = 1 + rng.below(10);
        const double theta = rng.below(10) == 0 ? 1.0 : rng.uniform(0.01, 1.0);

        const auto out = greedy_coalesce(dist, k, theta);
        if (out.empty() || out.size() > k) return fail("case " + std::to_string(n) + ": returned count " + std::to_string(out.size()));
        total_intervals += out.size();
        std::vector<int> owner(T, -1);
        for (std::size_t r = 0; r < out.size(); ++r) {
            const auto iv = out[r].interval;
            if (iv.start > iv.end || iv.start < dist.range.t_min || iv.end > dist.range.t_max)
                return fail("case " + std::to_string(n) + ": interval out of range");
            double mass = 0;
            for (Year y = iv.start; y <= iv.end; ++y) {
                if (owner[y - 1900] != -1) return fail("case " + std::to_string(n) + ": intervals overlap");
                owner[y - 1900] = static_cast<int>(r);
                mass += dist.prob[y - 1900];
            }
            if (std::abs(mass - out[r].cum_prob) > 1e-9) return fail("case " + std::to_string(n) + ": cum_prob mismatch");
        }
        for (std::size_t r = 0; r < out.size(); ++r) {
            if (out[r].cum_prob >= theta - 1e-12) continue;
            // below threshold: both neighbours must be outside the range or taken by an earlier interval
            for (const Year y : {out[r].interval.start - 1, out[r].interval.end + 1}) {
                if (y < 1900 || y >= 1900 + T) continue;
                const int o = owner[y - 1900];
                if (o == -1 || o >= static_cast<int>(r))
                    return fail("case " + std::to_string(n) + ": interval " + std::to_string(r) +
                                " stopped below theta with free neighbour " + std::to_string(y));
            }
        }
        if (out.size() < k && std::count(owner.begin(), owner.end(), -1) != 0)
            return fail("case " + std::to_string(n) + ": fewer than k intervals with years left");
    }

    std::size_t uniform_cases = 0;
    for (int T : {1, 2, 7, 10, 20, 37, 100, 101}) {
        for (double theta : {0.05, 0.3, 0.5, 0.65, 0.9, 1.0}) {
            YearDistribution dist{{1950, 1950 + T - 1}, std::vector<double>(T, 1.0 / T)};
            const auto out = greedy_coalesce(dist, 1, theta);
            const auto want = static_cast<int>(std::ceil(theta * T - 1e-9));
            if (out.size() != 1 || interval_length(out[0].interval) != want)
                return fail("uniform T=" + std::to_string(T) + " theta=" + fmt("%g", theta) + ": length " +
                            std::to_string(out.empty() ? 0 : interval_length(out[0].interval)) + ", want " +
                            std::to_string(want));
            ++uniform_cases;
        }
    }
    return {true, "1000 distributions (" + std::to_string(total_intervals) + " intervals), " +
                      std::to_string(uniform_cases) + " uniform cases of length ceil(theta*T)"};
}

// ---------------------------------------------------------------- inductive split

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        files[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return files;
}

Outcome inductive_split() {
    const auto ds = testing::random_dataset(500, 4, 3000, 17);
    const SplitConfig config{25, 25, 100, 4242};
    const fs::path root = fs::temp_directory_path() / "temt_acceptance_split";
    fs::remove_all(root);
    std::map<std::string, std::string> outputs[2];
    InductiveSplit split;
    for (int run = 0; run < 2; ++run) {
        split = make_inductive_split(ds, config);
        const auto dir = root / std::to_string(run);
        write_dataset(split.dataset, dir);
        write_split_report(split, dir / "split_report.txt");
        outputs[run] = read_dir(dir);
    }
    fs::remove_all(root);
    if (outputs[0] != outputs[1]) return fail("same seed produced different files");

    std::set<RelationId> relations;
    for (const auto& r : ds.relations) relations.insert(r.id);
    const auto v = testing::check_inductive_split(split.dataset, config.min_relation_edges, relations);
    if (split.report.valid_removed.size() != 25 || split.report.test_removed.size() != 25)
        return fail("removal targets not met");
    if (v.isolated_train_nodes || v.thin_relations || v.eval_triples_without_unseen_entity || v.eval_triples == 0)
        return fail(std::to_string(v.isolated_train_nodes) + " isolated nodes, " + std::to_string(v.thin_relations) +
                    " thin relations, " + std::to_string(v.eval_triples_without_unseen_entity) + "/" +
                    std::to_string(v.eval_triples) + " eval triples without an unseen entity");
    // every entity that still has a fact in train must have one there; removed
    // entities must be gone
    std::set<EntityId> train_entities;
    for (const auto& q : split.dataset.train) train_entities.insert(q.subject), train_entities.insert(q.object);
    for (const auto* removed : {&split.report.valid_removed, &split.report.test_removed})
        for (EntityId e : *removed)
            if (train_entities.count(e)) return fail("removed entity still in train");
    return {true, "50 entities removed, " + std::to_string(v.eval_triples) +
                      " eval triples all unseen, byte-identical rerun (" + std::to_string(outputs[0].size()) +
                      " files)"};
}

// ---------------------------------------------------------------- learnability

Outcome learnability() {
    const auto g = testing::planted_era_graph(20, 0.2, 7);
    const auto& ds = g.dataset;
    HashingEncoder enc(768, 1);
    TrainConfig config;
    config.epochs = 20;
    const auto result = train(ds, enc, Variant::names, config);
    if (result.report.epoch_loss.back() >= result.report.epoch_loss.front())
        return fail("training loss did not decrease");

    const auto facts = filter_evaluable(ds.test);
    std::size_t hits = 0;
    for (const auto& q : facts) {
        const auto text = enc.encode(build_sentence(q, ds, Variant::names));
        const auto dist = year_distribution(text, result.params, ds.range);
        std::vector<std::size_t> order(dist.prob.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::partial_sort(order.begin(), order.begin() + 10, order.end(),
                          [&](std::size_t a, std::size_t b) { return dist.prob[a] > dist.prob[b]; });
        for (std::size_t i = 0; i < 10; ++i)
            if (q.interval.covers(dist.year(order[i]))) {
                ++hits;
                break;
            }
    }
    const double top10 = static_cast<double>(hits) / static_cast<double>(facts.size());

    const auto preds = predict(facts, ds, enc, Variant::names, result.params, ds.range, 1, 0.65);
    std::vector<Interval> gold;
    std::vector<std::vector<PredictedInterval>> intervals;
    for (std::size_t i = 0; i < facts.size(); ++i) {
        gold.push_back({*facts[i].interval.start(), *facts[i].interval.end()});
        intervals.push_back(preds[i].intervals);
    }
    const std::size_t ks[] = {1};
    double gae1 = -1;
    for (const auto& row : evaluate(gold, intervals, ks))
        if (row.metric == "gaeIOU") gae1 = row.value;
    const std::string detail = std::to_string(facts.size()) + " held-out facts, top-10 hit rate " +
                               fmt("%.3f", top10) + " (>= 0.80), gaeIOU@1 " + fmt("%.3f", gae1) + " (>= 0.30)";
    if (top10 < 0.80 || gae1 < 0.30) return fail(detail);
    return {true, detail};
}

// ---------------------------------------------------------------- triple classification

Outcome triple_classification_sanity() {
    const auto u = testing::planted_direction(32, 8);
    Rng rng(12);
    const auto train = testing::planted_set(u, 1000, 1.0, 0.5, rng);
    const auto test = testing::planted_set(u, 2000, 1.0, 0.5, rng);
    ClassifierConfig config;
    config.max_iter = 200;
    const double planted = classify_embeddings(train, test, config, 3).accuracy;

    // labels drawn independently of the features, balanced
    auto shuffled = [&](LabeledSet s) {
        rng.shuffle(std::span<int>(s.y));
        return s;
    };
    const double noise = classify_embeddings(shuffled(train), shuffled(test), config, 3).accuracy;
    const std::string detail = "planted " + fmt("%.4f", planted) + " (>= 0.95), label-shuffled " +
                               fmt("%.4f", noise) + " (in [0.45, 0.55])";
    if (planted < 0.95 || noise < 0.45 || noise > 0.55) return fail(detail);
    return {true, detail};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"metric-oracles", metric_oracles},
        {"gradient-check", gradient_check},
        {"time-encoder-properties", time_encoder},
        {"sampler-soundness", samplers},
        {"greedy-coalescing-contract", greedy_contract},
        {"inductive-split-invariants", inductive_split},
        {"synthetic-learnability", learnability},
        {"triple-classification-sanity", triple_classification_sanity},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s  %-30s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
    return failed ? 1 : 0;
}
