#include "temt/triple_classification.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "temt/error.hpp"
#include "temt/rng.hpp"

namespace temt {

MlpClassifier::MlpClassifier(std::size_t input_dim, const ClassifierConfig& config, std::uint64_t seed)
    : in_(input_dim), hidden_(config.hidden), config_(config), seed_(seed) {
    if (in_ == 0 || hidden_ == 0) throw ConfigError("classifier dimensions must be > 0");
    if (!(config.alpha >= 0.0) || config.batch_size == 0 || config.max_iter == 0)
        throw ConfigError("invalid classifier configuration");
    Rng rng(seed);
    const double bound1 = std::sqrt(6.0 / static_cast<double>(in_ + hidden_));
    const double bound2 = std::sqrt(2.0 / static_cast<double>(hidden_ + 1));
    w1_.resize(in_ * hidden_);
    b1_.resize(hidden_);
    w2_.resize(hidden_);
    for (auto& w : w1_) w = rng.uniform(-bound1, bound1);
    for (auto& b : b1_) b = rng.uniform(-bound1, bound1);
    for (auto& w : w2_) w = rng.uniform(-bound2, bound2);
    b2_ = rng.uniform(-bound2, bound2);
}

double MlpClassifier::predict_proba(std::span<const double> x) const {
    if (x.size() != in_) throw ShapeError("classifier input has wrong dimension");
    double z = b2_;
    for (std::size_t j = 0; j < hidden_; ++j) {
        double h = b1_[j];
        const double* row = w1_.data() + j * in_;
        for (std::size_t i = 0; i < in_; ++i) h += row[i] * x[i];
        if (h > 0.0) z += w2_[j] * h;
    }
    return 1.0 / (1.0 + std::exp(-z));
}

double MlpClassifier::accuracy(const LabeledSet& data) const {
    if (data.size() == 0) throw Error("cannot score an empty set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) correct += predict(data.x[i]) == data.y[i];
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::size_t MlpClassifier::fit(const LabeledSet& data) {
    if (data.size() == 0) throw Error("cannot fit on an empty set");
    const std::size_t n = data.size();
    const std::size_t batch = std::min(config_.batch_size, n);
    const std::size_t count = w1_.size() + b1_.size() + w2_.size() + 1;
    std::vector<double> grad(count), m(count, 0.0), v(count, 0.0);
    std::vector<double*> params;
    for (auto& w : w1_) params.push_back(&w);
    for (auto& w : b1_) params.push_back(&w);
    for (auto& w : w2_) params.push_back(&w);
    params.push_back(&b2_);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed_ ^ 0x5DEECE66DULL);
    std::vector<double> hidden(hidden_);
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t no_improve = 0, step = 0, epoch = 0;

    while (epoch < config_.max_iter) {
        ++epoch;
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < n; begin += batch) {
            const std::size_t end = std::min(n, begin + batch);
            const double bs = static_cast<double>(end - begin);
            std::fill(grad.begin(), grad.end(), 0.0);
            double* gw1 = grad.data();
            double* gb1 = gw1 + w1_.size();
            double* gw2 = gb1 + b1_.size();
            double& gb2 = grad.back();
            double batch_loss = 0.0;
            for (std::size_t s = begin; s < end; ++s) {
                const auto& x = data.x[order[s]];
                const int y = data.y[order[s]];
                double z = b2_;
                for (std::size_t j = 0; j < hidden_; ++j) {
                    double h = b1_[j];
                    const double* row = w1_.data() + j * in_;
                    for (std::size_t i = 0; i < in_; ++i) h += row[i] * x[i];
                    hidden[j] = h > 0.0 ? h : 0.0;
                    z += w2_[j] * hidden[j];
                }
                const double p = 1.0 / (1.0 + std::exp(-z));
                const double pc = std::clamp(p, 1e-15, 1.0 - 1e-15);
                batch_loss -= y ? std::log(pc) : std::log(1.0 - pc);
                const double dz = (p - y) / bs;
                gb2 += dz;
                for (std::size_t j = 0; j < hidden_; ++j) {
                    gw2[j] += dz * hidden[j];
                    if (hidden[j] <= 0.0) continue;
                    const double dh = dz * w2_[j];
                    gb1[j] += dh;
                    double* grow = gw1 + j * in_;
                    for (std::size_t i = 0; i < in_; ++i) grow[i] += dh * x[i];
                }
            }
            double sq = 0.0;
            for (double w : w1_) sq += w * w;
            for (double w : w2_) sq += w * w;
            batch_loss = batch_loss / bs + 0.5 * config_.alpha * sq / bs;
            for (std::size_t i = 0; i < w1_.size(); ++i) gw1[i] += config_.alpha * w1_[i] / bs;
            for (std::size_t j = 0; j < hidden_; ++j) gw2[j] += config_.alpha * w2_[j] / bs;

            ++step;
            const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step));
            for (std::size_t i = 0; i < count; ++i) {
                m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
                v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
                *params[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
            }
            epoch_loss += batch_loss * bs;
        }
        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) throw NumericError("classifier loss became non-finite");
        if (epoch_loss > best_loss - config_.tol) {
            if (++no_improve >= config_.n_iter_no_change) break;
        } else {
            no_improve = 0;
        }
        best_loss = std::min(best_loss, epoch_loss);
    }
    return epoch;
}

ClassificationResult classify_embeddings(const LabeledSet& train, const LabeledSet& test,
                                         const ClassifierConfig& config, std::uint64_t seed) {
    if (train.size() == 0 || test.size() == 0) throw Error("triple classification needs non-empty train and test sets");
    MlpClassifier clf(train.x.front().size(), config, seed);
    ClassificationResult r;
    r.epochs = clf.fit(train);
    r.accuracy = clf.accuracy(test);
    r.train_size = train.size();
    r.test_size = test.size();
    return r;
}

namespace {

Triple corrupt(const Triple& t, std::size_t entity_count, const std::unordered_set<Triple, TripleHash>& known,
               Rng& rng) {
    const std::size_t budget = 64 * entity_count + 256;
    for (std::size_t attempt = 0; attempt < budget; ++attempt) {
        Triple c = t;
        const auto e = static_cast<EntityId>(rng.below(entity_count));
        if (rng.coin())
            c.subject = e;
        else
            c.object = e;
        if (!known.count(c)) return c;
    }
    throw SamplingError("could not corrupt triple into a non-fact after " + std::to_string(budget) + " draws");
}

}  // namespace

ClassificationResult triple_classification(const Dataset& ds, const TextEncoder& encoder, Variant variant,
                                           const ClassifierConfig& config, std::uint64_t seed) {
    std::unordered_set<Triple, TripleHash> all, seen;
    std::set<Triple> train_triples, test_triples;
    for (const auto& q : ds.train) train_triples.insert(q.triple());
    for (const auto& q : ds.valid) seen.insert(q.triple());
    seen.insert(train_triples.begin(), train_triples.end());
    for (const auto& q : ds.test)
        if (!seen.count(q.triple())) test_triples.insert(q.triple());
    all = seen;
    for (const auto& q : ds.test) all.insert(q.triple());

    Rng rng(seed);
    const auto build = [&](const std::set<Triple>& positives) {
        LabeledSet set;
        for (const auto& t : positives) {
            set.add(encoder.encode(build_sentence(t, ds, variant)), 1);
            set.add(encoder.encode(build_sentence(corrupt(t, ds.entities.size(), all, rng), ds, variant)), 0);
        }
        return set;
    };
    const auto train = build(train_triples);
    const auto test = build(test_triples);
    return classify_embeddings(train, test, config, seed);
}

}  // namespace temt
