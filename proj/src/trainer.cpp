#include "temt/trainer.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "temt/error.hpp"
#include "temt/rng.hpp"
#include "temt/sampling.hpp"
#include "temt/time_encoding.hpp"

namespace temt {

NegativeType parse_negative_type(std::string_view s) {
    if (s == "time" || s == "time-corrupted") return NegativeType::time_corrupted;
    if (s == "entity" || s == "entity-corrupted") return NegativeType::entity_corrupted;
    throw ConfigError("unknown negative type '" + std::string(s) + "' (expected time or entity)");
}

std::string_view to_string(NegativeType t) {
    return t == NegativeType::time_corrupted ? "time-corrupted" : "entity-corrupted";
}

void TrainConfig::validate() const {
    if (!(margin > 0.0)) throw ConfigError("margin must be > 0");
    if (negatives == 0) throw ConfigError("negatives per positive must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    if (hidden == 0) throw ConfigError("hidden dimension must be >= 1");
    if (time_dim == 0 || time_dim % 2 != 0) throw ConfigError("time dimension must be even and > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0))
        throw ConfigError("invalid Adam constants");
}

std::map<std::string, std::string> TrainConfig::echo() const {
    const auto str = [](double x) {
        std::ostringstream o;
        o.precision(17);
        o << x;
        return o.str();
    };
    return {{"learning_rate", str(learning_rate)},
            {"epochs", std::to_string(epochs)},
            {"margin", str(margin)},
            {"negatives", std::to_string(negatives)},
            {"negative_type", std::string(to_string(negative_type))},
            {"beta1", str(beta1)},
            {"beta2", str(beta2)},
            {"epsilon", str(epsilon)},
            {"batch_size", std::to_string(batch_size)},
            {"hidden", std::to_string(hidden)},
            {"time_dim", std::to_string(time_dim)},
            {"seed", std::to_string(seed)}};
}

Adam::Adam(const ScorerParams& shape, double lr, double beta1, double beta2, double epsilon)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(shape.parameter_count(), 0.0),
      v_(shape.parameter_count(), 0.0) {}

void Adam::step(ScorerParams& params, ScorerParams& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::vector<double*> g;
    g.reserve(m_.size());
    grad.for_each([&](double& x) { g.push_back(&x); });
    std::size_t i = 0;
    params.for_each([&](double& w) {
        const double gi = *g[i];
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gi;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gi * gi;
        w -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
        *g[i] = 0.0;
        ++i;
    });
}

namespace {

// Text embeddings for training triples and, on demand, their corruptions.
// unordered_map nodes keep vector addresses stable for MarginGradient.
class EmbeddingCache {
   public:
    EmbeddingCache(const Dataset& ds, const TextEncoder& enc, Variant variant)
        : ds_(ds), enc_(enc), variant_(variant) {}

    const Embedding& get(const Triple& t) {
        auto it = cache_.find(t);
        if (it == cache_.end()) {
            auto e = enc_.encode(build_sentence(t, ds_, variant_));
            it = cache_.emplace(t, std::move(e)).first;
        }
        return it->second;
    }

   private:
    const Dataset& ds_;
    const TextEncoder& enc_;
    Variant variant_;
    std::unordered_map<Triple, Embedding, TripleHash> cache_;
};

}  // namespace

TrainResult train(const Dataset& ds, const TextEncoder& encoder, Variant variant, const TrainConfig& config,
                  const std::function<void(std::size_t, double)>& on_epoch) {
    config.validate();
    TrainResult result{ScorerParams::initialize(encoder.dim(), config.time_dim, config.hidden, config.seed), {}};
    auto& params = result.params;
    auto& report = result.report;

    const auto points = expand_training_points(ds.train);
    report.training_points = points.size();
    report.notes.push_back("batch_size=" + std::to_string(config.batch_size) +
                           " (positives per step; not given by the method description)");
    report.notes.push_back("init=uniform(+-1/sqrt(fan_in)) weights, zero biases");
    if (config.epochs == 0 || points.empty()) return result;

    const TimeRange range = ds.range;
    const auto times = time_table(range, config.time_dim);
    const auto time_of = [&](Year t) {
        return std::span<const double>(times.data() + static_cast<std::size_t>(range.clamp(t) - range.t_min) *
                                                          config.time_dim,
                                       config.time_dim);
    };

    EmbeddingCache embeddings(ds, encoder, variant);
    for (const auto& q : ds.train) embeddings.get(q.triple());
    const PositiveIndex positives(ds.train);
    std::vector<std::vector<Year>> eligible;
    if (config.negative_type == NegativeType::time_corrupted) {
        eligible.reserve(ds.train.size());
        for (const auto& q : ds.train) eligible.push_back(eligible_negative_years(q, range, positives));
        std::size_t without = 0;
        for (const auto& p : points) without += eligible[p.quadruple].empty();
        report.points_without_negatives = without;
        if (without > 0)
            report.notes.push_back(std::to_string(without) +
                                   " training points have no eligible time-corrupted negative and add no loss");
    }

    Rng rng(config.seed ^ 0xA5A5A5A5DEADBEEFULL);
    Adam adam(params, config.learning_rate, config.beta1, config.beta2, config.epsilon);
    auto grad = ScorerParams::zeros(params.text_dim, params.time_dim, params.hidden);

    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<ScoringInput> neg_inputs;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t begin = 0, batch = 0; begin < order.size(); begin += config.batch_size, ++batch) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            MarginGradient acc(params, config.margin);
            double batch_loss = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const auto& point = points[order[i]];
                const auto& quad = ds.train[point.quadruple];
                const bool by_time = config.negative_type == NegativeType::time_corrupted;
                if (by_time && eligible[point.quadruple].empty()) continue;
                const NegativeSet negs =
                    by_time ? sample_time_corrupted(quad, eligible[point.quadruple], config.negatives, rng)
                            : sample_entity_corrupted(quad.triple(), point.year, ds.entities.size(), positives,
                                                      config.negatives, rng);
                neg_inputs.clear();
                for (const auto& n : negs) neg_inputs.push_back({embeddings.get(n.triple), time_of(n.year)});
                batch_loss += acc.add({embeddings.get(quad.triple()), time_of(point.year)}, neg_inputs);
            }
            if (!std::isfinite(batch_loss))
                throw NumericError("non-finite loss in epoch " + std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(batch) + " (positives " + std::to_string(begin) + ".." +
                                   std::to_string(end - 1) + ")");
            acc.finish(grad);
            adam.step(params, grad);
            epoch_loss += batch_loss;
        }
        if (!params.all_finite())
            throw NumericError("parameters became non-finite in epoch " + std::to_string(epoch + 1));
        report.epoch_loss.push_back(epoch_loss);
        if (on_epoch) on_epoch(epoch + 1, epoch_loss);
    }
    report.steps = adam.steps();
    return result;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& file) {
    static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");
    ck.params.check_shape();
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    out << "temt-checkpoint 1\n"
        << "text_dim=" << ck.params.text_dim << '\n'
        << "time_dim=" << ck.params.time_dim << '\n'
        << "hidden=" << ck.params.hidden << '\n'
        << "t_min=" << ck.range.t_min << '\n'
        << "t_max=" << ck.range.t_max << '\n';
    for (const auto& [k, v] : ck.meta) out << "config." << k << '=' << v << '\n';
    out << "end_header\n";
    auto p = ck.params;
    p.for_each([&](double& x) {
        const float f = static_cast<float>(x);
        out.write(reinterpret_cast<const char*>(&f), sizeof f);
    });
    if (!out) throw Error("failed writing " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + file.string() + " (run `train` first)");
    std::string line;
    std::getline(in, line);
    if (line != "temt-checkpoint 1") throw IngestionError(file.string(), 1, "not a checkpoint file");
    std::map<std::string, std::string> kv;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line == "end_header") break;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IngestionError(file.string(), lineno, "expected key=value");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const auto num = [&](const std::string& key) -> long long {
        const auto it = kv.find(key);
        if (it == kv.end()) throw IngestionError(file.string(), 0, "missing header field " + key);
        return std::stoll(it->second);
    };
    Checkpoint ck;
    ck.params = ScorerParams::zeros(static_cast<std::size_t>(num("text_dim")), static_cast<std::size_t>(num("time_dim")),
                                    static_cast<std::size_t>(num("hidden")));
    ck.range = {static_cast<Year>(num("t_min")), static_cast<Year>(num("t_max"))};
    for (const auto& [k, v] : kv)
        if (k.rfind("config.", 0) == 0) ck.meta[k.substr(7)] = v;
    ck.params.for_each([&](double& x) {
        float f = 0;
        in.read(reinterpret_cast<char*>(&f), sizeof f);
        x = f;
    });
    if (!in) throw IngestionError(file.string(), lineno, "truncated parameter block");
    return ck;
}

}  // namespace temt
