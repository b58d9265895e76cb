#include "temt/scorer.hpp"

#include <cmath>

#include "temt/error.hpp"
#include "temt/rng.hpp"

namespace temt {

ScorerParams ScorerParams::zeros(std::size_t text_dim, std::size_t time_dim, std::size_t hidden) {
    ScorerParams p;
    p.text_dim = text_dim;
    p.time_dim = time_dim;
    p.hidden = hidden;
    p.w1.assign(hidden * (text_dim + time_dim), 0.0);
    p.b1.assign(hidden, 0.0);
    p.w2.assign(hidden, 0.0);
    return p;
}

ScorerParams ScorerParams::initialize(std::size_t text_dim, std::size_t time_dim, std::size_t hidden,
                                      std::uint64_t seed) {
    if (hidden == 0 || text_dim + time_dim == 0) throw ConfigError("scorer dimensions must be > 0");
    auto p = zeros(text_dim, time_dim, hidden);
    Rng rng(seed);
    const double bound1 = 1.0 / std::sqrt(static_cast<double>(p.input_dim()));
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto& w : p.w1) w = rng.uniform(-bound1, bound1);
    for (auto& w : p.w2) w = rng.uniform(-bound2, bound2);
    return p;
}

bool ScorerParams::all_finite() const {
    const auto finite = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    return finite(w1) && finite(b1) && finite(w2) && std::isfinite(b2);
}

void ScorerParams::check_shape() const {
    if (w1.size() != hidden * input_dim() || b1.size() != hidden || w2.size() != hidden)
        throw ShapeError("scorer parameter shapes inconsistent with d=" + std::to_string(text_dim) +
                         " d'=" + std::to_string(time_dim) + " k=" + std::to_string(hidden));
}

namespace {

void check_input(std::span<const double> text, std::span<const double> time, const ScorerParams& p) {
    if (text.size() != p.text_dim || time.size() != p.time_dim)
        throw ShapeError("input of size (" + std::to_string(text.size()) + ", " + std::to_string(time.size()) +
                         ") does not match scorer (" + std::to_string(p.text_dim) + ", " +
                         std::to_string(p.time_dim) + ")");
}

// out[j] = sum_c W1[j, offset + c] * v[c]
std::vector<double> project(const ScorerParams& p, std::span<const double> v, std::size_t offset) {
    const std::size_t cols = p.input_dim();
    std::vector<double> out(p.hidden, 0.0);
    for (std::size_t j = 0; j < p.hidden; ++j) {
        const double* row = p.w1.data() + j * cols + offset;
        double acc = 0.0;
        for (std::size_t c = 0; c < v.size(); ++c) acc += row[c] * v[c];
        out[j] = acc;
    }
    return out;
}

}  // namespace

double score(std::span<const double> text, std::span<const double> time, const ScorerParams& p) {
    check_input(text, time, p);
    const auto a = project(p, text, 0);
    const auto b = project(p, time, p.text_dim);
    double f = p.b2;
    for (std::size_t j = 0; j < p.hidden; ++j) {
        const double h = a[j] + b[j] + p.b1[j];
        if (h > 0.0) f += p.w2[j] * h;
    }
    return f;
}

MarginGradient::MarginGradient(const ScorerParams& params, double margin)
    : params_(params), margin_(margin), grad_b1_(params.hidden, 0.0), grad_w2_(params.hidden, 0.0) {
    params.check_shape();
}

MarginGradient::Cached& MarginGradient::entry(Table& table, std::span<const double> v, std::size_t offset) {
    auto [it, inserted] = table.index.try_emplace(v.data(), nullptr);
    if (inserted) {
        auto& c = table.entries.emplace_back();
        c.input = v;
        c.projection = project(params_, v, offset);
        c.delta.assign(params_.hidden, 0.0);
        it->second = &c;
    }
    return *it->second;
}

double MarginGradient::forward(const Cached& text, const Cached& time, std::vector<double>& pre) const {
    pre.resize(params_.hidden);
    double f = params_.b2;
    for (std::size_t j = 0; j < params_.hidden; ++j) {
        pre[j] = text.projection[j] + time.projection[j] + params_.b1[j];
        if (pre[j] > 0.0) f += params_.w2[j] * pre[j];
    }
    return f;
}

void MarginGradient::backward(Cached& text, Cached& time, const std::vector<double>& pre, double dscore) {
    grad_b2_ += dscore;
    for (std::size_t j = 0; j < params_.hidden; ++j) {
        if (pre[j] <= 0.0) continue;  // relu subgradient at 0 is 0
        grad_w2_[j] += dscore * pre[j];
        const double dh = dscore * params_.w2[j];
        grad_b1_[j] += dh;
        text.delta[j] += dh;
        time.delta[j] += dh;
    }
}

double MarginGradient::add(const ScoringInput& positive, std::span<const ScoringInput> negatives) {
    check_input(positive.text, positive.time, params_);
    Cached* pos_text = &entry(text_, positive.text, 0);
    Cached* pos_time = &entry(time_, positive.time, params_.text_dim);
    std::vector<double> pos_pre, neg_pre;
    const double f_pos = forward(*pos_text, *pos_time, pos_pre);

    double loss = 0.0;
    double pos_weight = 0.0;
    for (const auto& neg : negatives) {
        check_input(neg.text, neg.time, params_);
        Cached* nt = &entry(text_, neg.text, 0);
        Cached* ny = &entry(time_, neg.time, params_.text_dim);
        const double f_neg = forward(*nt, *ny, neg_pre);
        const double hinge = f_neg - f_pos + margin_;
        if (hinge <= 0.0) continue;
        loss += hinge;
        ++active_;
        pos_weight -= 1.0;
        backward(*nt, *ny, neg_pre, 1.0);
    }
    if (pos_weight != 0.0) {
        backward(*pos_text, *pos_time, pos_pre, pos_weight);
    }
    return loss;
}

void MarginGradient::finish(ScorerParams& grad) {
    const std::size_t cols = params_.input_dim();
    const auto outer = [&](const Cached& c, std::size_t offset) {
        for (std::size_t j = 0; j < params_.hidden; ++j) {
            const double d = c.delta[j];
            if (d == 0.0) continue;
            double* row = grad.w1.data() + j * cols + offset;
            for (std::size_t i = 0; i < c.input.size(); ++i) row[i] += d * c.input[i];
        }
    };
    for (const auto& c : text_.entries) outer(c, 0);
    for (const auto& c : time_.entries) outer(c, params_.text_dim);
    for (std::size_t j = 0; j < params_.hidden; ++j) {
        grad.b1[j] += grad_b1_[j];
        grad.w2[j] += grad_w2_[j];
    }
    grad.b2 += grad_b2_;
    text_ = {};
    time_ = {};
    std::fill(grad_b1_.begin(), grad_b1_.end(), 0.0);
    std::fill(grad_w2_.begin(), grad_w2_.end(), 0.0);
    grad_b2_ = 0.0;
}

LossGradient margin_loss_gradient(const ScoringInput& positive, std::span<const ScoringInput> negatives,
                                  const ScorerParams& params, double margin) {
    LossGradient out{0.0, ScorerParams::zeros(params.text_dim, params.time_dim, params.hidden)};
    MarginGradient acc(params, margin);
    out.loss = acc.add(positive, negatives);
    acc.finish(out.grad);
    return out;
}

double margin_loss(const ScoringInput& positive, std::span<const ScoringInput> negatives,
                   const ScorerParams& params, double margin) {
    const double f_pos = score(positive.text, positive.time, params);
    double loss = 0.0;
    for (const auto& neg : negatives) loss += std::max(0.0, score(neg.text, neg.time, params) - f_pos + margin);
    return loss;
}

}  // namespace temt
