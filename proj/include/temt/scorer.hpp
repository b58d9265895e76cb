#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <unordered_map>
#include <vector>

namespace temt {

// f(v) = W2 . relu(W1 v + b1) + b2 with v = [text; time].
struct ScorerParams {
    std::size_t text_dim = 0;
    std::size_t time_dim = 0;
    std::size_t hidden = 0;
    std::vector<double> w1;  // hidden x (text_dim + time_dim), row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;

    std::size_t input_dim() const noexcept { return text_dim + time_dim; }
    std::size_t parameter_count() const noexcept { return w1.size() + b1.size() + w2.size() + 1; }

    static ScorerParams zeros(std::size_t text_dim, std::size_t time_dim, std::size_t hidden);
    // W1, W2 ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero.
    static ScorerParams initialize(std::size_t text_dim, std::size_t time_dim, std::size_t hidden,
                                   std::uint64_t seed);

    // Visits every scalar in (W1, b1, W2, b2) order.
    template <class Fn>
    void for_each(Fn&& fn) {
        for (auto& x : w1) fn(x);
        for (auto& x : b1) fn(x);
        for (auto& x : w2) fn(x);
        fn(b2);
    }

    bool all_finite() const;
    void check_shape() const;
};

double score(std::span<const double> text, std::span<const double> time, const ScorerParams& params);

struct ScoringInput {
    std::span<const double> text;
    std::span<const double> time;
};

// Accumulates gradients of sum_n max(0, f(neg_n) - f(pos) + margin) over a
// batch of positives. Inputs are memoised by address, so every span passed to
// `add` must stay alive and unchanged until `finish`; inputs that share a
// text or time vector share its projection and its outer-product update.
class MarginGradient {
   public:
    MarginGradient(const ScorerParams& params, double margin);

    // Returns this positive's loss.
    double add(const ScoringInput& positive, std::span<const ScoringInput> negatives);

    // Adds the accumulated gradient into `grad` (same shape as params).
    void finish(ScorerParams& grad);

    std::size_t active_pairs() const noexcept { return active_; }

   private:
    struct Cached {
        std::span<const double> input;
        std::vector<double> projection;  // partial pre-activation
        std::vector<double> delta;       // accumulated dL/dh restricted to this input's columns
    };
    // Entries live in a deque (stable addresses, insertion order) so that
    // finish() sums in a deterministic order.
    struct Table {
        std::deque<Cached> entries;
        std::unordered_map<const double*, Cached*> index;
    };
    Cached& entry(Table& table, std::span<const double> v, std::size_t offset);
    double forward(const Cached& text, const Cached& time, std::vector<double>& pre) const;
    void backward(Cached& text, Cached& time, const std::vector<double>& pre, double dscore);

    const ScorerParams& params_;
    double margin_;
    Table text_;
    Table time_;
    std::vector<double> grad_b1_;
    std::vector<double> grad_w2_;
    double grad_b2_ = 0.0;
    std::size_t active_ = 0;
};

struct LossGradient {
    double loss = 0.0;
    ScorerParams grad;
};

// Loss and parameter gradient for one positive against its negatives.
LossGradient margin_loss_gradient(const ScoringInput& positive, std::span<const ScoringInput> negatives,
                                  const ScorerParams& params, double margin);

double margin_loss(const ScoringInput& positive, std::span<const ScoringInput> negatives,
                   const ScorerParams& params, double margin);

}  // namespace temt
