#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "temt/dataset.hpp"
#include "temt/text_encoding.hpp"

namespace temt {

// One-hidden-layer perceptron for binary labels, trained with Adam on the
// L2-regularised log loss (penalty 0.5 * alpha * |W|^2 / batch size).
// Training stops after max_iter epochs or once the epoch loss has failed to
// improve by tol for n_iter_no_change consecutive epochs.
struct ClassifierConfig {
    std::size_t hidden = 100;
    double alpha = 0.05;
    std::size_t max_iter = 1000;
    double learning_rate = 0.001;
    std::size_t batch_size = 200;
    double tol = 1e-4;
    std::size_t n_iter_no_change = 10;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct LabeledSet {
    std::vector<std::vector<double>> x;
    std::vector<int> y;  // 0 or 1

    void add(std::vector<double> features, int label) {
        x.push_back(std::move(features));
        y.push_back(label);
    }
    std::size_t size() const noexcept { return y.size(); }
};

class MlpClassifier {
   public:
    MlpClassifier(std::size_t input_dim, const ClassifierConfig& config, std::uint64_t seed);

    // Returns the number of epochs run.
    std::size_t fit(const LabeledSet& data);
    double predict_proba(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }
    double accuracy(const LabeledSet& data) const;

   private:
    std::size_t in_, hidden_;
    ClassifierConfig config_;
    std::uint64_t seed_;
    std::vector<double> w1_, b1_, w2_;  // w1_: hidden x in
    double b2_ = 0.0;
};

struct ClassificationResult {
    double accuracy = 0.0;
    std::size_t train_size = 0;  // examples, positives and negatives
    std::size_t test_size = 0;
    std::size_t epochs = 0;
};

ClassificationResult classify_embeddings(const LabeledSet& train, const LabeledSet& test,
                                         const ClassifierConfig& config, std::uint64_t seed);

// Balanced triple classification over interval-free facts: one corrupted
// head or tail per positive, never a triple from any split. Test triples
// that also occur in train or valid are dropped.
ClassificationResult triple_classification(const Dataset& dataset, const TextEncoder& encoder, Variant variant,
                                           const ClassifierConfig& config, std::uint64_t seed);

}  // namespace temt
