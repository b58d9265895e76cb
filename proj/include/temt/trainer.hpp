#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "temt/dataset.hpp"
#include "temt/scorer.hpp"
#include "temt/text_encoding.hpp"

namespace temt {

enum class NegativeType { entity_corrupted, time_corrupted };

NegativeType parse_negative_type(std::string_view s);
std::string_view to_string(NegativeType t);

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t epochs = 50;
    double margin = 2.0;
    std::size_t negatives = 128;
    NegativeType negative_type = NegativeType::time_corrupted;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 512;  // positives per Adam step
    std::size_t hidden = 64;       // k
    std::size_t time_dim = 64;     // d'
    std::uint64_t seed = 0;

    void validate() const;
    std::map<std::string, std::string> echo() const;
};

class Adam {
   public:
    Adam(const ScorerParams& shape, double lr, double beta1, double beta2, double epsilon);
    void step(ScorerParams& params, ScorerParams& grad);
    std::size_t steps() const noexcept { return t_; }

   private:
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<double> m_, v_;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    std::size_t training_points = 0;
    std::size_t points_without_negatives = 0;
    std::size_t steps = 0;
    std::vector<std::string> notes;
};

struct TrainResult {
    ScorerParams params;
    TrainReport report;
};

// Mini-batch Adam on the summed margin ranking loss. Deterministic for a fixed
// config.seed. Throws NumericError on a non-finite batch loss.
TrainResult train(const Dataset& dataset, const TextEncoder& encoder, Variant variant, const TrainConfig& config,
                  const std::function<void(std::size_t epoch, double loss)>& on_epoch = {});

struct Checkpoint {
    ScorerParams params;
    TimeRange range;
    std::map<std::string, std::string> meta;  // config echo
};

// Text manifest terminated by "end_header", then W1, b1, W2, b2 as
// little-endian float32 in row-major order.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace temt
