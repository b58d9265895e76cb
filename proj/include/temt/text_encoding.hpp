#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "temt/dataset.hpp"

namespace temt {

enum class Variant {
    names,               // N: subject, relation and object names
    names_descriptions,  // ND: names followed by subject and object descriptions
};

Variant parse_variant(std::string_view s);
std::string_view to_string(Variant v);

struct TripleSentence {
    std::string text;
    Variant variant = Variant::names_descriptions;
};

using Embedding = std::vector<double>;

// Underscores become spaces; runs of whitespace collapse to one space.
std::string normalize_name(std::string_view name);

TripleSentence build_sentence(const Triple& triple, const Dataset& dataset, Variant variant);
inline TripleSentence build_sentence(const Quadruple& q, const Dataset& dataset, Variant variant) {
    return build_sentence(q.triple(), dataset, variant);
}

// 64-bit content hash of the exact sentence text, rendered as 16 hex digits.
std::uint64_t sentence_key(std::string_view text) noexcept;

class TextEncoder {
   public:
    virtual ~TextEncoder() = default;
    virtual std::size_t dim() const noexcept = 0;
    virtual Embedding encode(const TripleSentence& sentence) const = 0;
};

// Precomputed embeddings keyed by sentence hash.
class TableEncoder final : public TextEncoder {
   public:
    TableEncoder(std::size_t dim, std::unordered_map<std::uint64_t, std::vector<float>> rows);

    // Text format unless the extension is ".bin".
    static TableEncoder load(const std::filesystem::path& file);

    std::size_t dim() const noexcept override { return dim_; }
    Embedding encode(const TripleSentence& sentence) const override;
    bool contains(std::uint64_t key) const { return rows_.count(key) > 0; }
    std::size_t size() const noexcept { return rows_.size(); }
    const std::unordered_map<std::uint64_t, std::vector<float>>& rows() const noexcept { return rows_; }

   private:
    std::size_t dim_;
    std::unordered_map<std::uint64_t, std::vector<float>> rows_;
};

// Bag-of-tokens encoder: every whitespace token maps to a pseudo-random unit
// vector derived from its hash and the seed; the sentence embedding is the
// L2-normalised sum. Token order does not matter.
class HashingEncoder final : public TextEncoder {
   public:
    HashingEncoder(std::size_t dim, std::uint64_t seed);

    std::size_t dim() const noexcept override { return dim_; }
    Embedding encode(const TripleSentence& sentence) const override;
    Embedding token_vector(std::string_view token) const;

   private:
    std::size_t dim_;
    std::uint64_t seed_;
};

// Rows are written in ascending key order.
void write_embedding_table(const std::filesystem::path& file, std::size_t dim,
                           const std::unordered_map<std::uint64_t, std::vector<float>>& rows);

}  // namespace temt
