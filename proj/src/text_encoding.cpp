#include "temt/text_encoding.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "temt/error.hpp"
#include "temt/rng.hpp"

namespace temt {

namespace fs = std::filesystem;

Variant parse_variant(std::string_view s) {
    if (s == "N" || s == "n") return Variant::names;
    if (s == "ND" || s == "nd") return Variant::names_descriptions;
    throw ConfigError("unknown variant '" + std::string(s) + "' (expected N or ND)");
}

std::string_view to_string(Variant v) { return v == Variant::names ? "N" : "ND"; }

std::string normalize_name(std::string_view name) {
    std::string out;
    bool space = false;
    for (char c : name) {
        if (c == '_' || std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

namespace {

std::string collapse(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

void append_part(std::string& text, const std::string& part) {
    if (part.empty()) return;
    if (!text.empty()) text.push_back(' ');
    text += part;
}

}  // namespace

TripleSentence build_sentence(const Triple& t, const Dataset& ds, Variant variant) {
    const auto& s = ds.entities.at(static_cast<std::size_t>(t.subject));
    const auto& r = ds.relations.at(static_cast<std::size_t>(t.relation));
    const auto& o = ds.entities.at(static_cast<std::size_t>(t.object));
    TripleSentence out{{}, variant};
    append_part(out.text, normalize_name(s.name));
    append_part(out.text, normalize_name(r.name));
    append_part(out.text, normalize_name(o.name));
    if (variant == Variant::names_descriptions) {
        append_part(out.text, collapse(s.description));
        append_part(out.text, collapse(o.description));
    }
    return out;
}

std::uint64_t sentence_key(std::string_view text) noexcept { return fnv1a64(text); }

TableEncoder::TableEncoder(std::size_t dim, std::unordered_map<std::uint64_t, std::vector<float>> rows)
    : dim_(dim), rows_(std::move(rows)) {
    for (const auto& [key, v] : rows_) {
        if (v.size() != dim_) throw ShapeError("embedding row " + hex64(key) + " has wrong dimension");
        for (float x : v)
            if (!std::isfinite(x)) throw NumericError("embedding row " + hex64(key) + " is not finite");
    }
}

Embedding TableEncoder::encode(const TripleSentence& sentence) const {
    const auto key = sentence_key(sentence.text);
    const auto it = rows_.find(key);
    if (it == rows_.end()) throw MissingEmbeddingError(hex64(key), sentence.text);
    return Embedding(it->second.begin(), it->second.end());
}

namespace {

std::pair<std::size_t, std::size_t> parse_header(const std::string& line, const std::string& file) {
    std::size_t dim = 0, count = 0;
    bool have_dim = false, have_count = false;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq);
        const auto val = tok.substr(eq + 1);
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
        if (ec != std::errc() || ptr != val.data() + val.size()) break;
        if (key == "dim") {
            dim = v;
            have_dim = true;
        } else if (key == "count") {
            count = v;
            have_count = true;
        }
    }
    if (!have_dim || !have_count || dim == 0)
        throw IngestionError(file, 1, "expected header 'dim=<d> count=<n>'");
    return {dim, count};
}

std::uint64_t parse_key(std::string_view s, const std::string& file, std::size_t line) {
    std::uint64_t key = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), key, 16);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw IngestionError(file, line, "bad key '" + std::string(s) + "'");
    return key;
}

}  // namespace

TableEncoder TableEncoder::load(const fs::path& file) {
    const auto name = file.string();
    const bool binary = file.extension() == ".bin";
    std::ifstream in(file, binary ? std::ios::binary : std::ios::in);
    if (!in) throw IngestionError(name, 0, "cannot open embedding table");
    std::string header;
    std::getline(in, header);
    const auto [dim, count] = parse_header(header, name);
    std::unordered_map<std::uint64_t, std::vector<float>> rows;
    rows.reserve(count);
    if (binary) {
        static_assert(std::endian::native == std::endian::little, "binary tables assume a little-endian host");
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t key = 0;
            std::vector<float> v(dim);
            in.read(reinterpret_cast<char*>(&key), sizeof key);
            in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(float)));
            if (!in) throw IngestionError(name, i + 2, "truncated binary row");
            rows.emplace(key, std::move(v));
        }
    } else {
        std::string line;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) throw IngestionError(name, lineno, "expected key<TAB>values");
            const auto key = parse_key(std::string_view(line).substr(0, tab), name, lineno);
            std::vector<float> v;
            v.reserve(dim);
            const char* p = line.data() + tab + 1;
            const char* end = line.data() + line.size();
            while (p < end) {
                while (p < end && *p == ' ') ++p;
                if (p == end) break;
                float x = 0;
                const auto [next, ec] = std::from_chars(p, end, x);
                if (ec != std::errc()) throw IngestionError(name, lineno, "unparsable float");
                v.push_back(x);
                p = next;
            }
            if (v.size() != dim)
                throw IngestionError(name, lineno,
                                     "expected " + std::to_string(dim) + " values, found " + std::to_string(v.size()));
            rows[key] = std::move(v);
        }
        if (rows.size() != count)
            throw IngestionError(name, lineno,
                                 "header count " + std::to_string(count) + " but " + std::to_string(rows.size()) +
                                     " distinct rows");
    }
    return TableEncoder(dim, std::move(rows));
}

void write_embedding_table(const fs::path& file, std::size_t dim,
                           const std::unordered_map<std::uint64_t, std::vector<float>>& rows) {
    std::vector<std::uint64_t> keys;
    keys.reserve(rows.size());
    for (const auto& [k, v] : rows) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    const bool binary = file.extension() == ".bin";
    std::ofstream out(file, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error("cannot write " + file.string());
    out << "dim=" << dim << " count=" << rows.size() << '\n';
    char buf[32];
    for (auto k : keys) {
        const auto& v = rows.at(k);
        if (v.size() != dim) throw ShapeError("row " + hex64(k) + " has wrong dimension");
        if (binary) {
            out.write(reinterpret_cast<const char*>(&k), sizeof k);
            out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(float)));
        } else {
            out << hex64(k) << '\t';
            for (std::size_t i = 0; i < dim; ++i) {
                const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v[i]);
                if (i) out << ' ';
                out.write(buf, end - buf);
            }
            out << '\n';
        }
    }
}

HashingEncoder::HashingEncoder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim == 0) throw ConfigError("encoder dimension must be > 0");
}

Embedding HashingEncoder::token_vector(std::string_view token) const {
    Rng rng(fnv1a64(token) ^ (seed_ * 0x9E3779B97F4A7C15ULL));
    Embedding v(dim_);
    double norm = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

Embedding HashingEncoder::encode(const TripleSentence& sentence) const {
    Embedding sum(dim_, 0.0);
    std::istringstream in(sentence.text);
    std::string token;
    while (in >> token) {
        const auto v = token_vector(token);
        for (std::size_t i = 0; i < dim_; ++i) sum[i] += v[i];
    }
    double norm = 0.0;
    for (double x : sum) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (auto& x : sum) x /= norm;
    }
    return sum;
}

}  // namespace temt
