#include "temt/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "temt/error.hpp"

namespace temt {

namespace fs = std::filesystem;

std::string_view to_string(IntervalCategory c) {
    switch (c) {
        case IntervalCategory::closed:
            return "closed";
        case IntervalCategory::left_open:
            return "left-open";
        case IntervalCategory::right_open:
            return "right-open";
    }
    return "?";
}

TimeInterval TimeInterval::make(std::optional<Year> start, std::optional<Year> end) {
    if (!start && !end) throw ParseError("interval has no known endpoint");
    if (start && end && *start > *end)
        throw ParseError("interval start " + std::to_string(*start) + " after end " +
                         std::to_string(*end));
    return TimeInterval(start, end);
}

IntervalCategory TimeInterval::category() const noexcept {
    if (start_ && end_) return IntervalCategory::closed;
    return start_ ? IntervalCategory::right_open : IntervalCategory::left_open;
}

bool TimeInterval::covers(Year t) const noexcept {
    if (start_ && end_) return t >= *start_ && t <= *end_;
    return start_ ? t == *start_ : t == *end_;
}

std::optional<EntityId> Dataset::find_entity(std::string_view key) const {
    for (const auto& e : entities)
        if (e.key == key) return e.id;
    return std::nullopt;
}

std::optional<RelationId> Dataset::find_relation(std::string_view key) const {
    for (const auto& r : relations)
        if (r.key == key) return r.id;
    return std::nullopt;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return out;
}

std::string file_checksum(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return hex64(fnv1a64(buf.str()));
}

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool date_part_ok(std::string_view s) { return s.size() == 2 && (s == "##" || all_digits(s)); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t pos = 0;
    while (true) {
        const auto tab = line.find('\t', pos);
        cols.push_back(line.substr(pos, tab == std::string_view::npos ? tab : tab - pos));
        if (tab == std::string_view::npos) break;
        pos = tab + 1;
    }
    return cols;
}

template <class Fn>
void for_each_line(const fs::path& file, Fn&& fn) {
    std::ifstream in(file);
    if (!in) throw IngestionError(file.string(), 0, "cannot open file");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        fn(std::string_view(line), lineno);
    }
}

// Key/value file with two tab-separated columns; the value may be empty.
std::vector<std::pair<std::string, std::string>> read_pairs(const fs::path& file) {
    std::vector<std::pair<std::string, std::string>> rows;
    for_each_line(file, [&](std::string_view line, std::size_t lineno) {
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw IngestionError(file.string(), lineno, "expected 2 tab-separated columns");
        const auto key = trim(line.substr(0, tab));
        if (key.empty()) throw IngestionError(file.string(), lineno, "empty id");
        rows.emplace_back(std::string(key), std::string(trim(line.substr(tab + 1))));
    });
    return rows;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::vector<Quadruple> read_quadruples(const fs::path& file, const IngestionConfig& config,
                                       const std::unordered_map<std::string, EntityId>& entity_ids,
                                       const std::unordered_map<std::string, RelationId>& relation_ids) {
    std::vector<Quadruple> quads;
    auto endpoint = [&](std::string_view tok, std::size_t lineno) -> std::optional<Year> {
        tok = trim(tok);
        for (const auto& u : config.unknown_tokens)
            if (tok == u) return std::nullopt;
        try {
            return normalize_granularity(tok);
        } catch (const ParseError& e) {
            throw IngestionError(file.string(), lineno, e.what());
        }
    };
    for_each_line(file, [&](std::string_view line, std::size_t lineno) {
        const auto cols = split_tabs(line);
        if (cols.size() != 5)
            throw IngestionError(file.string(), lineno,
                                 "expected 5 columns, found " + std::to_string(cols.size()));
        const std::string s(trim(cols[0])), r(trim(cols[1])), o(trim(cols[2]));
        const auto si = entity_ids.find(s);
        const auto oi = entity_ids.find(o);
        const auto ri = relation_ids.find(r);
        const std::string where = file.string() + ":" + std::to_string(lineno) + ": ";
        if (si == entity_ids.end()) throw ResolutionError(where + "unknown entity '" + s + "'");
        if (oi == entity_ids.end()) throw ResolutionError(where + "unknown entity '" + o + "'");
        if (ri == relation_ids.end()) throw ResolutionError(where + "unknown relation '" + r + "'");
        const auto start = endpoint(cols[3], lineno);
        const auto end = endpoint(cols[4], lineno);
        try {
            quads.push_back({si->second, ri->second, oi->second, TimeInterval::make(start, end)});
        } catch (const ParseError& e) {
            throw IngestionError(file.string(), lineno, e.what());
        }
    });
    return quads;
}

struct QuadHash {
    std::size_t operator()(const Quadruple& q) const noexcept {
        std::size_t h = TripleHash{}(q.triple());
        const auto mix = [&](const std::optional<Year>& y) {
            h = h * 31 + (y ? static_cast<std::size_t>(*y) + 1 : 0);
        };
        mix(q.interval.start());
        mix(q.interval.end());
        return h;
    }
};

std::string format_endpoint(const std::optional<Year>& y) { return y ? std::to_string(*y) : "-"; }

}  // namespace

Year normalize_granularity(std::string_view raw) {
    const auto s = trim(raw);
    const auto parts = [&] {
        std::vector<std::string_view> out;
        std::size_t pos = 0;
        while (true) {
            const auto dash = s.find('-', pos);
            out.push_back(s.substr(pos, dash == std::string_view::npos ? dash : dash - pos));
            if (dash == std::string_view::npos) break;
            pos = dash + 1;
        }
        return out;
    }();
    if (parts.size() > 3 || parts[0].size() != 4 || !all_digits(parts[0]))
        throw ParseError("no year component in '" + std::string(s) + "'");
    for (std::size_t i = 1; i < parts.size(); ++i)
        if (!date_part_ok(parts[i])) throw ParseError("malformed date '" + std::string(s) + "'");
    Year y = 0;
    std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(), y);
    return y;
}

TimeRange compute_time_range(std::span<const Quadruple> quads) {
    std::optional<TimeRange> range;
    const auto extend = [&](Year y) {
        if (!range) range = TimeRange{y, y};
        range->t_min = std::min(range->t_min, y);
        range->t_max = std::max(range->t_max, y);
    };
    for (const auto& q : quads) {
        if (q.interval.start()) extend(*q.interval.start());
        if (q.interval.end()) extend(*q.interval.end());
    }
    if (!range) throw Error("no known time points to derive a time range from");
    return *range;
}

Dataset load_dataset(const fs::path& dir, const IngestionConfig& config) {
    Dataset ds;
    std::unordered_map<std::string, EntityId> entity_ids;
    std::unordered_map<std::string, RelationId> relation_ids;

    const auto entity_path = dir / config.entity_file;
    for_each_line(entity_path, [&](std::string_view line, std::size_t lineno) {
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw IngestionError(entity_path.string(), lineno, "expected 2 tab-separated columns");
        std::string key(trim(line.substr(0, tab)));
        std::string name = collapse_whitespace(line.substr(tab + 1));
        if (key.empty()) throw IngestionError(entity_path.string(), lineno, "empty entity id");
        if (name.empty()) throw IngestionError(entity_path.string(), lineno, "empty entity name");
        const auto id = static_cast<EntityId>(ds.entities.size());
        if (!entity_ids.emplace(key, id).second)
            throw IngestionError(entity_path.string(), lineno, "duplicate entity id '" + key + "'");
        ds.entities.push_back({id, std::move(key), std::move(name), {}});
    });

    const auto relation_path = dir / config.relation_file;
    for_each_line(relation_path, [&](std::string_view line, std::size_t lineno) {
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw IngestionError(relation_path.string(), lineno, "expected 2 tab-separated columns");
        std::string key(trim(line.substr(0, tab)));
        std::string name = collapse_whitespace(line.substr(tab + 1));
        if (key.empty()) throw IngestionError(relation_path.string(), lineno, "empty relation id");
        if (name.empty()) throw IngestionError(relation_path.string(), lineno, "empty relation name");
        const auto id = static_cast<RelationId>(ds.relations.size());
        if (!relation_ids.emplace(key, id).second)
            throw IngestionError(relation_path.string(), lineno, "duplicate relation id '" + key + "'");
        ds.relations.push_back({id, std::move(key), std::move(name)});
    });

    const auto desc_path = dir / config.description_file;
    if (fs::exists(desc_path)) {
        for (auto& [key, text] : read_pairs(desc_path)) {
            const auto it = entity_ids.find(key);
            if (it == entity_ids.end())
                throw ResolutionError(desc_path.string() + ": description for unknown entity '" + key + "'");
            ds.entities[static_cast<std::size_t>(it->second)].description = collapse_whitespace(text);
        }
    } else {
        ds.warnings.push_back("no description file; all descriptions empty");
    }

    ds.train = read_quadruples(dir / config.train_file, config, entity_ids, relation_ids);
    ds.valid = read_quadruples(dir / config.valid_file, config, entity_ids, relation_ids);
    ds.test = read_quadruples(dir / config.test_file, config, entity_ids, relation_ids);

    // Splits must be disjoint; a fact repeated in a later split is dropped there.
    std::unordered_set<Quadruple, QuadHash> seen(ds.train.begin(), ds.train.end());
    const auto dedup = [&](std::vector<Quadruple>& split, const char* name) {
        const auto before = split.size();
        std::erase_if(split, [&](const Quadruple& q) { return seen.count(q) > 0; });
        if (split.size() != before)
            ds.warnings.push_back(std::string(name) + ": dropped " + std::to_string(before - split.size()) +
                                  " facts already present in an earlier split");
        seen.insert(split.begin(), split.end());
    };
    dedup(ds.valid, "valid");
    dedup(ds.test, "test");

    ds.range = compute_time_range(ds.train);

    const auto count_outside = [&](const std::vector<Quadruple>& split, const char* name) {
        std::size_t n = 0;
        for (const auto& q : split) {
            if (q.interval.start() && !ds.range.contains(*q.interval.start())) ++n;
            if (q.interval.end() && !ds.range.contains(*q.interval.end())) ++n;
        }
        if (n > 0)
            ds.warnings.push_back(std::string(name) + ": " + std::to_string(n) +
                                  " endpoints outside train range [" + std::to_string(ds.range.t_min) + ", " +
                                  std::to_string(ds.range.t_max) + "] are clamped for encoding");
    };
    count_outside(ds.valid, "valid");
    count_outside(ds.test, "test");
    return ds;
}

void write_dataset(const Dataset& ds, const fs::path& dir, const IngestionConfig& config) {
    fs::create_directories(dir);
    const auto open = [&](const std::string& name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open(config.entity_file);
        for (const auto& e : ds.entities) out << e.key << '\t' << e.name << '\n';
    }
    {
        auto out = open(config.relation_file);
        for (const auto& r : ds.relations) out << r.key << '\t' << r.name << '\n';
    }
    {
        auto out = open(config.description_file);
        for (const auto& e : ds.entities)
            if (!e.description.empty()) out << e.key << '\t' << e.description << '\n';
    }
    const auto write_split = [&](const std::string& name, const std::vector<Quadruple>& split) {
        auto out = open(name);
        for (const auto& q : split)
            out << ds.entities[static_cast<std::size_t>(q.subject)].key << '\t'
                << ds.relations[static_cast<std::size_t>(q.relation)].key << '\t'
                << ds.entities[static_cast<std::size_t>(q.object)].key << '\t' << format_endpoint(q.interval.start())
                << '\t' << format_endpoint(q.interval.end()) << '\n';
    };
    write_split(config.train_file, ds.train);
    write_split(config.valid_file, ds.valid);
    write_split(config.test_file, ds.test);

    auto manifest = open("manifest.txt");
    manifest << "granularity=year\n"
             << "t_min=" << ds.range.t_min << '\n'
             << "t_max=" << ds.range.t_max << '\n'
             << "entities=" << ds.entities.size() << '\n'
             << "relations=" << ds.relations.size() << '\n'
             << "train=" << ds.train.size() << '\n'
             << "valid=" << ds.valid.size() << '\n'
             << "test=" << ds.test.size() << '\n';
    for (const auto& name : {config.entity_file, config.relation_file, config.description_file, config.train_file,
                             config.valid_file, config.test_file})
        manifest << "checksum." << name << "=fnv1a64:" << file_checksum(dir / name) << '\n';
}

std::vector<TrainingPoint> expand_training_points(std::span<const Quadruple> train) {
    std::vector<TrainingPoint> points;
    points.reserve(train.size() * 2);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& iv = train[i].interval;
        if (iv.start()) points.push_back({i, *iv.start(), Endpoint::start});
        if (iv.end() && !(iv.start() && *iv.start() == *iv.end())) points.push_back({i, *iv.end(), Endpoint::end});
    }
    return points;
}

std::vector<Quadruple> filter_evaluable(std::span<const Quadruple> test) {
    std::vector<Quadruple> out;
    std::copy_if(test.begin(), test.end(), std::back_inserter(out),
                 [](const Quadruple& q) { return q.interval.is_closed(); });
    if (out.empty() && !test.empty())
        std::clog << "warning: no closed-interval facts among " << test.size() << " to evaluate\n";
    return out;
}

}  // namespace temt
