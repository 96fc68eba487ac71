#include "asag/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "asag/error.hpp"
#include "asag/hashing.hpp"
#include "asag/rng.hpp"
#include "asag/text.hpp"

namespace asag {

double EmbeddingVector::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

bool EmbeddingVector::is_zero() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        fail(ErrorCode::DimensionMismatch, "cosine: dimensions " + std::to_string(a.dimension()) +
                                               " and " + std::to_string(b.dimension()) + " differ");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

void EmbedderConfig::validate() const {
    if (provider == EmbedderProvider::HashedTfidf) {
        if (dimension < 8) fail(ErrorCode::InvalidArgument, "embedder dimension must be >= 8");
        if (ngram_max != 1 && ngram_max != 2) {
            fail(ErrorCode::InvalidArgument, "ngram_max must be 1 or 2");
        }
    } else {
        if (!file_path) {
            fail(ErrorCode::InvalidArgument, "external embedder '" + name + "' requires file_path");
        }
        if (dimension != 0 && dimension < 8) {
            fail(ErrorCode::InvalidArgument, "embedder dimension must be >= 8");
        }
    }
}

nlohmann::json to_json(const EmbedderConfig& cfg) {
    nlohmann::json j;
    j["name"] = cfg.name;
    j["provider"] = cfg.provider == EmbedderProvider::HashedTfidf ? "hashed_tfidf" : "external_file";
    j["dimension"] = cfg.dimension;
    j["hash_seed"] = cfg.hash_seed;
    j["ngram_max"] = cfg.ngram_max;
    if (cfg.file_path) j["file_path"] = cfg.file_path->string();
    return j;
}

EmbedderConfig embedder_config_from_json(const nlohmann::json& j) {
    EmbedderConfig cfg;
    cfg.name = j.value("name", cfg.name);
    const std::string provider = j.value("provider", std::string("hashed_tfidf"));
    if (provider == "hashed_tfidf") {
        cfg.provider = EmbedderProvider::HashedTfidf;
    } else if (provider == "external_file") {
        cfg.provider = EmbedderProvider::ExternalFile;
    } else {
        fail(ErrorCode::InvalidArgument, "unknown embedder provider '" + provider + "'");
    }
    // External files carry their own dimension; 0 skips the cross-check.
    if (cfg.provider == EmbedderProvider::ExternalFile) cfg.dimension = 0;
    cfg.dimension = j.value("dimension", cfg.dimension);
    cfg.hash_seed = j.value("hash_seed", cfg.hash_seed);
    cfg.ngram_max = j.value("ngram_max", cfg.ngram_max);
    if (j.contains("file_path")) cfg.file_path = j["file_path"].get<std::string>();
    cfg.validate();
    return cfg;
}

std::string fingerprint(const EmbedderConfig& cfg) {
    return sha256_hex(to_json(cfg).dump());
}

std::vector<EmbedderConfig> default_embedder_configs() {
    std::vector<EmbedderConfig> out;
    const struct {
        const char* name;
        int dim;
        std::uint64_t seed;
        int ngram;
    } rows[] = {
        {"base0", 256, 11, 1}, {"base1", 256, 23, 2}, {"base2", 384, 37, 1},
        {"base3", 512, 41, 2}, {"base4", 192, 53, 1},
    };
    for (const auto& r : rows) {
        EmbedderConfig cfg;
        cfg.name = r.name;
        cfg.dimension = r.dim;
        cfg.hash_seed = r.seed;
        cfg.ngram_max = r.ngram;
        out.push_back(cfg);
    }
    return out;
}

HashedTfidfEmbedder::HashedTfidfEmbedder(EmbedderConfig cfg,
                                         const std::vector<std::string>& corpus_texts)
    : Embedder(std::move(cfg)) {
    config().validate();
    if (corpus_texts.empty()) {
        fail(ErrorCode::InvalidArgument, "hashed tf-idf embedder needs a non-empty corpus");
    }
    documents_ = corpus_texts.size();
    for (const auto& doc : corpus_texts) {
        auto feats = features(doc);
        std::sort(feats.begin(), feats.end());
        feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
        for (auto& f : feats) ++df_[std::move(f)];
    }
}

std::size_t HashedTfidfEmbedder::dimension() const {
    return static_cast<std::size_t>(config().dimension);
}

std::vector<std::string> HashedTfidfEmbedder::features(std::string_view text_value) const {
    const auto tokens = text::tokenize(text_value);
    std::vector<std::string> out = tokens;
    if (config().ngram_max >= 2) {
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
            out.push_back(tokens[i] + '\x1f' + tokens[i + 1]);
        }
    }
    return out;
}

double HashedTfidfEmbedder::idf(std::string_view feature) const {
    auto it = df_.find(std::string(feature));
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(documents_)) / (1.0 + df)) + 1.0;
}

std::size_t HashedTfidfEmbedder::bucket(std::string_view feature) const {
    return static_cast<std::size_t>(splitmix64(fnv1a64(feature) ^ config().hash_seed) % dimension());
}

double HashedTfidfEmbedder::sign(std::string_view feature) const {
    return (splitmix64(fnv1a64(feature) ^ ~config().hash_seed) >> 63) != 0 ? -1.0 : 1.0;
}

EmbeddingVector HashedTfidfEmbedder::embed(std::string_view, std::string_view text_value) const {
    std::map<std::string, double> tf;
    for (auto& f : features(text_value)) tf[std::move(f)] += 1.0;
    EmbeddingVector v;
    v.values.assign(dimension(), 0.0);
    for (const auto& [feature, count] : tf) {
        v.values[bucket(feature)] += sign(feature) * count * idf(feature);
    }
    const double n = v.norm();
    if (n > 0.0) {
        for (double& x : v.values) x /= n;
    }
    return v;
}

ExternalEmbedder::ExternalEmbedder(EmbedderConfig cfg, EmbeddingTable table)
    : Embedder(std::move(cfg)), table_(std::move(table)) {
    if (!table_.empty()) dimension_ = table_.begin()->second.dimension();
    if (config().dimension > 0 && !table_.empty() &&
        dimension_ != static_cast<std::size_t>(config().dimension)) {
        fail(ErrorCode::DimensionMismatch,
             "embedding file has dimension " + std::to_string(dimension_) + " but config '" +
                 config().name + "' expects " + std::to_string(config().dimension));
    }
    if (table_.empty()) dimension_ = static_cast<std::size_t>(std::max(config().dimension, 0));
}

EmbeddingVector ExternalEmbedder::embed(std::string_view id, std::string_view) const {
    auto it = table_.find(std::string(id));
    if (it == table_.end()) {
        fail(ErrorCode::NotFound, "no external embedding for response " + std::string(id));
    }
    return it->second;
}

std::shared_ptr<const Embedder> fit_embedder(const EmbedderConfig& cfg,
                                             const std::vector<std::string>& corpus_texts) {
    cfg.validate();
    if (cfg.provider == EmbedderProvider::ExternalFile) {
        return std::make_shared<ExternalEmbedder>(cfg, load_external_embeddings(*cfg.file_path));
    }
    return std::make_shared<HashedTfidfEmbedder>(cfg, corpus_texts);
}

EmbeddingTable parse_external_embeddings(std::string_view content, const std::string& source_name) {
    EmbeddingTable table;
    std::size_t dim = 0;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto nl = content.find('\n', pos);
        std::string_view line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        if (!have_header) {
            constexpr std::string_view kPrefix = "#dim=";
            if (line.substr(0, kPrefix.size()) != kPrefix) {
                fail(ErrorCode::Parse, where + ": expected header \"#dim=<d>\"");
            }
            auto digits = line.substr(kPrefix.size());
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
            if (ec != std::errc() || p != digits.data() + digits.size() || dim == 0) {
                fail(ErrorCode::Parse, where + ": bad dimension in header");
            }
            have_header = true;
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (fields.size() != dim + 1) {
            fail(ErrorCode::Parse, where + ": ragged row with " + std::to_string(fields.size() - 1) +
                                       " values, expected " + std::to_string(dim));
        }
        EmbeddingVector v;
        v.values.reserve(dim);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            std::string field(fields[i]);
            char* end = nullptr;
            double x = std::strtod(field.c_str(), &end);
            if (field.empty() || end != field.c_str() + field.size()) {
                fail(ErrorCode::Parse, where + ": unparseable value '" + field + "'");
            }
            if (!std::isfinite(x)) fail(ErrorCode::Parse, where + ": non-finite value");
            v.values.push_back(x);
        }
        std::string id(fields[0]);
        if (id.empty()) fail(ErrorCode::Parse, where + ": empty response_id");
        if (!table.emplace(id, std::move(v)).second) {
            fail(ErrorCode::Parse, where + ": duplicate response_id " + id);
        }
    }
    if (!have_header) fail(ErrorCode::Parse, source_name + ": missing \"#dim=<d>\" header");
    return table;
}

EmbeddingTable load_external_embeddings(const std::filesystem::path& path) {
    return parse_external_embeddings(read_file(path), path.string());
}

std::string external_embeddings_to_tsv(const EmbeddingTable& table) {
    const std::size_t dim = table.empty() ? 0 : table.begin()->second.dimension();
    std::string out = "#dim=" + std::to_string(dim) + "\n";
    char buf[32];
    for (const auto& [id, v] : table) {
        if (v.dimension() != dim) fail(ErrorCode::DimensionMismatch, "ragged embedding table");
        out += id;
        for (double x : v.values) {
            std::snprintf(buf, sizeof buf, "\t%.17g", x);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void save_external_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
    write_file(path, external_embeddings_to_tsv(table));
}

}  // namespace asag
