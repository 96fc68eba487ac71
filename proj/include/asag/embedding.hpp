#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace asag {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }
    double norm() const;
    bool is_zero() const;

    bool operator==(const EmbeddingVector&) const = default;
};

// Clamped to [-1, 1]; 0 when either side is the zero vector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

enum class EmbedderProvider { HashedTfidf, ExternalFile };

struct EmbedderConfig {
    std::string name = "hashed";
    EmbedderProvider provider = EmbedderProvider::HashedTfidf;
    int dimension = 256;
    std::uint64_t hash_seed = 0;
    int ngram_max = 1;
    std::optional<std::filesystem::path> file_path;

    void validate() const;
};

nlohmann::json to_json(const EmbedderConfig& cfg);
EmbedderConfig embedder_config_from_json(const nlohmann::json& j);
// sha256 over the canonical JSON form.
std::string fingerprint(const EmbedderConfig& cfg);

// Five distinct hashed configurations standing in for a panel of base models.
std::vector<EmbedderConfig> default_embedder_configs();

class Embedder {
public:
    virtual ~Embedder() = default;

    const EmbedderConfig& config() const { return config_; }
    virtual std::size_t dimension() const = 0;

    // `id` is the response_id; only providers backed by precomputed vectors use it.
    virtual EmbeddingVector embed(std::string_view id, std::string_view text) const = 0;

protected:
    explicit Embedder(EmbedderConfig cfg) : config_(std::move(cfg)) {}

private:
    EmbedderConfig config_;
};

class HashedTfidfEmbedder final : public Embedder {
public:
    HashedTfidfEmbedder(EmbedderConfig cfg, const std::vector<std::string>& corpus_texts);

    std::size_t dimension() const override;
    EmbeddingVector embed(std::string_view id, std::string_view text) const override;

    // ln((1+N)/(1+df)) + 1; unseen features get df = 0.
    double idf(std::string_view feature) const;
    std::size_t document_count() const { return documents_; }

    std::vector<std::string> features(std::string_view text) const;
    std::size_t bucket(std::string_view feature) const;
    double sign(std::string_view feature) const;

private:
    std::size_t documents_ = 0;
    std::unordered_map<std::string, std::size_t> df_;
};

using EmbeddingTable = std::map<std::string, EmbeddingVector>;

class ExternalEmbedder final : public Embedder {
public:
    ExternalEmbedder(EmbedderConfig cfg, EmbeddingTable table);

    std::size_t dimension() const override { return dimension_; }
    // Looks up by id; throws NotFound when the id has no vector.
    EmbeddingVector embed(std::string_view id, std::string_view text) const override;

private:
    EmbeddingTable table_;
    std::size_t dimension_ = 0;
};

std::shared_ptr<const Embedder> fit_embedder(const EmbedderConfig& cfg,
                                             const std::vector<std::string>& corpus_texts);

// TSV: first line "#dim=<d>", then response_id followed by d tab-separated floats.
EmbeddingTable load_external_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_external_embeddings(std::string_view content,
                                         const std::string& source_name = "<memory>");
std::string external_embeddings_to_tsv(const EmbeddingTable& table);
void save_external_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

}  // namespace asag
