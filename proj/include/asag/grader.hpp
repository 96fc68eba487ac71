#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asag/corpus.hpp"
#include "asag/embedding.hpp"

namespace asag {

inline constexpr double kDefaultThreshold = 0.5;

struct IndexEntry {
    std::string response_id;
    EmbeddingVector vector;
    Label label = Label::Incorrect;
    Provenance provenance = Provenance::Real;
};

struct Prediction {
    std::string response_id;
    Label predicted_label = Label::Incorrect;
    double max_similarity = -1.0;
    std::optional<std::string> matched_reference_id;
    std::string classifier_id;
    // Set when the response's item has no references at all.
    bool no_references = false;
};

struct NearestMatch {
    const IndexEntry* entry = nullptr;  // null when the item has no usable references
    double similarity = -1.0;
};

// Labeled reference embeddings grouped by item. Copies share the entry storage;
// augment() and with_threshold() return new indices and leave this one untouched.
class ReferenceIndex {
public:
    using Entries = std::map<std::string, std::vector<IndexEntry>>;

    ReferenceIndex(std::shared_ptr<const Embedder> embedder, double threshold,
                   std::string classifier_id, std::shared_ptr<const Entries> entries);

    const Embedder& embedder() const { return *embedder_; }
    std::shared_ptr<const Embedder> embedder_ptr() const { return embedder_; }
    double threshold() const { return threshold_; }
    const std::string& classifier_id() const { return classifier_id_; }

    std::size_t size() const;
    const Entries& entries() const { return *entries_; }
    const std::vector<IndexEntry>* entries_for(const std::string& item_id) const;

    ReferenceIndex with_threshold(double threshold) const;

    // Most similar same-item reference; exact ties go to the smallest response_id.
    // `exclude_id` skips one reference (used for leave-one-out scoring).
    NearestMatch nearest(const std::string& item_id, const EmbeddingVector& query,
                         const std::string* exclude_id = nullptr) const;

private:
    std::shared_ptr<const Embedder> embedder_;
    double threshold_;
    std::string classifier_id_;
    std::shared_ptr<const Entries> entries_;
};

ReferenceIndex build_index(const std::vector<Response>& train,
                           std::shared_ptr<const Embedder> embedder,
                           double threshold = kDefaultThreshold, std::string classifier_id = "");

Prediction predict(const ReferenceIndex& index, const Response& response);
// Same as predict() with a precomputed query embedding.
Prediction predict_with_vector(const ReferenceIndex& index, const Response& response,
                               const EmbeddingVector& query,
                               const std::string* exclude_id = nullptr);

// Adds gaming responses as Incorrect references. Rejects Correct-labeled input.
ReferenceIndex augment(const ReferenceIndex& index, const std::vector<Response>& gaming_train);

// Grid value maximizing Correct-class F1 on `validation`; ties go to the larger value.
double calibrate_threshold(const ReferenceIndex& index, const std::vector<Response>& validation,
                           const std::vector<double>& grid);

// Default calibration grid: 0.05 .. 0.95 in steps of 0.05.
std::vector<double> default_threshold_grid();

// JSONL: header record {threshold, classifier_id, embedder, embedder_fingerprint}
// followed by one record per entry.
std::string index_to_jsonl(const ReferenceIndex& index);
void save_index(const ReferenceIndex& index, const std::filesystem::path& path);
ReferenceIndex load_index(const std::filesystem::path& path,
                          std::shared_ptr<const Embedder> embedder);

}  // namespace asag
