#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asag/corpus.hpp"
#include "asag/embedding.hpp"

namespace asag {

struct PcaModel {
    std::vector<double> mean;
    std::array<std::vector<double>, 2> components;  // orthonormal, dimension d
    std::array<double, 2> explained_variance_ratio{};
    std::array<double, 2> explained_variance{};
};

struct ProjectedPoint {
    std::string response_id;
    double x = 0.0;
    double y = 0.0;
    Label gold_label = Label::Incorrect;
    Provenance provenance = Provenance::Real;
};

struct PcaProjection {
    PcaModel model;
    std::vector<ProjectedPoint> points;
};

// Top-two principal axes of the sample covariance. Each axis is signed so its
// largest-magnitude entry is positive. Needs >= 3 vectors of dimension >= 2
// and throws on rank-0 data.
PcaModel pca_fit(const std::vector<EmbeddingVector>& vectors);

std::array<double, 2> pca_transform(const PcaModel& model, const EmbeddingVector& v);

PcaProjection pca_project(const std::vector<Response>& responses,
                          const std::vector<EmbeddingVector>& vectors);

// Share of gaming points whose nearest real point (Euclidean, 2-PC plane) is a
// Correct one. Distance ties resolve toward Correct.
double overlap_index(const PcaProjection& projection);

std::string projection_csv(const PcaProjection& projection);

// Per-item PCA of every response of the item: writes <dir>/<item>.csv and
// <dir>/<item>.json (ratios, overlap index) plus <dir>/plot_pca.py.
struct ItemPcaSummary {
    std::string item_id;
    std::size_t points = 0;
    std::array<double, 2> explained_variance_ratio{};
    std::optional<double> overlap;
};

std::vector<ItemPcaSummary> write_item_pcas(const std::vector<Response>& responses,
                                            const Embedder& embedder,
                                            const std::vector<std::string>& item_ids,
                                            const std::filesystem::path& dir);

std::string safe_file_stem(const std::string& id);

}  // namespace asag
