#include "asag/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "asag/error.hpp"
#include "asag/hashing.hpp"

namespace asag {

PcaModel pca_fit(const std::vector<EmbeddingVector>& vectors) {
    if (vectors.size() < 3) fail(ErrorCode::InvalidArgument, "pca_fit: need at least 3 vectors");
    const auto d = vectors.front().dimension();
    if (d < 2) fail(ErrorCode::InvalidArgument, "pca_fit: dimension must be >= 2");
    const auto n = vectors.size();

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        if (vectors[i].dimension() != d) fail(ErrorCode::DimensionMismatch, "pca_fit: ragged input");
        for (std::size_t j = 0; j < d; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i].values[j];
        }
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    const double total = cov.trace();
    if (!(total > 0.0)) fail(ErrorCode::Validation, "pca_fit: all points are identical (rank 0)");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) fail(ErrorCode::Internal, "pca_fit: eigensolver failed");
    // Eigenvalues come back ascending.
    const auto& values = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + d);
    for (int c = 0; c < 2; ++c) {
        const Eigen::Index col = static_cast<Eigen::Index>(d) - 1 - c;
        Eigen::VectorXd v = vecs.col(col);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        model.components[static_cast<std::size_t>(c)].assign(v.data(), v.data() + d);
        const double lambda = std::max(values(col), 0.0);
        model.explained_variance[static_cast<std::size_t>(c)] = lambda;
        model.explained_variance_ratio[static_cast<std::size_t>(c)] = lambda / total;
    }
    return model;
}

std::array<double, 2> pca_transform(const PcaModel& model, const EmbeddingVector& v) {
    if (v.dimension() != model.mean.size()) fail(ErrorCode::DimensionMismatch, "pca_transform: dimension mismatch");
    std::array<double, 2> out{};
    for (std::size_t c = 0; c < 2; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < v.values.size(); ++j) {
            s += (v.values[j] - model.mean[j]) * model.components[c][j];
        }
        out[c] = s;
    }
    return out;
}

PcaProjection pca_project(const std::vector<Response>& responses,
                          const std::vector<EmbeddingVector>& vectors) {
    if (responses.size() != vectors.size()) {
        fail(ErrorCode::InvalidArgument, "pca_project: responses and vectors differ in count");
    }
    PcaProjection proj;
    proj.model = pca_fit(vectors);
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const auto xy = pca_transform(proj.model, vectors[i]);
        proj.points.push_back({responses[i].response_id, xy[0], xy[1], responses[i].gold_label,
                               responses[i].provenance});
    }
    return proj;
}

double overlap_index(const PcaProjection& projection) {
    std::vector<const ProjectedPoint*> gaming, real;
    bool has_real_correct = false;
    for (const auto& p : projection.points) {
        if (is_gaming(p.provenance)) {
            gaming.push_back(&p);
        } else {
            real.push_back(&p);
            has_real_correct = has_real_correct || p.gold_label == Label::Correct;
        }
    }
    if (gaming.empty()) fail(ErrorCode::InvalidArgument, "overlap_index: no gaming points");
    if (!has_real_correct) fail(ErrorCode::InvalidArgument, "overlap_index: no real correct points");

    std::size_t hits = 0;
    for (const auto* g : gaming) {
        double best = std::numeric_limits<double>::infinity();
        bool best_correct = false;
        for (const auto* r : real) {
            const double dx = g->x - r->x;
            const double dy = g->y - r->y;
            const double dist = dx * dx + dy * dy;
            const bool correct = r->gold_label == Label::Correct;
            if (dist < best || (dist == best && correct)) {
                best = dist;
                best_correct = correct;
            }
        }
        hits += best_correct ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(gaming.size());
}

std::string projection_csv(const PcaProjection& projection) {
    std::string out = "x,y,gold_label,provenance\n";
    char buf[96];
    for (const auto& p : projection.points) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,", p.x, p.y);
        out += buf;
        out += to_string(p.gold_label);
        out += ',';
        out += to_string(p.provenance);
        out += '\n';
    }
    return out;
}

std::string safe_file_stem(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.';
        if (!ok) c = '_';
    }
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

namespace {

constexpr const char* kPlotScript = R"(#!/usr/bin/env python3
"""Scatter plot of a per-item PCA CSV (x,y,gold_label,provenance)."""
import csv
import sys

import matplotlib.pyplot as plt


def main(path, out=None):
    groups = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            key = row["provenance"] if row["provenance"] != "real" else "real-" + row["gold_label"]
            groups.setdefault(key, ([], []))
            groups[key][0].append(float(row["x"]))
            groups[key][1].append(float(row["y"]))
    for key, (xs, ys) in sorted(groups.items()):
        plt.scatter(xs, ys, s=8, label=key, alpha=0.7)
    plt.xlabel("PC1")
    plt.ylabel("PC2")
    plt.legend()
    if out:
        plt.savefig(out, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main(*sys.argv[1:3])
)";

}  // namespace

std::vector<ItemPcaSummary> write_item_pcas(const std::vector<Response>& responses,
                                            const Embedder& embedder,
                                            const std::vector<std::string>& item_ids,
                                            const std::filesystem::path& dir) {
    std::map<std::string, std::vector<const Response*>> by_item;
    for (const auto& r : responses) by_item[r.item_id].push_back(&r);
    std::vector<std::string> targets = item_ids;
    if (targets.empty()) {
        for (const auto& [id, list] : by_item) targets.push_back(id);
    }
    for (const auto& id : targets) {
        if (by_item.count(id) == 0) fail(ErrorCode::NotFound, "pca: unknown item '" + id + "'");
    }

    std::vector<ItemPcaSummary> summaries;
    for (const auto& id : targets) {
        std::vector<Response> members;
        std::vector<EmbeddingVector> vectors;
        for (const auto* r : by_item[id]) {
            members.push_back(*r);
            vectors.push_back(embedder.embed(r->response_id, r->text));
        }
        const auto proj = pca_project(members, vectors);
        ItemPcaSummary s;
        s.item_id = id;
        s.points = proj.points.size();
        s.explained_variance_ratio = proj.model.explained_variance_ratio;
        const bool has_gaming = std::any_of(members.begin(), members.end(),
                                            [](const Response& r) { return is_gaming(r.provenance); });
        const bool has_correct = std::any_of(members.begin(), members.end(), [](const Response& r) {
            return !is_gaming(r.provenance) && r.gold_label == Label::Correct;
        });
        if (has_gaming && has_correct) s.overlap = overlap_index(proj);

        const auto stem = safe_file_stem(id);
        write_file(dir / (stem + ".csv"), projection_csv(proj));
        nlohmann::ordered_json side;
        side["item_id"] = id;
        side["points"] = s.points;
        side["explained_variance_ratio"] = {s.explained_variance_ratio[0], s.explained_variance_ratio[1]};
        side["overlap_index"] = s.overlap ? nlohmann::ordered_json(*s.overlap) : nlohmann::ordered_json(nullptr);
        write_file(dir / (stem + ".json"), side.dump(2) + "\n");
        summaries.push_back(std::move(s));
    }
    write_file(dir / "plot_pca.py", kPlotScript);
    return summaries;
}

}  // namespace asag
