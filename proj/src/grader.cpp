#include "asag/grader.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "asag/error.hpp"
#include "asag/hashing.hpp"
#include "asag/text.hpp"

namespace asag {

ReferenceIndex::ReferenceIndex(std::shared_ptr<const Embedder> embedder, double threshold,
                               std::string classifier_id, std::shared_ptr<const Entries> entries)
    : embedder_(std::move(embedder)),
      threshold_(threshold),
      classifier_id_(std::move(classifier_id)),
      entries_(std::move(entries)) {
    if (!embedder_) fail(ErrorCode::InvalidArgument, "reference index needs an embedder");
    if (!std::isfinite(threshold_)) fail(ErrorCode::InvalidArgument, "threshold must be finite");
    if (!entries_) entries_ = std::make_shared<const Entries>();
    if (classifier_id_.empty()) classifier_id_ = embedder_->config().name;
    const auto dim = embedder_->dimension();
    for (const auto& [item, list] : *entries_) {
        for (const auto& e : list) {
            if (e.vector.dimension() != dim) {
                fail(ErrorCode::DimensionMismatch, "reference " + e.response_id + " has dimension " +
                                                       std::to_string(e.vector.dimension()) +
                                                       ", embedder has " + std::to_string(dim));
            }
        }
    }
}

std::size_t ReferenceIndex::size() const {
    std::size_t n = 0;
    for (const auto& [item, list] : *entries_) n += list.size();
    return n;
}

const std::vector<IndexEntry>* ReferenceIndex::entries_for(const std::string& item_id) const {
    auto it = entries_->find(item_id);
    return it == entries_->end() ? nullptr : &it->second;
}

ReferenceIndex ReferenceIndex::with_threshold(double threshold) const {
    return ReferenceIndex(embedder_, threshold, classifier_id_, entries_);
}

NearestMatch ReferenceIndex::nearest(const std::string& item_id, const EmbeddingVector& query,
                                     const std::string* exclude_id) const {
    NearestMatch best;
    const auto* list = entries_for(item_id);
    if (list == nullptr) return best;
    for (const auto& e : *list) {
        if (exclude_id != nullptr && e.response_id == *exclude_id) continue;
        const double s = cosine(query, e.vector);
        if (best.entry == nullptr || s > best.similarity ||
            (s == best.similarity && e.response_id < best.entry->response_id)) {
            best.entry = &e;
            best.similarity = s;
        }
    }
    return best;
}

ReferenceIndex build_index(const std::vector<Response>& train,
                           std::shared_ptr<const Embedder> embedder, double threshold,
                           std::string classifier_id) {
    if (!embedder) fail(ErrorCode::InvalidArgument, "build_index: null embedder");
    auto entries = std::make_shared<ReferenceIndex::Entries>();
    for (const auto& r : train) {
        (*entries)[r.item_id].push_back(
            {r.response_id, embedder->embed(r.response_id, r.text), r.gold_label, r.provenance});
    }
    return ReferenceIndex(std::move(embedder), threshold, std::move(classifier_id),
                          std::move(entries));
}

Prediction predict_with_vector(const ReferenceIndex& index, const Response& response,
                               const EmbeddingVector& query, const std::string* exclude_id) {
    Prediction p;
    p.response_id = response.response_id;
    p.classifier_id = index.classifier_id();
    const NearestMatch m = index.nearest(response.item_id, query, exclude_id);
    if (m.entry == nullptr) {
        p.no_references = true;
        return p;
    }
    p.max_similarity = m.similarity;
    if (m.similarity >= index.threshold()) {
        p.predicted_label = m.entry->label;
        p.matched_reference_id = m.entry->response_id;
    }
    return p;
}

Prediction predict(const ReferenceIndex& index, const Response& response) {
    return predict_with_vector(index, response,
                               index.embedder().embed(response.response_id, response.text));
}

ReferenceIndex augment(const ReferenceIndex& index, const std::vector<Response>& gaming_train) {
    auto entries = std::make_shared<ReferenceIndex::Entries>(index.entries());
    for (const auto& r : gaming_train) {
        if (r.gold_label != Label::Incorrect) {
            fail(ErrorCode::Validation,
                 "augment: response " + r.response_id + " is labeled correct");
        }
        (*entries)[r.item_id].push_back({r.response_id,
                                         index.embedder().embed(r.response_id, r.text),
                                         Label::Incorrect, r.provenance});
    }
    return ReferenceIndex(index.embedder_ptr(), index.threshold(), index.classifier_id(),
                          std::move(entries));
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(static_cast<double>(i) / 20.0);
    return grid;
}

double calibrate_threshold(const ReferenceIndex& index, const std::vector<Response>& validation,
                           const std::vector<double>& grid) {
    if (grid.empty()) fail(ErrorCode::InvalidArgument, "calibrate_threshold: empty grid");
    if (validation.empty()) fail(ErrorCode::InvalidArgument, "calibrate_threshold: empty validation set");
    for (double t : grid) {
        if (!(t >= -1.0 && t <= 1.0)) {
            fail(ErrorCode::InvalidArgument, "calibrate_threshold: grid values must lie in [-1,1]");
        }
    }
    // The nearest reference does not depend on the threshold, so compute it once.
    struct Scored {
        double similarity;
        std::optional<Label> nearest_label;
        Label gold;
    };
    std::vector<Scored> scored;
    scored.reserve(validation.size());
    for (const auto& r : validation) {
        const auto m = index.nearest(r.item_id, index.embedder().embed(r.response_id, r.text));
        scored.push_back({m.similarity,
                          m.entry ? std::optional<Label>(m.entry->label) : std::nullopt,
                          r.gold_label});
    }
    double best_tau = grid.front();
    double best_f1 = -1.0;
    for (double tau : grid) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (const auto& s : scored) {
            const bool predicted_correct =
                s.nearest_label && s.similarity >= tau && *s.nearest_label == Label::Correct;
            const bool gold_correct = s.gold == Label::Correct;
            if (predicted_correct && gold_correct) ++tp;
            else if (predicted_correct) ++fp;
            else if (gold_correct) ++fn;
        }
        const std::size_t denom = 2 * tp + fp + fn;
        const double f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
        if (f1 > best_f1 || (f1 == best_f1 && tau > best_tau)) {
            best_f1 = f1;
            best_tau = tau;
        }
    }
    return best_tau;
}

std::string index_to_jsonl(const ReferenceIndex& index) {
    nlohmann::ordered_json header;
    header["kind"] = "header";
    header["threshold"] = index.threshold();
    header["classifier_id"] = index.classifier_id();
    header["embedder"] = to_json(index.embedder().config());
    header["embedder_fingerprint"] = fingerprint(index.embedder().config());
    std::string out = header.dump() + "\n";
    for (const auto& [item_id, list] : index.entries()) {
        for (const auto& e : list) {
            nlohmann::ordered_json rec;
            rec["kind"] = "entry";
            rec["item_id"] = item_id;
            rec["response_id"] = e.response_id;
            rec["label"] = to_string(e.label);
            rec["provenance"] = to_string(e.provenance);
            rec["vector"] = e.vector.values;
            out += rec.dump();
            out += '\n';
        }
    }
    return out;
}

void save_index(const ReferenceIndex& index, const std::filesystem::path& path) {
    write_file(path, index_to_jsonl(index));
}

ReferenceIndex load_index(const std::filesystem::path& path,
                          std::shared_ptr<const Embedder> embedder) {
    if (!embedder) fail(ErrorCode::InvalidArgument, "load_index: null embedder");
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open index " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::optional<double> threshold;
    std::string classifier_id;
    auto entries = std::make_shared<ReferenceIndex::Entries>();
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto where = path.string() + ":" + std::to_string(line_no);
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
            const std::string kind = rec.at("kind").get<std::string>();
            if (kind == "header") {
                const auto fp = rec.at("embedder_fingerprint").get<std::string>();
                if (fp != fingerprint(embedder->config())) {
                    fail(ErrorCode::Validation, where + ": index was built with a different embedder");
                }
                threshold = rec.at("threshold").get<double>();
                classifier_id = rec.value("classifier_id", std::string());
            } else if (kind == "entry") {
                if (!threshold) fail(ErrorCode::Parse, where + ": entry before header");
                IndexEntry e;
                e.response_id = rec.at("response_id").get<std::string>();
                e.label = parse_label(rec.at("label").get<std::string>());
                e.provenance = parse_provenance(rec.at("provenance").get<std::string>());
                e.vector.values = rec.at("vector").get<std::vector<double>>();
                (*entries)[rec.at("item_id").get<std::string>()].push_back(std::move(e));
            } else {
                fail(ErrorCode::Parse, where + ": unknown record kind '" + kind + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Parse, where + ": " + e.what());
        }
    }
    if (!threshold) fail(ErrorCode::Parse, path.string() + ": missing header");
    return ReferenceIndex(std::move(embedder), *threshold, classifier_id, std::move(entries));
}

}  // namespace asag
