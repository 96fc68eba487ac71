#include "asag/ensemble.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "asag/error.hpp"
#include "asag/hashing.hpp"

namespace asag {

void VotePanel::validate() const {
    if (classifier_ids.empty()) fail(ErrorCode::InvalidArgument, "vote panel is empty");
    std::set<std::string> seen;
    for (const auto& id : classifier_ids) {
        if (!seen.insert(id).second) {
            fail(ErrorCode::InvalidArgument, "duplicate classifier id '" + id + "' in panel");
        }
    }
}

Label majority_vote(std::span<const Label> votes, Label tie_break) {
    std::size_t correct = 0;
    for (Label v : votes) correct += v == Label::Correct ? 1 : 0;
    const std::size_t incorrect = votes.size() - correct;
    if (correct > incorrect) return Label::Correct;
    if (incorrect > correct) return Label::Incorrect;
    return tie_break;
}

namespace {

std::vector<const Prediction*> align(const VotePanel& panel, const std::vector<Prediction>& preds) {
    panel.validate();
    std::vector<const Prediction*> ordered;
    ordered.reserve(panel.classifier_ids.size());
    for (const auto& id : panel.classifier_ids) {
        const Prediction* found = nullptr;
        for (const auto& p : preds) {
            if (p.classifier_id != id) continue;
            if (found != nullptr) fail(ErrorCode::InvalidArgument, "two predictions from classifier " + id);
            found = &p;
        }
        if (found == nullptr) fail(ErrorCode::NotFound, "missing prediction from classifier " + id);
        ordered.push_back(found);
    }
    if (preds.size() != ordered.size()) {
        fail(ErrorCode::InvalidArgument, "prediction from a classifier outside the panel");
    }
    return ordered;
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) fail(ErrorCode::InvalidArgument, std::string("fit_ridge: non-finite ") + what);
}

}  // namespace

Label majority_vote(const VotePanel& panel, const std::vector<Prediction>& preds) {
    std::vector<Label> votes;
    for (const auto* p : align(panel, preds)) votes.push_back(p->predicted_label);
    return majority_vote(votes, panel.tie_break);
}

RidgeModel fit_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                     double lambda, const RidgeOptions& options) {
    const auto n = features.rows();
    const auto p = features.cols();
    if (n < 1) fail(ErrorCode::InvalidArgument, "fit_ridge: no rows");
    if (labels.size() != n) fail(ErrorCode::DimensionMismatch, "fit_ridge: label count differs from rows");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        fail(ErrorCode::InvalidArgument, "fit_ridge: lambda must be finite and >= 0");
    }
    require_finite(features, "features");
    require_finite(labels, "labels");

    RidgeModel model;
    model.lambda = lambda;
    model.feature_means.assign(static_cast<std::size_t>(p), 0.0);
    model.feature_scales.assign(static_cast<std::size_t>(p), 1.0);

    Eigen::MatrixXd x = features;
    Eigen::VectorXd y = labels;
    double y_mean = 0.0;
    if (options.fit_intercept) {
        y_mean = y.mean();
        y.array() -= y_mean;
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const double mean = options.fit_intercept || options.standardize ? x.col(j).mean() : 0.0;
        model.feature_means[ju] = mean;
        x.col(j).array() -= mean;
        if (options.standardize) {
            const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n));
            if (sd <= 1e-12) {
                model.feature_scales[ju] = 0.0;
                x.col(j).setZero();
            } else {
                model.feature_scales[ju] = sd;
                x.col(j) /= sd;
            }
        }
    }

    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += lambda;
    const Eigen::VectorXd rhs = x.transpose() * y;
    const Eigen::VectorXd w = gram.ldlt().solve(rhs);
    if (!w.allFinite()) fail(ErrorCode::Internal, "fit_ridge: solve produced non-finite weights");

    model.weights.assign(w.data(), w.data() + w.size());
    model.bias = y_mean;
    return model;
}

RidgeOutput predict_ridge(const RidgeModel& model, std::span<const double> row) {
    if (row.size() != model.weights.size()) {
        fail(ErrorCode::DimensionMismatch, "predict_ridge: row has " + std::to_string(row.size()) +
                                               " features, model expects " +
                                               std::to_string(model.weights.size()));
    }
    double score = model.bias;
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double mean = j < model.feature_means.size() ? model.feature_means[j] : 0.0;
        const double scale = j < model.feature_scales.size() ? model.feature_scales[j] : 1.0;
        const double xhat = scale == 0.0 ? 0.0 : (row[j] - mean) / scale;
        score += model.weights[j] * xhat;
    }
    return {score, score >= model.decision_threshold ? Label::Correct : Label::Incorrect};
}

double ridge_rss(const RidgeModel& model, const Eigen::MatrixXd& features,
                 const Eigen::VectorXd& labels) {
    double rss = 0.0;
    std::vector<double> row(static_cast<std::size_t>(features.cols()));
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j) row[static_cast<std::size_t>(j)] = features(i, j);
        const double r = predict_ridge(model, row).score - labels(i);
        rss += r * r;
    }
    return rss;
}

std::vector<double> stacker_features(const VotePanel& panel, const std::vector<Prediction>& preds) {
    std::vector<double> row;
    for (const auto* p : align(panel, preds)) {
        row.push_back(p->predicted_label == Label::Correct ? 1.0 : 0.0);
        row.push_back(p->max_similarity);
    }
    return row;
}

double select_lambda(const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
                     const Eigen::MatrixXd& val_x, const Eigen::VectorXd& val_y,
                     const std::vector<double>& grid, const RidgeOptions& options) {
    if (grid.empty()) fail(ErrorCode::InvalidArgument, "select_lambda: empty grid");
    double best_lambda = grid.front();
    double best_f1 = -1.0;
    std::vector<double> row(static_cast<std::size_t>(val_x.cols()));
    for (double lambda : grid) {
        const auto model = fit_ridge(train_x, train_y, lambda, options);
        std::size_t tp = 0, fp = 0, fn = 0;
        for (Eigen::Index i = 0; i < val_x.rows(); ++i) {
            for (Eigen::Index j = 0; j < val_x.cols(); ++j) row[static_cast<std::size_t>(j)] = val_x(i, j);
            const bool pred = predict_ridge(model, row).label == Label::Correct;
            const bool gold = val_y(i) >= 0.5;
            if (pred && gold) ++tp;
            else if (pred) ++fp;
            else if (gold) ++fn;
        }
        const auto denom = 2 * tp + fp + fn;
        const double f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
        if (f1 > best_f1 || (f1 == best_f1 && lambda > best_lambda)) {
            best_f1 = f1;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

std::string ridge_to_json(const RidgeModel& model) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json layout = nlohmann::ordered_json::array();
    for (const auto& id : model.classifier_ids) {
        layout.push_back({{"classifier_id", id}, {"features", {"label", "max_similarity"}}});
    }
    j["feature_layout"] = layout;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["lambda"] = model.lambda;
    j["decision_threshold"] = model.decision_threshold;
    j["feature_means"] = model.feature_means;
    j["feature_scales"] = model.feature_scales;
    return j.dump(2);
}

RidgeModel ridge_from_json(std::string_view json_text) {
    try {
        const auto j = nlohmann::json::parse(json_text);
        RidgeModel m;
        for (const auto& entry : j.at("feature_layout")) {
            m.classifier_ids.push_back(entry.at("classifier_id").get<std::string>());
        }
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.lambda = j.at("lambda").get<double>();
        m.decision_threshold = j.value("decision_threshold", 0.5);
        m.feature_means = j.value("feature_means", std::vector<double>(m.weights.size(), 0.0));
        m.feature_scales = j.value("feature_scales", std::vector<double>(m.weights.size(), 1.0));
        for (double w : m.weights) {
            if (!std::isfinite(w)) fail(ErrorCode::Validation, "ridge model has non-finite weights");
        }
        if (m.lambda < 0) fail(ErrorCode::Validation, "ridge model has negative lambda");
        if (!m.classifier_ids.empty() && m.weights.size() != 2 * m.classifier_ids.size()) {
            fail(ErrorCode::Validation, "ridge weights do not match the feature layout");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("ridge model: ") + e.what());
    }
}

void save_ridge(const RidgeModel& model, const std::filesystem::path& path) {
    write_file(path, ridge_to_json(model) + "\n");
}

RidgeModel load_ridge(const std::filesystem::path& path) {
    return ridge_from_json(read_file(path));
}

}  // namespace asag
