#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asag/corpus.hpp"
#include "asag/grader.hpp"

namespace asag {

struct VotePanel {
    std::vector<std::string> classifier_ids;
    Label tie_break = Label::Incorrect;

    void validate() const;
};

Label majority_vote(std::span<const Label> votes, Label tie_break);

// Expects exactly one prediction per panel classifier, in any order.
Label majority_vote(const VotePanel& panel, const std::vector<Prediction>& preds);

struct RidgeOptions {
    // Scale each column to zero mean / unit variance; constant columns map to 0.
    bool standardize = true;
    // Unpenalized intercept (centers features and target).
    bool fit_intercept = true;
};

struct RidgeModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 1.0;
    double decision_threshold = 0.5;
    std::vector<double> feature_means;   // subtracted before scaling
    std::vector<double> feature_scales;  // 0 marks a constant column
    // Per-classifier (label, max_similarity) pairs; empty for ad-hoc matrices.
    std::vector<std::string> classifier_ids;

    std::size_t feature_count() const { return weights.size(); }
};

RidgeModel fit_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                     double lambda, const RidgeOptions& options = {});

struct RidgeOutput {
    double score = 0.0;
    Label label = Label::Incorrect;
};

RidgeOutput predict_ridge(const RidgeModel& model, std::span<const double> row);

// Residual sum of squares of the fitted model on (features, labels).
double ridge_rss(const RidgeModel& model, const Eigen::MatrixXd& features,
                 const Eigen::VectorXd& labels);

// Row layout: [label_0, sim_0, label_1, sim_1, ...] in panel order, label 1 = Correct.
std::vector<double> stacker_features(const VotePanel& panel, const std::vector<Prediction>& preds);

// Lambda with the best Correct-class F1 on the validation rows; ties go to the larger lambda.
double select_lambda(const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
                     const Eigen::MatrixXd& val_x, const Eigen::VectorXd& val_y,
                     const std::vector<double>& grid, const RidgeOptions& options = {});

inline const std::vector<double>& default_lambda_grid() {
    static const std::vector<double> grid = {0.01, 0.1, 1.0, 10.0};
    return grid;
}

std::string ridge_to_json(const RidgeModel& model);
RidgeModel ridge_from_json(std::string_view json_text);
void save_ridge(const RidgeModel& model, const std::filesystem::path& path);
RidgeModel load_ridge(const std::filesystem::path& path);

}  // namespace asag
