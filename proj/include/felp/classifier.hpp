#pragma once

#include <felp/metrics.hpp>
#include <felp/retrieval.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace felp {

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 0.0;
    int epochs = 0;
    std::uint64_t seed = 0;

    double decision(std::span<const double> x) const;
};

struct SvmOptions {
    double lambda = 1e-4;
    int epochs = 10;
    std::uint64_t seed = 0;
    bool shuffle = true;
    /// Constant appended to every sample; its weight is the (regularized) bias.
    double bias_feature = 1.0;
    /// Called before each update with (step, decision value of the visited sample).
    std::function<void(std::size_t, double)> on_step;
};

/// Pegasos primal sub-gradient descent on lambda/2 |w|^2 + mean hinge loss, labels 1 -> +1, 0 -> -1.
/// The returned weights average the iterates of the final epoch.
LinearModel svm_train(const DescriptorIndex& train, const SvmOptions& options);

/// 1 iff w.x + b > 0.
int svm_predict(const LinearModel& model, const Descriptor& d);

ConfusionCounts svm_counts(const LinearModel& model, const DescriptorIndex& data);

struct GridPoint {
    double lambda = 0.0;
    Scores val;
};

struct GridResult {
    double best_lambda = 0.0;
    Scores best_val;
    LinearModel model;
    std::vector<GridPoint> points;
};

/// Picks the lambda with the best validation BAC; ties go to the smaller lambda, then the earlier entry.
GridResult grid_search(const DescriptorIndex& train, const DescriptorIndex& val, std::span<const double> lambdas,
                       SvmOptions options);

/// Text record: provenance comments, then "length", "bias", "lambda", "epochs", "seed", "weights ...".
void write_model(std::ostream& out, const LinearModel& model, std::span<const std::string> provenance = {});
LinearModel read_model(std::istream& in);

} // namespace felp
