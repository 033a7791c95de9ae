#include <felp/classifier.hpp>
#include <felp/error.hpp>
#include <felp/format.hpp>
#include <felp/random.hpp>

#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace felp {

double LinearModel::decision(std::span<const double> x) const {
    if (x.size() != weights.size())
        throw Error(ErrorKind::InvalidInput, "descriptor length does not match the model");
    double s = bias;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += weights[i] * x[i];
    return s;
}

LinearModel svm_train(const DescriptorIndex& train, const SvmOptions& options) {
    if (!(options.lambda > 0.0))
        throw Error(ErrorKind::InvalidInput, "lambda must be positive");
    if (options.epochs < 1)
        throw Error(ErrorKind::InvalidInput, "epochs must be >= 1");
    if (train.empty())
        throw Error(ErrorKind::InvalidInput, "empty training set");
    bool has_pos = false, has_neg = false;
    for (const auto& e : train.entries())
        (e.label == 1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw Error(ErrorKind::InvalidInput, "training data must contain both classes");

    const std::size_t dim = train.dimension();
    const double lambda = options.lambda;
    const double xb = options.bias_feature;
    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    std::vector<double> avg(dim, 0.0);
    double avg_b = 0.0;

    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;

    std::size_t t = 0;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        if (options.shuffle)
            seeded_shuffle(order, rng);
        const bool last = epoch + 1 == options.epochs;
        for (std::size_t idx : order) {
            ++t;
            const auto& x = train[idx].descriptor.bins;
            const double y = train[idx].label == 1 ? 1.0 : -1.0;
            double score = b * xb;
            for (std::size_t j = 0; j < dim; ++j)
                score += w[j] * x[j];
            if (options.on_step)
                options.on_step(t, score);

            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double shrink = 1.0 - eta * lambda;
            for (double& wj : w)
                wj *= shrink;
            b *= shrink;
            if (y * score < 1.0) {
                for (std::size_t j = 0; j < dim; ++j)
                    w[j] += eta * y * x[j];
                b += eta * y * xb;
            }
            if (last) {
                for (std::size_t j = 0; j < dim; ++j)
                    avg[j] += w[j];
                avg_b += b;
            }
        }
    }

    const double m = static_cast<double>(train.size());
    LinearModel model;
    model.weights.resize(dim);
    for (std::size_t j = 0; j < dim; ++j)
        model.weights[j] = avg[j] / m;
    model.bias = avg_b / m * xb;
    model.lambda = lambda;
    model.epochs = options.epochs;
    model.seed = options.seed;
    return model;
}

int svm_predict(const LinearModel& model, const Descriptor& d) {
    return model.decision(d.bins) > 0.0 ? 1 : 0;
}

ConfusionCounts svm_counts(const LinearModel& model, const DescriptorIndex& data) {
    ConfusionCounts c;
    for (const auto& e : data.entries())
        c.add(e.label, svm_predict(model, e.descriptor));
    return c;
}

GridResult grid_search(const DescriptorIndex& train, const DescriptorIndex& val, std::span<const double> lambdas,
                       SvmOptions options) {
    if (lambdas.empty())
        throw Error(ErrorKind::InvalidInput, "lambda grid is empty");
    GridResult result;
    bool have = false;
    for (double lambda : lambdas) {
        options.lambda = lambda;
        LinearModel model = svm_train(train, options);
        const Scores s = scores(svm_counts(model, val));
        result.points.push_back({lambda, s});
        if (!have || s.bac > result.best_val.bac || (s.bac == result.best_val.bac && lambda < result.best_lambda)) {
            have = true;
            result.best_lambda = lambda;
            result.best_val = s;
            result.model = std::move(model);
        }
    }
    return result;
}

void write_model(std::ostream& out, const LinearModel& model, std::span<const std::string> provenance) {
    for (const auto& line : provenance)
        out << "# " << line << '\n';
    out << "length " << model.weights.size() << '\n';
    out << "bias " << format_double(model.bias) << '\n';
    out << "lambda " << format_double(model.lambda) << '\n';
    out << "epochs " << model.epochs << '\n';
    out << "seed " << model.seed << '\n';
    out << "weights";
    for (double w : model.weights)
        out << ' ' << format_double(w);
    out << '\n';
}

LinearModel read_model(std::istream& in) {
    LinearModel model;
    std::size_t length = 0;
    bool have_weights = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "length") ss >> length;
        else if (key == "bias") ss >> model.bias;
        else if (key == "lambda") ss >> model.lambda;
        else if (key == "epochs") ss >> model.epochs;
        else if (key == "seed") ss >> model.seed;
        else if (key == "weights") {
            double w = 0.0;
            while (ss >> w)
                model.weights.push_back(w);
            have_weights = true;
        } else {
            throw Error(ErrorKind::InvalidInput, "model record: unknown key '" + key + "'");
        }
        if (ss.fail() && !ss.eof())
            throw Error(ErrorKind::InvalidInput, "model record: malformed '" + key + "' line");
    }
    if (!have_weights || model.weights.size() != length)
        throw Error(ErrorKind::InvalidInput, "model record: weight count does not match length");
    return model;
}

} // namespace felp
