#include <doctest.h>

#include <felp/classifier.hpp>
#include <felp/error.hpp>

#include <algorithm>
#include <random>
#include <sstream>

using namespace felp;

namespace {

Descriptor make(std::vector<double> bins) {
    Descriptor d;
    d.bins = std::move(bins);
    return d;
}

// Two clusters separated along the first axis with a margin of at least one.
DescriptorIndex separable(std::size_t count, std::mt19937_64& rng, const std::string& prefix) {
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    DescriptorIndex idx;
    for (std::size_t i = 0; i < count; ++i) {
        const int label = static_cast<int>(i % 2);
        const double x = (label == 1 ? 2.0 : -2.0) + jitter(rng);
        idx.add({prefix + std::to_string(i), label, make({x, jitter(rng)})});
    }
    return idx;
}

double accuracy(const LinearModel& m, const DescriptorIndex& data) {
    const auto c = svm_counts(m, data);
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

// Primal objective evaluated independently of the trainer.
double objective(const LinearModel& m, const DescriptorIndex& data, double lambda) {
    double norm2 = m.bias * m.bias;
    for (double w : m.weights)
        norm2 += w * w;
    double hinge = 0.0;
    for (const auto& e : data.entries()) {
        double s = m.bias;
        for (std::size_t j = 0; j < m.weights.size(); ++j)
            s += m.weights[j] * e.descriptor.bins[j];
        const double y = e.label == 1 ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - y * s);
    }
    return lambda / 2.0 * norm2 + hinge / static_cast<double>(data.size());
}

} // namespace

TEST_CASE("separable toy set is learned exactly") {
    std::mt19937_64 rng(1);
    const auto train = separable(60, rng, "t");
    SvmOptions opt;
    opt.lambda = 1e-2;
    opt.epochs = 20;
    const auto model = svm_train(train, opt);
    CHECK(model.weights.size() == 2);
    CHECK(accuracy(model, train) == 1.0);
    CHECK(model.lambda == 1e-2);
    CHECK(model.epochs == 20);
}

TEST_CASE("identical features give the majority fraction") {
    DescriptorIndex idx;
    for (int i = 0; i < 10; ++i)
        idx.add({"p" + std::to_string(i), i < 7 ? 1 : 0, make({0.3, 0.7})});
    SvmOptions opt;
    opt.lambda = 0.1;
    opt.epochs = 30;
    CHECK(accuracy(svm_train(idx, opt), idx) == doctest::Approx(0.7));
}

TEST_CASE("objective trends downward over epochs") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    DescriptorIndex idx;
    for (int i = 0; i < 200; ++i) {
        const int label = i % 3 == 0 ? 1 : 0;
        std::vector<double> x(5);
        for (auto& v : x)
            v = g(rng) + (label ? 0.4 : -0.4);
        idx.add({"r" + std::to_string(i), label, make(x)});
    }
    SvmOptions opt;
    opt.lambda = 1e-2;
    std::vector<double> obj;
    for (int e = 1; e <= 12; ++e) {
        opt.epochs = e;
        obj.push_back(objective(svm_train(idx, opt), idx, opt.lambda));
    }
    const double early = (obj[0] + obj[1] + obj[2]) / 3.0;
    const double late = (obj[9] + obj[10] + obj[11]) / 3.0;
    CHECK(late < early);
    CHECK(obj.back() <= obj.front());
}

TEST_CASE("svm_predict boundary rules") {
    LinearModel m;
    m.weights = {1.0, -1.0};
    m.bias = 0.0;
    CHECK(svm_predict(m, make({3.0, 1.0})) == 1);
    CHECK(svm_predict(m, make({1.0, 3.0})) == 0);
    CHECK(svm_predict(m, make({1.0, 1.0})) == 0);
    m.bias = 2.0;
    CHECK(m.decision(std::vector<double>{0.0, 0.0}) == 2.0);
    CHECK_THROWS_AS(svm_predict(m, make({1.0})), Error);
}

TEST_CASE("svm_train input validation") {
    DescriptorIndex one_class;
    one_class.add({"a", 1, make({1.0})});
    one_class.add({"b", 1, make({2.0})});
    CHECK_THROWS_AS(svm_train(one_class, SvmOptions{}), Error);
    CHECK_THROWS_AS(svm_train(DescriptorIndex{}, SvmOptions{}), Error);
    std::mt19937_64 rng(3);
    SvmOptions bad;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(svm_train(separable(4, rng, "x"), bad), Error);
}

TEST_CASE("training is reproducible and seed-dependent") {
    std::mt19937_64 rng(4);
    const auto train = separable(50, rng, "t");
    SvmOptions opt;
    opt.seed = 77;
    const auto a = svm_train(train, opt);
    const auto b = svm_train(train, opt);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    opt.seed = 78;
    const auto c = svm_train(train, opt);
    CHECK(c.weights != a.weights);
}

TEST_CASE("hand-traced first epoch and its scaling homogeneity") {
    // z = (x, 1), lambda = 1, no shuffling; every step violates the margin.
    //   t=1: score 0,     w = (1/2, 1)
    //   t=2: score 3/4,   w = (1/2, 0)
    //   t=3: score 1/8,   w = (5/12, 1/3)
    // Averaged weights: (17/36, 4/9).
    DescriptorIndex idx;
    idx.add({"a", 1, make({0.5})});
    idx.add({"b", 0, make({-0.5})});
    idx.add({"c", 1, make({0.25})});
    std::vector<double> seen;
    SvmOptions opt;
    opt.lambda = 1.0;
    opt.epochs = 1;
    opt.shuffle = false;
    opt.on_step = [&](std::size_t, double s) { seen.push_back(s); };
    const auto model = svm_train(idx, opt);
    CHECK(seen == std::vector<double>{0.0, 0.75, 0.125});
    CHECK(model.weights[0] == doctest::Approx(17.0 / 36.0).epsilon(1e-15));
    CHECK(model.bias == doctest::Approx(4.0 / 9.0).epsilon(1e-15));

    // x -> c x (bias feature included) and lambda -> lambda / c^2 scales every
    // decision value by c^4, so the prediction signs of the epoch are unchanged.
    const double c = 0.5;
    DescriptorIndex scaled;
    for (const auto& e : idx.entries())
        scaled.add({e.patch_id, e.label, make({c * e.descriptor.bins[0]})});
    std::vector<double> seen_scaled;
    SvmOptions sopt = opt;
    sopt.lambda = opt.lambda / (c * c);
    sopt.bias_feature = c;
    sopt.on_step = [&](std::size_t, double s) { seen_scaled.push_back(s); };
    svm_train(scaled, sopt);
    REQUIRE(seen_scaled.size() == seen.size());
    for (std::size_t i = 0; i < seen.size(); ++i) {
        CHECK(seen_scaled[i] == seen[i] * c * c * c * c);
        CHECK((seen_scaled[i] > 0) == (seen[i] > 0));
    }
}

TEST_CASE("grid_search selection rules") {
    std::mt19937_64 rng(5);
    const auto train = separable(40, rng, "t");
    const auto val = separable(20, rng, "v");
    SvmOptions opt;
    const double single[] = {1e-3};
    const auto r1 = grid_search(train, val, single, opt);
    CHECK(r1.best_lambda == 1e-3);
    CHECK(r1.points.size() == 1);

    const double dup[] = {1e-2, 1e-2};
    const auto r2 = grid_search(train, val, dup, opt);
    CHECK(r2.best_lambda == 1e-2);
    CHECK(r2.points.size() == 2);

    const double grid[] = {1e-1, 1e-2, 1e-3};
    const auto r3 = grid_search(train, val, grid, opt);
    CHECK(r3.best_val.bac == 1.0);
    // every lambda separates this data, so the smallest one wins the tie
    CHECK(r3.best_lambda == 1e-3);

    CHECK_THROWS_AS(grid_search(train, val, std::span<const double>{}, opt), Error);
}

TEST_CASE("model record round trip") {
    LinearModel m;
    m.weights = {0.1, -2.5e-7, 3.0};
    m.bias = -0.3;
    m.lambda = 1e-4;
    m.epochs = 7;
    m.seed = 123456789012345ULL;
    std::ostringstream out;
    write_model(out, m);
    std::istringstream in(out.str());
    const auto back = read_model(in);
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.lambda == m.lambda);
    CHECK(back.epochs == m.epochs);
    CHECK(back.seed == m.seed);
    std::istringstream bad("length 2\nweights 1\n");
    CHECK_THROWS_AS(read_model(bad), Error);
}
