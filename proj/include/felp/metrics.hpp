#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace felp {

enum class Metric { L1, L2, COSINE, HUTCHINSON };

const char* to_string(Metric m) noexcept;
Metric parse_metric(const std::string& s);

double dist_l1(std::span<const double> a, std::span<const double> b);
double dist_l2(std::span<const double> a, std::span<const double> b);
/// 1 - cos(a, b). Throws InvalidInput on a zero vector.
double dist_cosine(std::span<const double> a, std::span<const double> b);
/// 1-D earth mover's distance with unit spacing between adjacent bins: sum_i |cumsum(a - b)_i|.
/// Both inputs must sum to 1 within 1e-6.
double dist_hutchinson(std::span<const double> a, std::span<const double> b);

double distance(Metric m, std::span<const double> a, std::span<const double> b);

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    /// Records one prediction; label 1 is the positive class.
    void add(int truth, int predicted) noexcept;
    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept;
};

/// Scores with a degenerate denominator are reported as 0 and flagged.
struct Scores {
    double f1 = 0.0;
    double bac = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double precision = 0.0;
    bool degenerate = false;
};

Scores scores(const ConfusionCounts& c);

} // namespace felp
