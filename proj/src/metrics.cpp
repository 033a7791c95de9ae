#include <felp/metrics.hpp>
#include <felp/error.hpp>

#include <cmath>

namespace felp {

const char* to_string(Metric m) noexcept {
    switch (m) {
        case Metric::L1: return "L1";
        case Metric::L2: return "L2";
        case Metric::COSINE: return "Cosine";
        case Metric::HUTCHINSON: return "Hutchinson";
    }
    return "?";
}

Metric parse_metric(const std::string& s) {
    if (s == "L1" || s == "l1") return Metric::L1;
    if (s == "L2" || s == "l2") return Metric::L2;
    if (s == "Cosine" || s == "cosine" || s == "COSINE") return Metric::COSINE;
    if (s == "Hutchinson" || s == "hutchinson" || s == "HUTCHINSON") return Metric::HUTCHINSON;
    throw Error(ErrorKind::InvalidInput, "unknown metric '" + s + "'");
}

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::InvalidInput, "histogram lengths differ");
}

} // namespace

double dist_l1(std::span<const double> a, std::span<const double> b) {
    check_lengths(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::abs(a[i] - b[i]);
    return s;
}

double dist_l2(std::span<const double> a, std::span<const double> b) {
    check_lengths(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double dist_cosine(std::span<const double> a, std::span<const double> b) {
    check_lengths(a, b);
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (!(aa > 0.0) || !(bb > 0.0))
        throw Error(ErrorKind::InvalidInput, "cosine distance of a zero vector");
    return 1.0 - ab / (std::sqrt(aa) * std::sqrt(bb));
}

double dist_hutchinson(std::span<const double> a, std::span<const double> b) {
    check_lengths(a, b);
    double sa = 0.0, sb = 0.0, carry = 0.0, total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
        carry += a[i] - b[i];
        total += std::abs(carry);
    }
    if (std::abs(sa - 1.0) >= 1e-6 || std::abs(sb - 1.0) >= 1e-6)
        throw Error(ErrorKind::InvalidInput, "Hutchinson distance needs L1-normalized histograms");
    return total;
}

double distance(Metric m, std::span<const double> a, std::span<const double> b) {
    switch (m) {
        case Metric::L1: return dist_l1(a, b);
        case Metric::L2: return dist_l2(a, b);
        case Metric::COSINE: return dist_cosine(a, b);
        case Metric::HUTCHINSON: return dist_hutchinson(a, b);
    }
    throw Error(ErrorKind::InvalidInput, "unknown metric");
}

void ConfusionCounts::add(int truth, int predicted) noexcept {
    if (truth == 1)
        ++(predicted == 1 ? tp : fn);
    else
        ++(predicted == 1 ? fp : tn);
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

Scores scores(const ConfusionCounts& c) {
    Scores s;
    auto ratio = [&s](std::uint64_t num, std::uint64_t den) {
        if (den == 0) {
            s.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    s.sensitivity = ratio(c.tp, c.tp + c.fn);
    s.specificity = ratio(c.tn, c.tn + c.fp);
    s.precision = ratio(c.tp, c.tp + c.fp);
    s.bac = (s.sensitivity + s.specificity) / 2.0;
    const double pr_rc = s.precision + s.sensitivity;
    if (pr_rc > 0.0) {
        s.f1 = 2.0 * s.precision * s.sensitivity / pr_rc;
    } else {
        s.f1 = 0.0;
        s.degenerate = true;
    }
    return s;
}

} // namespace felp
