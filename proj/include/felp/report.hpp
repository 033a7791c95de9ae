#pragma once

#include <felp/descriptor.hpp>
#include <felp/metrics.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace felp {

/// Row label in the published tables, e.g. "F-ELP9 + SS".
std::string method_label(Method method, int n, StainMode mode);

struct ReferenceScore {
    double f1 = 0.0;
    double bac = 0.0;
};

/// Published retrieval score for (method label, k, metric), if one exists.
std::optional<ReferenceScore> published_retrieval(const std::string& label, int k, Metric metric);
/// Published classification score for a method label, if one exists.
std::optional<ReferenceScore> published_classification(const std::string& label);

struct SearchRow {
    std::string method;
    int k = 1;
    Metric metric = Metric::L1;
    ConfusionCounts counts;
    Scores scores;
};

struct ClassifyRow {
    std::string method;
    double lambda = 0.0;
    Scores val;
    ConfusionCounts test_counts;
    Scores test;
};

void write_search_csv(std::ostream& out, std::span<const SearchRow> rows, std::span<const std::string> provenance);
std::vector<SearchRow> read_search_csv(std::istream& in);
/// One table per k, rows = methods, columns = metric F1/BAC; best metric per row in bold,
/// followed by the published values for the same cells.
void write_search_markdown(std::ostream& out, std::span<const SearchRow> rows, std::span<const std::string> provenance);

void write_classify_csv(std::ostream& out, std::span<const ClassifyRow> rows, std::span<const std::string> provenance);
std::vector<ClassifyRow> read_classify_csv(std::istream& in);
void write_classify_markdown(std::ostream& out, std::span<const ClassifyRow> rows,
                             std::span<const std::string> provenance);

} // namespace felp
