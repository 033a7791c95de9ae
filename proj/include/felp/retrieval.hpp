#pragma once

#include <felp/descriptor.hpp>
#include <felp/metrics.hpp>

#include <span>
#include <string>
#include <vector>

namespace felp {

struct IndexEntry {
    std::string patch_id;
    int label = 0;
    Descriptor descriptor;
};

/// Brute-force gallery of uniform descriptors.
class DescriptorIndex {
public:
    explicit DescriptorIndex(Metric metric = Metric::L1) : metric_(metric) {}
    DescriptorIndex(std::vector<IndexEntry> entries, Metric metric);

    static DescriptorIndex from_records(std::span<const DescriptorRecord> records, Metric metric);

    void add(IndexEntry entry);

    Metric metric() const noexcept { return metric_; }
    void set_metric(Metric m) noexcept { metric_ = m; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t dimension() const noexcept { return entries_.empty() ? 0 : entries_.front().descriptor.bins.size(); }
    const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
    const IndexEntry& operator[](std::size_t i) const { return entries_[i]; }

    bool compatible(const Descriptor& d) const noexcept {
        return entries_.empty() || entries_.front().descriptor.compatible_with(d);
    }

private:
    std::vector<IndexEntry> entries_;
    Metric metric_;
};

struct Neighbor {
    std::string patch_id;
    double distance = 0.0;
    int label = 0;
};

/// k smallest distances in ascending order; equal distances ordered by patch id.
std::vector<Neighbor> knn_query(const DescriptorIndex& index, const Descriptor& query, std::size_t k);

/// Majority vote; a tied vote takes the nearest neighbour's label.
int knn_label(std::span<const Neighbor> neighbors);

/// One query pass per test entry serves every k in `ks` (each k <= gallery size).
std::vector<ConfusionCounts> retrieval_counts(const DescriptorIndex& train, const DescriptorIndex& test,
                                              std::span<const std::size_t> ks, unsigned threads = 1);

ConfusionCounts retrieval_counts(const DescriptorIndex& train, const DescriptorIndex& test, std::size_t k,
                                 unsigned threads = 1);

/// Classifies every test entry against the train gallery using the gallery's metric.
Scores evaluate_retrieval(const DescriptorIndex& train, const DescriptorIndex& test, std::size_t k,
                          unsigned threads = 1);

} // namespace felp
