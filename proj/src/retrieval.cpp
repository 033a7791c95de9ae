#include <felp/retrieval.hpp>
#include <felp/error.hpp>
#include <felp/parallel.hpp>

#include <algorithm>

namespace felp {

DescriptorIndex::DescriptorIndex(std::vector<IndexEntry> entries, Metric metric) : metric_(metric) {
    entries_.reserve(entries.size());
    for (auto& e : entries)
        add(std::move(e));
}

DescriptorIndex DescriptorIndex::from_records(std::span<const DescriptorRecord> records, Metric metric) {
    DescriptorIndex index(metric);
    for (const auto& r : records)
        index.add({r.patch_id, r.label, r.descriptor});
    return index;
}

void DescriptorIndex::add(IndexEntry entry) {
    if (entry.label != 0 && entry.label != 1)
        throw Error(ErrorKind::InvalidInput, "index labels must be 0 or 1");
    if (!compatible(entry.descriptor))
        throw Error(ErrorKind::InvalidInput, "descriptor " + entry.patch_id + " is incompatible with the index");
    entries_.push_back(std::move(entry));
}

namespace {

struct Candidate {
    double distance;
    std::size_t index;
};

// Top-k candidate positions; equal distances ordered by patch id.
std::vector<Candidate> nearest(const DescriptorIndex& index, const Descriptor& query, std::size_t k) {
    if (k < 1 || k > index.size())
        throw Error(ErrorKind::InvalidInput, "k must lie in [1, index size]");
    if (!index.compatible(query))
        throw Error(ErrorKind::InvalidInput, "query descriptor is incompatible with the index");
    std::vector<Candidate> all(index.size());
    for (std::size_t i = 0; i < index.size(); ++i)
        all[i] = {distance(index.metric(), query.bins, index[i].descriptor.bins), i};
    auto closer = [&](const Candidate& a, const Candidate& b) {
        if (a.distance != b.distance)
            return a.distance < b.distance;
        return index[a.index].patch_id < index[b.index].patch_id;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
    all.resize(k);
    return all;
}

} // namespace

std::vector<Neighbor> knn_query(const DescriptorIndex& index, const Descriptor& query, std::size_t k) {
    std::vector<Neighbor> out;
    for (const auto& c : nearest(index, query, k))
        out.push_back({index[c.index].patch_id, c.distance, index[c.index].label});
    return out;
}

int knn_label(std::span<const Neighbor> neighbors) {
    if (neighbors.empty())
        throw Error(ErrorKind::InvalidInput, "knn_label needs at least one neighbour");
    std::size_t positives = 0;
    for (const auto& n : neighbors)
        positives += n.label == 1 ? 1 : 0;
    const std::size_t negatives = neighbors.size() - positives;
    if (positives == negatives)
        return neighbors.front().label;
    return positives > negatives ? 1 : 0;
}

std::vector<ConfusionCounts> retrieval_counts(const DescriptorIndex& train, const DescriptorIndex& test,
                                              std::span<const std::size_t> ks, unsigned threads) {
    if (ks.empty())
        return {};
    if (!test.empty() && !train.compatible(test[0].descriptor))
        throw Error(ErrorKind::InvalidInput, "train and test descriptors are incompatible");
    const std::size_t kmax = *std::max_element(ks.begin(), ks.end());
    std::vector<std::vector<int>> predicted(test.size());
    parallel_for(test.size(), threads, [&](std::size_t i) {
        const auto found = nearest(train, test[i].descriptor, kmax);
        std::vector<Neighbor> neighbors;
        neighbors.reserve(found.size());
        for (const auto& c : found)
            neighbors.push_back({{}, c.distance, train[c.index].label});
        auto& row = predicted[i];
        for (std::size_t k : ks)
            row.push_back(knn_label(std::span<const Neighbor>(neighbors).first(k)));
    });
    std::vector<ConfusionCounts> counts(ks.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        for (std::size_t j = 0; j < ks.size(); ++j)
            counts[j].add(test[i].label, predicted[i][j]);
    return counts;
}

ConfusionCounts retrieval_counts(const DescriptorIndex& train, const DescriptorIndex& test, std::size_t k,
                                 unsigned threads) {
    const std::size_t ks[] = {k};
    return retrieval_counts(train, test, ks, threads).front();
}

Scores evaluate_retrieval(const DescriptorIndex& train, const DescriptorIndex& test, std::size_t k,
                          unsigned threads) {
    return scores(retrieval_counts(train, test, k, threads));
}

} // namespace felp
