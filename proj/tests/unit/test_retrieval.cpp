#include <doctest.h>

#include "transport_oracle.hpp"

#include <felp/error.hpp>
#include <felp/retrieval.hpp>

#include <algorithm>
#include <random>

using namespace felp;

namespace {

Descriptor make(std::vector<double> bins) {
    Descriptor d;
    d.bins = std::move(bins);
    return d;
}

DescriptorIndex random_index(std::size_t count, std::size_t dim, Metric m, std::mt19937_64& rng,
                             const std::string& prefix = "g") {
    DescriptorIndex index(m);
    for (std::size_t i = 0; i < count; ++i)
        index.add({prefix + std::to_string(1000 + i), static_cast<int>(rng() % 2),
                   make(oracle::random_histogram(dim, rng))});
    return index;
}

const Metric kAll[] = {Metric::L1, Metric::L2, Metric::COSINE, Metric::HUTCHINSON};

} // namespace

TEST_CASE("knn_query returns an identical entry at distance zero") {
    std::mt19937_64 rng(1);
    for (auto m : kAll) {
        const auto index = random_index(20, 8, m, rng);
        const auto hits = knn_query(index, index[7].descriptor, 1);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].patch_id == index[7].patch_id);
        CHECK(hits[0].distance == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("knn_query with k equal to the index size sorts everything") {
    std::mt19937_64 rng(2);
    const auto index = random_index(15, 6, Metric::L2, rng);
    const auto q = make(oracle::random_histogram(6, rng));
    const auto hits = knn_query(index, q, index.size());
    REQUIRE(hits.size() == index.size());
    for (std::size_t i = 1; i < hits.size(); ++i)
        CHECK(hits[i - 1].distance <= hits[i].distance);
    CHECK_THROWS_AS(knn_query(index, q, index.size() + 1), Error);
    CHECK_THROWS_AS(knn_query(index, q, 0), Error);
}

TEST_CASE("knn_query matches a full-sort oracle") {
    std::mt19937_64 rng(3);
    for (auto m : kAll) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto index = random_index(50, 10, m, rng);
            const auto q = make(oracle::random_histogram(10, rng));
            std::vector<std::pair<double, std::string>> all;
            for (const auto& e : index.entries())
                all.emplace_back(distance(m, e.descriptor.bins, q.bins), e.patch_id);
            std::sort(all.begin(), all.end());
            const auto hits = knn_query(index, q, 7);
            for (std::size_t i = 0; i < hits.size(); ++i) {
                CHECK(hits[i].patch_id == all[i].second);
                CHECK(hits[i].distance == all[i].first);
            }
        }
    }
}

TEST_CASE("property: knn_query ignores index order and breaks ties by id") {
    std::mt19937_64 rng(4);
    auto base = random_index(30, 5, Metric::L1, rng);
    // several exact duplicates force distance ties
    std::vector<IndexEntry> entries = base.entries();
    for (int i = 0; i < 5; ++i)
        entries.push_back({"dup" + std::to_string(9 - i), i % 2, entries[3].descriptor});
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(entries.begin(), entries.end(), rng);
        DescriptorIndex idx(entries, Metric::L1);
        const auto hits = knn_query(idx, entries.front().descriptor, 12);
        DescriptorIndex ref(base.entries(), Metric::L1);
        for (int i = 0; i < 5; ++i)
            ref.add({"dup" + std::to_string(9 - i), i % 2, base[3].descriptor});
        const auto want = knn_query(ref, entries.front().descriptor, 12);
        REQUIRE(hits.size() == want.size());
        for (std::size_t i = 0; i < hits.size(); ++i)
            CHECK(hits[i].patch_id == want[i].patch_id);
    }
    DescriptorIndex ties(Metric::L1);
    ties.add({"b", 0, make({1.0, 0.0})});
    ties.add({"a", 1, make({1.0, 0.0})});
    ties.add({"c", 0, make({1.0, 0.0})});
    const auto hits = knn_query(ties, make({1.0, 0.0}), 3);
    CHECK(hits[0].patch_id == "a");
    CHECK(hits[1].patch_id == "b");
    CHECK(hits[2].patch_id == "c");
}

TEST_CASE("index rejects incompatible descriptors") {
    DescriptorIndex idx(Metric::L1);
    idx.add({"a", 0, make({0.5, 0.5})});
    CHECK_THROWS_AS(idx.add({"b", 0, make({1.0})}), Error);
    Descriptor other = make({0.5, 0.5});
    other.method = Method::ELP;
    CHECK_FALSE(idx.compatible(other));
    CHECK_THROWS_AS(knn_query(idx, other, 1), Error);
}

TEST_CASE("knn_label") {
    auto nb = [](std::vector<int> labels) {
        std::vector<Neighbor> out;
        for (std::size_t i = 0; i < labels.size(); ++i)
            out.push_back({"n" + std::to_string(i), static_cast<double>(i), labels[i]});
        return out;
    };
    CHECK(knn_label(nb({1})) == 1);
    CHECK(knn_label(nb({0})) == 0);
    CHECK(knn_label(nb({1, 1, 0})) == 1);
    CHECK(knn_label(nb({0, 0, 0, 1, 1})) == 0);
    CHECK(knn_label(nb({0, 1, 1, 1, 0})) == 1);
    CHECK(knn_label(nb({1, 0})) == 1);
    CHECK(knn_label(nb({0, 1, 1, 0})) == 0);
    CHECK_THROWS_AS(knn_label(nb({})), Error);
}

TEST_CASE("duplicated gallery gives perfect retrieval") {
    std::mt19937_64 rng(5);
    for (auto m : kAll) {
        auto gallery = random_index(40, 12, m, rng);
        DescriptorIndex queries(m);
        for (const auto& e : gallery.entries())
            queries.add({"q" + e.patch_id, e.label, e.descriptor});
        const auto s = evaluate_retrieval(gallery, queries, 1);
        CHECK(s.f1 == 1.0);
        CHECK(s.bac == 1.0);
    }
}

TEST_CASE("multi-k counts equal single-k counts and ignore the thread count") {
    std::mt19937_64 rng(6);
    for (auto m : kAll) {
        const auto train = random_index(60, 16, m, rng, "t");
        const auto test = random_index(45, 16, m, rng, "q");
        const std::size_t ks[] = {1, 3, 5, 4};
        const auto multi = retrieval_counts(train, test, ks, 1);
        for (unsigned threads : {2u, 3u, 8u}) {
            const auto again = retrieval_counts(train, test, ks, threads);
            for (std::size_t j = 0; j < 4; ++j) {
                CHECK(again[j].tp == multi[j].tp);
                CHECK(again[j].fp == multi[j].fp);
                CHECK(again[j].tn == multi[j].tn);
                CHECK(again[j].fn == multi[j].fn);
            }
        }
        for (std::size_t j = 0; j < 4; ++j) {
            const auto single = retrieval_counts(train, test, ks[j]);
            CHECK(single.tp == multi[j].tp);
            CHECK(single.tn == multi[j].tn);
            CHECK(single.total() == test.size());
        }
    }
}
