#include <doctest.h>

#include <felp/error.hpp>
#include <felp/format.hpp>
#include <felp/report.hpp>

#include <sstream>

using namespace felp;

namespace {

void check_ref(const std::string& label, int k, Metric m, double f1, double bac) {
    const auto ref = published_retrieval(label, k, m);
    REQUIRE(ref);
    CHECK(ref->f1 == f1);
    CHECK(ref->bac == bac);
}

ConfusionCounts counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
    ConfusionCounts c;
    c.tp = tp;
    c.fp = fp;
    c.tn = tn;
    c.fn = fn;
    return c;
}

} // namespace

TEST_CASE("method labels follow the published row names") {
    CHECK(method_label(Method::ELP, 9, StainMode::GRAY) == "ELP9");
    CHECK(method_label(Method::ELP, 9, StainMode::HE) == "ELP9 + SS");
    CHECK(method_label(Method::FELP, 9, StainMode::HE) == "F-ELP9 + SS");
    CHECK(method_label(Method::FELP, 11, StainMode::GRAY) == "F-ELP11");
}

TEST_CASE("published retrieval values") {
    // corner and highlighted cells of each k table
    check_ref("ELP9", 1, Metric::L1, 0.3072, 0.5616);
    check_ref("ELP9", 1, Metric::HUTCHINSON, 0.3985, 0.5904);
    check_ref("F-ELP9 + SS", 1, Metric::COSINE, 0.5504, 0.6891);
    check_ref("F-ELP11 + SS", 1, Metric::HUTCHINSON, 0.5347, 0.6784);
    check_ref("ELP9 + SS", 3, Metric::L2, 0.5372, 0.6743);
    check_ref("F-ELP9 + SS", 3, Metric::HUTCHINSON, 0.6309, 0.7375);
    check_ref("F-ELP11", 3, Metric::L1, 0.5010, 0.6420);
    check_ref("ELP9", 5, Metric::HUTCHINSON, 0.5405, 0.6699);
    check_ref("F-ELP9", 5, Metric::HUTCHINSON, 0.5284, 0.6629);
    check_ref("F-ELP9 + SS", 5, Metric::HUTCHINSON, 0.6521, 0.7519);
    check_ref("F-ELP11", 5, Metric::L2, 0.5303, 0.6603);
    check_ref("F-ELP11 + SS", 5, Metric::HUTCHINSON, 0.6427, 0.7437);
    CHECK_FALSE(published_retrieval("F-ELP9", 7, Metric::L1));
    CHECK_FALSE(published_retrieval("ELP11", 1, Metric::L1));
}

TEST_CASE("published classification values") {
    const auto best = published_classification("F-ELP9 + SS");
    REQUIRE(best);
    CHECK(best->f1 == 0.7182);
    CHECK(best->bac == 0.8076);
    CHECK(published_classification("F-ELP9")->f1 == 0.4048);
    CHECK(published_classification("F-ELP11")->bac == 0.5911);
    CHECK(published_classification("F-ELP11 + SS")->f1 == 0.6715);
    CHECK_FALSE(published_classification("ELP9"));
}

TEST_CASE("search results round trip and render") {
    std::vector<SearchRow> rows;
    const Metric metrics[] = {Metric::L1, Metric::L2, Metric::COSINE, Metric::HUTCHINSON};
    std::uint64_t tp = 5;
    for (Metric m : metrics) {
        const auto c = counts(tp++, 3, 10, 2);
        rows.push_back({"F-ELP9 + SS", 5, m, c, scores(c)});
    }
    std::ostringstream csv;
    const std::string prov[] = {"felp test"};
    write_search_csv(csv, rows, prov);
    CHECK(csv.str().rfind("# felp test\n", 0) == 0);
    std::istringstream in(csv.str());
    const auto back = read_search_csv(in);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].method == rows[i].method);
        CHECK(back[i].k == rows[i].k);
        CHECK(back[i].metric == rows[i].metric);
        CHECK(back[i].counts.tp == rows[i].counts.tp);
        CHECK(back[i].scores.f1 == rows[i].scores.f1);
    }

    std::ostringstream md;
    write_search_markdown(md, rows, prov);
    const std::string text = md.str();
    CHECK(text.find("<!-- felp test -->") != std::string::npos);
    // Hutchinson has the largest tp, hence the best F1 in the row
    std::ostringstream best;
    best << "**" << format_fixed(rows.back().scores.f1, 4) << "**";
    CHECK(text.find(best.str()) != std::string::npos);
    CHECK(text.find("0.6521") != std::string::npos);
}

TEST_CASE("classification results round trip and render") {
    const auto tc = counts(8, 1, 9, 2);
    std::vector<ClassifyRow> rows{{"F-ELP9 + SS", 1e-4, scores(counts(4, 0, 4, 0)), tc, scores(tc)}};
    std::ostringstream csv;
    write_classify_csv(csv, rows, {});
    std::istringstream in(csv.str());
    const auto back = read_classify_csv(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].method == "F-ELP9 + SS");
    CHECK(back[0].lambda == 1e-4);
    CHECK(back[0].test.bac == rows[0].test.bac);
    std::ostringstream md;
    write_classify_markdown(md, rows, {});
    CHECK(md.str().find("0.7182") != std::string::npos);
    CHECK(md.str().find("kernel") != std::string::npos);

    std::istringstream broken("method,lambda\nx,1\n");
    CHECK_THROWS_AS(read_classify_csv(broken), Error);
}
