#include <felp/report.hpp>
#include <felp/error.hpp>
#include <felp/format.hpp>

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace felp {

std::string method_label(Method method, int n, StainMode mode) {
    std::string s = method == Method::FELP ? "F-ELP" : "ELP";
    s += std::to_string(n);
    if (mode == StainMode::HE)
        s += " + SS";
    return s;
}

namespace {

struct PublishedRow {
    const char* label;
    int k;
    // L1, L2, Cosine, Hutchinson as (F1, BAC) pairs
    std::array<double, 8> values;
};

// IDC retrieval results, k in {1, 3, 5}.
constexpr PublishedRow kRetrieval[] = {
    {"ELP9", 1, {0.3072, 0.5616, 0.3728, 0.5842, 0.2965, 0.5594, 0.3985, 0.5904}},
    {"ELP9 + SS", 1, {0.3004, 0.5654, 0.4339, 0.6167, 0.2688, 0.5574, 0.4527, 0.6236}},
    {"F-ELP9", 1, {0.4177, 0.6008, 0.4179, 0.6015, 0.4200, 0.6022, 0.4189, 0.6025}},
    {"F-ELP9 + SS", 1, {0.5489, 0.6881, 0.5486, 0.6879, 0.5504, 0.6891, 0.5472, 0.6869}},
    {"F-ELP11", 1, {0.3969, 0.5865, 0.3947, 0.5855, 0.3954, 0.5863, 0.3792, 0.5774}},
    {"F-ELP11 + SS", 1, {0.5237, 0.6707, 0.5173, 0.6666, 0.5185, 0.6673, 0.5347, 0.6784}},
    {"ELP9", 3, {0.4009, 0.6092, 0.4837, 0.6432, 0.3807, 0.6015, 0.5117, 0.6523}},
    {"ELP9 + SS", 3, {0.3662, 0.5976, 0.5372, 0.6743, 0.3240, 0.5830, 0.5609, 0.6833}},
    {"F-ELP9", 3, {0.5106, 0.6514, 0.5100, 0.6515, 0.5122, 0.6526, 0.5056, 0.6490}},
    {"F-ELP9 + SS", 3, {0.6267, 0.7350, 0.6251, 0.7339, 0.6257, 0.7345, 0.6309, 0.7375}},
    {"F-ELP11", 3, {0.5010, 0.6420, 0.5034, 0.6443, 0.5043, 0.6450, 0.4879, 0.6355}},
    {"F-ELP11 + SS", 3, {0.6117, 0.7223, 0.6003, 0.7149, 0.6053, 0.7184, 0.6190, 0.7279}},
    {"ELP9", 5, {0.4138, 0.6159, 0.5057, 0.6559, 0.3904, 0.6064, 0.5405, 0.6699}},
    {"ELP9 + SS", 5, {0.3599, 0.5948, 0.5563, 0.6861, 0.3142, 0.5786, 0.5897, 0.7016}},
    {"F-ELP9", 5, {0.5345, 0.6659, 0.5314, 0.6645, 0.5364, 0.6675, 0.5284, 0.6629}},
    {"F-ELP9 + SS", 5, {0.6492, 0.7505, 0.6485, 0.7498, 0.6474, 0.7494, 0.6521, 0.7519}},
    {"F-ELP11", 5, {0.5294, 0.6591, 0.5303, 0.6603, 0.5282, 0.6595, 0.5155, 0.6519}},
    {"F-ELP11 + SS", 5, {0.6381, 0.7398, 0.6306, 0.7349, 0.6309, 0.7351, 0.6427, 0.7437}},
};

struct PublishedClass {
    const char* label;
    double f1;
    double bac;
};

constexpr PublishedClass kClassification[] = {
    {"F-ELP9", 0.4048, 0.6174},
    {"F-ELP9 + SS", 0.7182, 0.8076},
    {"F-ELP11", 0.3385, 0.5911},
    {"F-ELP11 + SS", 0.6715, 0.7665},
};

constexpr std::array<Metric, 4> kMetrics{Metric::L1, Metric::L2, Metric::COSINE, Metric::HUTCHINSON};

int metric_column(Metric m) {
    return static_cast<int>(std::find(kMetrics.begin(), kMetrics.end(), m) - kMetrics.begin());
}

std::string f4(double v) { return format_fixed(v, 4); }

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep))
        out.push_back(field);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

double to_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size())
            return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidInput, "report csv: bad number '" + s + "'");
}

std::uint64_t to_count(const std::string& s) {
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos == s.size())
            return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidInput, "report csv: bad count '" + s + "'");
}

void provenance_lines(std::ostream& out, std::span<const std::string> provenance, const char* prefix,
                      const char* suffix = "") {
    for (const auto& line : provenance)
        out << prefix << line << suffix << '\n';
}

// Non-comment lines after the header.
std::vector<std::vector<std::string>> data_rows(std::istream& in, const char* header_prefix) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        if (!header) {
            if (line.rfind(header_prefix, 0) != 0)
                throw Error(ErrorKind::InvalidInput, std::string("report csv: expected header starting with ") + header_prefix);
            header = true;
            continue;
        }
        rows.push_back(split(line));
    }
    return rows;
}

} // namespace

std::optional<ReferenceScore> published_retrieval(const std::string& label, int k, Metric metric) {
    for (const auto& row : kRetrieval) {
        if (row.k == k && label == row.label) {
            const int c = metric_column(metric);
            return ReferenceScore{row.values[2 * c], row.values[2 * c + 1]};
        }
    }
    return std::nullopt;
}

std::optional<ReferenceScore> published_classification(const std::string& label) {
    for (const auto& row : kClassification)
        if (label == row.label)
            return ReferenceScore{row.f1, row.bac};
    return std::nullopt;
}

void write_search_csv(std::ostream& out, std::span<const SearchRow> rows, std::span<const std::string> provenance) {
    provenance_lines(out, provenance, "# ");
    out << "method,k,metric,f1,bac,tp,fp,tn,fn,degenerate,published_f1,published_bac\n";
    for (const auto& r : rows) {
        out << r.method << ',' << r.k << ',' << to_string(r.metric) << ',' << format_double(r.scores.f1) << ','
            << format_double(r.scores.bac) << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.tn << ','
            << r.counts.fn << ',' << (r.scores.degenerate ? 1 : 0) << ',';
        if (const auto ref = published_retrieval(r.method, r.k, r.metric))
            out << f4(ref->f1) << ',' << f4(ref->bac);
        else
            out << ',';
        out << '\n';
    }
}

std::vector<SearchRow> read_search_csv(std::istream& in) {
    std::vector<SearchRow> rows;
    for (const auto& f : data_rows(in, "method,k,metric")) {
        if (f.size() < 10)
            throw Error(ErrorKind::InvalidInput, "search csv: too few fields");
        SearchRow r;
        r.method = f[0];
        r.k = static_cast<int>(to_count(f[1]));
        r.metric = parse_metric(f[2]);
        r.counts = {to_count(f[5]), to_count(f[6]), to_count(f[7]), to_count(f[8])};
        r.scores = scores(r.counts);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_search_markdown(std::ostream& out, std::span<const SearchRow> rows, std::span<const std::string> provenance) {
    provenance_lines(out, provenance, "<!-- ", " -->");
    std::vector<int> ks;
    std::vector<std::string> methods;
    for (const auto& r : rows) {
        if (std::find(ks.begin(), ks.end(), r.k) == ks.end())
            ks.push_back(r.k);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
    }
    std::sort(ks.begin(), ks.end());

    auto header = [&out] {
        out << "| Method | L1 F1 | L1 BAC | L2 F1 | L2 BAC | Cosine F1 | Cosine BAC | Hutchinson F1 | Hutchinson BAC |\n";
        out << "|---|---|---|---|---|---|---|---|---|\n";
    };

    for (int k : ks) {
        out << "\n### Retrieval, k = " << k << " (measured)\n\n";
        header();
        for (const auto& m : methods) {
            std::array<const SearchRow*, 4> cells{};
            for (const auto& r : rows)
                if (r.k == k && r.method == m)
                    cells[static_cast<std::size_t>(metric_column(r.metric))] = &r;
            int best = -1;
            for (int c = 0; c < 4; ++c) {
                const auto* cell = cells[static_cast<std::size_t>(c)];
                if (!cell)
                    continue;
                if (best < 0) {
                    best = c;
                    continue;
                }
                const auto& b = cells[static_cast<std::size_t>(best)]->scores;
                if (cell->scores.f1 > b.f1 || (cell->scores.f1 == b.f1 && cell->scores.bac > b.bac))
                    best = c;
            }
            out << "| " << m;
            for (int c = 0; c < 4; ++c) {
                const auto* cell = cells[static_cast<std::size_t>(c)];
                if (!cell) {
                    out << " | - | -";
                    continue;
                }
                const bool bold = c == best;
                const char* wrap = bold ? "**" : "";
                out << " | " << wrap << f4(cell->scores.f1) << wrap << " | " << wrap << f4(cell->scores.bac) << wrap;
            }
            out << " |\n";
        }

        bool any_ref = false;
        for (const auto& m : methods)
            any_ref = any_ref || published_retrieval(m, k, Metric::L1).has_value();
        if (!any_ref)
            continue;
        out << "\n### Retrieval, k = " << k << " (published)\n\n";
        header();
        for (const auto& m : methods) {
            if (!published_retrieval(m, k, Metric::L1))
                continue;
            out << "| " << m;
            for (Metric metric : kMetrics) {
                const auto ref = published_retrieval(m, k, metric);
                out << " | " << f4(ref->f1) << " | " << f4(ref->bac);
            }
            out << " |\n";
        }
    }
}

void write_classify_csv(std::ostream& out, std::span<const ClassifyRow> rows, std::span<const std::string> provenance) {
    provenance_lines(out, provenance, "# ");
    out << "method,lambda,val_f1,val_bac,test_f1,test_bac,tp,fp,tn,fn,degenerate,published_f1,published_bac\n";
    for (const auto& r : rows) {
        out << r.method << ',' << format_double(r.lambda) << ',' << format_double(r.val.f1) << ','
            << format_double(r.val.bac) << ',' << format_double(r.test.f1) << ',' << format_double(r.test.bac) << ','
            << r.test_counts.tp << ',' << r.test_counts.fp << ',' << r.test_counts.tn << ',' << r.test_counts.fn << ','
            << (r.test.degenerate ? 1 : 0) << ',';
        if (const auto ref = published_classification(r.method))
            out << f4(ref->f1) << ',' << f4(ref->bac);
        else
            out << ',';
        out << '\n';
    }
}

std::vector<ClassifyRow> read_classify_csv(std::istream& in) {
    std::vector<ClassifyRow> rows;
    for (const auto& f : data_rows(in, "method,lambda")) {
        if (f.size() < 11)
            throw Error(ErrorKind::InvalidInput, "classify csv: too few fields");
        ClassifyRow r;
        r.method = f[0];
        r.lambda = to_double(f[1]);
        r.val.f1 = to_double(f[2]);
        r.val.bac = to_double(f[3]);
        r.test_counts = {to_count(f[6]), to_count(f[7]), to_count(f[8]), to_count(f[9])};
        r.test = scores(r.test_counts);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_classify_markdown(std::ostream& out, std::span<const ClassifyRow> rows,
                             std::span<const std::string> provenance) {
    provenance_lines(out, provenance, "<!-- ", " -->");
    out << "\n### Classification (linear SVM, test partition)\n\n";
    out << "| Method | lambda | Val BAC | F1 | BAC | Published F1 | Published BAC |\n";
    out << "|---|---|---|---|---|---|---|\n";
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].test.f1 > rows[best].test.f1)
            best = i;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const char* wrap = i == best ? "**" : "";
        out << "| " << wrap << r.method << wrap << " | " << format_double(r.lambda) << " | " << f4(r.val.bac) << " | "
            << wrap << f4(r.test.f1) << wrap << " | " << wrap << f4(r.test.bac) << wrap << " | ";
        if (const auto ref = published_classification(r.method))
            out << f4(ref->f1) << " | " << f4(ref->bac);
        else
            out << "- | -";
        out << " |\n";
    }
    out << "\nPublished values were obtained with kernel SVMs tuned by Bayesian optimization;"
           " this run uses a linear SVM with a lambda grid.\n";
}

} // namespace felp
