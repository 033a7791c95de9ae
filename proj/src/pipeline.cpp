#include <felp/pipeline.hpp>
#include <felp/error.hpp>
#include <felp/format.hpp>
#include <felp/parallel.hpp>
#include <felp/png_io.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace felp {

namespace {

// FNV-1a; stable across standard libraries, unlike std::hash.
std::uint64_t stable_hash(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

std::vector<std::string> provenance(const RunConfig& c) {
    std::vector<std::string> lines;
    lines.push_back(std::string("felp ") + kVersion);
    auto join = [](const auto& items, auto&& fmt) {
        std::string s;
        for (const auto& item : items) {
            if (!s.empty())
                s += ';';
            s += fmt(item);
        }
        return s;
    };
    std::ostringstream ss;
    ss << "method=" << to_string(c.method) << " n=" << c.window.n << " stride=" << c.window.stride
       << " stain_mode=" << to_string(c.stain_mode) << " T=" << format_double(c.window.T)
       << " homogeneity_threshold=" << format_double(c.window.homogeneity_threshold)
       << " gradient=" << (c.window.gradient_op == GradientOperator::Central ? "central" : "sobel")
       << " grayscale=bt601 intensity_scaling=unit";
    lines.push_back(ss.str());
    ss.str({});
    ss << "artefact_tau=" << format_double(c.artefact_tau) << " beta=" << format_double(c.wedge.beta)
       << " alpha=" << format_double(c.wedge.alpha) << " he_quantization=p99";
    lines.push_back(ss.str());
    ss.str({});
    ss << "metrics=" << join(c.metrics, [](Metric m) { return std::string(to_string(m)); })
       << " k=" << join(c.ks, [](int k) { return std::to_string(k); })
       << " lambdas=" << join(c.lambdas, [](double l) { return format_double(l); }) << " epochs=" << c.epochs;
    lines.push_back(ss.str());
    ss.str({});
    ss << "seed=" << c.seed << " subset=" << format_double(c.subset)
       << " max_patches_per_patient=" << c.max_patches_per_patient << " dataset_root=" << c.dataset_root.string();
    if (c.manifest)
        ss << " manifest=" << c.manifest->string();
    lines.push_back(ss.str());
    return lines;
}

Selection select_patches(const RunConfig& config) {
    Selection sel;
    ScanResult scanned = scan(config.dataset_root);
    sel.malformed = scanned.malformed.size();
    sel.wrong_size = scanned.wrong_size.size();

    if (config.manifest) {
        std::ifstream in(*config.manifest);
        if (!in)
            throw Error(ErrorKind::Io, "cannot open manifest " + config.manifest->string());
        sel.manifest = read_manifest(in);
    } else {
        const auto patients = subsample_patients(patient_ids(scanned.records), config.subset, config.seed);
        sel.manifest = random_split(patients, config.seed);
    }

    SplitRecords split = make_split(scanned.records, sel.manifest);
    sel.unknown_patients = split.unknown_patients;
    std::vector<PatchRecord> chosen;
    for (auto* part : {&split.train, &split.validation, &split.test})
        chosen.insert(chosen.end(), part->begin(), part->end());
    std::sort(chosen.begin(), chosen.end(), [](const PatchRecord& a, const PatchRecord& b) {
        return std::tie(a.patient_id, a.x, a.y, a.label, a.path) < std::tie(b.patient_id, b.x, b.y, b.label, b.path);
    });

    if (config.max_patches_per_patient > 0) {
        std::vector<PatchRecord> capped;
        std::size_t begin = 0;
        while (begin < chosen.size()) {
            std::size_t end = begin;
            while (end < chosen.size() && chosen[end].patient_id == chosen[begin].patient_id)
                ++end;
            const std::size_t count = end - begin;
            if (count <= config.max_patches_per_patient) {
                capped.insert(capped.end(), chosen.begin() + static_cast<std::ptrdiff_t>(begin),
                              chosen.begin() + static_cast<std::ptrdiff_t>(end));
            } else {
                auto order = seeded_permutation(count, config.seed ^ stable_hash(chosen[begin].patient_id));
                order.resize(config.max_patches_per_patient);
                std::sort(order.begin(), order.end());
                for (std::size_t i : order)
                    capped.push_back(chosen[begin + i]);
            }
            begin = end;
        }
        chosen = std::move(capped);
    }

    FilterResult filtered = filter_artefacts(chosen, config.artefact_tau, config.threads);
    sel.kept = std::move(filtered.kept);
    sel.removed = std::move(filtered.removed);
    return sel;
}

std::map<std::string, PatientBasis> estimate_patient_bases(const std::vector<PatchRecord>& kept,
                                                           const RunConfig& config) {
    std::vector<std::string> patients;
    for (const auto& r : kept)
        if (patients.empty() || patients.back() != r.patient_id)
            patients.push_back(r.patient_id);
    patients.erase(std::unique(patients.begin(), patients.end()), patients.end());

    std::vector<PatientBasis> results(patients.size());
    parallel_for(patients.size(), config.threads, [&](std::size_t i) {
        std::vector<RasterImage> patches;
        for (const auto& r : kept)
            if (r.patient_id == patients[i])
                patches.push_back(read_png(r.path));
        try {
            results[i].basis = pooled_basis_for_patient(patches, config.wedge);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BasisEstimationFailed)
                throw;
            results[i].basis = default_basis();
            results[i].note = e.what();
        }
    });
    std::map<std::string, PatientBasis> out;
    for (std::size_t i = 0; i < patients.size(); ++i)
        out.emplace(patients[i], std::move(results[i]));
    return out;
}

ExtractResult extract_descriptors(const std::vector<PatchRecord>& kept,
                                  const std::map<std::string, PatientBasis>& bases, const RunConfig& config) {
    config.window.validate();
    std::vector<std::optional<Descriptor>> descriptors(kept.size());
    std::vector<std::string> errors(kept.size());
    parallel_for(kept.size(), config.threads, [&](std::size_t i) {
        const auto& rec = kept[i];
        try {
            const RasterImage rgb = read_png(rec.path);
            if (config.stain_mode == StainMode::GRAY) {
                const RasterImage gray = rgb.channels() == 3 ? to_grayscale(rgb) : rgb;
                descriptors[i] = compute_descriptor(gray, config.window, config.method);
            } else {
                const auto it = bases.find(rec.patient_id);
                if (it == bases.end())
                    throw Error(ErrorKind::InvalidInput, "no stain basis for patient " + rec.patient_id);
                const QuantizedMaps maps = quantize(unmix(rgb, it->second.basis));
                descriptors[i] = stained_descriptor(maps.h, maps.e, config.window, config.method);
            }
        } catch (const Error& e) {
            errors[i] = std::string(to_string(e.kind())) + ": " + e.what();
        }
    });

    ExtractResult out;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (descriptors[i])
            out.records.push_back({kept[i].patch_id(), kept[i].label, std::move(*descriptors[i])});
        else
            out.failures.push_back({kept[i].patch_id(), errors[i]});
    }
    return out;
}

std::string patient_of(const std::string& patch_id) {
    const auto rec = parse_patch_name(patch_id + ".png");
    if (!rec)
        throw Error(ErrorKind::InvalidInput, "cannot derive patient from patch id '" + patch_id + "'");
    return rec->patient_id;
}

Partitioned partition(const std::vector<DescriptorRecord>& records, const SplitManifest& manifest) {
    manifest.validate();
    Partitioned out;
    for (const auto& r : records) {
        const std::string p = patient_of(r.patch_id);
        if (manifest.train.count(p)) out.train.push_back(r);
        else if (manifest.validation.count(p)) out.validation.push_back(r);
        else if (manifest.test.count(p)) out.test.push_back(r);
    }
    return out;
}

std::vector<SearchRow> run_search(const Partitioned& data, const std::vector<Metric>& metrics,
                                  const std::vector<int>& ks, unsigned threads) {
    if (data.train.empty() || data.test.empty())
        throw Error(ErrorKind::EmptyDescriptor, "retrieval needs non-empty train and test partitions");
    const auto& first = data.train.front().descriptor;
    const std::string label = method_label(first.method, first.n, first.stain_mode);

    std::vector<std::size_t> kvals;
    for (int k : ks) {
        if (k < 1)
            throw Error(ErrorKind::Config, "k must be >= 1");
        kvals.push_back(static_cast<std::size_t>(k));
    }
    std::vector<SearchRow> rows;
    for (Metric metric : metrics) {
        const auto train = DescriptorIndex::from_records(data.train, metric);
        const auto test = DescriptorIndex::from_records(data.test, metric);
        const auto counts = retrieval_counts(train, test, kvals, threads);
        for (std::size_t j = 0; j < kvals.size(); ++j)
            rows.push_back({label, ks[j], metric, counts[j], scores(counts[j])});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SearchRow& a, const SearchRow& b) { return a.k < b.k; });
    return rows;
}

ClassifyRow run_classify(const Partitioned& data, const RunConfig& config) {
    if (data.train.empty() || data.validation.empty() || data.test.empty())
        throw Error(ErrorKind::EmptyDescriptor, "classification needs train, validation and test descriptors");
    const auto train = DescriptorIndex::from_records(data.train, Metric::L2);
    const auto val = DescriptorIndex::from_records(data.validation, Metric::L2);
    const auto test = DescriptorIndex::from_records(data.test, Metric::L2);
    SvmOptions options;
    options.epochs = config.epochs;
    options.seed = config.seed;
    const GridResult grid = grid_search(train, val, config.lambdas, options);

    const auto& first = data.train.front().descriptor;
    ClassifyRow row;
    row.method = method_label(first.method, first.n, first.stain_mode);
    row.lambda = grid.best_lambda;
    row.val = grid.best_val;
    row.test_counts = svm_counts(grid.model, test);
    row.test = scores(row.test_counts);
    return row;
}

} // namespace felp
