#include <felp/dataset.hpp>
#include <felp/error.hpp>
#include <felp/parallel.hpp>
#include <felp/png_io.hpp>
#include <felp/random.hpp>
#include <felp/stain.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <regex>
#include <tuple>

namespace felp {

namespace fs = std::filesystem;

std::optional<PatchRecord> parse_patch_name(const std::string& filename) {
    static const std::regex pattern(R"(^(.+)_x(\d+)_y(\d+)_class([01])\.png$)");
    std::smatch m;
    if (!std::regex_match(filename, m, pattern))
        return std::nullopt;
    PatchRecord r;
    r.patient_id = m[1].str();
    try {
        r.x = std::stoi(m[2].str());
        r.y = std::stoi(m[3].str());
    } catch (const std::exception&) {
        return std::nullopt;
    }
    r.label = m[4].str() == "1" ? 1 : 0;
    r.path = filename;
    return r;
}

namespace {

bool record_less(const PatchRecord& a, const PatchRecord& b) {
    return std::tie(a.patient_id, a.x, a.y, a.label, a.path) < std::tie(b.patient_id, b.x, b.y, b.label, b.path);
}

} // namespace

ScanResult scan(const fs::path& root, const ScanOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        throw Error(ErrorKind::Io, "dataset root is not a readable directory: " + root.string());

    ScanResult result;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec)
        throw Error(ErrorKind::Io, "cannot read dataset root " + root.string() + ": " + ec.message());
    std::vector<fs::path> files;
    for (const auto& entry : it) {
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
        auto rec = parse_patch_name(file.filename().string());
        if (!rec) {
            result.malformed.push_back(file);
            continue;
        }
        rec->path = file;
        if (options.expected_size > 0) {
            std::pair<int, int> dims;
            try {
                dims = png_dimensions(file);
            } catch (const Error&) {
                result.malformed.push_back(file);
                continue;
            }
            if (dims.first != options.expected_size || dims.second != options.expected_size) {
                result.wrong_size.push_back(file);
                if (options.reject_wrong_size)
                    continue;
            }
        }
        result.records.push_back(std::move(*rec));
    }
    std::sort(result.records.begin(), result.records.end(), record_less);
    return result;
}

void SplitManifest::validate() const {
    for (const auto& p : train)
        if (validation.count(p) || test.count(p))
            throw Error(ErrorKind::InvalidManifest, "patient " + p + " appears in more than one split");
    for (const auto& p : validation)
        if (test.count(p))
            throw Error(ErrorKind::InvalidManifest, "patient " + p + " appears in more than one split");
}

bool SplitManifest::contains(const std::string& patient) const {
    return train.count(patient) || validation.count(patient) || test.count(patient);
}

void write_manifest(std::ostream& out, const SplitManifest& manifest) {
    auto section = [&out](const char* name, const std::set<std::string>& ids) {
        out << '[' << name << "]\n";
        for (const auto& id : ids)
            out << id << '\n';
    };
    section("train", manifest.train);
    section("validation", manifest.validation);
    section("test", manifest.test);
}

SplitManifest read_manifest(std::istream& in) {
    SplitManifest m;
    std::set<std::string>* current = nullptr;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        if (line == "[train]") current = &m.train;
        else if (line == "[validation]") current = &m.validation;
        else if (line == "[test]") current = &m.test;
        else if (line.front() == '[')
            throw Error(ErrorKind::InvalidManifest, "unknown manifest section " + line);
        else if (!current)
            throw Error(ErrorKind::InvalidManifest, "line " + std::to_string(line_no) + " precedes any section header");
        else
            current->insert(line);
    }
    m.validate();
    return m;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::mt19937_64 rng(seed);
    seeded_shuffle(order, rng);
    return order;
}

SplitManifest random_split(const std::vector<std::string>& patients, std::uint64_t seed, double train_fraction,
                           double validation_fraction) {
    if (train_fraction < 0.0 || validation_fraction < 0.0 || train_fraction + validation_fraction > 1.0)
        throw Error(ErrorKind::InvalidInput, "split fractions must be non-negative and sum to at most 1");
    std::vector<std::string> sorted = patients;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const auto order = seeded_permutation(sorted.size(), seed);

    const auto n = static_cast<double>(sorted.size());
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * n));
    const auto n_val = std::min(sorted.size() - n_train, static_cast<std::size_t>(std::lround(validation_fraction * n)));
    SplitManifest m;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& id = sorted[order[i]];
        if (i < n_train) m.train.insert(id);
        else if (i < n_train + n_val) m.validation.insert(id);
        else m.test.insert(id);
    }
    return m;
}

std::vector<std::string> subsample_patients(const std::vector<std::string>& patients, double fraction,
                                            std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error(ErrorKind::InvalidInput, "subset fraction must lie in (0, 1]");
    std::vector<std::string> sorted = patients;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (fraction >= 1.0 || sorted.empty())
        return sorted;
    const auto order = seeded_permutation(sorted.size(), seed);
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * sorted.size())));
    std::vector<std::string> out;
    for (std::size_t i = 0; i < keep; ++i)
        out.push_back(sorted[order[i]]);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> patient_ids(const std::vector<PatchRecord>& records) {
    std::vector<std::string> ids;
    for (const auto& r : records)
        if (ids.empty() || ids.back() != r.patient_id)
            ids.push_back(r.patient_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

SplitRecords make_split(const std::vector<PatchRecord>& records, const SplitManifest& manifest) {
    manifest.validate();
    SplitRecords out;
    std::set<std::string> seen;
    for (const auto& r : records) {
        seen.insert(r.patient_id);
        if (manifest.train.count(r.patient_id)) out.train.push_back(r);
        else if (manifest.validation.count(r.patient_id)) out.validation.push_back(r);
        else if (manifest.test.count(r.patient_id)) out.test.push_back(r);
        else ++out.unassigned;
    }
    for (const auto* section : {&manifest.train, &manifest.validation, &manifest.test})
        for (const auto& id : *section)
            if (!seen.count(id))
                out.unknown_patients.push_back(id);
    std::sort(out.unknown_patients.begin(), out.unknown_patients.end());
    return out;
}

FilterResult filter_artefacts(const std::vector<PatchRecord>& records, double tau, unsigned threads) {
    std::vector<std::string> reasons(records.size());
    parallel_for(records.size(), threads, [&](std::size_t i) {
        try {
            const RasterImage img = read_png(records[i].path);
            if (img.channels() != 3)
                reasons[i] = "not an RGB image";
            else if (artefact_flag(img, tau))
                reasons[i] = "low colour variance";
        } catch (const Error& e) {
            reasons[i] = std::string("unreadable: ") + e.what();
        }
    });
    FilterResult out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (reasons[i].empty()) {
            out.kept.push_back(records[i]);
        } else {
            PatchRecord r = records[i];
            r.flagged = true;
            out.removed.push_back({std::move(r), reasons[i]});
        }
    }
    return out;
}

void write_removed_log(std::ostream& out, const std::vector<RemovedPatch>& removed) {
    out << "path,reason\n";
    for (const auto& r : removed) {
        std::string reason = r.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        out << r.record.path.string() << ',' << reason << '\n';
    }
}

} // namespace felp
