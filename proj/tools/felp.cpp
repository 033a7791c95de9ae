// Command-line front end: stain separation, descriptor extraction, retrieval and SVM evaluation.

#include <felp/error.hpp>
#include <felp/pipeline.hpp>
#include <felp/png_io.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace felp;

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kIoError = 3,
    kEmptyResult = 4,
};

struct CliOptions {
    RunConfig config;
    std::string method = "FELP";
    std::string stain = "GRAY";
    std::string gradient_op = "central";
    std::vector<std::string> metrics{"L1", "L2", "Cosine", "Hutchinson"};
    std::string manifest;
    std::string bases_dir;
    std::string output;
    std::vector<std::string> descriptor_files;
    std::string search_csv;
    std::string classify_csv;
    bool export_maps = false;
};

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    return out;
}

void finalize(CliOptions& o) {
    auto& c = o.config;
    c.method = parse_method(o.method);
    c.stain_mode = parse_stain_mode(o.stain);
    if (o.gradient_op == "central") c.window.gradient_op = GradientOperator::Central;
    else if (o.gradient_op == "sobel") c.window.gradient_op = GradientOperator::Sobel;
    else throw Error(ErrorKind::Config, "unknown gradient operator '" + o.gradient_op + "'");
    c.metrics.clear();
    for (const auto& m : o.metrics)
        c.metrics.push_back(parse_metric(m));
    if (!o.manifest.empty())
        c.manifest = o.manifest;
    if (c.threads == 0)
        c.threads = std::max(1u, std::thread::hardware_concurrency());
    c.window.validate();
}

void require_root(const RunConfig& c) {
    if (c.dataset_root.empty())
        throw Error(ErrorKind::Config, "dataset root not set (use --root or FELP_DATASET_ROOT)");
}

void write_manifest_file(const fs::path& dir, const SplitManifest& m) {
    auto out = open_output(dir / "manifest.txt");
    write_manifest(out, m);
}

void write_removed(const fs::path& dir, const Selection& sel) {
    auto out = open_output(dir / "removed.csv");
    write_removed_log(out, sel.removed);
}

void summarize_selection(const Selection& sel) {
    std::cerr << "patients: train " << sel.manifest.train.size() << ", validation " << sel.manifest.validation.size()
              << ", test " << sel.manifest.test.size() << "\n"
              << "patches kept " << sel.kept.size() << ", removed " << sel.removed.size() << ", malformed names "
              << sel.malformed << ", wrong size " << sel.wrong_size << "\n";
    for (const auto& p : sel.unknown_patients)
        std::cerr << "warning: manifest patient " << p << " not found in dataset\n";
}

int cmd_stainsep(CliOptions& o) {
    finalize(o);
    const auto& c = o.config;
    require_root(c);
    const Selection sel = select_patches(c);
    summarize_selection(sel);
    write_manifest_file(c.output_dir, sel.manifest);
    write_removed(c.output_dir, sel);

    const auto bases = estimate_patient_bases(sel.kept, c);
    const auto prov = provenance(c);
    std::size_t fallbacks = 0;
    for (const auto& [patient, pb] : bases) {
        auto lines = prov;
        lines.push_back("patient=" + patient);
        if (!pb.note.empty()) {
            lines.push_back("fallback_reason=" + pb.note);
            ++fallbacks;
        }
        auto out = open_output(c.output_dir / "bases" / (patient + ".basis"));
        write_basis(out, pb.basis, lines);
    }
    // Patients whose every patch was flagged still get a record.
    std::set<std::string> flagged_only;
    for (const auto& r : sel.removed)
        if (!bases.count(r.record.patient_id))
            flagged_only.insert(r.record.patient_id);
    for (const auto& patient : flagged_only) {
        auto lines = prov;
        lines.push_back("patient=" + patient);
        lines.push_back("fallback_reason=all patches flagged as artefacts");
        auto out = open_output(c.output_dir / "bases" / (patient + ".basis"));
        write_basis(out, default_basis(), lines);
        ++fallbacks;
    }

    if (o.export_maps) {
        fs::create_directories(c.output_dir / "maps");
        for (const auto& r : sel.kept) {
            const auto maps = quantize(unmix(read_png(r.path), bases.at(r.patient_id).basis));
            write_png(c.output_dir / "maps" / (r.patch_id() + "_H.png"), maps.h);
            write_png(c.output_dir / "maps" / (r.patch_id() + "_E.png"), maps.e);
        }
    }
    std::cerr << "bases written for " << bases.size() + flagged_only.size() << " patients (" << fallbacks
              << " fallback)\n";
    if (bases.empty() && flagged_only.empty())
        return kEmptyResult;
    return kOk;
}

std::map<std::string, PatientBasis> load_bases(const fs::path& dir, const std::vector<PatchRecord>& kept) {
    std::map<std::string, PatientBasis> out;
    for (const auto& r : kept) {
        if (out.count(r.patient_id))
            continue;
        const auto path = dir / (r.patient_id + ".basis");
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorKind::Io, "missing basis file " + path.string() + " (run stainsep first)");
        out[r.patient_id].basis = read_basis(in);
    }
    return out;
}

int cmd_extract(CliOptions& o) {
    finalize(o);
    const auto& c = o.config;
    require_root(c);
    const Selection sel = select_patches(c);
    summarize_selection(sel);
    if (sel.kept.empty()) {
        std::cerr << "error: no patches left after selection and artefact filtering\n";
        return kEmptyResult;
    }
    if (!c.manifest)
        write_manifest_file(c.output_dir, sel.manifest);
    write_removed(c.output_dir, sel);

    std::map<std::string, PatientBasis> bases;
    if (c.stain_mode == StainMode::HE)
        bases = o.bases_dir.empty() ? estimate_patient_bases(sel.kept, c) : load_bases(o.bases_dir, sel.kept);

    const ExtractResult result = extract_descriptors(sel.kept, bases, c);
    for (const auto& f : result.failures)
        std::cerr << "skipped " << f.patch_id << ": " << f.reason << "\n";
    if (result.records.empty()) {
        std::cerr << "error: no descriptors could be computed\n";
        return kEmptyResult;
    }
    const std::string label = method_label(c.method, c.window.n, c.stain_mode);
    fs::path path = o.output;
    if (path.empty()) {
        std::string name = label;
        std::erase(name, ' ');
        std::replace(name.begin(), name.end(), '+', '_');
        path = c.output_dir / ("descriptors_" + name + ".csv");
    }
    auto out = open_output(path);
    write_descriptor_csv(out, result.records, provenance(c));
    std::cerr << "wrote " << result.records.size() << " descriptors (" << result.failures.size() << " skipped) to "
              << path.string() << "\n";
    return kOk;
}

SplitManifest load_manifest(const CliOptions& o) {
    if (o.manifest.empty())
        throw Error(ErrorKind::Config, "--manifest is required");
    std::ifstream in(o.manifest);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open manifest " + o.manifest);
    return read_manifest(in);
}

std::vector<DescriptorRecord> load_descriptors(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open descriptor file " + path);
    return read_descriptor_csv(in);
}

fs::path output_base(const CliOptions& o, const char* fallback) {
    return o.output.empty() ? o.config.output_dir / fallback : fs::path(o.output);
}

int cmd_search(CliOptions& o) {
    finalize(o);
    const auto& c = o.config;
    const SplitManifest manifest = load_manifest(o);
    std::vector<SearchRow> rows;
    for (const auto& file : o.descriptor_files) {
        const auto data = partition(load_descriptors(file), manifest);
        if (data.train.empty() || data.test.empty()) {
            std::cerr << "error: " << file << " has no train or no test descriptors under this manifest\n";
            return kEmptyResult;
        }
        auto part = run_search(data, c.metrics, c.ks, c.threads);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SearchRow& a, const SearchRow& b) { return a.k < b.k; });
    auto prov = provenance(c);
    for (const auto& f : o.descriptor_files)
        prov.push_back("descriptors=" + fs::path(f).filename().string());
    const fs::path base = output_base(o, "search");
    {
        auto out = open_output(base.string() + ".csv");
        write_search_csv(out, rows, prov);
    }
    {
        auto out = open_output(base.string() + ".md");
        write_search_markdown(out, rows, prov);
    }
    write_search_markdown(std::cout, rows, {});
    return kOk;
}

int cmd_classify(CliOptions& o) {
    finalize(o);
    const auto& c = o.config;
    const SplitManifest manifest = load_manifest(o);
    std::vector<ClassifyRow> rows;
    auto prov = provenance(c);
    for (const auto& file : o.descriptor_files) {
        const auto data = partition(load_descriptors(file), manifest);
        if (data.train.empty() || data.validation.empty() || data.test.empty()) {
            std::cerr << "error: " << file << " lacks train, validation or test descriptors under this manifest\n";
            return kEmptyResult;
        }
        rows.push_back(run_classify(data, c));
        prov.push_back("descriptors=" + fs::path(file).filename().string());
    }
    const fs::path base = output_base(o, "classify");
    {
        auto out = open_output(base.string() + ".csv");
        write_classify_csv(out, rows, prov);
    }
    {
        auto out = open_output(base.string() + ".md");
        write_classify_markdown(out, rows, prov);
    }
    write_classify_markdown(std::cout, rows, {});
    return kOk;
}

int cmd_report(CliOptions& o) {
    if (o.search_csv.empty() && o.classify_csv.empty())
        throw Error(ErrorKind::Config, "report needs --search and/or --classify");
    std::ostringstream md;
    if (!o.search_csv.empty()) {
        std::ifstream in(o.search_csv);
        if (!in)
            throw Error(ErrorKind::Io, "cannot open " + o.search_csv);
        write_search_markdown(md, read_search_csv(in), {});
    }
    if (!o.classify_csv.empty()) {
        std::ifstream in(o.classify_csv);
        if (!in)
            throw Error(ErrorKind::Io, "cannot open " + o.classify_csv);
        write_classify_markdown(md, read_classify_csv(in), {});
    }
    if (o.output.empty()) {
        std::cout << md.str();
    } else {
        auto out = open_output(o.output);
        out << md.str();
    }
    return kOk;
}

void add_common(CLI::App* cmd, CliOptions& o) {
    auto& c = o.config;
    cmd->add_option("--root", c.dataset_root, "Dataset root directory")->envname("FELP_DATASET_ROOT");
    cmd->add_option("--out", c.output_dir, "Output directory")->capture_default_str();
    cmd->add_option("--manifest", o.manifest, "Split manifest ([train]/[validation]/[test] sections)");
    cmd->add_option("--subset", c.subset, "Fraction of patients to use when no manifest is given")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--seed", c.seed, "Seed for subsampling, splits and SVM training")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
    cmd->add_option("--max-patches", c.max_patches_per_patient, "Seeded cap on patches per patient (0 = all)")
        ->capture_default_str();
    cmd->add_option("--tau", c.artefact_tau, "Artefact variance threshold")->capture_default_str();
    cmd->add_option("--beta", c.wedge.beta, "Optical density transparency threshold")->capture_default_str();
    cmd->add_option("--alpha", c.wedge.alpha, "Wedge percentile")->capture_default_str();
}

void add_descriptor_options(CLI::App* cmd, CliOptions& o) {
    auto& w = o.config.window;
    cmd->add_option("--method", o.method, "FELP or ELP")->capture_default_str();
    cmd->add_option("--n", w.n, "Window size (odd)")->capture_default_str();
    cmd->add_option("--stride", w.stride, "Window stride")->capture_default_str();
    cmd->add_option("--stain", o.stain, "GRAY or HE")->capture_default_str();
    cmd->add_option("--T", w.T, "Ternary threshold")->capture_default_str();
    cmd->add_option("--homogeneity", w.homogeneity_threshold, "Homogeneity threshold")->capture_default_str();
    cmd->add_option("--gradient", o.gradient_op, "central or sobel")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"F-ELP histopathology descriptors: extraction, retrieval and classification"};
    app.set_config("--config", "", "TOML/INI config file with one section per subcommand; command-line flags take precedence");
    app.require_subcommand(1);
    CliOptions o;

    auto* stainsep = app.add_subcommand("stainsep", "Estimate per-patient H&E bases");
    add_common(stainsep, o);
    stainsep->add_flag("--export-maps", o.export_maps, "Write 8-bit H and E maps per patch");

    auto* extract = app.add_subcommand("extract", "Compute descriptors for every kept patch");
    add_common(extract, o);
    add_descriptor_options(extract, o);
    extract->add_option("--bases", o.bases_dir, "Directory of basis files from stainsep (HE mode)");
    extract->add_option("--output", o.output, "Descriptor CSV path");

    auto* search = app.add_subcommand("search", "kNN retrieval evaluation");
    add_common(search, o);
    search->add_option("--descriptors", o.descriptor_files, "Descriptor CSV files")->required();
    search->add_option("--metrics", o.metrics, "Distance metrics")->capture_default_str();
    search->add_option("--k", o.config.ks, "Neighbour counts")->capture_default_str();
    search->add_option("--output", o.output, "Output path prefix (.csv and .md are appended)");

    auto* classify = app.add_subcommand("classify", "Linear SVM with validation grid search");
    add_common(classify, o);
    classify->add_option("--descriptors", o.descriptor_files, "Descriptor CSV files")->required();
    classify->add_option("--lambdas", o.config.lambdas, "Regularization grid")->capture_default_str();
    classify->add_option("--epochs", o.config.epochs, "Training epochs")->capture_default_str();
    classify->add_option("--output", o.output, "Output path prefix (.csv and .md are appended)");

    auto* report = app.add_subcommand("report", "Render Markdown tables from result CSVs");
    report->add_option("--search", o.search_csv, "Search result CSV");
    report->add_option("--classify", o.classify_csv, "Classification result CSV");
    report->add_option("--output", o.output, "Markdown output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*stainsep) return cmd_stainsep(o);
        if (*extract) return cmd_extract(o);
        if (*search) return cmd_search(o);
        if (*classify) return cmd_classify(o);
        if (*report) return cmd_report(o);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Config:
            case ErrorKind::InvalidInput:
            case ErrorKind::InvalidManifest:
                return kConfigError;
            case ErrorKind::Io:
                return kIoError;
            case ErrorKind::EmptyDescriptor:
                return kEmptyResult;
            default:
                return kFailure;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
