#pragma once

#include <felp/classifier.hpp>
#include <felp/dataset.hpp>
#include <felp/descriptor.hpp>
#include <felp/report.hpp>
#include <felp/stain.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace felp {

inline constexpr const char* kVersion = "1.0.0";

/// Everything that determines a run's output; echoed into every artifact header.
struct RunConfig {
    Method method = Method::FELP;
    WindowSpec window;
    StainMode stain_mode = StainMode::GRAY;
    double artefact_tau = kDefaultArtefactTau;
    WedgeParams wedge;
    std::vector<Metric> metrics{Metric::L1, Metric::L2, Metric::COSINE, Metric::HUTCHINSON};
    std::vector<int> ks{1, 3, 5};
    std::vector<double> lambdas{1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
    int epochs = 10;
    std::uint64_t seed = 0;
    double subset = 1.0;
    std::size_t max_patches_per_patient = 0;  ///< 0 keeps every patch
    unsigned threads = 1;
    std::filesystem::path dataset_root;
    std::filesystem::path output_dir = "out";
    std::optional<std::filesystem::path> manifest;
};

/// Provenance lines. Thread count and output paths are left out so that runs differing
/// only in those produce byte-identical artifacts.
std::vector<std::string> provenance(const RunConfig& config);

struct Selection {
    SplitManifest manifest;
    std::vector<PatchRecord> kept;
    std::vector<RemovedPatch> removed;
    std::size_t malformed = 0;
    std::size_t wrong_size = 0;
    std::vector<std::string> unknown_patients;
};

/// Scan, patient subsample, manifest (read or seeded), per-patient patch cap, artefact filter.
Selection select_patches(const RunConfig& config);

struct PatientBasis {
    StainBasis basis;
    std::string note;  ///< empty unless the fallback basis was used
};

/// Pooled wedge estimate per patient; failures fall back to the reference basis.
std::map<std::string, PatientBasis> estimate_patient_bases(const std::vector<PatchRecord>& kept,
                                                           const RunConfig& config);

struct ExtractFailure {
    std::string patch_id;
    std::string reason;
};

struct ExtractResult {
    std::vector<DescriptorRecord> records;
    std::vector<ExtractFailure> failures;
};

/// Descriptor per patch. In HE mode every patient in `kept` needs an entry in `bases`.
ExtractResult extract_descriptors(const std::vector<PatchRecord>& kept,
                                  const std::map<std::string, PatientBasis>& bases, const RunConfig& config);

/// Patient id of a descriptor row, parsed from the patch id.
std::string patient_of(const std::string& patch_id);

struct Partitioned {
    std::vector<DescriptorRecord> train;
    std::vector<DescriptorRecord> validation;
    std::vector<DescriptorRecord> test;
};

Partitioned partition(const std::vector<DescriptorRecord>& records, const SplitManifest& manifest);

/// Retrieval table rows for one descriptor set: train partition as gallery, test as queries.
std::vector<SearchRow> run_search(const Partitioned& data, const std::vector<Metric>& metrics,
                                  const std::vector<int>& ks, unsigned threads);

/// Grid search on validation, final scores on test.
ClassifyRow run_classify(const Partitioned& data, const RunConfig& config);

} // namespace felp
