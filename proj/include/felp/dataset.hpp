#pragma once

#include <felp/raster.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace felp {

struct PatchRecord {
    std::string patient_id;
    int x = 0;
    int y = 0;
    int label = 0;
    std::filesystem::path path;
    bool flagged = false;

    /// File stem, e.g. "10253_idx5_x1001_y801_class1".
    std::string patch_id() const { return path.stem().string(); }
};

/// Parses "<patient>_x<X>_y<Y>_class<C>.png". Returns nullopt for names that do not match.
std::optional<PatchRecord> parse_patch_name(const std::string& filename);

struct ScanOptions {
    int expected_size = 50;
    bool reject_wrong_size = true;
};

struct ScanResult {
    std::vector<PatchRecord> records;  ///< sorted by (patient, x, y, label, path)
    std::vector<std::filesystem::path> malformed;
    std::vector<std::filesystem::path> wrong_size;
};

/// Recursive scan for PNG patches. Throws Io if the root is not a readable directory.
ScanResult scan(const std::filesystem::path& root, const ScanOptions& options = {});

struct SplitManifest {
    std::set<std::string> train;
    std::set<std::string> validation;
    std::set<std::string> test;

    /// Throws InvalidManifest when a patient appears in two sections.
    void validate() const;
    bool contains(const std::string& patient) const;
};

/// Plain text: "[train]", "[validation]", "[test]" section headers, one patient id per line.
void write_manifest(std::ostream& out, const SplitManifest& manifest);
SplitManifest read_manifest(std::istream& in);

/// Seeded patient-level split. Proportions default to 84/29/49.
SplitManifest random_split(const std::vector<std::string>& patients, std::uint64_t seed,
                           double train_fraction = 84.0 / 162.0, double validation_fraction = 29.0 / 162.0);

/// Seeded subsample of patients, at least one when the input is non-empty.
std::vector<std::string> subsample_patients(const std::vector<std::string>& patients, double fraction,
                                            std::uint64_t seed);

std::vector<std::string> patient_ids(const std::vector<PatchRecord>& records);

struct SplitRecords {
    std::vector<PatchRecord> train;
    std::vector<PatchRecord> validation;
    std::vector<PatchRecord> test;
    std::vector<std::string> unknown_patients;  ///< listed in the manifest but absent from the records
    std::size_t unassigned = 0;                 ///< records whose patient is not in the manifest
};

SplitRecords make_split(const std::vector<PatchRecord>& records, const SplitManifest& manifest);

struct RemovedPatch {
    PatchRecord record;
    std::string reason;
};

struct FilterResult {
    std::vector<PatchRecord> kept;
    std::vector<RemovedPatch> removed;
};

FilterResult filter_artefacts(const std::vector<PatchRecord>& records, double tau, unsigned threads = 1);

/// CSV with header "path,reason".
void write_removed_log(std::ostream& out, const std::vector<RemovedPatch>& removed);

/// Deterministic index shuffle shared by every seeded choice in the pipeline.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

} // namespace felp
