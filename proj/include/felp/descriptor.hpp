#pragma once

#include <felp/format.hpp>
#include <felp/raster.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace felp {

enum class Method { FELP, ELP };
enum class StainMode { GRAY, HE };

const char* to_string(Method m) noexcept;
const char* to_string(StainMode s) noexcept;
Method parse_method(const std::string& s);
StainMode parse_stain_mode(const std::string& s);

/// Window scan parameters. Defaults reproduce the published configuration.
struct WindowSpec {
    int n = 9;
    int stride = 1;
    double homogeneity_threshold = 1.0;
    double T = 0.08;
    GradientOperator gradient_op = GradientOperator::Central;

    void validate() const;
};

/// Bins are L1-normalized; metadata echoes the parameters that produced them.
struct Descriptor {
    std::vector<double> bins;
    Method method = Method::FELP;
    int n = 9;
    StainMode stain_mode = StainMode::GRAY;
    double T = 0.08;
    double homogeneity_threshold = 1.0;
    std::string grayscale = "bt601";
    std::string intensity_scaling = "unit";

    bool compatible_with(const Descriptor& other) const noexcept {
        return method == other.method && n == other.n && stain_mode == other.stain_mode
            && bins.size() == other.bins.size();
    }
};

/// Expected bin count for a configuration.
std::size_t descriptor_length(Method method, int n, StainMode mode);

/// Square view into a single-channel raster.
struct WindowView {
    const RasterImage* image = nullptr;
    int x0 = 0;
    int y0 = 0;
    int n = 0;

    std::uint16_t at(int x, int y) const noexcept { return image->at(x0 + x, y0 + y); }
};

struct ProjectionVector {
    std::vector<double> values;
    double theta = 0.0;
};

/// H = 1 - sqrt(sum (w - median)^2) / 2^n_bits.
double homogeneity(const WindowView& window, int n_bits);

bool is_processable(const WindowView& window, const GradientField& field, const WindowSpec& spec);

/// Discrete Radon projection of a square window of intensities at angle theta (degrees).
/// The window is rotated by -theta about its center (bilinear, zero outside) and its
/// columns summed; quarter-turn multiples are realized by exact index permutation.
ProjectionVector radon_projection(std::span<const double> window, int n, double theta);

/// 0 for p' <= -T, 1 for |p'| < T, 2 for p' >= T, on forward differences of p.
std::vector<std::uint8_t> ternary_encode(std::span<const double> p, double T);

int transition_count(std::span<const std::uint8_t> q);

/// Sign pattern of forward differences, difference i in bit i. Requires p.size() <= 33.
std::uint32_t minmax_code(std::span<const double> p);

/// Per-angle integer histogram before normalization. FELP: 4 blocks of (n-1) bins,
/// ELP: 4 blocks of 2^(n-1) bins.
std::vector<std::uint64_t> descriptor_counts(const RasterImage& gray, const WindowSpec& spec, Method method);

Descriptor felp_descriptor(const RasterImage& gray, const WindowSpec& spec);
Descriptor elp_descriptor(const RasterImage& gray, const WindowSpec& spec);
Descriptor compute_descriptor(const RasterImage& gray, const WindowSpec& spec, Method method);

/// [h_H h_E], each half computed independently and the concatenation renormalized to sum 1.
Descriptor stained_descriptor(const RasterImage& h_map, const RasterImage& e_map, const WindowSpec& spec,
                              Method method);

/// L1 normalization of integer counts. Throws EmptyDescriptor on an all-zero histogram.
std::vector<double> l1_normalize(std::span<const std::uint64_t> counts);

// --- CSV serialization -------------------------------------------------------

struct DescriptorRecord {
    std::string patch_id;
    int label = 0;
    Descriptor descriptor;
};

/// Header comment lines (without the leading "# ") are written before the column header.
void write_descriptor_csv(std::ostream& out, std::span<const DescriptorRecord> records,
                          std::span<const std::string> provenance = {});
std::vector<DescriptorRecord> read_descriptor_csv(std::istream& in);


} // namespace felp
