#pragma once

#include <felp/raster.hpp>

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace felp {

using Vec3 = std::array<double, 3>;

/// Per-pixel optical density, RGB order: od_c = -log10(max(I_c, 1) / I0).
std::vector<Vec3> optical_density(const RasterImage& img);

struct StainBasis {
    Vec3 h{};  ///< hematoxylin, unit norm, non-negative
    Vec3 e{};  ///< eosin, unit norm, non-negative
    bool fallback = false;
};

/// Ruifrok-Johnston reference vectors, used when estimation fails.
StainBasis default_basis();

struct WedgeParams {
    double beta = 0.15;          ///< pixels with every OD component below beta are transparent
    double alpha = 1.0;          ///< percentile of the wedge extremes
    std::size_t min_pixels = 100;
    double min_wedge_degrees = 3.0;  ///< narrower wedges are treated as a single stain
};

/// Wedge estimate of the two stain directions. Throws BasisEstimationFailed.
StainBasis estimate_basis(std::span<const Vec3> od_pixels, const WedgeParams& params = {});

struct ConcentrationMaps {
    int width = 0;
    int height = 0;
    std::vector<double> h;
    std::vector<double> e;
};

/// Least-squares unmixing with negatives clamped to zero. Throws InvalidBasis when the
/// basis Gram matrix has condition number above 1e6.
ConcentrationMaps unmix(const RasterImage& img, const StainBasis& basis);

struct QuantizedMaps {
    RasterImage h;
    RasterImage e;
    double h_scale = 0.0;  ///< 99th-percentile concentration mapped to 255
    double e_scale = 0.0;
};

/// 8-bit export: value = round(255 * min(c / p99, 1)); an all-zero map stays zero.
QuantizedMaps quantize(const ConcentrationMaps& maps, double percentile = 99.0);

/// Maximum over channels of the population variance of the channel intensities.
double max_channel_variance(const RasterImage& img);

inline constexpr double kDefaultArtefactTau = 40.0;

/// True when the patch shows too little colour variation to be tissue.
bool artefact_flag(const RasterImage& img, double tau = kDefaultArtefactTau);

/// Pools OD pixels of all given patches and estimates one basis.
StainBasis pooled_basis_for_patient(std::span<const RasterImage> patches, const WedgeParams& params = {});

/// Angle between two directions in degrees.
double angle_between(const Vec3& a, const Vec3& b);

/// Text record: "h r g b", "e r g b", "fallback 0|1", preceded by "# " provenance lines.
void write_basis(std::ostream& out, const StainBasis& basis, std::span<const std::string> provenance = {});
StainBasis read_basis(std::istream& in);

} // namespace felp
