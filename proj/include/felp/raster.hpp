#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace felp {

/// Row-major pixel grid with 1 or 3 interleaved channels.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, int n_bits = 8);
    RasterImage(int width, int height, int channels, std::vector<std::uint16_t> data, int n_bits = 8);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    int n_bits() const noexcept { return n_bits_; }
    std::uint16_t max_value() const noexcept { return static_cast<std::uint16_t>((1u << n_bits_) - 1u); }
    bool empty() const noexcept { return data_.empty(); }

    std::uint16_t at(int x, int y, int c = 0) const noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    void set(int x, int y, int c, std::uint16_t v);
    void set(int x, int y, std::uint16_t v) { set(x, y, 0, v); }

    std::span<const std::uint16_t> data() const noexcept { return data_; }

    /// Copy of the rectangle [x0, x0+w) x [y0, y0+h).
    RasterImage crop(int x0, int y0, int w, int h) const;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    int n_bits_ = 8;
    std::vector<std::uint16_t> data_;
};

/// ITU-R BT.601 luma, rounded and clamped.
RasterImage to_grayscale(const RasterImage& img);

/// Quarter-turn of the whole image: out(x', y') = in(y', H-1-x'). Directions map to direction + 90.
RasterImage rotate90(const RasterImage& img);

enum class GradientOperator { Central, Sobel };

/// Per-pixel gradient with directions in degrees in [0, 360).
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> gx;
    std::vector<double> gy;
    std::vector<double> direction;
    std::vector<double> magnitude;

    std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width + x; }
};

GradientField gradient(const RasterImage& img, GradientOperator op = GradientOperator::Central);

/// atan2(gy, gx) in degrees mapped to [0, 360). Rotating (gx, gy) by a quarter
/// turn adds exactly 90 to the result.
double direction_degrees(double gx, double gy) noexcept;

/// Axis-aligned pixel rectangle used to restrict direction binning to a window.
struct PixelRect {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
};

/// Counts of non-zero-magnitude directions in 1-degree bins [k, k+1).
std::vector<std::uint32_t> direction_histogram(const GradientField& field,
                                               std::optional<PixelRect> mask = std::nullopt);

/// Center of the most populated 1-degree bin; ties go to the smaller bin.
/// Throws NoDominantDirection if every magnitude in the mask is zero.
double direction_mode(const GradientField& field, std::optional<PixelRect> mask = std::nullopt);

/// Same as direction_mode but reports whether the winning bin was unique.
struct ModeResult {
    double degrees = 0.0;
    bool unique = true;
};
std::optional<ModeResult> try_direction_mode(const GradientField& field,
                                             std::optional<PixelRect> mask = std::nullopt);

} // namespace felp
