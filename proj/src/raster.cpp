#include <felp/raster.hpp>
#include <felp/error.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace felp {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::NoDominantDirection: return "no-dominant-direction";
        case ErrorKind::EmptyDescriptor: return "empty-descriptor";
        case ErrorKind::BasisEstimationFailed: return "basis-estimation-failed";
        case ErrorKind::InvalidBasis: return "invalid-basis";
        case ErrorKind::InvalidManifest: return "invalid-manifest";
        case ErrorKind::Io: return "io";
        case ErrorKind::Config: return "config";
    }
    return "unknown";
}

namespace {

void check_shape(int width, int height, int channels, int n_bits) {
    if (width < 0 || height < 0)
        throw Error(ErrorKind::InvalidInput, "raster dimensions must be non-negative");
    if (channels != 1 && channels != 3)
        throw Error(ErrorKind::InvalidInput, "raster must have 1 or 3 channels, got " + std::to_string(channels));
    if (n_bits < 1 || n_bits > 16)
        throw Error(ErrorKind::InvalidInput, "n_bits must be in [1, 16]");
}

} // namespace

RasterImage::RasterImage(int width, int height, int channels, int n_bits)
    : width_(width), height_(height), channels_(channels), n_bits_(n_bits) {
    check_shape(width, height, channels, n_bits);
    data_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint16_t> data, int n_bits)
    : width_(width), height_(height), channels_(channels), n_bits_(n_bits), data_(std::move(data)) {
    check_shape(width, height, channels, n_bits);
    if (data_.size() != static_cast<std::size_t>(width) * height * channels)
        throw Error(ErrorKind::InvalidInput, "raster data length does not match width*height*channels");
    const auto top = max_value();
    if (std::any_of(data_.begin(), data_.end(), [top](std::uint16_t v) { return v > top; }))
        throw Error(ErrorKind::InvalidInput, "raster value exceeds 2^n_bits - 1");
}

void RasterImage::set(int x, int y, int c, std::uint16_t v) {
    if (v > max_value())
        throw Error(ErrorKind::InvalidInput, "raster value exceeds 2^n_bits - 1");
    data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c] = v;
}

RasterImage RasterImage::crop(int x0, int y0, int w, int h) const {
    if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_)
        throw Error(ErrorKind::InvalidInput, "crop rectangle outside image");
    RasterImage out(w, h, channels_, n_bits_);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels_; ++c)
                out.data_[(static_cast<std::size_t>(y) * w + x) * channels_ + c] = at(x0 + x, y0 + y, c);
    return out;
}

RasterImage to_grayscale(const RasterImage& img) {
    if (img.channels() != 3)
        throw Error(ErrorKind::InvalidInput, "to_grayscale expects a 3-channel image");
    RasterImage out(img.width(), img.height(), 1, img.n_bits());
    const double top = img.max_value();
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double luma = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
            out.set(x, y, static_cast<std::uint16_t>(std::clamp(std::round(luma), 0.0, top)));
        }
    }
    return out;
}

RasterImage rotate90(const RasterImage& img) {
    const int w = img.width();
    const int h = img.height();
    RasterImage out(h, w, img.channels(), img.n_bits());
    for (int y = 0; y < w; ++y)
        for (int x = 0; x < h; ++x)
            for (int c = 0; c < img.channels(); ++c)
                out.set(x, y, c, img.at(y, h - 1 - x, c));
    return out;
}

double direction_degrees(double gx, double gy) noexcept {
    // Reduce to the quadrant gx > 0, gy >= 0 by exact quarter turns so that
    // rotated gradients land in exactly shifted bins.
    int quarter = 0;
    while (!(gx > 0.0 && gy >= 0.0)) {
        if (gx == 0.0 && gy == 0.0)
            return 0.0;
        const double t = gx;
        gx = gy;
        gy = -t;
        ++quarter;
    }
    double base = std::atan2(gy, gx) * (180.0 / std::numbers::pi);
    if (gx == gy)
        base = 45.0;
    if (base >= 90.0)
        base = std::nextafter(90.0, 0.0);
    // Keep the integer bin of the shifted angle equal to the shifted bin even
    // when the addition rounds up onto the next integer.
    const double bin = std::floor(base) + 90.0 * quarter;
    double out = base + 90.0 * quarter;
    if (out >= bin + 1.0)
        out = std::nextafter(bin + 1.0, bin);
    return out;
}

GradientField gradient(const RasterImage& img, GradientOperator op) {
    if (img.channels() != 1)
        throw Error(ErrorKind::InvalidInput, "gradient expects a single-channel image");
    const int w = img.width();
    const int h = img.height();
    if (w < 2 || h < 2)
        throw Error(ErrorKind::InvalidInput, "gradient needs an image of at least 2x2 pixels");

    GradientField f;
    f.width = w;
    f.height = h;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    f.gx.resize(n);
    f.gy.resize(n);
    f.direction.resize(n);
    f.magnitude.resize(n);

    auto px = [&](int x, int y) -> double {
        return img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
    };
    auto diff_x = [&](int x, int y) -> double {
        if (x == 0) return px(1, y) - px(0, y);
        if (x == w - 1) return px(w - 1, y) - px(w - 2, y);
        return (px(x + 1, y) - px(x - 1, y)) / 2.0;
    };
    auto diff_y = [&](int x, int y) -> double {
        if (y == 0) return px(x, 1) - px(x, 0);
        if (y == h - 1) return px(x, h - 1) - px(x, h - 2);
        return (px(x, y + 1) - px(x, y - 1)) / 2.0;
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double gx = 0.0;
            double gy = 0.0;
            if (op == GradientOperator::Central) {
                gx = diff_x(x, y);
                gy = diff_y(x, y);
            } else {
                // Sobel with replicated borders.
                gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)
                      - px(x - 1, y - 1) - 2.0 * px(x - 1, y) - px(x - 1, y + 1)) / 8.0;
                gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)
                      - px(x - 1, y - 1) - 2.0 * px(x, y - 1) - px(x + 1, y - 1)) / 8.0;
            }
            const auto i = f.index(x, y);
            f.gx[i] = gx;
            f.gy[i] = gy;
            f.magnitude[i] = std::hypot(gx, gy);
            f.direction[i] = direction_degrees(gx, gy);
        }
    }
    return f;
}

std::vector<std::uint32_t> direction_histogram(const GradientField& field, std::optional<PixelRect> mask) {
    const PixelRect r = mask.value_or(PixelRect{0, 0, field.width, field.height});
    if (r.x0 < 0 || r.y0 < 0 || r.x0 + r.width > field.width || r.y0 + r.height > field.height)
        throw Error(ErrorKind::InvalidInput, "direction mask outside gradient field");
    std::vector<std::uint32_t> bins(360, 0);
    for (int y = r.y0; y < r.y0 + r.height; ++y) {
        for (int x = r.x0; x < r.x0 + r.width; ++x) {
            const auto i = field.index(x, y);
            if (field.magnitude[i] > 0.0) {
                const int bin = std::min(359, static_cast<int>(std::floor(field.direction[i])));
                ++bins[static_cast<std::size_t>(bin)];
            }
        }
    }
    return bins;
}

std::optional<ModeResult> try_direction_mode(const GradientField& field, std::optional<PixelRect> mask) {
    const auto bins = direction_histogram(field, mask);
    std::size_t best = 0;
    bool unique = true;
    for (std::size_t k = 1; k < bins.size(); ++k) {
        if (bins[k] > bins[best]) {
            best = k;
            unique = true;
        } else if (bins[k] == bins[best]) {
            unique = false;
        }
    }
    if (bins[best] == 0)
        return std::nullopt;
    return ModeResult{static_cast<double>(best) + 0.5, unique};
}

double direction_mode(const GradientField& field, std::optional<PixelRect> mask) {
    const auto mode = try_direction_mode(field, mask);
    if (!mode)
        throw Error(ErrorKind::NoDominantDirection, "all gradient magnitudes are zero");
    return mode->degrees;
}

} // namespace felp
