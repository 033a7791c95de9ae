#include <felp/png_io.hpp>
#include <felp/error.hpp>

#include <png.h>

#include <cstring>
#include <vector>

namespace felp {

namespace {

// png_image owns internal state until finished or freed.
class PngImage {
public:
    PngImage() {
        std::memset(&image_, 0, sizeof image_);
        image_.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&image_); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;

    png_image* get() noexcept { return &image_; }
    png_image* operator->() noexcept { return &image_; }

private:
    png_image image_;
};

[[noreturn]] void fail(const std::filesystem::path& path, const png_image* image) {
    throw Error(ErrorKind::Io, "png " + path.string() + ": " + image->message);
}

} // namespace

RasterImage read_png(const std::filesystem::path& path) {
    PngImage image;
    if (!png_image_begin_read_from_file(image.get(), path.c_str()))
        fail(path, image.get());
    const bool color = (image->format & PNG_FORMAT_FLAG_COLOR) != 0;
    image->format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    const int width = static_cast<int>(image->width);
    const int height = static_cast<int>(image->height);

    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(*image.get()));
    if (!png_image_finish_read(image.get(), nullptr, buffer.data(), 0, nullptr))
        fail(path, image.get());
    std::vector<std::uint16_t> data(buffer.begin(), buffer.end());
    return RasterImage(width, height, channels, std::move(data), 8);
}

std::pair<int, int> png_dimensions(const std::filesystem::path& path) {
    PngImage image;
    if (!png_image_begin_read_from_file(image.get(), path.c_str()))
        fail(path, image.get());
    return {static_cast<int>(image->width), static_cast<int>(image->height)};
}

void write_png(const std::filesystem::path& path, const RasterImage& img) {
    if (img.n_bits() != 8)
        throw Error(ErrorKind::InvalidInput, "write_png supports 8-bit rasters only");
    PngImage image;
    image->width = static_cast<png_uint_32>(img.width());
    image->height = static_cast<png_uint_32>(img.height());
    image->format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const auto src = img.data();
    std::vector<png_byte> buffer(src.begin(), src.end());
    if (!png_image_write_to_file(image.get(), path.c_str(), 0, buffer.data(), 0, nullptr))
        fail(path, image.get());
}

} // namespace felp
