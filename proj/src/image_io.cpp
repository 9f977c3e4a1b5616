#include "ecgdigi/image_io.hpp"

#include "ecgdigi/imgproc.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace ecgdigi {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    return f;
}

void write_rows(const std::filesystem::path& path, int width, int height, int bit_depth, int color_type,
                const std::vector<std::vector<png_byte>>& rows) {
    auto f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::Io, "libpng allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::Io, "failed writing PNG '" + path.string() + "'");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (const auto& row : rows) png_write_row(png, row.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(f.get()) != 0) fail(ErrorCode::Io, "failed writing PNG '" + path.string() + "'");
}

}  // namespace

RasterImage read_png(const std::filesystem::path& path) {
    auto f = open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        fail(ErrorCode::Io, "'" + path.string() + "' is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Io, "libpng allocation failed");
    }
    // Declared ahead of setjmp so a longjmp never skips a constructor.
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Io, "corrupt PNG '" + path.string() + "'");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    png_set_strip_16(png);
    png_set_packing(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const bool has_alpha = channels == 2 || channels == 4;
    const int color_channels = channels >= 3 ? 3 : 1;
    RasterImage out(static_cast<int>(width), static_cast<int>(height), color_channels);
    for (png_uint_32 y = 0; y < height; ++y)
        for (png_uint_32 x = 0; x < width; ++x) {
            const png_byte* p = rows[y] + x * channels;
            const double alpha = has_alpha ? p[channels - 1] / 255.0 : 1.0;
            for (int c = 0; c < color_channels; ++c) {
                const double v = p[c] * alpha + 255.0 * (1.0 - alpha);
                out.at(static_cast<int>(x), static_cast<int>(y), c) = static_cast<std::uint8_t>(v + 0.5);
            }
        }
    return out;
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
    const int c = image.channels();
    std::vector<std::vector<png_byte>> rows(image.height());
    auto px = image.pixels();
    const std::size_t row_len = static_cast<std::size_t>(image.width()) * c;
    for (int y = 0; y < image.height(); ++y) rows[y].assign(px.begin() + y * row_len, px.begin() + (y + 1) * row_len);
    write_rows(path, image.width(), image.height(), 8, c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, rows);
}

void write_mask_png(const std::filesystem::path& path, const BinaryImage& mask) {
    std::vector<std::vector<png_byte>> rows(mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        rows[y].assign((mask.width() + 7) / 8, 0);
        for (int x = 0; x < mask.width(); ++x)
            if (!mask.at(x, y)) rows[y][x / 8] |= static_cast<png_byte>(0x80 >> (x % 8));
    }
    write_rows(path, mask.width(), mask.height(), 1, PNG_COLOR_TYPE_GRAY, rows);
}

BinaryImage read_mask_png(const std::filesystem::path& path) { return threshold_mid(read_png(path)); }

}  // namespace ecgdigi
