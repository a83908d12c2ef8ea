#include "tsr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace tsr {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError(ImageErrorKind::io, "cannot open image " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Reads one whitespace-delimited header token, skipping '#' comments.
bool next_token(const std::string& s, std::size_t& pos, std::string& token) {
    token.clear();
    while (pos < s.size()) {
        const auto c = static_cast<unsigned char>(s[pos]);
        if (c == '#') {
            while (pos < s.size() && s[pos] != '\n' && s[pos] != '\r') ++pos;
        } else if (std::isspace(c)) {
            ++pos;
        } else {
            break;
        }
    }
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '#') {
        token.push_back(s[pos++]);
    }
    return !token.empty();
}

std::size_t header_number(const std::string& s, std::size_t& pos, const std::string& name,
                          const char* field) {
    std::string token;
    if (!next_token(s, pos, token)) {
        throw ImageError(ImageErrorKind::truncated, name + ": truncated PPM header");
    }
    if (!std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
        token.size() > 9) {
        throw ImageError(ImageErrorKind::malformed,
                         name + ": bad PPM " + field + " '" + token + "'");
    }
    return std::stoul(token);
}

Tensor decode_png(const std::string& bytes, const std::string& name) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    auto fail = [&](const char* stage) -> ImageError {
        const std::string message = image.message;
        png_image_free(&image);
        const bool short_read = message.find("Read Error") != std::string::npos ||
                                message.find("Not enough") != std::string::npos ||
                                message.find("truncat") != std::string::npos ||
                                message.find("EOF") != std::string::npos;
        return ImageError(short_read ? ImageErrorKind::truncated : ImageErrorKind::malformed,
                          name + ": PNG " + stage + " failed: " + message);
    };
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw fail("header");
    }
    image.format = PNG_FORMAT_RGBA;
    std::vector<png_byte> rgba(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) throw fail("decode");

    const std::size_t h = image.height;
    const std::size_t w = image.width;
    std::vector<float> out(h * w * 3);
    for (std::size_t i = 0; i < h * w; ++i) {
        for (std::size_t c = 0; c < 3; ++c) out[i * 3 + c] = rgba[i * 4 + c];
    }
    png_image_free(&image);
    return Tensor(Shape{h, w, 3}, std::move(out));
}

void check_writable(const Tensor& image) {
    if (image.shape().rank() != 3 || image.shape()[2] != 3) {
        throw ShapeError("image writer expects [H,W,3], got " + image.shape().to_string());
    }
}

std::vector<std::uint8_t> to_bytes(const Tensor& image) {
    std::vector<std::uint8_t> px(image.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(image[i]), 0L, 255L));
    }
    return px;
}

}  // namespace

Tensor decode_ppm(const std::string& bytes, const std::string& name) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
        throw ImageError(ImageErrorKind::unsupported_format, name + ": not a binary PPM (P6)");
    }
    std::size_t pos = 2;
    const std::size_t width = header_number(bytes, pos, name, "width");
    const std::size_t height = header_number(bytes, pos, name, "height");
    const std::size_t maxval = header_number(bytes, pos, name, "maxval");
    if (width == 0 || height == 0) {
        throw ImageError(ImageErrorKind::malformed, name + ": PPM has zero size");
    }
    if (maxval != 255) {
        throw ImageError(ImageErrorKind::bad_maxval,
                         name + ": PPM maxval " + std::to_string(maxval) + " is not 255");
    }
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw ImageError(ImageErrorKind::truncated, name + ": truncated PPM header");
    }
    ++pos;
    const std::size_t payload = width * height * 3;
    if (bytes.size() - pos < payload) {
        throw ImageError(ImageErrorKind::truncated,
                         name + ": truncated PPM payload (" + std::to_string(bytes.size() - pos) +
                             " of " + std::to_string(payload) + " bytes)");
    }
    std::vector<float> out(payload);
    for (std::size_t i = 0; i < payload; ++i) {
        out[i] = static_cast<unsigned char>(bytes[pos + i]);
    }
    return Tensor(Shape{height, width, 3}, std::move(out));
}

Tensor decode_image(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    const std::string name = path.string();
    static constexpr unsigned char png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes, name);
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_magic, 8) == 0) {
        return decode_png(bytes, name);
    }
    throw ImageError(ImageErrorKind::unsupported_format,
                     name + ": unsupported image format (expected P6 PPM or PNG)");
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
    check_writable(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageError(ImageErrorKind::io, "cannot write " + path.string());
    out << "P6\n" << image.shape()[1] << ' ' << image.shape()[0] << "\n255\n";
    const auto px = to_bytes(image);
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) throw ImageError(ImageErrorKind::io, "write failed for " + path.string());
}

void write_png(const std::filesystem::path& path, const Tensor& image) {
    check_writable(image);
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.shape()[1]);
    png.height = static_cast<png_uint_32>(image.shape()[0]);
    png.format = PNG_FORMAT_RGB;
    const auto px = to_bytes(image);
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, px.data(), 0, nullptr)) {
        const std::string message = png.message;
        png_image_free(&png);
        throw ImageError(ImageErrorKind::io, "cannot write PNG " + path.string() + ": " + message);
    }
}

}  // namespace tsr
