#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "tsr/tensor.hpp"

namespace tsr {

enum class ImageErrorKind { io, unsupported_format, truncated, bad_maxval, malformed };

class ImageError : public std::runtime_error {
public:
    ImageError(ImageErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    ImageErrorKind kind() const noexcept { return kind_; }

private:
    ImageErrorKind kind_;
};

/// Decodes a binary PPM (P6, maxval 255) or PNG file into an [H,W,3] tensor
/// of channel values 0..255. PNG alpha is dropped, grayscale is expanded.
Tensor decode_image(const std::filesystem::path& path);

/// Decodes an in-memory P6 buffer; `name` is used in error messages.
Tensor decode_ppm(const std::string& bytes, const std::string& name = "<memory>");

/// Writers for [H,W,3] tensors with values 0..255 (rounded and clamped).
void write_ppm(const std::filesystem::path& path, const Tensor& image);
void write_png(const std::filesystem::path& path, const Tensor& image);

}  // namespace tsr
