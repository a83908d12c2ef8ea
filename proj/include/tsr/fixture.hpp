#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

namespace tsr {

/// Writes a small synthetic sign dataset under `root/<class>/`: each class
/// is a colored shape (disc, triangle, square, diamond, bar, ...) on a noisy
/// background, with jittered position and scale and image sides between 24
/// and 48 pixels. Every fourth image is PNG, the rest PPM. Deterministic in
/// `seed`. Returns the number of images written.
std::size_t write_toy_fixture(const std::filesystem::path& root, std::size_t n_classes = 5,
                              std::size_t per_class = 20, std::uint64_t seed = 7);

}  // namespace tsr
