#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsr/tensor.hpp"

namespace tsr {

enum class DatasetErrorKind {
    missing_root,
    empty_dataset,
    bad_class_directory,
    too_few_examples,
    out_of_range,
    bad_class_table,
};

class DatasetError : public std::runtime_error {
public:
    DatasetError(DatasetErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    DatasetErrorKind kind() const noexcept { return kind_; }

private:
    DatasetErrorKind kind_;
};

inline constexpr int kMaxLabel = 42;

struct ScanEntry {
    std::filesystem::path path;
    int label = 0;

    friend bool operator==(const ScanEntry&, const ScanEntry&) = default;
};

/// Lists `root/<class_id>/<image>` for class IDs 0..42 (zero-padded names
/// such as "00013" are accepted). Only .ppm and .png files are taken; other
/// files (e.g. annotation CSVs) are ignored. Sorted by (label, filename).
std::vector<ScanEntry> scan_dataset(const std::filesystem::path& root);

/// Bilinear resize with half-pixel centers:
/// src = (dst + 0.5) * in/out - 0.5, clamped to the image.
Tensor resize_bilinear(const Tensor& image, std::size_t out_h = 30, std::size_t out_w = 30);

/// Maps 0..255 to [0, 1]; rejects values outside 0..255.
Tensor normalize(const Tensor& image);

template <typename T = float>
BasicTensor<T> one_hot(int label, std::size_t n_classes = 43) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
        throw DatasetError(DatasetErrorKind::out_of_range,
                           "label " + std::to_string(label) + " outside [0, " +
                               std::to_string(n_classes) + ")");
    }
    BasicTensor<T> out(Shape{n_classes}, T{0});
    out[static_cast<std::size_t>(label)] = T{1};
    return out;
}

/// A [30,30,3] image with values in [0,1] and its class.
struct LabeledExample {
    Tensor image;
    int label = 0;
    std::string source_path;
};

/// decode -> resize -> normalize, with the example invariants enforced.
LabeledExample load_example(const ScanEntry& entry);

/// Loads every entry, possibly on several lanes; output order matches input.
std::vector<LabeledExample> load_examples(std::span<const ScanEntry> entries,
                                          std::size_t lanes = 1);

/// Names from optional `root/classes.csv` (`id,name` lines); missing
/// entries default to "class_<id>".
std::vector<std::string> load_class_names(const std::filesystem::path& root,
                                          std::size_t n_classes = 43);

/// Indices into the input list for each part, each in ascending order.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Per class: shuffle with the seeded generator, carve round(n * test_fraction)
/// test examples, then round(remainder * val_fraction) validation examples;
/// the rest is training. A part with a non-zero fraction gets at least one
/// example of every class.
SplitIndices stratified_split_indices(std::span<const int> labels, double test_fraction,
                                      double val_fraction, std::uint64_t seed);

struct DatasetSplit {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> validation;
    std::vector<LabeledExample> test;
    std::vector<std::string> class_names;
};

DatasetSplit stratified_split(std::vector<LabeledExample> examples, double test_fraction,
                              double val_fraction, std::uint64_t seed);

/// FNV-1a over relative paths, labels and file contents of a scan.
std::uint64_t dataset_fingerprint(const std::filesystem::path& root,
                                  std::span<const ScanEntry> entries);

}  // namespace tsr
