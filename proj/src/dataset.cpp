#include "tsr/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "tsr/image_io.hpp"
#include "tsr/network.hpp"
#include "tsr/parallel.hpp"
#include "tsr/rng.hpp"

namespace tsr {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".ppm" || ext == ".png";
}

int parse_class_dir(const std::string& name) {
    const bool digits = !name.empty() && name.size() <= 6 &&
                        std::all_of(name.begin(), name.end(),
                                    [](unsigned char c) { return std::isdigit(c) != 0; });
    if (!digits) {
        throw DatasetError(DatasetErrorKind::bad_class_directory,
                           "class directory '" + name + "' is not an integer class ID");
    }
    const int label = std::stoi(name);
    if (label > kMaxLabel) {
        throw DatasetError(DatasetErrorKind::bad_class_directory,
                           "class directory '" + name + "' is outside 0.." +
                               std::to_string(kMaxLabel));
    }
    return label;
}

}  // namespace

std::vector<ScanEntry> scan_dataset(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw DatasetError(DatasetErrorKind::missing_root,
                           "dataset root " + root.string() + " does not exist or is not a directory");
    }
    std::vector<ScanEntry> entries;
    std::map<int, std::string> seen;
    for (const auto& dir : fs::directory_iterator(root)) {
        if (!dir.is_directory()) continue;
        const std::string name = dir.path().filename().string();
        const int label = parse_class_dir(name);
        if (auto [it, fresh] = seen.emplace(label, name); !fresh) {
            throw DatasetError(DatasetErrorKind::bad_class_directory,
                               "class " + std::to_string(label) + " appears as both '" +
                                   it->second + "' and '" + name + "'");
        }
        for (const auto& file : fs::directory_iterator(dir.path())) {
            if (file.is_regular_file() && is_image_file(file.path())) {
                entries.push_back({file.path(), label});
            }
        }
    }
    if (entries.empty()) {
        throw DatasetError(DatasetErrorKind::empty_dataset,
                           "empty dataset: no .ppm/.png images under " + root.string());
    }
    std::sort(entries.begin(), entries.end(), [](const ScanEntry& a, const ScanEntry& b) {
        if (a.label != b.label) return a.label < b.label;
        return a.path.filename().string() < b.path.filename().string();
    });
    return entries;
}

Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w) {
    if (image.shape().rank() != 3) {
        throw ShapeError("resize expects [H,W,C], got " + image.shape().to_string());
    }
    const std::size_t in_h = image.shape()[0];
    const std::size_t in_w = image.shape()[1];
    const std::size_t ch = image.shape()[2];
    const double scale_y = static_cast<double>(in_h) / static_cast<double>(out_h);
    const double scale_x = static_cast<double>(in_w) / static_cast<double>(out_w);

    auto source = [](std::size_t dst, double scale, std::size_t extent) {
        const double s = (static_cast<double>(dst) + 0.5) * scale - 0.5;
        return std::clamp(s, 0.0, static_cast<double>(extent - 1));
    };

    std::vector<float> out(out_h * out_w * ch);
    const float* in = image.data().data();
    for (std::size_t y = 0; y < out_h; ++y) {
        const double sy = source(y, scale_y, in_h);
        const auto y0 = static_cast<std::size_t>(sy);
        const std::size_t y1 = std::min(y0 + 1, in_h - 1);
        const double wy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double sx = source(x, scale_x, in_w);
            const auto x0 = static_cast<std::size_t>(sx);
            const std::size_t x1 = std::min(x0 + 1, in_w - 1);
            const double wx = sx - static_cast<double>(x0);
            for (std::size_t c = 0; c < ch; ++c) {
                const double p00 = in[(y0 * in_w + x0) * ch + c];
                const double p01 = in[(y0 * in_w + x1) * ch + c];
                const double p10 = in[(y1 * in_w + x0) * ch + c];
                const double p11 = in[(y1 * in_w + x1) * ch + c];
                const double top = (1.0 - wx) * p00 + wx * p01;
                const double bottom = (1.0 - wx) * p10 + wx * p11;
                out[(y * out_w + x) * ch + c] = static_cast<float>((1.0 - wy) * top + wy * bottom);
            }
        }
    }
    return Tensor(Shape{out_h, out_w, ch}, std::move(out));
}

Tensor normalize(const Tensor& image) {
    std::vector<float> out(image.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const float v = image[i];
        if (!(v >= 0.0f && v <= 255.0f)) {
            throw DatasetError(DatasetErrorKind::out_of_range,
                               "pixel value " + std::to_string(v) + " outside 0..255");
        }
        out[i] = v / 255.0f;
    }
    return Tensor(image.shape(), std::move(out));
}

LabeledExample load_example(const ScanEntry& entry) {
    if (entry.label < 0 || entry.label > kMaxLabel) {
        throw DatasetError(DatasetErrorKind::out_of_range,
                           "label " + std::to_string(entry.label) + " for " +
                               entry.path.string() + " outside 0.." + std::to_string(kMaxLabel));
    }
    const Tensor raw = decode_image(entry.path);
    LabeledExample ex{normalize(resize_bilinear(raw, kImageSide, kImageSide)), entry.label,
                      entry.path.string()};
    if (!(ex.image.shape() == Shape{kImageSide, kImageSide, kImageChannels})) {
        throw ShapeError(entry.path.string() + ": decoded to " + ex.image.shape().to_string());
    }
    for (const float v : ex.image.data()) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw DatasetError(DatasetErrorKind::out_of_range,
                               entry.path.string() + ": normalized pixel outside [0,1]");
        }
    }
    return ex;
}

std::vector<LabeledExample> load_examples(std::span<const ScanEntry> entries, std::size_t lanes) {
    std::vector<LabeledExample> out(entries.size());
    parallel_for(entries.size(), lanes, [&](std::size_t i) { out[i] = load_example(entries[i]); });
    return out;
}

std::vector<std::string> load_class_names(const fs::path& root, std::size_t n_classes) {
    std::vector<std::string> names(n_classes);
    for (std::size_t i = 0; i < n_classes; ++i) names[i] = "class_" + std::to_string(i);
    const fs::path table = root / "classes.csv";
    std::ifstream in(table);
    if (!in) return names;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string id = line.substr(0, comma);
        const bool numeric = !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
            return std::isdigit(c) != 0;
        });
        if (!numeric) {
            if (line_no == 1) continue;  // header row
            throw DatasetError(DatasetErrorKind::bad_class_table,
                               table.string() + ":" + std::to_string(line_no) + ": bad class id '" +
                                   id + "'");
        }
        if (comma == std::string::npos) {
            throw DatasetError(DatasetErrorKind::bad_class_table,
                               table.string() + ":" + std::to_string(line_no) + ": missing name");
        }
        const std::size_t cls = std::stoul(id);
        if (cls < n_classes) names[cls] = line.substr(comma + 1);
    }
    return names;
}

SplitIndices stratified_split_indices(std::span<const int> labels, double test_fraction,
                                      double val_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0) ||
        !(val_fraction >= 0.0 && val_fraction < 1.0)) {
        throw std::invalid_argument("split fractions must be in [0, 1)");
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    const std::size_t parts = 1 + (test_fraction > 0.0) + (val_fraction > 0.0);
    const CounterRng base = CounterRng::from_seed(seed, Stream::split);
    SplitIndices split;
    for (auto& [label, members] : by_class) {
        const std::size_t n = members.size();
        if (n < parts) {
            throw DatasetError(DatasetErrorKind::too_few_examples,
                               "class " + std::to_string(label) + " has " + std::to_string(n) +
                                   " examples; at least " + std::to_string(parts) +
                                   " are needed for the requested split");
        }
        CounterRng rng = base.derive(static_cast<std::uint64_t>(label));
        shuffle(members.begin(), members.end(), rng);

        std::size_t n_test = 0;
        if (test_fraction > 0.0) {
            n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
            n_test = std::clamp<std::size_t>(n_test, 1, n - (parts - 1));
        }
        const std::size_t rest = n - n_test;
        std::size_t n_val = 0;
        if (val_fraction > 0.0) {
            n_val = static_cast<std::size_t>(std::llround(static_cast<double>(rest) * val_fraction));
            n_val = std::clamp<std::size_t>(n_val, 1, rest - 1);
        }
        auto it = members.begin();
        split.test.insert(split.test.end(), it, it + static_cast<std::ptrdiff_t>(n_test));
        it += static_cast<std::ptrdiff_t>(n_test);
        split.validation.insert(split.validation.end(), it, it + static_cast<std::ptrdiff_t>(n_val));
        it += static_cast<std::ptrdiff_t>(n_val);
        split.train.insert(split.train.end(), it, members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

DatasetSplit stratified_split(std::vector<LabeledExample> examples, double test_fraction,
                              double val_fraction, std::uint64_t seed) {
    std::vector<int> labels(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) labels[i] = examples[i].label;
    const SplitIndices idx = stratified_split_indices(labels, test_fraction, val_fraction, seed);
    DatasetSplit split;
    auto take = [&](const std::vector<std::size_t>& from, std::vector<LabeledExample>& to) {
        to.reserve(from.size());
        for (std::size_t i : from) to.push_back(std::move(examples[i]));
    };
    take(idx.train, split.train);
    take(idx.validation, split.validation);
    take(idx.test, split.test);
    return split;
}

std::uint64_t dataset_fingerprint(const fs::path& root, std::span<const ScanEntry> entries) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const char* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(p[i]);
            h *= 0x100000001b3ULL;
        }
    };
    std::vector<char> buffer(1 << 16);
    for (const auto& e : entries) {
        const std::string rel = e.path.lexically_relative(root).generic_string();
        feed(rel.data(), rel.size());
        feed("\0", 1);
        const std::string label = std::to_string(e.label);
        feed(label.data(), label.size());
        std::ifstream in(e.path, std::ios::binary);
        while (in) {
            in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
            feed(buffer.data(), static_cast<std::size_t>(in.gcount()));
        }
    }
    return h;
}

}  // namespace tsr
