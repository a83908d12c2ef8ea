#include "tsr/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "tsr/image_io.hpp"
#include "tsr/rng.hpp"

namespace tsr {

namespace {

// Inside test in unit coordinates centered on the shape, radius 1.
bool inside(std::size_t shape, double u, double v) {
    switch (shape % 6) {
        case 0: return u * u + v * v <= 1.0;
        case 1: return v <= 1.0 && v >= -1.0 && std::abs(u) <= (1.0 - v) / 2.0;
        case 2: return std::abs(u) <= 0.8 && std::abs(v) <= 0.8;
        case 3: return std::abs(u) + std::abs(v) <= 1.0;
        case 4: return std::abs(v) <= 0.3 && std::abs(u) <= 1.0;
        default: return (std::abs(u) <= 0.25 || std::abs(v) <= 0.25) && u * u + v * v <= 1.0;
    }
}

}  // namespace

std::size_t write_toy_fixture(const std::filesystem::path& root, std::size_t n_classes,
                              std::size_t per_class, std::uint64_t seed) {
    if (n_classes == 0 || n_classes > 43) throw std::invalid_argument("fixture needs 1..43 classes");
    static constexpr float palette[6][3] = {{220, 30, 30},  {30, 90, 220}, {240, 200, 20},
                                            {30, 170, 60},  {240, 240, 240}, {150, 40, 170}};
    const CounterRng base = CounterRng::from_seed(seed, Stream::test);
    std::size_t written = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const std::filesystem::path dir = root / std::to_string(c);
        std::filesystem::create_directories(dir);
        for (std::size_t i = 0; i < per_class; ++i) {
            CounterRng rng = base.derive(c * 1000 + i);
            const std::size_t h = 24 + rng.below(25);
            const std::size_t w = 24 + rng.below(25);
            const double cy = static_cast<double>(h) * (0.45 + 0.1 * rng.uniform());
            const double cx = static_cast<double>(w) * (0.45 + 0.1 * rng.uniform());
            const double radius = static_cast<double>(std::min(h, w)) * (0.3 + 0.1 * rng.uniform());
            const float* color = palette[(c + c / 6) % 6];
            Tensor image(Shape{h, w, 3});
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t x = 0; x < w; ++x) {
                    const double u = (static_cast<double>(x) + 0.5 - cx) / radius;
                    const double v = (static_cast<double>(y) + 0.5 - cy) / radius;
                    const bool on = inside(c, u, v);
                    for (std::size_t k = 0; k < 3; ++k) {
                        const double noise = 40.0 * rng.uniform();
                        const double px = on ? color[k] - 20.0 + noise : 70.0 + noise;
                        image.at(y, x, k) = static_cast<float>(std::clamp(px, 0.0, 255.0));
                    }
                }
            }
            char name[32];
            const bool png = i % 4 == 3;
            std::snprintf(name, sizeof name, "img_%03zu.%s", i, png ? "png" : "ppm");
            if (png) {
                write_png(dir / name, image);
            } else {
                write_ppm(dir / name, image);
            }
            ++written;
        }
    }
    return written;
}

}  // namespace tsr
