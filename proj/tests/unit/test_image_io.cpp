#include <doctest.h>

#include <fstream>
#include <functional>
#include <iterator>
#include <string>

#include "toy.hpp"
#include "tsr/image_io.hpp"
#include "tsr/rng.hpp"

using namespace tsr;
namespace fs = std::filesystem;

namespace {

fs::path write_bytes(const std::string& name, const std::string& bytes) {
    const fs::path p = toy::scratch() / "images" / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << bytes;
    return p;
}

ImageErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ImageError& e) {
        return e.kind();
    }
    FAIL("no ImageError thrown");
    return ImageErrorKind::io;
}

const std::string kPixels("\xff\x00\x00\x00\xff\x00", 6);
const std::string kRedGreen = "P6\n2 1\n255\n" + kPixels;

}  // namespace

TEST_CASE("2x1 P6 decodes to red then green") {
    const Tensor t = decode_image(write_bytes("rg.ppm", kRedGreen));
    CHECK(t.shape() == Shape{1, 2, 3});
    CHECK(t.values() == std::vector<float>{255, 0, 0, 0, 255, 0});
    CHECK(decode_ppm(kRedGreen) == t);
}

TEST_CASE("PPM header comments and whitespace") {
    const std::string commented = "P6 # comment\n2\t1 # another\n255\n" + kPixels;
    CHECK(decode_ppm(commented).values() == std::vector<float>{255, 0, 0, 0, 255, 0});
}

TEST_CASE("PNG and PPM encodings of the same pixels decode identically") {
    CounterRng rng(4);
    std::vector<float> px(7 * 5 * 3);
    for (float& v : px) v = static_cast<float>(rng.below(256));
    const Tensor img(Shape{7, 5, 3}, px);
    const fs::path dir = toy::scratch() / "images";
    fs::create_directories(dir);
    write_ppm(dir / "same.ppm", img);
    write_png(dir / "same.png", img);
    CHECK(decode_image(dir / "same.ppm") == img);
    CHECK(decode_image(dir / "same.png") == img);
}

TEST_CASE("image decode errors have distinct kinds") {
    CHECK(kind_of([] { decode_ppm("P6\n2 1\n255\n" + kPixels.substr(0, 3)); }) ==
          ImageErrorKind::truncated);
    CHECK(kind_of([] { decode_ppm("P6\n2 1\n"); }) == ImageErrorKind::truncated);
    CHECK(kind_of([] { decode_ppm(std::string("P6\n2 1\n65535\n") + std::string(12, 'x')); }) ==
          ImageErrorKind::bad_maxval);
    CHECK(kind_of([] { decode_ppm("P3\n1 1\n255\n0 0 0\n"); }) == ImageErrorKind::unsupported_format);
    CHECK(kind_of([] { decode_image(write_bytes("x.jpg", "\xff\xd8\xff\xe0 not really")); }) ==
          ImageErrorKind::unsupported_format);
    CHECK(kind_of([] { decode_image(toy::scratch() / "images" / "missing.ppm"); }) == ImageErrorKind::io);

    const fs::path dir = toy::scratch() / "images";
    fs::create_directories(dir);
    write_png(dir / "whole.png", Tensor(Shape{8, 8, 3}, 100.0f));
    std::ifstream in(dir / "whole.png", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    const fs::path cut = write_bytes("cut.png", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(decode_image(cut), ImageError);
}

TEST_CASE("error messages carry the file name") {
    const fs::path p = write_bytes("short.ppm", "P6\n4 4\n255\nab");
    try {
        decode_image(p);
        FAIL("expected an error");
    } catch (const ImageError& e) {
        CHECK(std::string(e.what()).find(p.string()) != std::string::npos);
        CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
}
