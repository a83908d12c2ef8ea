// Writes the synthetic toy dataset used by the smoke tests.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tsr/fixture.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic <root>/<class>/<image> dataset"};
    std::string root;
    std::size_t classes = 5;
    std::size_t per_class = 20;
    std::uint64_t seed = 7;
    app.add_option("root", root, "output directory")->required();
    app.add_option("--classes", classes, "number of classes (1..43)");
    app.add_option("--per-class", per_class, "images per class");
    app.add_option("--seed", seed, "generator seed");
    CLI11_PARSE(app, argc, argv);
    try {
        const auto n = tsr::write_toy_fixture(root, classes, per_class, seed);
        std::cerr << "wrote " << n << " images under " << root << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
