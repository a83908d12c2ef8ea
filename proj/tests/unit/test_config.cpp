#include <doctest.h>

#include <fstream>
#include <functional>
#include <map>

#include "toy.hpp"
#include "tsr/config.hpp"

using namespace tsr;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = toy::scratch() / "config" / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p;
}

const std::map<std::string, std::string> kPaths = {{"data_root", "/data"}, {"out_dir", "/out"}};

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("empty config with paths from flags gives the defaults") {
    const RunConfig cfg = parse_config(write_config("empty.cfg", ""), kPaths, Command::train);
    CHECK(cfg.train.learning_rate == 0.001);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.train.max_epochs == 100);
    CHECK(cfg.train.early_stop_patience == 10);
    CHECK(cfg.test_fraction == 0.2);
    CHECK(cfg.data_root == "/data");
    CHECK(cfg.checkpoint == fs::path("/out") / "model.tsrn");
}

TEST_CASE("flags override the file") {
    const fs::path file = write_config("batch.cfg", "# tuned\nbatch_size = 64\nseed=7  # trailing comment\n");
    auto flags = kPaths;
    CHECK(parse_config(file, flags, Command::train).train.batch_size == 64);
    flags["batch_size"] = "32";
    const RunConfig cfg = parse_config(file, flags, Command::train);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.train.seed == 7);
}

TEST_CASE("every documented key is accepted") {
    RunConfig cfg;
    for (const auto& key : config_keys()) {
        const std::string value = key.find("fraction") != std::string::npos ? "0.3" :
                                  key == "lr_factor"                       ? "0.25" :
                                  key == "data_root" || key == "out_dir" || key == "checkpoint" ? "/p" : "3";
        CHECK_NOTHROW(apply_config_text(cfg, key + " = " + value + "\n", "t"));
    }
    CHECK(cfg.train.lr_factor == 0.25);
    CHECK(cfg.threads == 3);
}

TEST_CASE("unparsable value names the key and line") {
    const fs::path file = write_config("fast.cfg", "batch_size = 16\n\nlearning_rate = fast\n");
    const std::string msg = error_of([&] { parse_config(file, kPaths, Command::train); });
    CHECK(msg.find(file.string() + ":3") != std::string::npos);
    CHECK(msg.find("learning_rate") != std::string::npos);
    CHECK(msg.find("fast") != std::string::npos);
}

TEST_CASE("config errors") {
    CHECK(error_of([] { parse_config(write_config("u.cfg", "colour = red\n"), kPaths, Command::train); })
              .find("unknown key 'colour'") != std::string::npos);
    CHECK(error_of([] { parse_config(write_config("n.cfg", "just words\n"), kPaths, Command::train); })
              .find(":1") != std::string::npos);
    CHECK(error_of([] { parse_config(std::nullopt, {{"batch_size", "-3"}}, Command::train); })
              .find("batch_size") != std::string::npos);
    CHECK(error_of([] { parse_config(std::nullopt, {{"out_dir", "/o"}}, Command::train); })
              .find("data_root") != std::string::npos);
    CHECK(error_of([] { parse_config(std::nullopt, {}, Command::predict); }).find("checkpoint") !=
          std::string::npos);
    CHECK(error_of([] { parse_config(std::nullopt, {}, Command::report); }).find("out_dir") !=
          std::string::npos);
    CHECK(error_of([] {
              auto f = kPaths;
              f["lr_factor"] = "1.5";
              parse_config(std::nullopt, f, Command::train);
          }).find("lr_factor") != std::string::npos);
    CHECK(error_of([] {
              auto f = kPaths;
              f["test_fraction"] = "0";
              parse_config(std::nullopt, f, Command::train);
          }).find("test_fraction") != std::string::npos);
    CHECK(error_of([] { parse_config(toy::scratch() / "config" / "none.cfg", kPaths, Command::train); })
              .find("cannot read") != std::string::npos);
}

TEST_CASE("eval requires data, checkpoint and output paths") {
    std::map<std::string, std::string> f = {{"data_root", "/d"}, {"out_dir", "/o"}};
    CHECK_THROWS_AS(parse_config(std::nullopt, f, Command::eval), ConfigError);
    f["checkpoint"] = "/m.tsrn";
    CHECK(parse_config(std::nullopt, f, Command::eval).checkpoint == "/m.tsrn");
}
