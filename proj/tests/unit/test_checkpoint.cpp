#include <doctest.h>

#include <fstream>
#include <functional>

#include "toy.hpp"
#include "tsr/checkpoint.hpp"

using namespace tsr;
namespace fs = std::filesystem;

namespace {

Checkpoint sample_checkpoint() {
    Checkpoint ck;
    ck.spec = canonical_network();
    CounterRng init(77);
    ck.params = init_params<float>(ck.spec, init);
    ck.optimizer = AdamState<float>::zeros_like(ck.params);
    ck.optimizer.step = 123;
    CounterRng fill(78);
    for (auto& m : ck.optimizer.m)
        for (float& x : m.data()) x = static_cast<float>(fill.uniform() - 0.5);
    for (auto& v : ck.optimizer.v)
        for (float& x : v.data()) x = static_cast<float>(fill.uniform() * 1e-3);
    ck.learning_rate = 0.00025;
    ck.plateau = PlateauTracker{0.987654321, 3};
    ck.seed = 0xfeedfacecafebeefULL;
    ck.shuffle_rng = CounterRng(0x1234, 99);
    ck.epoch = 17;
    ck.best_value = 0.987654321;
    return ck;
}

CheckpointErrorKind kind_of(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_checkpoint(bytes);
    } catch (const CheckpointError& e) {
        return e.kind();
    }
    FAIL("no CheckpointError thrown");
    return CheckpointErrorKind::io;
}

}  // namespace

TEST_CASE("checkpoint save -> load is the identity") {
    const Checkpoint ck = sample_checkpoint();
    const fs::path p = toy::scratch() / "ck.tsrn";
    save_checkpoint(p, ck);
    const Checkpoint back = load_checkpoint(p);
    CHECK(back == ck);
    CHECK(encode_checkpoint(back) == encode_checkpoint(ck));
}

TEST_CASE("checkpoint layout starts with magic and version") {
    const auto bytes = encode_checkpoint(sample_checkpoint());
    REQUIRE(bytes.size() > 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "TSRN");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 0);
    CHECK(bytes[7] == 0);
    // 242,251 float32 parameters and two moment sets dominate the size
    CHECK(bytes.size() > 3 * 242251 * 4);
    CHECK(bytes.size() < 3 * 242251 * 4 + 1024);
}

TEST_CASE("checkpoint errors have distinct kinds") {
    auto bytes = encode_checkpoint(sample_checkpoint());
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(kind_of(bad_magic) == CheckpointErrorKind::not_a_checkpoint);
    CHECK(kind_of({}) == CheckpointErrorKind::not_a_checkpoint);
    auto bad_version = bytes;
    bad_version[4] = 2;
    CHECK(kind_of(bad_version) == CheckpointErrorKind::unsupported_version);
    for (const std::size_t keep : {std::size_t{6}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
        CHECK(kind_of(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + static_cast<long>(keep))) ==
              CheckpointErrorKind::truncated);
    }
}

TEST_CASE("checkpoint error messages") {
    const fs::path p = toy::scratch() / "junk.tsrn";
    std::ofstream(p) << "hello, this is not a model";
    try {
        load_checkpoint(p);
        FAIL("expected an error");
    } catch (const CheckpointError& e) {
        CHECK(std::string(e.what()).find("not a checkpoint") != std::string::npos);
    }
    try {
        load_checkpoint(toy::scratch() / "absent.tsrn");
        FAIL("expected an error");
    } catch (const CheckpointError& e) {
        CHECK(e.kind() == CheckpointErrorKind::io);
    }
    auto bytes = encode_checkpoint(sample_checkpoint());
    bytes.resize(bytes.size() - 3);
    try {
        decode_checkpoint(bytes);
        FAIL("expected an error");
    } catch (const CheckpointError& e) {
        CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
}
