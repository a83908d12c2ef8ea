#include "tsr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace tsr {

namespace {

enum LayerTag : std::uint32_t {
    tag_conv = 1,
    tag_relu = 2,
    tag_maxpool = 3,
    tag_dropout = 4,
    tag_flatten = 5,
    tag_dense = 6,
    tag_softmax = 7,
};

class Writer {
public:
    void bytes(const char* s, std::size_t n) { out_.insert(out_.end(), s, s + n); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void size(std::size_t v) {
        if (v > 0xffffffffULL) throw CheckpointError(CheckpointErrorKind::corrupt, "value too large");
        u32(static_cast<std::uint32_t>(v));
    }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) {
            throw CheckpointError(CheckpointErrorKind::truncated,
                                  "checkpoint truncated at byte " + std::to_string(pos_));
        }
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    bool at_end() const { return pos_ == in_.size(); }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    const std::vector<std::uint8_t>& in_;
    std::size_t pos_ = 0;
};

[[noreturn]] void corrupt(const std::string& what) {
    throw CheckpointError(CheckpointErrorKind::corrupt, "corrupt checkpoint: " + what);
}

void write_layer(Writer& w, const LayerDesc& layer) {
    if (const auto* c = std::get_if<ConvDesc>(&layer)) {
        w.u32(tag_conv), w.u32(2), w.u32(c->filters), w.u32(c->kernel);
    } else if (std::holds_alternative<ReluDesc>(layer)) {
        w.u32(tag_relu), w.u32(0);
    } else if (const auto* p = std::get_if<MaxPoolDesc>(&layer)) {
        w.u32(tag_maxpool), w.u32(3), w.u32(p->window), w.u32(p->stride), w.u32(p->padding);
    } else if (const auto* d = std::get_if<DropoutDesc>(&layer)) {
        w.u32(tag_dropout), w.u32(1), w.u32(std::bit_cast<std::uint32_t>(d->rate));
    } else if (std::holds_alternative<FlattenDesc>(layer)) {
        w.u32(tag_flatten), w.u32(0);
    } else if (const auto* n = std::get_if<DenseDesc>(&layer)) {
        w.u32(tag_dense), w.u32(1), w.u32(n->units);
    } else {
        w.u32(tag_softmax), w.u32(0);
    }
}

LayerDesc read_layer(Reader& r) {
    const std::uint32_t tag = r.u32();
    const std::uint32_t n = r.u32();
    auto expect = [&](std::uint32_t count) {
        if (n != count) corrupt("layer tag " + std::to_string(tag) + " has " + std::to_string(n) +
                                " hyperparameters");
    };
    switch (tag) {
        case tag_conv: {
            expect(2);
            const auto filters = r.u32();
            const auto kernel = r.u32();
            return ConvDesc{filters, kernel};
        }
        case tag_relu: expect(0); return ReluDesc{};
        case tag_maxpool: {
            expect(3);
            const auto window = r.u32();
            const auto stride = r.u32();
            const auto padding = r.u32();
            return MaxPoolDesc{window, stride, padding};
        }
        case tag_dropout: expect(1); return DropoutDesc{std::bit_cast<float>(r.u32())};
        case tag_flatten: expect(0); return FlattenDesc{};
        case tag_dense: expect(1); return DenseDesc{r.u32()};
        case tag_softmax: expect(0); return SoftmaxDesc{};
        default: corrupt("unknown layer tag " + std::to_string(tag));
    }
}

void write_shape(Writer& w, const Shape& s) {
    w.size(s.rank());
    for (std::size_t d : s.dims()) w.size(d);
}

Shape read_shape(Reader& r) {
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 8) corrupt("tensor rank " + std::to_string(rank));
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = r.u32();
    try {
        return Shape(std::move(dims));
    } catch (const ShapeError& e) {
        corrupt(e.what());
    }
}

void write_values(Writer& w, const Tensor& t) {
    for (float v : t.data()) w.f32(v);
}

Tensor read_values(Reader& r, const Shape& shape) {
    r.need(shape.element_count() * 4);
    std::vector<float> data(shape.element_count());
    for (float& v : data) v = r.f32();
    return Tensor(shape, std::move(data));
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
    Writer w;
    w.bytes("TSRN", 4);
    w.u32(kCheckpointVersion);
    write_shape(w, ck.spec.input_shape);
    w.size(ck.spec.layers.size());
    for (const auto& layer : ck.spec.layers) write_layer(w, layer);

    w.size(ck.params.size());
    for (const auto& p : ck.params) {
        write_shape(w, p.shape());
        write_values(w, p);
    }

    w.u64(ck.optimizer.step);
    if (ck.optimizer.m.size() != ck.optimizer.v.size()) corrupt("moment lists differ in length");
    w.size(ck.optimizer.m.size());
    for (const auto& m : ck.optimizer.m) write_values(w, m);
    for (const auto& v : ck.optimizer.v) write_values(w, v);

    w.f64(ck.learning_rate);
    w.f64(ck.plateau.best);
    w.size(ck.plateau.wait);
    w.u64(ck.seed);
    w.u64(ck.shuffle_rng.key());
    w.u64(ck.shuffle_rng.counter());
    w.u32(ck.epoch);
    w.f64(ck.best_value);
    return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "TSRN", 4) != 0) {
        throw CheckpointError(CheckpointErrorKind::not_a_checkpoint, "not a checkpoint (bad magic)");
    }
    Reader r(bytes);
    r.u32();  // magic
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw CheckpointError(CheckpointErrorKind::unsupported_version,
                              "unsupported checkpoint version " + std::to_string(version));
    }

    Checkpoint ck;
    ck.spec.input_shape = read_shape(r);
    const std::uint32_t n_layers = r.u32();
    for (std::uint32_t i = 0; i < n_layers; ++i) ck.spec.layers.push_back(read_layer(r));

    std::vector<Shape> expected;
    try {
        expected = parameter_shapes(ck.spec);
    } catch (const std::exception& e) {
        corrupt(std::string("invalid network: ") + e.what());
    }

    const std::uint32_t n_params = r.u32();
    if (n_params != expected.size()) corrupt("parameter tensor count does not match network");
    for (std::uint32_t i = 0; i < n_params; ++i) {
        Shape s = read_shape(r);
        if (!(s == expected[i])) corrupt("parameter " + std::to_string(i) + " has shape " +
                                         s.to_string() + ", network expects " +
                                         expected[i].to_string());
        ck.params.push_back(read_values(r, s));
    }

    ck.optimizer.step = r.u64();
    const std::uint32_t n_moments = r.u32();
    if (n_moments != 0 && n_moments != n_params) corrupt("optimizer moment count mismatch");
    for (std::uint32_t i = 0; i < n_moments; ++i) ck.optimizer.m.push_back(read_values(r, expected[i]));
    for (std::uint32_t i = 0; i < n_moments; ++i) ck.optimizer.v.push_back(read_values(r, expected[i]));

    ck.learning_rate = r.f64();
    ck.plateau.best = r.f64();
    ck.plateau.wait = r.u32();
    ck.seed = r.u64();
    const std::uint64_t key = r.u64();
    const std::uint64_t counter = r.u64();
    ck.shuffle_rng = CounterRng(key, counter);
    ck.epoch = r.u32();
    ck.best_value = r.f64();
    if (!r.at_end()) corrupt(std::to_string(r.remaining()) + " trailing bytes");
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    const auto bytes = encode_checkpoint(checkpoint);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointErrorKind::io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError(CheckpointErrorKind::io, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointErrorKind::io, "cannot read checkpoint " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace tsr
