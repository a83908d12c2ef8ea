#include "tsr/network.hpp"

#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace tsr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& message) {
    if (!ok) throw ShapeError(message);
}

bool has_params(const LayerDesc& layer) {
    return std::holds_alternative<ConvDesc>(layer) || std::holds_alternative<DenseDesc>(layer);
}

}  // namespace

std::string describe(const LayerDesc& layer) {
    return std::visit(
        overloaded{
            [](const ConvDesc& d) {
                return "Conv(" + std::to_string(d.filters) + "," + std::to_string(d.kernel) + "x" +
                       std::to_string(d.kernel) + ")";
            },
            [](const ReluDesc&) { return std::string("ReLU"); },
            [](const MaxPoolDesc& d) {
                return "MaxPool(" + std::to_string(d.window) + "," + std::to_string(d.stride) +
                       "," + std::to_string(d.padding) + ")";
            },
            [](const DropoutDesc& d) { return "Dropout(" + std::to_string(d.rate) + ")"; },
            [](const FlattenDesc&) { return std::string("Flatten"); },
            [](const DenseDesc& d) { return "Dense(" + std::to_string(d.units) + ")"; },
            [](const SoftmaxDesc&) { return std::string("Softmax"); },
        },
        layer);
}

std::size_t NetworkSpec::num_classes() const {
    require(layers.size() >= 2, "network needs at least Dense -> Softmax");
    const auto* head = std::get_if<DenseDesc>(&layers[layers.size() - 2]);
    require(head != nullptr, "the layer before Softmax must be Dense");
    return head->units;
}

NetworkSpec canonical_network() {
    return NetworkSpec{
        Shape{kImageSide, kImageSide, kImageChannels},
        {
            ConvDesc{32, 5}, ReluDesc{}, ConvDesc{32, 5}, ReluDesc{}, MaxPoolDesc{2, 2, 0},
            DropoutDesc{0.25f},
            ConvDesc{64, 3}, ReluDesc{}, ConvDesc{64, 3}, ReluDesc{}, MaxPoolDesc{2, 2, 0},
            DropoutDesc{0.25f},
            FlattenDesc{}, DenseDesc{256}, ReluDesc{}, DropoutDesc{0.5f},
            DenseDesc{static_cast<std::uint32_t>(kNumClasses)}, SoftmaxDesc{},
        },
    };
}

std::vector<Shape> shape_chain(const NetworkSpec& spec) {
    require(!spec.input_shape.empty(), "network input shape is not set");
    require(!spec.layers.empty() && std::holds_alternative<SoftmaxDesc>(spec.layers.back()),
            "network must end with Softmax");
    spec.num_classes();

    std::vector<Shape> chain;
    chain.reserve(spec.layers.size());
    Shape current = spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerDesc& layer = spec.layers[i];
        const std::string where = "layer " + std::to_string(i) + " " + describe(layer);
        current = std::visit(
            overloaded{
                [&](const ConvDesc& d) {
                    require(current.rank() == 3, where + " needs [H,W,C] input");
                    require(d.filters >= 1 && d.kernel >= 1, where + " has zero size");
                    return shape_after(current, d.kernel, 1, 0, d.filters);
                },
                [&](const ReluDesc&) { return current; },
                [&](const MaxPoolDesc& d) {
                    require(current.rank() == 3, where + " needs [H,W,C] input");
                    PoolSpec{d.window, d.stride, d.padding}.validate();
                    return shape_after(current, d.window, d.stride, d.padding, current[2]);
                },
                [&](const DropoutDesc& d) {
                    DropoutLayer{d.rate}.validate();
                    return current;
                },
                [&](const FlattenDesc&) { return Shape{current.element_count()}; },
                [&](const DenseDesc& d) {
                    require(current.rank() == 1, where + " needs a flat input");
                    require(d.units >= 1, where + " has zero units");
                    return Shape{static_cast<std::size_t>(d.units)};
                },
                [&](const SoftmaxDesc&) {
                    require(i + 1 == spec.layers.size(), where + " must be the last layer");
                    return current;
                },
            },
            layer);
        chain.push_back(current);
    }
    return chain;
}

std::vector<Shape> parameter_shapes(const NetworkSpec& spec) {
    const auto chain = shape_chain(spec);
    std::vector<Shape> shapes;
    Shape in = spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (const auto* c = std::get_if<ConvDesc>(&spec.layers[i])) {
            shapes.push_back(Shape{c->filters, in[2], c->kernel, c->kernel});
            shapes.push_back(Shape{c->filters});
        } else if (const auto* d = std::get_if<DenseDesc>(&spec.layers[i])) {
            shapes.push_back(Shape{d->units, in[0]});
            shapes.push_back(Shape{d->units});
        }
        in = chain[i];
    }
    return shapes;
}

std::size_t parameter_count(const NetworkSpec& spec) {
    std::size_t total = 0;
    for (const Shape& s : parameter_shapes(spec)) total += s.element_count();
    return total;
}

template <typename T>
ParamSet<T> zero_params(const NetworkSpec& spec) {
    ParamSet<T> params;
    for (const Shape& s : parameter_shapes(spec)) params.emplace_back(s, T{0});
    return params;
}

template <typename T>
ParamSet<T> init_params(const NetworkSpec& spec, CounterRng& rng) {
    ParamSet<T> params = zero_params<T>(spec);
    std::size_t slot = 0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (!has_params(spec.layers[i])) continue;
        BasicTensor<T>& w = params[slot];
        const Shape& ws = w.shape();
        double bound = 0.0;
        if (ws.rank() == 4) {
            bound = std::sqrt(6.0 / static_cast<double>(ws[1] * ws[2] * ws[3]));
        } else {
            const bool feeds_softmax = i + 1 < spec.layers.size() &&
                                       std::holds_alternative<SoftmaxDesc>(spec.layers[i + 1]);
            const double fan_in = static_cast<double>(ws[1]);
            const double fan_out = static_cast<double>(ws[0]);
            bound = feeds_softmax ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
        }
        for (T& v : w.data()) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
        slot += 2;
    }
    return params;
}

template <typename T>
ForwardResult<T> network_forward(const NetworkSpec& spec, const ParamSet<T>& params,
                                 const BasicTensor<T>& input, Mode mode, CounterRng* dropout_rng) {
    require(input.shape() == spec.input_shape, "network input must be " +
                                                   spec.input_shape.to_string() + ", got " +
                                                   input.shape().to_string());
    if (mode == Mode::train && dropout_rng == nullptr) {
        throw std::invalid_argument("train-mode forward needs a dropout generator");
    }
    require(params.size() == parameter_shapes(spec).size(), "parameter set does not match network");

    ForwardResult<T> result;
    result.cache.mode = mode;
    if (mode == Mode::train) result.cache.layers.resize(spec.layers.size());

    BasicTensor<T> x = input;
    std::size_t slot = 0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        LayerCache<T>* cache = mode == Mode::train ? &result.cache.layers[i] : nullptr;
        if (cache) cache->input = x;
        std::visit(
            overloaded{
                [&](const ConvDesc&) {
                    x = conv2d_forward(x, params[slot], params[slot + 1]);
                    slot += 2;
                },
                [&](const ReluDesc&) { x = relu(x); },
                [&](const MaxPoolDesc& d) {
                    auto pooled = maxpool_forward(x, PoolSpec{d.window, d.stride, d.padding});
                    x = std::move(pooled.output);
                    if (cache) cache->pool = std::move(pooled.indices);
                },
                [&](const DropoutDesc& d) {
                    CounterRng unused;
                    auto dropped = dropout_forward(x, DropoutLayer{d.rate}, mode,
                                                   dropout_rng ? *dropout_rng : unused);
                    x = std::move(dropped.output);
                    if (cache) cache->mask = std::move(dropped.mask);
                },
                [&](const FlattenDesc&) { x = reshape(x, Shape{x.size()}); },
                [&](const DenseDesc&) {
                    x = dense_forward(x, params[slot], params[slot + 1]);
                    slot += 2;
                },
                [&](const SoftmaxDesc&) {
                    result.logits = x;
                    x = softmax(x);
                },
            },
            spec.layers[i]);
    }
    result.probs = std::move(x);
    return result;
}

template <typename T>
ParamSet<T> network_backward(const NetworkSpec& spec, const ParamSet<T>& params,
                             const ForwardCache<T>& cache, const BasicTensor<T>& grad_logits) {
    if (cache.mode != Mode::train || cache.layers.size() != spec.layers.size()) {
        throw std::invalid_argument("network backward needs a train-mode forward cache");
    }
    const auto shapes = parameter_shapes(spec);
    require(params.size() == shapes.size(), "parameter set does not match network");
    require(grad_logits.size() == spec.num_classes(), "logit gradient has " +
                                                          std::to_string(grad_logits.size()) +
                                                          " entries, expected " +
                                                          std::to_string(spec.num_classes()));

    ParamSet<T> grads(params.size());
    std::size_t slot = params.size();
    BasicTensor<T> g = grad_logits;
    // The softmax is folded into grad_logits, so the walk starts below it.
    for (std::size_t i = spec.layers.size() - 1; i-- > 0;) {
        const LayerCache<T>& c = cache.layers[i];
        std::visit(
            overloaded{
                [&](const ConvDesc&) {
                    slot -= 2;
                    auto cg = conv2d_backward(c.input, params[slot], params[slot + 1], g);
                    grads[slot] = std::move(cg.grad_kernels);
                    grads[slot + 1] = std::move(cg.grad_bias);
                    g = std::move(cg.grad_input);
                },
                [&](const ReluDesc&) { g = relu_backward(c.input, g); },
                [&](const MaxPoolDesc&) { g = maxpool_backward(c.pool, g); },
                [&](const DropoutDesc& d) { g = dropout_backward(c.mask, DropoutLayer{d.rate}, g); },
                [&](const FlattenDesc&) { g = reshape(g, c.input.shape()); },
                [&](const DenseDesc&) {
                    slot -= 2;
                    auto dg = dense_backward(c.input, params[slot], g);
                    grads[slot] = std::move(dg.grad_weights);
                    grads[slot + 1] = std::move(dg.grad_bias);
                    g = std::move(dg.grad_input);
                },
                [&](const SoftmaxDesc&) {
                    throw std::logic_error("softmax may only appear as the last layer");
                },
            },
            spec.layers[i]);
    }
    return grads;
}

#define TSR_INSTANTIATE(T)                                                                    \
    template ParamSet<T> init_params<T>(const NetworkSpec&, CounterRng&);                     \
    template ParamSet<T> zero_params<T>(const NetworkSpec&);                                  \
    template ForwardResult<T> network_forward<T>(const NetworkSpec&, const ParamSet<T>&,      \
                                                 const BasicTensor<T>&, Mode, CounterRng*);   \
    template ParamSet<T> network_backward<T>(const NetworkSpec&, const ParamSet<T>&,          \
                                             const ForwardCache<T>&, const BasicTensor<T>&);

TSR_INSTANTIATE(float)
TSR_INSTANTIATE(double)

#undef TSR_INSTANTIATE

}  // namespace tsr
