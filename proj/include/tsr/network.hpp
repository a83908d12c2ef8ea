#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tsr/layers.hpp"
#include "tsr/rng.hpp"
#include "tsr/tensor.hpp"

namespace tsr {

inline constexpr std::size_t kNumClasses = 43;
inline constexpr std::size_t kImageSide = 30;
inline constexpr std::size_t kImageChannels = 3;

struct ConvDesc {
    std::uint32_t filters = 0;
    std::uint32_t kernel = 0;
    friend bool operator==(const ConvDesc&, const ConvDesc&) = default;
};
struct ReluDesc {
    friend bool operator==(const ReluDesc&, const ReluDesc&) = default;
};
struct MaxPoolDesc {
    std::uint32_t window = 2;
    std::uint32_t stride = 2;
    std::uint32_t padding = 0;
    friend bool operator==(const MaxPoolDesc&, const MaxPoolDesc&) = default;
};
struct DropoutDesc {
    float rate = 0.0f;
    friend bool operator==(const DropoutDesc&, const DropoutDesc&) = default;
};
struct FlattenDesc {
    friend bool operator==(const FlattenDesc&, const FlattenDesc&) = default;
};
struct DenseDesc {
    std::uint32_t units = 0;
    friend bool operator==(const DenseDesc&, const DenseDesc&) = default;
};
struct SoftmaxDesc {
    friend bool operator==(const SoftmaxDesc&, const SoftmaxDesc&) = default;
};

using LayerDesc =
    std::variant<ConvDesc, ReluDesc, MaxPoolDesc, DropoutDesc, FlattenDesc, DenseDesc, SoftmaxDesc>;

std::string describe(const LayerDesc& layer);

/// Ordered, linear layer sequence applied to a fixed input shape.
/// The last two layers are always Dense(num_classes) -> Softmax.
struct NetworkSpec {
    Shape input_shape;
    std::vector<LayerDesc> layers;

    std::size_t num_classes() const;
    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// The traffic-sign classifier:
/// Conv(32,5)-ReLU-Conv(32,5)-ReLU-MaxPool(2,2)-Dropout(0.25)-
/// Conv(64,3)-ReLU-Conv(64,3)-ReLU-MaxPool(2,2)-Dropout(0.25)-
/// Flatten-Dense(256)-ReLU-Dropout(0.5)-Dense(43)-Softmax on [30,30,3].
NetworkSpec canonical_network();

/// Output shape of every layer in order. Throws ShapeError when the layers
/// do not chain or the head is not Dense -> Softmax.
std::vector<Shape> shape_chain(const NetworkSpec& spec);

/// Shapes of all parameter tensors in declaration order
/// (conv: kernels, bias; dense: weights, bias).
std::vector<Shape> parameter_shapes(const NetworkSpec& spec);
std::size_t parameter_count(const NetworkSpec& spec);

template <typename T>
using ParamSet = std::vector<BasicTensor<T>>;

/// He-uniform for conv and hidden dense layers, Glorot-uniform for the dense
/// layer feeding the softmax, zero biases. Draws happen in declaration order.
template <typename T>
ParamSet<T> init_params(const NetworkSpec& spec, CounterRng& rng);

template <typename T>
ParamSet<T> zero_params(const NetworkSpec& spec);

template <typename T>
struct LayerCache {
    BasicTensor<T> input;
    PoolIndexMap pool;
    DropoutMask<T> mask;
};

template <typename T>
struct ForwardCache {
    Mode mode = Mode::eval;
    std::vector<LayerCache<T>> layers;  // empty in eval mode
};

template <typename T>
struct ForwardResult {
    BasicTensor<T> probs;
    BasicTensor<T> logits;
    ForwardCache<T> cache;
};

/// Runs every layer in order. `dropout_rng` is required in train mode.
template <typename T>
ForwardResult<T> network_forward(const NetworkSpec& spec, const ParamSet<T>& params,
                                 const BasicTensor<T>& input, Mode mode,
                                 CounterRng* dropout_rng = nullptr);

/// Chain rule from the gradient w.r.t. the pre-softmax logits back to every
/// parameter tensor. Requires a train-mode cache.
template <typename T>
ParamSet<T> network_backward(const NetworkSpec& spec, const ParamSet<T>& params,
                             const ForwardCache<T>& cache, const BasicTensor<T>& grad_logits);

}  // namespace tsr
