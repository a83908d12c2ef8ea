#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tsr/rng.hpp"
#include "tsr/tensor.hpp"

namespace tsr {

// Activations are [height, width, channel]; conv kernels are
// [out_channel, in_channel, kernel_h, kernel_w]; dense weights are [out, in].

/// Output extent of a window op over a [n_H, n_W, *] input:
/// floor((n + 2p - f) / s) + 1 per spatial axis, `out_c` channels.
/// Valid convolution is the case s = 1, p = 0.
Shape shape_after(const Shape& input, std::size_t f, std::size_t s, std::size_t p,
                  std::size_t out_c);

template <typename T>
struct ConvLayer {
    BasicTensor<T> kernels;  // [out_c, in_c, f, f]
    BasicTensor<T> bias;     // [out_c]

    std::size_t out_channels() const { return kernels.shape()[0]; }
    std::size_t in_channels() const { return kernels.shape()[1]; }
    std::size_t kernel_size() const { return kernels.shape()[2]; }
};

template <typename T>
struct ConvGrads {
    BasicTensor<T> grad_input;
    BasicTensor<T> grad_kernels;
    BasicTensor<T> grad_bias;
};

/// Valid-padding, stride-1 convolution with a per-output-channel bias.
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                              const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const ConvLayer<T>& layer) {
    return conv2d_forward(input, layer.kernels, layer.bias);
}

/// Gradients of sum(upstream * conv2d_forward(input, layer)).
template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                             const BasicTensor<T>& bias, const BasicTensor<T>& upstream);

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const ConvLayer<T>& layer,
                             const BasicTensor<T>& upstream) {
    return conv2d_backward(input, layer.kernels, layer.bias, upstream);
}

struct PoolSpec {
    std::size_t window = 2;
    std::size_t stride = 2;
    std::size_t padding = 0;

    void validate() const;
};

/// For each pooled cell, the flat index (into the input) of the maximum.
struct PoolIndexMap {
    Shape input_shape;
    Shape output_shape;
    std::vector<std::size_t> source;
};

template <typename T>
struct PoolResult {
    BasicTensor<T> output;
    PoolIndexMap indices;
};

/// Max pooling; padded cells act as -infinity and ties pick the lowest flat index.
template <typename T>
PoolResult<T> maxpool_forward(const BasicTensor<T>& input, const PoolSpec& spec);

template <typename T>
BasicTensor<T> maxpool_backward(const PoolIndexMap& indices, const BasicTensor<T>& upstream);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);

/// Passes upstream where input > 0; the subgradient at 0 is 0.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream);

enum class Mode { train, eval };

struct DropoutLayer {
    double rate = 0.0;  // probability of zeroing a unit, in [0, 1)

    void validate() const;
};

template <typename T>
struct DropoutMask {
    BasicTensor<T> keep;  // 1 where the unit survived, 0 where it was dropped
    Mode mode = Mode::eval;
};

template <typename T>
struct DropoutResult {
    BasicTensor<T> output;
    DropoutMask<T> mask;
};

/// Inverted dropout: in train mode survivors are scaled by 1 / (1 - rate);
/// eval mode is the identity.
template <typename T>
DropoutResult<T> dropout_forward(const BasicTensor<T>& input, const DropoutLayer& layer, Mode mode,
                                 CounterRng& rng);

template <typename T>
BasicTensor<T> dropout_backward(const DropoutMask<T>& mask, const DropoutLayer& layer,
                                const BasicTensor<T>& upstream);

/// Diagnostic for a single neuron under dropout:
///   E_R = 1/2 (sum p_i w_i I_i)^2 + sum p_i (1 - p_i) w_i^2 I_i^2
/// where p_i is the probability that unit i is retained.
double expected_dropout_response(std::span<const double> retain, std::span<const double> weights,
                                 std::span<const double> inputs);

template <typename T>
struct DenseLayer {
    BasicTensor<T> weights;  // [out, in]
    BasicTensor<T> bias;     // [out]

    std::size_t out_features() const { return weights.shape()[0]; }
    std::size_t in_features() const { return weights.shape()[1]; }
};

template <typename T>
struct DenseGrads {
    BasicTensor<T> grad_input;
    BasicTensor<T> grad_weights;
    BasicTensor<T> grad_bias;
};

/// z_j = sum_l w[j,l] a[l] + b[j]. Any input shape with `in` elements is accepted.
template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& a, const BasicTensor<T>& weights,
                             const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& a, const DenseLayer<T>& layer) {
    return dense_forward(a, layer.weights, layer.bias);
}

/// grad_input keeps the shape of `a`.
template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& a, const BasicTensor<T>& weights,
                             const BasicTensor<T>& upstream);

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& a, const DenseLayer<T>& layer,
                             const BasicTensor<T>& upstream) {
    return dense_backward(a, layer.weights, upstream);
}

/// Max-subtracted softmax over a flat vector.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits);

}  // namespace tsr
