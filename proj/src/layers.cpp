#include "tsr/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tsr {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw ShapeError(message);
}

void require_rank3(const Shape& s, const char* what) {
    require(s.rank() == 3, std::string(what) + " must be [H,W,C], got " + s.to_string());
}

template <typename T>
void check_conv_operands(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                         const BasicTensor<T>& bias) {
    require_rank3(input.shape(), "conv input");
    const Shape& ks = kernels.shape();
    require(ks.rank() == 4 && ks[2] == ks[3],
            "conv kernels must be [out_c,in_c,f,f], got " + ks.to_string());
    require(bias.shape() == Shape{ks[0]},
            "conv bias must be [" + std::to_string(ks[0]) + "], got " + bias.shape().to_string());
    require(input.shape()[2] == ks[1], "conv channel mismatch: input " +
                                           input.shape().to_string() + " vs kernels " +
                                           ks.to_string());
    require(input.shape()[0] >= ks[2] && input.shape()[1] >= ks[2],
            "conv kernel " + ks.to_string() + " larger than input " + input.shape().to_string());
}

// Kernel reordered to [(i, j, k), o] so that one patch row of the input
// (contiguous over j and k) multiplies contiguous weight rows.
template <typename T>
std::vector<T> patch_major_weights(const BasicTensor<T>& kernels) {
    const std::size_t out_c = kernels.shape()[0];
    const std::size_t in_c = kernels.shape()[1];
    const std::size_t f = kernels.shape()[2];
    std::vector<T> wt(f * f * in_c * out_c);
    const T* k = kernels.data().data();
    for (std::size_t o = 0; o < out_c; ++o)
        for (std::size_t c = 0; c < in_c; ++c)
            for (std::size_t i = 0; i < f; ++i)
                for (std::size_t j = 0; j < f; ++j)
                    wt[((i * f + j) * in_c + c) * out_c + o] = k[((o * in_c + c) * f + i) * f + j];
    return wt;
}

}  // namespace

Shape shape_after(const Shape& input, std::size_t f, std::size_t s, std::size_t p,
                  std::size_t out_c) {
    require_rank3(input, "window op input");
    require(f >= 1 && s >= 1 && out_c >= 1, "window size, stride and channels must be >= 1");
    const std::size_t h = input[0] + 2 * p;
    const std::size_t w = input[1] + 2 * p;
    require(h >= f && w >= f, "window " + std::to_string(f) + " larger than padded input " +
                                  input.to_string() + " (padding " + std::to_string(p) + ")");
    return Shape{(h - f) / s + 1, (w - f) / s + 1, out_c};
}

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                              const BasicTensor<T>& bias_t) {
    check_conv_operands(input, kernels, bias_t);
    const std::size_t width = input.shape()[1];
    const std::size_t out_c = kernels.shape()[0];
    const std::size_t in_c = kernels.shape()[1];
    const std::size_t f = kernels.shape()[2];
    const Shape out_shape = shape_after(input.shape(), f, 1, 0, out_c);
    const std::size_t out_h = out_shape[0];
    const std::size_t out_w = out_shape[1];
    const std::size_t seg = f * in_c;

    const std::vector<T> wt = patch_major_weights(kernels);
    const T* in = input.data().data();
    const T* bias = bias_t.data().data();
    std::vector<T> out(out_shape.element_count());
    std::vector<T> acc(out_c);

    for (std::size_t x = 0; x < out_h; ++x) {
        for (std::size_t y = 0; y < out_w; ++y) {
            T* __restrict a = acc.data();
            std::fill(a, a + out_c, T{0});
            for (std::size_t i = 0; i < f; ++i) {
                const T* row = in + ((x + i) * width + y) * in_c;
                const T* wrow_base = wt.data() + i * seg * out_c;
                for (std::size_t t = 0; t < seg; ++t) {
                    const T v = row[t];
                    const T* __restrict wrow = wrow_base + t * out_c;
                    for (std::size_t o = 0; o < out_c; ++o) a[o] += v * wrow[o];
                }
            }
            T* dst = out.data() + (x * out_w + y) * out_c;
            for (std::size_t o = 0; o < out_c; ++o) dst[o] = a[o] + bias[o];
        }
    }
    return BasicTensor<T>(out_shape, std::move(out));
}

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                             const BasicTensor<T>& bias, const BasicTensor<T>& upstream) {
    check_conv_operands(input, kernels, bias);
    const std::size_t width = input.shape()[1];
    const std::size_t out_c = kernels.shape()[0];
    const std::size_t in_c = kernels.shape()[1];
    const std::size_t f = kernels.shape()[2];
    const Shape out_shape = shape_after(input.shape(), f, 1, 0, out_c);
    require(upstream.shape() == out_shape, "conv upstream shape " + upstream.shape().to_string() +
                                               " does not match output " + out_shape.to_string());
    const std::size_t out_h = out_shape[0];
    const std::size_t out_w = out_shape[1];
    const std::size_t seg = f * in_c;
    const std::size_t patch = f * seg;

    // Weights as [o, (i, j, k)] for the input gradient.
    std::vector<T> w2(out_c * patch);
    {
        const T* k = kernels.data().data();
        for (std::size_t o = 0; o < out_c; ++o)
            for (std::size_t c = 0; c < in_c; ++c)
                for (std::size_t i = 0; i < f; ++i)
                    for (std::size_t j = 0; j < f; ++j)
                        w2[o * patch + (i * f + j) * in_c + c] = k[((o * in_c + c) * f + i) * f + j];
    }

    const T* in = input.data().data();
    const T* up = upstream.data().data();
    std::vector<T> grad_in(input.size(), T{0});
    std::vector<T> grad_wt(patch * out_c, T{0});
    std::vector<T> grad_b(out_c, T{0});
    std::vector<T> grad_patch(patch);

    for (std::size_t x = 0; x < out_h; ++x) {
        for (std::size_t y = 0; y < out_w; ++y) {
            const T* __restrict u = up + (x * out_w + y) * out_c;
            for (std::size_t o = 0; o < out_c; ++o) grad_b[o] += u[o];

            for (std::size_t i = 0; i < f; ++i) {
                const T* row = in + ((x + i) * width + y) * in_c;
                T* gw_base = grad_wt.data() + i * seg * out_c;
                for (std::size_t t = 0; t < seg; ++t) {
                    const T v = row[t];
                    T* __restrict gw = gw_base + t * out_c;
                    for (std::size_t o = 0; o < out_c; ++o) gw[o] += v * u[o];
                }
            }

            T* __restrict gp = grad_patch.data();
            std::fill(gp, gp + patch, T{0});
            for (std::size_t o = 0; o < out_c; ++o) {
                const T uo = u[o];
                const T* __restrict wrow = w2.data() + o * patch;
                for (std::size_t l = 0; l < patch; ++l) gp[l] += uo * wrow[l];
            }
            for (std::size_t i = 0; i < f; ++i) {
                T* __restrict dst = grad_in.data() + ((x + i) * width + y) * in_c;
                const T* src = gp + i * seg;
                for (std::size_t t = 0; t < seg; ++t) dst[t] += src[t];
            }
        }
    }

    std::vector<T> grad_k(kernels.size());
    for (std::size_t o = 0; o < out_c; ++o)
        for (std::size_t c = 0; c < in_c; ++c)
            for (std::size_t i = 0; i < f; ++i)
                for (std::size_t j = 0; j < f; ++j)
                    grad_k[((o * in_c + c) * f + i) * f + j] =
                        grad_wt[((i * f + j) * in_c + c) * out_c + o];

    return {BasicTensor<T>(input.shape(), std::move(grad_in)),
            BasicTensor<T>(kernels.shape(), std::move(grad_k)),
            BasicTensor<T>(bias.shape(), std::move(grad_b))};
}

void PoolSpec::validate() const {
    require(window >= 1, "pool window must be >= 1");
    require(stride >= 1, "pool stride must be >= 1");
    require(padding < window, "pool padding must be smaller than the window");
}

template <typename T>
PoolResult<T> maxpool_forward(const BasicTensor<T>& input, const PoolSpec& spec) {
    spec.validate();
    require_rank3(input.shape(), "maxpool input");
    const std::size_t h = input.shape()[0];
    const std::size_t w = input.shape()[1];
    const std::size_t c = input.shape()[2];
    const Shape out_shape = shape_after(input.shape(), spec.window, spec.stride, spec.padding, c);
    const std::size_t out_h = out_shape[0];
    const std::size_t out_w = out_shape[1];

    const T* in = input.data().data();
    std::vector<T> out(out_shape.element_count());
    std::vector<std::size_t> source(out.size());

    const auto pad = static_cast<std::ptrdiff_t>(spec.padding);
    for (std::size_t x = 0; x < out_h; ++x) {
        const std::ptrdiff_t r0 = static_cast<std::ptrdiff_t>(x * spec.stride) - pad;
        const std::size_t r_begin = static_cast<std::size_t>(std::max<std::ptrdiff_t>(r0, 0));
        const std::size_t r_end =
            std::min(h, static_cast<std::size_t>(r0 + static_cast<std::ptrdiff_t>(spec.window)));
        for (std::size_t y = 0; y < out_w; ++y) {
            const std::ptrdiff_t c0 = static_cast<std::ptrdiff_t>(y * spec.stride) - pad;
            const std::size_t c_begin = static_cast<std::size_t>(std::max<std::ptrdiff_t>(c0, 0));
            const std::size_t c_end = std::min(
                w, static_cast<std::size_t>(c0 + static_cast<std::ptrdiff_t>(spec.window)));
            for (std::size_t ch = 0; ch < c; ++ch) {
                std::size_t best = (r_begin * w + c_begin) * c + ch;
                T best_val = in[best];
                for (std::size_t r = r_begin; r < r_end; ++r) {
                    for (std::size_t q = c_begin; q < c_end; ++q) {
                        const std::size_t idx = (r * w + q) * c + ch;
                        if (in[idx] > best_val) {
                            best_val = in[idx];
                            best = idx;
                        }
                    }
                }
                const std::size_t o = (x * out_w + y) * c + ch;
                out[o] = best_val;
                source[o] = best;
            }
        }
    }
    return {BasicTensor<T>(out_shape, std::move(out)),
            PoolIndexMap{input.shape(), out_shape, std::move(source)}};
}

template <typename T>
BasicTensor<T> maxpool_backward(const PoolIndexMap& indices, const BasicTensor<T>& upstream) {
    require(!indices.source.empty() && !indices.input_shape.empty(),
            "maxpool backward needs the index map of a forward call");
    require(upstream.shape() == indices.output_shape,
            "maxpool upstream shape " + upstream.shape().to_string() +
                " does not match index map " + indices.output_shape.to_string());
    require(indices.source.size() == upstream.size(), "maxpool index map is inconsistent");
    std::vector<T> grad(indices.input_shape.element_count(), T{0});
    for (std::size_t o = 0; o < upstream.size(); ++o) {
        const std::size_t src = indices.source[o];
        require(src < grad.size(), "maxpool index map points outside the input");
        grad[src] += upstream[o];
    }
    return BasicTensor<T>(indices.input_shape, std::move(grad));
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
    std::vector<T> out(input.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = input[i] > T{0} ? input[i] : T{0};
    return BasicTensor<T>(input.shape(), std::move(out));
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream) {
    require(input.shape() == upstream.shape(), "relu backward shape mismatch: " +
                                                   input.shape().to_string() + " vs " +
                                                   upstream.shape().to_string());
    std::vector<T> grad(input.size());
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = input[i] > T{0} ? upstream[i] : T{0};
    return BasicTensor<T>(input.shape(), std::move(grad));
}

void DropoutLayer::validate() const {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw std::invalid_argument("dropout rate must be in [0, 1), got " + std::to_string(rate));
    }
}

template <typename T>
DropoutResult<T> dropout_forward(const BasicTensor<T>& input, const DropoutLayer& layer, Mode mode,
                                 CounterRng& rng) {
    layer.validate();
    if (mode == Mode::eval) {
        return {input, DropoutMask<T>{BasicTensor<T>(input.shape(), T{1}), Mode::eval}};
    }
    const T scale = static_cast<T>(1.0 / (1.0 - layer.rate));
    std::vector<T> out(input.size());
    std::vector<T> keep(input.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool kept = rng.uniform() >= layer.rate;
        keep[i] = kept ? T{1} : T{0};
        out[i] = kept ? input[i] * scale : T{0};
    }
    return {BasicTensor<T>(input.shape(), std::move(out)),
            DropoutMask<T>{BasicTensor<T>(input.shape(), std::move(keep)), Mode::train}};
}

template <typename T>
BasicTensor<T> dropout_backward(const DropoutMask<T>& mask, const DropoutLayer& layer,
                                const BasicTensor<T>& upstream) {
    layer.validate();
    require(mask.keep.shape() == upstream.shape(), "dropout mask shape " +
                                                       mask.keep.shape().to_string() +
                                                       " does not match upstream " +
                                                       upstream.shape().to_string());
    if (mask.mode == Mode::eval) return upstream;
    const T scale = static_cast<T>(1.0 / (1.0 - layer.rate));
    std::vector<T> grad(upstream.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] = mask.keep[i] != T{0} ? upstream[i] * scale : T{0};
    }
    return BasicTensor<T>(upstream.shape(), std::move(grad));
}

double expected_dropout_response(std::span<const double> retain, std::span<const double> weights,
                                 std::span<const double> inputs) {
    if (retain.size() != weights.size() || retain.size() != inputs.size()) {
        throw ShapeError("expected_dropout_response: length mismatch (" +
                         std::to_string(retain.size()) + ", " + std::to_string(weights.size()) +
                         ", " + std::to_string(inputs.size()) + ")");
    }
    double mean = 0.0;
    double variance = 0.0;
    for (std::size_t i = 0; i < retain.size(); ++i) {
        const double p = retain[i];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("retention probability out of [0,1]: " +
                                        std::to_string(p));
        }
        const double wi = weights[i] * inputs[i];
        mean += p * wi;
        variance += p * (1.0 - p) * wi * wi;
    }
    return 0.5 * mean * mean + variance;
}

template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& a, const BasicTensor<T>& weights,
                             const BasicTensor<T>& bias) {
    const Shape& ws = weights.shape();
    require(ws.rank() == 2, "dense weights must be rank 2, got " + ws.to_string());
    const std::size_t out = ws[0];
    const std::size_t in = ws[1];
    require(bias.shape() == Shape{out}, "dense bias must be [" + std::to_string(out) +
                                            "], got " + bias.shape().to_string());
    require(a.size() == in, "dense input has " + std::to_string(a.size()) +
                                " values, layer expects " + std::to_string(in));
    const T* w = weights.data().data();
    const T* x = a.data().data();
    std::vector<T> z(out);
    for (std::size_t j = 0; j < out; ++j) {
        const T* row = w + j * in;
        T s{0};
        for (std::size_t l = 0; l < in; ++l) s += row[l] * x[l];
        z[j] = s + bias[j];
    }
    return BasicTensor<T>(Shape{out}, std::move(z));
}

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& a, const BasicTensor<T>& weights,
                             const BasicTensor<T>& upstream) {
    const Shape& ws = weights.shape();
    require(ws.rank() == 2, "dense weights must be rank 2, got " + ws.to_string());
    const std::size_t out = ws[0];
    const std::size_t in = ws[1];
    require(a.size() == in, "dense input has " + std::to_string(a.size()) +
                                " values, layer expects " + std::to_string(in));
    require(upstream.size() == out, "dense upstream has " + std::to_string(upstream.size()) +
                                        " values, layer produces " + std::to_string(out));
    const T* w = weights.data().data();
    const T* x = a.data().data();
    std::vector<T> gw(out * in);
    std::vector<T> gi(in, T{0});
    for (std::size_t j = 0; j < out; ++j) {
        const T u = upstream[j];
        T* __restrict gw_row = gw.data() + j * in;
        const T* __restrict w_row = w + j * in;
        T* __restrict g = gi.data();
        for (std::size_t l = 0; l < in; ++l) {
            gw_row[l] = u * x[l];
            g[l] += u * w_row[l];
        }
    }
    return {BasicTensor<T>(a.shape(), std::move(gi)), BasicTensor<T>(ws, std::move(gw)),
            BasicTensor<T>(Shape{out}, upstream.values())};
}

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
    const auto z = logits.data();
    const T peak = *std::max_element(z.begin(), z.end());
    std::vector<T> out(z.size());
    T total{0};
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - peak);
        total += out[i];
    }
    for (T& v : out) v /= total;
    return BasicTensor<T>(logits.shape(), std::move(out));
}

#define TSR_INSTANTIATE(T)                                                                     \
    template BasicTensor<T> conv2d_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&,    \
                                              const BasicTensor<T>&);                          \
    template ConvGrads<T> conv2d_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,     \
                                             const BasicTensor<T>&, const BasicTensor<T>&);    \
    template PoolResult<T> maxpool_forward<T>(const BasicTensor<T>&, const PoolSpec&);         \
    template BasicTensor<T> maxpool_backward<T>(const PoolIndexMap&, const BasicTensor<T>&);   \
    template BasicTensor<T> relu<T>(const BasicTensor<T>&);                                    \
    template BasicTensor<T> relu_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&);    \
    template DropoutResult<T> dropout_forward<T>(const BasicTensor<T>&, const DropoutLayer&,   \
                                                 Mode, CounterRng&);                           \
    template BasicTensor<T> dropout_backward<T>(const DropoutMask<T>&, const DropoutLayer&,    \
                                                const BasicTensor<T>&);                        \
    template BasicTensor<T> dense_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&,     \
                                             const BasicTensor<T>&);                           \
    template DenseGrads<T> dense_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,     \
                                             const BasicTensor<T>&);                           \
    template BasicTensor<T> softmax<T>(const BasicTensor<T>&);

TSR_INSTANTIATE(float)
TSR_INSTANTIATE(double)

#undef TSR_INSTANTIATE

}  // namespace tsr
