#include "tsr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tsr {

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ShapeError("shape must have rank >= 1");
    std::size_t count = 1;
    for (std::size_t d : dims_) {
        if (d == 0) throw ShapeError("shape " + to_string() + " has a zero extent");
        if (count > std::numeric_limits<std::size_t>::max() / d) {
            throw ShapeError("shape " + to_string() + " overflows the element count");
        }
        count *= d;
    }
    count_ = count;
}

std::string Shape::to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (i) os << ',';
        os << dims_[i];
    }
    os << ']';
    return os.str();
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(std::move(shape)) {
    if (shape_.empty()) throw ShapeError("tensor requires a non-empty shape");
    data_.assign(shape_.element_count(), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.empty()) throw ShapeError("tensor requires a non-empty shape");
    if (data_.size() != shape_.element_count()) {
        throw ShapeError("buffer of " + std::to_string(data_.size()) +
                         " values does not match shape " + shape_.to_string());
    }
}

template <typename T>
void BasicTensor<T>::fill(T value) {
    std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
BasicTensor<T> tensor_new(const Shape& shape, T fill) {
    return BasicTensor<T>(shape, fill);
}

template <typename T>
BasicTensor<T> elementwise(const BasicTensor<T>& a, const BasicTensor<T>& b, ElementwiseOp op) {
    if (!(a.shape() == b.shape())) {
        throw ShapeError("elementwise shape mismatch: " + a.shape().to_string() + " vs " +
                         b.shape().to_string());
    }
    std::vector<T> out(a.size());
    const auto x = a.data();
    const auto y = b.data();
    switch (op) {
        case ElementwiseOp::add:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
            break;
        case ElementwiseOp::sub:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
            break;
        case ElementwiseOp::mul:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
            break;
    }
    return BasicTensor<T>(a.shape(), std::move(out));
}

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    if (a.shape().rank() != 2 || b.shape().rank() != 2) {
        throw ShapeError("matmul expects rank-2 operands, got " + a.shape().to_string() + " and " +
                         b.shape().to_string());
    }
    const std::size_t m = a.shape()[0];
    const std::size_t k = a.shape()[1];
    const std::size_t n = b.shape()[1];
    if (b.shape()[0] != k) {
        throw ShapeError("matmul inner dimension mismatch: " + a.shape().to_string() + " x " +
                         b.shape().to_string());
    }
    std::vector<T> c(m * n, T{0});
    const T* pa = a.data().data();
    const T* pb = b.data().data();
    // i-l-j order: each c[i,j] still accumulates over l in increasing order,
    // but the innermost loop is contiguous in both b and c.
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c.data() + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const T s = pa[i * k + l];
            const T* brow = pb + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += s * brow[j];
        }
    }
    return BasicTensor<T>(Shape{m, n}, std::move(c));
}

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& t, const Shape& new_shape) {
    if (t.size() != new_shape.element_count()) {
        throw ShapeError("cannot reshape " + t.shape().to_string() + " to " +
                         new_shape.to_string());
    }
    return BasicTensor<T>(new_shape, t.values());
}

template <typename T>
std::size_t argmax(std::span<const T> values) {
    if (values.empty()) throw ShapeError("argmax of an empty tensor");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

template <typename T>
bool all_finite(const BasicTensor<T>& t) {
    return std::all_of(t.data().begin(), t.data().end(), [](T v) { return std::isfinite(v); });
}

#define TSR_INSTANTIATE(T)                                                                   \
    template class BasicTensor<T>;                                                           \
    template BasicTensor<T> tensor_new<T>(const Shape&, T);                                  \
    template BasicTensor<T> elementwise<T>(const BasicTensor<T>&, const BasicTensor<T>&,     \
                                           ElementwiseOp);                                   \
    template BasicTensor<T> matmul<T>(const BasicTensor<T>&, const BasicTensor<T>&);         \
    template BasicTensor<T> reshape<T>(const BasicTensor<T>&, const Shape&);                 \
    template std::size_t argmax<T>(std::span<const T>);                                      \
    template bool all_finite<T>(const BasicTensor<T>&);

TSR_INSTANTIATE(float)
TSR_INSTANTIATE(double)

#undef TSR_INSTANTIATE

}  // namespace tsr
