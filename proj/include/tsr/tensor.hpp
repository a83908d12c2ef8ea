#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsr {

/// Thrown when operand shapes are invalid or incompatible.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Extents of a dense row-major array. Rank >= 1, every extent >= 1.
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<std::size_t> dims);
    explicit Shape(std::vector<std::size_t> dims);

    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t element_count() const noexcept { return count_; }
    bool empty() const noexcept { return dims_.empty(); }

    std::string to_string() const;

    friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

private:
    std::vector<std::size_t> dims_;
    std::size_t count_ = 0;
};

/// Dense N-dimensional array, row-major (last axis fastest).
///
/// `T` is `float` for training and inference and `double` for the
/// verification suites (finite-difference checks, oracle comparisons).
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;
    explicit BasicTensor(Shape shape, T fill = T{0});
    BasicTensor(Shape shape, std::vector<T> data);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // Unchecked rank-2 and rank-3 accessors.
    T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    const T& at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    T& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    const T& at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    void fill(T value);

    friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

enum class ElementwiseOp { add, sub, mul };

template <typename T>
BasicTensor<T> tensor_new(const Shape& shape, T fill);

template <typename T>
BasicTensor<T> elementwise(const BasicTensor<T>& a, const BasicTensor<T>& b, ElementwiseOp op);

/// c[i,j] = sum_l a[i,l] * b[l,j], accumulated in increasing l.
template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& t, const Shape& new_shape);

/// Index of the largest element; ties go to the lowest index.
template <typename T>
std::size_t argmax(std::span<const T> values);

template <typename T>
std::size_t argmax(const BasicTensor<T>& t) {
    return argmax(t.data());
}

/// Converts between scalar precisions element by element.
template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& t) {
    std::vector<To> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
    return BasicTensor<To>(t.shape(), std::move(out));
}

/// True when every element is finite.
template <typename T>
bool all_finite(const BasicTensor<T>& t);

}  // namespace tsr
