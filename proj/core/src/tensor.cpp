#include "nixforge/tensor.hpp"

#include <cmath>
#include <sstream>

#include "nixforge/error.hpp"

namespace nixforge {

size_t shape_product(const std::vector<int>& dims) {
    size_t n = 1;
    for (int d : dims) n *= static_cast<size_t>(d);
    return n;
}

std::string shape_to_string(const std::vector<int>& dims) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < dims.size(); ++i) {
        if (i) os << " x ";
        os << dims[i];
    }
    os << "]";
    return os.str();
}

namespace {

void validate_dims(const std::vector<int>& dims) {
    if (dims.empty() || dims.size() > 3)
        throw ShapeError("tensor rank must be 1..3, got rank " +
                         std::to_string(dims.size()));
    for (int d : dims)
        if (d <= 0)
            throw ShapeError("tensor dims must be positive, got " +
                             shape_to_string(dims));
}

} // namespace

Tensor::Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
    validate_dims(dims_);
    data_.assign(shape_product(dims_), 0.0f);
}

Tensor::Tensor(std::vector<int> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    validate_dims(dims_);
    if (shape_product(dims_) != data_.size())
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_to_string(dims_));
}

Tensor Tensor::full(std::vector<int> dims, float value) {
    Tensor t(std::move(dims));
    for (auto& v : t.data_) v = value;
    return t;
}

bool Tensor::all_finite() const {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const { return shape_to_string(dims_); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
}

void require_rank(const Tensor& t, int rank, const char* what) {
    if (t.rank() != rank)
        throw ShapeError(std::string(what) + ": expected rank " +
                         std::to_string(rank) + ", got shape " + t.shape_str());
}

} // namespace nixforge
