#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nixforge {

// Dense real-valued array of rank 1..3, float storage, row-major with the
// last dimension contiguous. Rank-3 tensors are read as [batch, channels, time]
// by the convolution kernels.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> dims);
    Tensor(std::vector<int> dims, std::vector<float> data);

    static Tensor zeros(std::vector<int> dims) { return Tensor(std::move(dims)); }
    static Tensor full(std::vector<int> dims, float value);

    int rank() const { return static_cast<int>(dims_.size()); }
    int dim(int i) const { return dims_[static_cast<size_t>(i)]; }
    const std::vector<int>& dims() const { return dims_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& values() { return data_; }
    const std::vector<float>& values() const { return data_; }

    float& at(size_t i) { return data_[i]; }
    float at(size_t i) const { return data_[i]; }

    // Rank-checked element access; index math only, no bounds checks in release.
    float& operator()(int i) { return data_[static_cast<size_t>(i)]; }
    float operator()(int i) const { return data_[static_cast<size_t>(i)]; }
    float& operator()(int i, int j) {
        return data_[static_cast<size_t>(i) * dims_[1] + j];
    }
    float operator()(int i, int j) const {
        return data_[static_cast<size_t>(i) * dims_[1] + j];
    }
    float& operator()(int i, int j, int k) {
        return data_[(static_cast<size_t>(i) * dims_[1] + j) * dims_[2] + k];
    }
    float operator()(int i, int j, int k) const {
        return data_[(static_cast<size_t>(i) * dims_[1] + j) * dims_[2] + k];
    }

    bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }
    bool all_finite() const;

    // "[2 x 3]" style, used in error messages.
    std::string shape_str() const;

    bool operator==(const Tensor& other) const {
        return dims_ == other.dims_ && data_ == other.data_;
    }

private:
    std::vector<int> dims_;
    std::vector<float> data_;
};

size_t shape_product(const std::vector<int>& dims);
std::string shape_to_string(const std::vector<int>& dims);

// Throws ShapeError with both shapes in the message when dims differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);
void require_rank(const Tensor& t, int rank, const char* what);

} // namespace nixforge
