#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Dense float32 tensor with an optional same-shape gradient buffer. Shapes
// are fixed at construction; the training loop owns one buffer per
// parameter and reuses activation tensors across batches.

namespace poserefine {

struct Tensor {
    std::vector<int64_t> shape;
    std::vector<float> v;  // values, row-major
    std::vector<float> g;  // gradient; empty unless tracking

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> shape_, bool track_grad = false);

    int64_t numel() const;
    int64_t dim(size_t i) const { return shape[i]; }
    size_t rank() const { return shape.size(); }
    bool tracks_grad() const { return !g.empty(); }

    void zero_grad();
    void enable_grad();  // allocates the gradient buffer if absent

    std::string shape_str() const;

    static Tensor zeros(std::vector<int64_t> shape, bool track_grad = false) {
        return Tensor(std::move(shape), track_grad);
    }
    static Tensor from_values(std::vector<int64_t> shape,
                              std::vector<float> values);
};

/// Throws a shape error naming both shapes if they differ.
void check_same_shape(const Tensor& a, const Tensor& b, const char* where);

/// Throws if `t`'s shape is not `expect`.
void check_shape(const Tensor& t, const std::vector<int64_t>& expect,
                 const char* where);

}  // namespace poserefine
