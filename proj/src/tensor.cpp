#include "poserefine/tensor.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace poserefine {

namespace {

int64_t product(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor dimension must be > 0");
        n *= d;
    }
    return n;
}

std::string shape_to_str(const std::vector<int64_t>& s) {
    std::ostringstream ss;
    ss << "[";
    for (size_t i = 0; i < s.size(); ++i) ss << (i ? "x" : "") << s[i];
    ss << "]";
    return ss.str();
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape_, bool track_grad)
    : shape(std::move(shape_)), v(static_cast<size_t>(product(shape)), 0.0f) {
    if (track_grad) g.assign(v.size(), 0.0f);
}

int64_t Tensor::numel() const { return static_cast<int64_t>(v.size()); }

void Tensor::zero_grad() {
    if (!g.empty()) std::fill(g.begin(), g.end(), 0.0f);
}

void Tensor::enable_grad() {
    if (g.empty()) g.assign(v.size(), 0.0f);
}

std::string Tensor::shape_str() const { return shape_to_str(shape); }

Tensor Tensor::from_values(std::vector<int64_t> shape,
                           std::vector<float> values) {
    Tensor t;
    t.shape = std::move(shape);
    if (product(t.shape) != static_cast<int64_t>(values.size())) {
        throw std::invalid_argument("from_values: " + shape_to_str(t.shape) +
                                    " does not hold " +
                                    std::to_string(values.size()) + " values");
    }
    t.v = std::move(values);
    return t;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (a.shape != b.shape) {
        throw std::invalid_argument(std::string(where) + ": shape mismatch " +
                                    a.shape_str() + " vs " + b.shape_str());
    }
}

void check_shape(const Tensor& t, const std::vector<int64_t>& expect,
                 const char* where) {
    if (t.shape != expect) {
        throw std::invalid_argument(std::string(where) + ": expected shape " +
                                    shape_to_str(expect) + ", got " +
                                    t.shape_str());
    }
}

}  // namespace poserefine
