#pragma once

#include <cstdint>

// Inner loops shared by the layer implementations. Every reduction runs in
// a fixed order (lane-striped accumulators + ordered horizontal sum), so
// results are bit-identical from run to run. Dot products and axpys
// accumulate in float; the conv/batch-norm paths pass double accumulators.

namespace poserefine::kernels {

inline float dot_f(const float* a, const float* b, int64_t n) {
    constexpr int kLanes = 16;
    float acc[kLanes] = {};
    int64_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (int l = 0; l < kLanes; ++l) acc[l] += a[i + l] * b[i + l];
    }
    float tail = 0.0f;
    for (; i < n; ++i) tail += a[i] * b[i];
    float s = tail;
    for (int l = 0; l < kLanes; ++l) s += acc[l];
    return s;
}

inline double dot_d(const float* a, const float* b, int64_t n) {
    constexpr int kLanes = 8;
    double acc[kLanes] = {};
    int64_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (int l = 0; l < kLanes; ++l)
            acc[l] += static_cast<double>(a[i + l]) * b[i + l];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += static_cast<double>(a[i]) * b[i];
    double s = tail;
    for (int l = 0; l < kLanes; ++l) s += acc[l];
    return s;
}

inline double sum_d(const float* a, int64_t n) {
    constexpr int kLanes = 8;
    double acc[kLanes] = {};
    int64_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (int l = 0; l < kLanes; ++l) acc[l] += a[i + l];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i];
    double s = tail;
    for (int l = 0; l < kLanes; ++l) s += acc[l];
    return s;
}

inline void axpy_f(float* y, float s, const float* x, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] += s * x[i];
}

inline void axpy_d(double* y, float s, const float* x, int64_t n) {
    const double sd = s;
    for (int64_t i = 0; i < n; ++i) y[i] += sd * x[i];
}

/// C[i][j] = dot(A row i, B row j) + col_bias[j].
/// A: m x k, B: n x k, C: m x n, all row-major.
inline void matmul_rows_f(const float* A, const float* B,
                          const float* col_bias, float* C, int64_t m,
                          int64_t n, int64_t k) {
    for (int64_t i = 0; i < m; ++i) {
        const float* a = A + i * k;
        float* c = C + i * n;
        for (int64_t j = 0; j < n; ++j) {
            c[j] = (col_bias ? col_bias[j] : 0.0f) + dot_f(a, B + j * k, k);
        }
    }
}

/// C[i][:] = row_bias[i] + sum_k A[i][k] * B[k][:], accumulated in a double
/// scratch row (length n). A: m x k, B: k x n, C: m x n.
inline void matmul_ikj_d(const float* A, const float* B,
                         const float* row_bias, float* C, int64_t m,
                         int64_t k, int64_t n, double* scratch) {
    for (int64_t i = 0; i < m; ++i) {
        const double init = row_bias ? static_cast<double>(row_bias[i]) : 0.0;
        for (int64_t j = 0; j < n; ++j) scratch[j] = init;
        const float* a = A + i * k;
        for (int64_t p = 0; p < k; ++p) {
            axpy_d(scratch, a[p], B + p * n, n);
        }
        float* c = C + i * n;
        for (int64_t j = 0; j < n; ++j) c[j] = static_cast<float>(scratch[j]);
    }
}

}  // namespace poserefine::kernels
