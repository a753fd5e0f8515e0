#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace lshattn {

// Dense row-major matrix of doubles.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
};

// Dense 4-d tensor, batch x heads x seq x dim, row-major.
struct Tensor4 {
    int batch = 0;
    int heads = 0;
    int seq = 0;
    int dim = 0;
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(int b, int h, int s, int d)
        : batch(b), heads(h), seq(s), dim(d),
          data(static_cast<std::size_t>(b) * h * s * d, 0.0) {}

    std::size_t index(int b, int h, int s, int d) const {
        return ((static_cast<std::size_t>(b) * heads + h) * seq + s) * dim + d;
    }

    double& at(int b, int h, int s, int d) { return data[index(b, h, s, d)]; }
    double at(int b, int h, int s, int d) const { return data[index(b, h, s, d)]; }

    // Contiguous dim-length slice at (b, h, s).
    double* row(int b, int h, int s) { return data.data() + index(b, h, s, 0); }
    const double* row(int b, int h, int s) const { return data.data() + index(b, h, s, 0); }

    bool same_shape(const Tensor4& o) const {
        return batch == o.batch && heads == o.heads && seq == o.seq && dim == o.dim;
    }
};

inline double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace lshattn
