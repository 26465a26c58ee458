#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "starqb/spin_ops.hpp"

namespace starqb {

// Density matrix over an explicit tensor factorization; subsystem 0 is the
// battery wherever a battery is present.  Plain value type, no hidden state.
struct DensityMatrix {
    std::vector<int> dims;
    Mat elements;

    DensityMatrix() = default;
    DensityMatrix(std::vector<int> d, Mat m) : dims(std::move(d)), elements(std::move(m)) {
        long prod = 1;
        for (int x : dims) {
            if (x < 1) throw std::invalid_argument("DensityMatrix: subsystem dim < 1");
            prod *= x;
        }
        if (elements.rows() != elements.cols() || elements.rows() != prod)
            throw std::invalid_argument("DensityMatrix: dims do not match matrix size");
    }

    int total_dim() const { return static_cast<int>(elements.rows()); }
    double trace() const { return elements.trace().real(); }

    double hermiticity_error() const {
        return (elements - elements.adjoint()).cwiseAbs().maxCoeff();
    }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (elements + elements.adjoint()),
                                              Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    double purity() const { return (elements * elements).trace().real(); }
};

inline DensityMatrix qubit_state(double p0, double p1) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = p0;
    m(1, 1) = p1;
    return DensityMatrix({2}, m);
}

// diag((1+m)/2, (1-m)/2): qubit of polarization m.
inline DensityMatrix polarized_qubit(double m) { return qubit_state((1 + m) / 2, (1 - m) / 2); }

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    std::vector<int> dims = a.dims;
    dims.insert(dims.end(), b.dims.begin(), b.dims.end());
    return DensityMatrix(std::move(dims), kron(a.elements, b.elements));
}

// Partial trace keeping the listed subsystems (result ordered by ascending
// original index).  Throws on empty or out-of-range keep sets.
inline DensityMatrix reduced_state(const DensityMatrix& state, std::vector<int> keep) {
    const int ns = static_cast<int>(state.dims.size());
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    if (keep.empty()) throw std::out_of_range("reduced_state: empty keep set");
    for (int k : keep)
        if (k < 0 || k >= ns) throw std::out_of_range("reduced_state: subsystem index out of range");

    std::vector<int> traced;
    for (int i = 0; i < ns; ++i)
        if (!std::binary_search(keep.begin(), keep.end(), i)) traced.push_back(i);

    // row-major strides of the full index
    std::vector<long> stride(ns, 1);
    for (int i = ns - 2; i >= 0; --i) stride[i] = stride[i + 1] * state.dims[i + 1];

    long dim_keep = 1, dim_traced = 1;
    for (int k : keep) dim_keep *= state.dims[k];
    for (int t : traced) dim_traced *= state.dims[t];

    // offsets of every kept / traced multi-index combination
    auto offsets = [&](const std::vector<int>& subs, long count) {
        std::vector<long> off(count, 0);
        for (long c = 0; c < count; ++c) {
            long rem = c;
            for (int i = static_cast<int>(subs.size()) - 1; i >= 0; --i) {
                const int d = state.dims[subs[i]];
                off[c] += (rem % d) * stride[subs[i]];
                rem /= d;
            }
        }
        return off;
    };
    const std::vector<long> off_k = offsets(keep, dim_keep);
    const std::vector<long> off_t = offsets(traced, dim_traced);

    Mat out = Mat::Zero(dim_keep, dim_keep);
    for (long i = 0; i < dim_keep; ++i)
        for (long j = 0; j < dim_keep; ++j) {
            complexd acc = 0;
            for (long t = 0; t < dim_traced; ++t)
                acc += state.elements(off_k[i] + off_t[t], off_k[j] + off_t[t]);
            out(i, j) = acc;
        }

    std::vector<int> new_dims;
    for (int k : keep) new_dims.push_back(state.dims[k]);
    return DensityMatrix(std::move(new_dims), std::move(out));
}

}  // namespace starqb
