#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>

// Elementary spin-1/2 and collective angular-momentum operators.
//
// Conventions used throughout the library:
//   * every two-level system is stored in the basis (|0>, |1>) with |0> the
//     ground (uncharged) state and |1> the excited (charged) state;
//   * "polarization" of a qubit is <sigma_z> = p0 - p1 (so a ground-state
//     qubit has polarization +1);
//   * collective charger operators act on the |j,m> ladder with m counting
//     excitations, i.e. m = +j means all chargers excited.  Ladder bases are
//     ordered by descending m.

namespace starqb {

using complexd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Raised when a computation is asked to materialize a space beyond its cap.
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Mat identity2() { return Mat::Identity(2, 2); }

inline Mat sigma_x() {
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Mat sigma_y() {
    Mat m(2, 2);
    m << 0, complexd(0, -1), complexd(0, 1), 0;
    return m;
}

// p0 - p1 convention: +1 on |0>, -1 on |1>.
inline Mat sigma_z() {
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// |1><0| : excites a qubit.
inline Mat qubit_raise() {
    Mat m = Mat::Zero(2, 2);
    m(1, 0) = 1;
    return m;
}

inline Mat qubit_lower() { return qubit_raise().adjoint(); }

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k)
            out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    return out;
}

// Exact binomial coefficient; intermediate products fit unsigned 128-bit for n <= 64.
inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 acc = 1;
    for (int i = 1; i <= k; ++i) {
        acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    }
    return static_cast<std::uint64_t>(acc);
}

// Number of spin-j irreps in the decomposition of n spin-1/2 particles,
// d_{n,j} = C(n, n/2-j) - C(n, n/2-j-1).  j is passed as 2j.
inline std::uint64_t dicke_multiplicity(int n, int twice_j) {
    if (n < 1 || twice_j < 0 || twice_j > n || (n - twice_j) % 2 != 0)
        throw std::domain_error("dicke_multiplicity: invalid (n, j) pairing");
    const int k = (n - twice_j) / 2;
    return binomial(n, k) - binomial(n, k - 1);
}

struct CollectiveOps {
    Mat jx, jy, jz, jplus, jminus;
};

// Angular-momentum matrices on the (2j+1)-dim |j,m> ladder, descending m.
// J+|j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>.
inline CollectiveOps ladder_operators(int twice_j) {
    if (twice_j < 0) throw std::domain_error("ladder_operators: negative j");
    const int dim = twice_j + 1;
    const double j = twice_j / 2.0;
    CollectiveOps ops;
    ops.jz = Mat::Zero(dim, dim);
    ops.jplus = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const double m = j - i;
        ops.jz(i, i) = m;
        if (i > 0) ops.jplus(i - 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    ops.jminus = ops.jplus.adjoint();
    ops.jx = (ops.jplus + ops.jminus) / 2.0;
    ops.jy = (ops.jplus - ops.jminus) / complexd(0, 2);
    return ops;
}

// Same matrices, with the (n, j) compatibility check of the charger ensemble.
inline CollectiveOps collective_operators(int n, int twice_j) {
    if (n < 1 || twice_j < 0 || twice_j > n || (n - twice_j) % 2 != 0)
        throw std::domain_error("collective_operators: invalid (n, j) pairing");
    return ladder_operators(twice_j);
}

}  // namespace starqb
