#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "starqb/density_matrix.hpp"
#include "starqb/sector_state.hpp"
#include "starqb/spin_ops.hpp"

// Time evolution under the star-topology flip-flop interaction.  The charging
// phase theta = 2 pi J tau is the canonical time variable; the propagator is
// exp(-i theta (Sx Jx + Sy Jy)) with the h-bar 2 pi J prefactor absorbed.
// Conversion to seconds happens only at I/O boundaries.

namespace starqb {

struct Hamiltonian {
    Mat matrix;
    std::string label;
};

// Battery local Hamiltonian in units of h-bar omega_B: diag(0, 1).
inline Hamiltonian battery_hamiltonian() {
    Mat h = Mat::Zero(2, 2);
    h(1, 1) = 1;
    return {std::move(h), "H_B"};
}

// Spin-1/2 operators in the excitation-up convention shared by battery and
// chargers (|1> has sz = +1/2).  The x,y,z triple is right-handed, and the
// flip-flop SxIx + SyIy has the same matrix as in the textbook convention.
inline Mat spin_half_x() { return (qubit_raise() + qubit_lower()) / 2.0; }
inline Mat spin_half_y() { return (qubit_raise() - qubit_lower()) / complexd(0, 2); }
inline Mat spin_half_z() {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = -0.5;
    m(1, 1) = 0.5;
    return m;
}

// Flip-flop Sx Jx + Sy Jy on (battery 2) x (ladder 2j+1):
// (E+ (x) J- + E- (x) J+) / 2.
inline Mat sector_hamiltonian(int twice_j) {
    const auto ops = ladder_operators(twice_j);
    return (kron(qubit_raise(), ops.jminus) + kron(qubit_lower(), ops.jplus)) / 2.0;
}

// Full-space H_BC = sum_i (Sx Ix^i + Sy Iy^i) over battery bit n (MSB) and
// charger bits n-1..0.  Exactly (|01><10| + |10><01|)/2 per pair, so it only
// connects basis states of equal excitation count.
inline Mat full_interaction_hamiltonian(int n) {
    const long dim = 1L << (n + 1);
    Mat h = Mat::Zero(dim, dim);
    for (long r = 0; r < dim; ++r) {
        const int b = static_cast<int>((r >> n) & 1);
        for (int i = 0; i < n; ++i) {
            const int c = static_cast<int>((r >> (n - 1 - i)) & 1);
            if (b != c) {
                const long s = r ^ (1L << n) ^ (1L << (n - 1 - i));
                h(s, r) += 0.5;
            }
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Sector evolution: one eigendecomposition per j, reused for every theta.
// ---------------------------------------------------------------------------

class SectorEvolver {
  public:
    explicit SectorEvolver(int n) : n_(n) {
        for (int tj = n; tj >= (n % 2 == 0 ? 0 : 1); tj -= 2) {
            Eigen::SelfAdjointEigenSolver<Mat> es(sector_hamiltonian(tj));
            twice_js_.push_back(tj);
            evals_.push_back(es.eigenvalues());
            evecs_.push_back(es.eigenvectors());
        }
    }

    int n() const { return n_; }

    Mat block_propagator(std::size_t idx, double theta) const {
        const auto phases =
            (complexd(0, -theta) * evals_[idx].array().cast<complexd>()).exp().matrix();
        return evecs_[idx] * phases.asDiagonal() * evecs_[idx].adjoint();
    }

    SectorState evolve(const SectorState& s, double theta) const {
        if (s.n_chargers != n_) throw std::invalid_argument("SectorEvolver: charger count mismatch");
        SectorState out = s;
        for (std::size_t k = 0; k < out.blocks.size(); ++k) {
            if (out.blocks[k].twice_j != twice_js_[k])
                throw std::invalid_argument("SectorEvolver: unexpected block layout");
            const Mat u = block_propagator(k, theta);
            out.blocks[k].block = u * out.blocks[k].block * u.adjoint();
        }
        return out;
    }

  private:
    int n_;
    std::vector<int> twice_js_;
    std::vector<Eigen::VectorXd> evals_;
    std::vector<Mat> evecs_;
};

inline SectorState evolve_exact(const SectorState& s, double theta) {
    return SectorEvolver(s.n_chargers).evolve(s, theta);
}

// ---------------------------------------------------------------------------
// Full-space evolution for validation.  H_BC conserves the excitation count,
// so the space splits into popcount classes that are diagonalized separately;
// class membership is verified during construction rather than assumed.
// ---------------------------------------------------------------------------

class FullEvolver {
  public:
    explicit FullEvolver(int n) : n_(n), dim_(1L << (n + 1)) {
        if (dim_ > (1L << 15)) throw DimensionError("FullEvolver: dimension cap 2^15 exceeded");
        class_of_.assign(dim_, 0);
        pos_of_.assign(dim_, 0);
        classes_.resize(n + 2);
        for (long r = 0; r < dim_; ++r) {
            const int k = __builtin_popcountll(static_cast<unsigned long long>(r));
            class_of_[r] = k;
            pos_of_[r] = static_cast<long>(classes_[k].size());
            classes_[k].push_back(r);
        }
        evals_.resize(n + 2);
        evecs_.resize(n + 2);
        for (int k = 0; k <= n + 1; ++k) {
            const auto& idx = classes_[k];
            const long m = static_cast<long>(idx.size());
            Mat h = Mat::Zero(m, m);
            for (long a = 0; a < m; ++a) {
                const long r = idx[a];
                const int b = static_cast<int>((r >> n) & 1);
                for (int i = 0; i < n; ++i) {
                    const int c = static_cast<int>((r >> (n - 1 - i)) & 1);
                    if (b != c) {
                        const long s = r ^ (1L << n) ^ (1L << (n - 1 - i));
                        if (class_of_[s] != k)
                            throw std::logic_error("FullEvolver: excitation count not conserved");
                        h(pos_of_[s], a) += 0.5;
                    }
                }
            }
            Eigen::SelfAdjointEigenSolver<Mat> es(h);
            evals_[k] = es.eigenvalues();
            evecs_[k] = es.eigenvectors();
        }
    }

    int n() const { return n_; }
    long dim() const { return dim_; }

    Mat class_propagator(int k, double theta) const {
        const auto phases =
            (complexd(0, -theta) * evals_[k].array().cast<complexd>()).exp().matrix();
        return evecs_[k] * phases.asDiagonal() * evecs_[k].adjoint();
    }

    // Dense propagator, assembled from the class blocks.
    Mat propagator(double theta) const {
        Mat u = Mat::Zero(dim_, dim_);
        for (int k = 0; k < static_cast<int>(classes_.size()); ++k) {
            const Mat uk = class_propagator(k, theta);
            const auto& idx = classes_[k];
            for (std::size_t a = 0; a < idx.size(); ++a)
                for (std::size_t b = 0; b < idx.size(); ++b) u(idx[a], idx[b]) = uk(a, b);
        }
        return u;
    }

    // U rho U^dag on a raw matrix (used for density matrices and for traceless
    // deviation matrices alike).  Class pairs whose sub-block vanishes are
    // skipped, which makes diagonal-start evolutions cheap.
    Mat evolve_matrix(const Mat& rho, double theta) const {
        if (rho.rows() != dim_ || rho.cols() != dim_)
            throw std::invalid_argument("FullEvolver: matrix size mismatch");
        const int nc = static_cast<int>(classes_.size());
        std::vector<Mat> props(nc);
        for (int k = 0; k < nc; ++k) props[k] = class_propagator(k, theta);
        Mat out = Mat::Zero(dim_, dim_);
        for (int k = 0; k < nc; ++k) {
            for (int l = 0; l < nc; ++l) {
                const auto& ik = classes_[k];
                const auto& il = classes_[l];
                Mat sub(ik.size(), il.size());
                bool nonzero = false;
                for (std::size_t a = 0; a < ik.size(); ++a)
                    for (std::size_t b = 0; b < il.size(); ++b) {
                        sub(a, b) = rho(ik[a], il[b]);
                        nonzero = nonzero || sub(a, b) != complexd(0, 0);
                    }
                if (!nonzero) continue;
                const Mat res = props[k] * sub * props[l].adjoint();
                for (std::size_t a = 0; a < ik.size(); ++a)
                    for (std::size_t b = 0; b < il.size(); ++b) out(ik[a], il[b]) = res(a, b);
            }
        }
        return out;
    }

    DensityMatrix evolve(const DensityMatrix& state, double theta) const {
        return DensityMatrix(state.dims, evolve_matrix(state.elements, theta));
    }

    Vec evolve_state(const Vec& psi, double theta) const {
        if (psi.size() != dim_) throw std::invalid_argument("FullEvolver: vector size mismatch");
        Vec out = Vec::Zero(dim_);
        for (int k = 0; k < static_cast<int>(classes_.size()); ++k) {
            const auto& idx = classes_[k];
            Vec sub(idx.size());
            for (std::size_t a = 0; a < idx.size(); ++a) sub(a) = psi(idx[a]);
            sub = class_propagator(k, theta) * sub;
            for (std::size_t a = 0; a < idx.size(); ++a) out(idx[a]) = sub(a);
        }
        return out;
    }

  private:
    int n_;
    long dim_;
    std::vector<int> class_of_;
    std::vector<long> pos_of_;
    std::vector<std::vector<long>> classes_;
    std::vector<Eigen::VectorXd> evals_;
    std::vector<Mat> evecs_;
};

inline DensityMatrix evolve_full(const DensityMatrix& state, double theta) {
    int qubits = 0;
    for (int d : state.dims) {
        if (d != 2) throw std::invalid_argument("evolve_full: qubit subsystems expected");
        ++qubits;
    }
    return FullEvolver(qubits - 1).evolve(state, theta);
}

// ---------------------------------------------------------------------------
// Trotterized pulse-sequence propagator: each iteration is
// Y ZZ Y^dag X ZZ X^dag with global pi/2 rotations X, Y and the diagonal
// ZZ = exp(-i Sz Iz theta/n0).  One ZZ slice per iteration; exact for two
// spins where the flip-flop terms commute.
// ---------------------------------------------------------------------------

struct PropagatorSpec {
    enum class Mode { exact, trotterized };
    double theta = 0;
    int n0 = 1;
    Mode mode = Mode::trotterized;
};

namespace detail {

inline Mat matrix_exponential_hermitian(const Mat& h, complexd factor) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    return es.eigenvectors() *
           (factor * es.eigenvalues().array().cast<complexd>()).exp().matrix().asDiagonal() *
           es.eigenvectors().adjoint();
}

// sum of one-spin operators op over battery and all chargers
inline Mat global_sum(int n, const Mat& op) {
    const long dim = 1L << (n + 1);
    Mat acc = Mat::Zero(dim, dim);
    for (int site = 0; site <= n; ++site) {
        Mat term = Mat::Identity(1, 1);
        for (int s = 0; s <= n; ++s) term = kron(term, s == site ? op : identity2());
        acc += term;
    }
    return acc;
}

}  // namespace detail

// Dense Trotter propagator for N chargers (validation sizes only).
inline Mat trotter_propagator(int n, double theta, int n0) {
    if (n0 < 1) throw std::invalid_argument("trotter_propagator: n0 >= 1 required");
    const long dim = 1L << (n + 1);
    if (dim > (1L << 12)) throw DimensionError("trotter_propagator: dimension cap 2^12 exceeded");

    const Mat gx = detail::global_sum(n, spin_half_x());
    const Mat gy = detail::global_sum(n, spin_half_y());
    const Mat x = detail::matrix_exponential_hermitian(gx, complexd(0, -M_PI / 2));
    const Mat y = detail::matrix_exponential_hermitian(gy, complexd(0, -M_PI / 2));

    // Sz Iz is diagonal: battery sz times total charger sz, excitation-up signs
    Eigen::VectorXd zz_diag(dim);
    for (long r = 0; r < dim; ++r) {
        const double sb = ((r >> n) & 1) ? 0.5 : -0.5;
        double sc = 0;
        for (int i = 0; i < n; ++i) sc += ((r >> (n - 1 - i)) & 1) ? 0.5 : -0.5;
        zz_diag(r) = sb * sc;
    }
    const double slice = theta / n0;
    Vec zz_phase(dim);
    for (long r = 0; r < dim; ++r) zz_phase(r) = std::exp(complexd(0, -slice * zz_diag(r)));

    Mat iter = y * zz_phase.asDiagonal() * y.adjoint() * x * zz_phase.asDiagonal() * x.adjoint();

    // iter^n0 by binary powering
    Mat acc = Mat::Identity(dim, dim);
    Mat base = iter;
    int e = n0;
    while (e > 0) {
        if (e & 1) acc = acc * base;
        base = base * base;
        e >>= 1;
    }
    return acc;
}

inline DensityMatrix u_xy_trotter(const DensityMatrix& state, const PropagatorSpec& spec) {
    if (spec.n0 < 1) throw std::invalid_argument("u_xy_trotter: n0 >= 1 required");
    int qubits = 0;
    for (int d : state.dims) {
        if (d != 2) throw std::invalid_argument("u_xy_trotter: qubit subsystems expected");
        ++qubits;
    }
    const int n = qubits - 1;
    if (spec.mode == PropagatorSpec::Mode::exact) return evolve_full(state, spec.theta);
    const Mat u = trotter_propagator(n, spec.theta, spec.n0);
    return DensityMatrix(state.dims, u * state.elements * u.adjoint());
}

// ---------------------------------------------------------------------------
// Pulsed-field-gradient model: zero all coherences between total-magnetization
// eigenspaces, keep populations and intra-eigenspace coherences.  Idempotent.
// ---------------------------------------------------------------------------

inline DensityMatrix dephase(const DensityMatrix& state) {
    for (int d : state.dims)
        if (d != 2) throw std::invalid_argument("dephase: qubit subsystems expected");
    Mat out = state.elements;
    const long dim = out.rows();
    for (long r = 0; r < dim; ++r)
        for (long c = 0; c < dim; ++c)
            if (__builtin_popcountll(static_cast<unsigned long long>(r)) !=
                __builtin_popcountll(static_cast<unsigned long long>(c)))
                out(r, c) = 0;
    return DensityMatrix(state.dims, std::move(out));
}

inline SectorState dephase(const SectorState& s) {
    SectorState out = s;
    for (auto& blk : out.blocks) {
        const int dim = blk.ladder_dim();
        for (int a = 0; a < 2; ++a)
            for (int i = 0; i < dim; ++i)
                for (int b = 0; b < 2; ++b)
                    for (int i2 = 0; i2 < dim; ++i2)
                        if (a - i != b - i2) blk.block(a * dim + i, b * dim + i2) = 0;
    }
    return out;
}

}  // namespace starqb
