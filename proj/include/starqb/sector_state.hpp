#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "starqb/config.hpp"
#include "starqb/density_matrix.hpp"
#include "starqb/spin_ops.hpp"

// Permutation-symmetric representation of the battery + N-charger system.
//
// A state is stored as one block per total charger spin j, each block a
// density matrix on (battery 2) x (Dicke ladder 2j+1), identical across the
// d_{N,j} multiplicity copies.  The copies are folded in through the exact
// integer multiplicity only when observables are extracted, so the blocks
// themselves stay well scaled even at N = 36.  Every state reachable in this
// library (thermal products, charger inversions, flip-flop evolution,
// dephasing, polarization rebuilds) preserves this form.

namespace starqb {

struct SectorBlock {
    int twice_j = 0;
    std::uint64_t multiplicity = 1;
    Mat block;  // dims [2, twice_j + 1]

    int ladder_dim() const { return twice_j + 1; }
};

struct SectorState {
    int n_chargers = 0;
    std::vector<SectorBlock> blocks;  // descending j
};

// Sum over blocks of multiplicity * trace; 1 for a normalized state.
inline double weighted_trace(const SectorState& s) {
    double t = 0;
    for (const auto& b : s.blocks) t += static_cast<double>(b.multiplicity) * b.block.trace().real();
    return t;
}

// Product state: battery at polarization m_b, every charger at polarization
// m_c.  Dicke level |j,m> carries population q^(N/2+m) (1-q)^(N/2-m) with
// q = (1-m_c)/2 the single-charger excited population, identically across
// multiplicity copies.
inline SectorState polarization_product_state(int n, double m_b, double m_c) {
    if (n < 1) throw std::domain_error("polarization_product_state: n < 1");
    SectorState s;
    s.n_chargers = n;
    const double q = (1.0 - m_c) / 2.0;    // excited population per charger
    const double p0b = (1.0 + m_b) / 2.0;  // battery ground population
    for (int tj = n; tj >= (n % 2 == 0 ? 0 : 1); tj -= 2) {
        SectorBlock blk;
        blk.twice_j = tj;
        blk.multiplicity = dicke_multiplicity(n, tj);
        const int dim = tj + 1;
        Mat m = Mat::Zero(2 * dim, 2 * dim);
        for (int i = 0; i < dim; ++i) {
            // descending m: i=0 is m=j (all excited weight q^n on the top sector)
            const double up = n / 2.0 + (tj / 2.0 - i);    // N/2 + m
            const double dn = n - up;                      // N/2 - m
            const double pop = std::pow(q, up) * std::pow(1.0 - q, dn);
            m(i, i) = p0b * pop;
            m(dim + i, dim + i) = (1.0 - p0b) * pop;
        }
        blk.block = std::move(m);
        s.blocks.push_back(std::move(blk));
    }
    return s;
}

// Initial state of a charging run: battery populations (1+eps)/2, (1-eps)/2;
// each charger (1-gamma*eps)/2, (1+gamma*eps)/2 -- the chargers carry their
// thermal polarization inverted onto the excited level, ready to charge.
inline SectorState thermal_state(const SystemConfig& cfg) {
    cfg.validate();
    return polarization_product_state(cfg.n_chargers, cfg.epsilon, -cfg.gamma * cfg.epsilon);
}

// Field-aligned equilibrium: battery and chargers all polarized toward |0>.
// A pi pulse on the chargers turns this into thermal_state's populations.
inline SectorState equilibrium_state(const SystemConfig& cfg) {
    cfg.validate();
    return polarization_product_state(cfg.n_chargers, cfg.epsilon, cfg.gamma * cfg.epsilon);
}

// Collective pi rotation of the chargers, exp(-i pi Jx) per block.
inline SectorState invert_chargers(const SectorState& s) {
    SectorState out = s;
    for (auto& blk : out.blocks) {
        const auto ops = ladder_operators(blk.twice_j);
        Eigen::SelfAdjointEigenSolver<Mat> es(ops.jx);
        const Mat rot = es.eigenvectors() *
                        (complexd(0, -M_PI) * es.eigenvalues().array().cast<complexd>())
                            .exp()
                            .matrix()
                            .asDiagonal() *
                        es.eigenvectors().adjoint();
        const Mat u = kron(identity2(), rot);
        blk.block = u * blk.block * u.adjoint();
    }
    return out;
}

// 2x2 battery state, multiplicities folded in.
inline DensityMatrix battery_reduced(const SectorState& s) {
    Mat rho = Mat::Zero(2, 2);
    for (const auto& blk : s.blocks) {
        const int dim = blk.ladder_dim();
        const double w = static_cast<double>(blk.multiplicity);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                rho(a, b) += w * blk.block.block(a * dim, b * dim, dim, dim).trace();
    }
    return DensityMatrix({2}, std::move(rho));
}

// <sigma_z> of the battery (p0 - p1).
inline double battery_polarization(const SectorState& s) {
    const auto rb = battery_reduced(s);
    return (rb.elements(0, 0) - rb.elements(1, 1)).real();
}

// Per-spin charger <sigma_z>.  Jz counts excitations, so the ground-referenced
// polarization is -2<Jz>/N.
inline double charger_polarization(const SectorState& s) {
    double jz_total = 0;
    for (const auto& blk : s.blocks) {
        const int dim = blk.ladder_dim();
        const double j = blk.twice_j / 2.0;
        const double w = static_cast<double>(blk.multiplicity);
        for (int a = 0; a < 2; ++a)
            for (int i = 0; i < dim; ++i)
                jz_total += w * (j - i) * blk.block(a * dim + i, a * dim + i).real();
    }
    return -2.0 * jz_total / s.n_chargers;
}

// Expectation of battery-excitation + charger-excitation count minus (N+1)/2;
// conserved by the flip-flop interaction.
inline double total_z_expectation(const SectorState& s) {
    double acc = 0;
    for (const auto& blk : s.blocks) {
        const int dim = blk.ladder_dim();
        const double j = blk.twice_j / 2.0;
        const double w = static_cast<double>(blk.multiplicity);
        for (int a = 0; a < 2; ++a)
            for (int i = 0; i < dim; ++i)
                acc += w * ((a - 0.5) + (j - i)) * blk.block(a * dim + i, a * dim + i).real();
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Dicke basis: isometries from each |j, copy| ladder into the 2^n product
// space, built by coupling one spin-1/2 at a time with Clebsch-Gordan
// coefficients.  Charger i occupies bit (n-1-i); the appended spin is the
// least significant bit.  "up" is the excited level |1>.
// ---------------------------------------------------------------------------

struct DickeBasis {
    int n = 0;
    // ladders[k] = all multiplicity copies with twice_j = order[k], each an
    // isometry of shape (2^n) x (twice_j + 1), columns ordered by descending m
    std::vector<int> twice_js;                              // descending
    std::vector<std::vector<Eigen::MatrixXd>> ladders;      // per twice_j
};

inline DickeBasis build_dicke_basis(int n) {
    if (n < 1) throw std::domain_error("build_dicke_basis: n < 1");
    if (n > 12) throw DimensionError("build_dicke_basis: full-space expansion capped at n = 12");
    struct Ladder {
        int twice_j;
        Eigen::MatrixXd v;  // (2^k) x (twice_j+1)
    };
    std::vector<Ladder> cur;
    {
        Eigen::MatrixXd v(2, 2);
        // descending m: col 0 = m=+1/2 = |1>, col 1 = m=-1/2 = |0>
        v << 0, 1, 1, 0;
        cur.push_back({1, std::move(v)});
    }
    for (int k = 1; k < n; ++k) {
        const long rows = 1L << (k + 1);
        std::vector<Ladder> next;
        for (const auto& lad : cur) {
            const int tj = lad.twice_j;
            const double j = tj / 2.0;
            const int old_dim = tj + 1;
            auto old_col = [&](double m) -> Eigen::VectorXd {
                // column of |j, m>, or zero when |m| > j
                const int idx = static_cast<int>(std::lround(j - m));
                if (idx < 0 || idx >= old_dim) return Eigen::VectorXd::Zero(lad.v.rows());
                return lad.v.col(idx);
            };
            auto embed = [&](const Eigen::VectorXd& base, int bit) {
                Eigen::VectorXd out = Eigen::VectorXd::Zero(rows);
                for (long r = 0; r < base.size(); ++r) out(2 * r + bit) = base(r);
                return out;
            };
            // j + 1/2 ladder
            {
                const int ntj = tj + 1;
                Eigen::MatrixXd v(rows, ntj + 1);
                for (int c = 0; c <= ntj; ++c) {
                    const double m = ntj / 2.0 - c;
                    const double a = std::sqrt((j + m + 0.5) / (2 * j + 1));
                    const double b = std::sqrt((j - m + 0.5) / (2 * j + 1));
                    v.col(c) = a * embed(old_col(m - 0.5), 1) + b * embed(old_col(m + 0.5), 0);
                }
                next.push_back({ntj, std::move(v)});
            }
            // j - 1/2 ladder
            if (tj >= 1 && tj - 1 >= 0 && tj != 0) {
                const int ntj = tj - 1;
                if (ntj >= 0) {
                    Eigen::MatrixXd v(rows, ntj + 1);
                    for (int c = 0; c <= ntj; ++c) {
                        const double m = ntj / 2.0 - c;
                        const double a = std::sqrt((j + m + 0.5) / (2 * j + 1));
                        const double b = std::sqrt((j - m + 0.5) / (2 * j + 1));
                        v.col(c) = -b * embed(old_col(m - 0.5), 1) + a * embed(old_col(m + 0.5), 0);
                    }
                    next.push_back({ntj, std::move(v)});
                }
            }
        }
        cur = std::move(next);
    }

    DickeBasis basis;
    basis.n = n;
    for (int tj = n; tj >= (n % 2 == 0 ? 0 : 1); tj -= 2) {
        basis.twice_js.push_back(tj);
        std::vector<Eigen::MatrixXd> copies;
        for (auto& lad : cur)
            if (lad.twice_j == tj) copies.push_back(std::move(lad.v));
        if (copies.size() != dicke_multiplicity(n, tj))
            throw std::logic_error("build_dicke_basis: multiplicity mismatch");
        basis.ladders.push_back(std::move(copies));
    }
    return basis;
}

// Expands a sector state to the full 2^(N+1)-dim density matrix
// (battery qubit first, then N charger qubits).  Validation path for N <= 10.
inline DensityMatrix expand_to_full(const SectorState& s, const DickeBasis& basis) {
    if (basis.n != s.n_chargers) throw std::invalid_argument("expand_to_full: basis/state mismatch");
    const long cd = 1L << s.n_chargers;
    const long full = 2 * cd;
    Mat rho = Mat::Zero(full, full);
    for (std::size_t bi = 0; bi < s.blocks.size(); ++bi) {
        const auto& blk = s.blocks[bi];
        if (basis.twice_js[bi] != blk.twice_j) throw std::logic_error("expand_to_full: block order");
        const int dim = blk.ladder_dim();
        for (const auto& v : basis.ladders[bi]) {
            // (I2 (x) V) block (I2 (x) V)^T with V real
            const Mat vc = v.cast<complexd>();
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    rho.block(a * cd, b * cd, cd, cd) +=
                        vc * blk.block.block(a * dim, b * dim, dim, dim) * vc.transpose();
                }
        }
    }
    std::vector<int> dims(s.n_chargers + 1, 2);
    return DensityMatrix(std::move(dims), std::move(rho));
}

inline DensityMatrix expand_to_full(const SectorState& s) {
    if (s.n_chargers > 10)
        throw DimensionError("expand_to_full: capped at N = 10 chargers");
    return expand_to_full(s, build_dicke_basis(s.n_chargers));
}

}  // namespace starqb
