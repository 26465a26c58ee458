#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "starqb/density_matrix.hpp"
#include "starqb/dynamics.hpp"
#include "starqb/protocols.hpp"
#include "starqb/sector_state.hpp"

// Correlation diagnostics: von Neumann entropy of the battery for the pure
// dynamics, and quantum discord of the battery/one-charger pair for the mixed
// dynamics.
//
// At NMR purities the two-spin state sits within ~1e-5 of the maximally mixed
// state and its discord is of order epsilon^2.  All discord algebra therefore
// runs on the deviation X = d*rho - I rather than on rho itself: entropies
// enter only through the deficit from the maximally mixed state,
//   S(rho) = ln d - G,   G = (1/d) sum_i (1 + eta_i) log1p(eta_i),
// with eta the eigenvalues of X, and the ln d terms cancel identically in the
// discord combination.  The same code path is exact for O(1) states.

namespace starqb {

// -sum lambda_i ln lambda_i in nats; 0 ln 0 := 0.
inline double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Mat> es(rho.elements, Eigen::EigenvaluesOnly);
    double s = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double l = es.eigenvalues()(i);
        if (l > 0) s -= l * std::log(l);
    }
    return s;
}

inline double von_neumann_entropy_bits(const DensityMatrix& rho) {
    return von_neumann_entropy(rho) / std::numbers::ln2;
}

// Battery (x) one-charger reduced state from a full-space register
// (battery qubit first, chargers following).
inline DensityMatrix two_spin_reduced(const DensityMatrix& state, int charger_index) {
    const int ns = static_cast<int>(state.dims.size());
    if (charger_index < 0 || charger_index + 1 >= ns)
        throw std::out_of_range("two_spin_reduced: charger index out of range");
    return reduced_state(state, {0, 1 + charger_index});
}

namespace detail {

// entropy deficit from maximally mixed: (1/d) sum (1+eta) log1p(eta)
inline double entropy_deficit(const double* etas, int d) {
    double acc = 0;
    for (int i = 0; i < d; ++i) {
        const double e = std::max(etas[i], -1.0);
        if (1.0 + e > 0) acc += (1.0 + e) * std::log1p(e);
    }
    return acc / d;
}

// eigenvalues of a Hermitian 2x2 given entries (closed form, keeps deviation
// scale intact)
inline void eig2(double a00, double a11, complexd a01, double& lo, double& hi) {
    const double tr = a00 + a11;
    const double disc = std::sqrt(std::max(0.0, (a00 - a11) * (a00 - a11) + 4 * std::norm(a01)));
    lo = (tr - disc) / 2;
    hi = (tr + disc) / 2;
}

}  // namespace detail

struct DiscordResult {
    double bits = 0;          // clamped at 0
    double raw_bits = 0;      // pre-clamp value
    bool converged = false;
    double residual_gradient = 0;
    double best_direction[3] = {0, 0, 1};
};

// Quantum discord of a two-qubit state rho = (I + delta)/4, measuring the
// second qubit (the charger) with rank-1 projectors.  The classical term is
// maximized over a Fibonacci grid of Bloch directions (>= 400 points) followed
// by a compass refinement.
inline DiscordResult quantum_discord_from_deviation(const Mat& delta, int grid_points = 600) {
    if (delta.rows() != 4 || delta.cols() != 4)
        throw std::invalid_argument("quantum_discord: 4x4 deviation expected");
    if (grid_points < 400) grid_points = 400;

    DiscordResult out;

    // joint deficit
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (delta + delta.adjoint()), Eigen::EigenvaluesOnly);
    double eta4[4];
    for (int i = 0; i < 4; ++i) eta4[i] = es.eigenvalues()(i);
    const double g_ab = detail::entropy_deficit(eta4, 4);

    // measured-side (charger) reduced deviation: trace out the battery
    Mat db = Mat::Zero(2, 2);
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) db(c, d) += delta(a * 2 + c, a * 2 + d);
    db /= 2;
    double lo, hi;
    detail::eig2(db(0, 0).real(), db(1, 1).real(), db(0, 1), lo, hi);
    const double eta2[2] = {lo, hi};
    const double g_b = detail::entropy_deficit(eta2, 2);

    // conditional-deficit objective for a measurement direction
    auto objective = [&](double nx, double ny, double nz) {
        double total = 0;
        for (int sgn = -1; sgn <= 1; sgn += 2) {
            // P = (I + sgn n.sigma)/2 acting on the charger qubit
            const complexd p00(0.5 * (1 + sgn * nz), 0);
            const complexd p11(0.5 * (1 - sgn * nz), 0);
            const complexd p01(0.5 * sgn * nx, -0.5 * sgn * ny);
            const complexd p10 = std::conj(p01);
            // M = Tr_charger[(I (x) P) delta (I (x) P)]; use P delta_block P
            // per battery index pair, then take the charger-space trace.
            Mat m = Mat::Zero(2, 2);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const complexd d00 = delta(a * 2 + 0, b * 2 + 0);
                    const complexd d01 = delta(a * 2 + 0, b * 2 + 1);
                    const complexd d10 = delta(a * 2 + 1, b * 2 + 0);
                    const complexd d11 = delta(a * 2 + 1, b * 2 + 1);
                    // tr(P D P) = tr(D P) since P is a projector
                    m(a, b) = d00 * p00 + d01 * p10 + d10 * p01 + d11 * p11;
                }
            const double t = m.trace().real();
            const double pk = (2 + t) / 4;
            if (pk <= 0) continue;
            double mu_lo, mu_hi;
            detail::eig2(m(0, 0).real(), m(1, 1).real(), m(0, 1), mu_lo, mu_hi);
            const double d_lo = (2 * mu_lo - t) / (2 + t);
            const double d_hi = (2 * mu_hi - t) / (2 + t);
            const double etas[2] = {d_lo, d_hi};
            total += pk * detail::entropy_deficit(etas, 2);
        }
        return total;
    };

    // Fibonacci sphere scan
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    double best = -1e300, bx = 0, by = 0, bz = 1;
    for (int i = 0; i < grid_points; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / grid_points;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        const double x = r * std::cos(phi), y = r * std::sin(phi);
        const double v = objective(x, y, z);
        if (v > best) {
            best = v;
            bx = x;
            by = y;
            bz = z;
        }
    }

    // compass refinement in spherical angles
    double th = std::acos(std::clamp(bz, -1.0, 1.0));
    double ph = std::atan2(by, bx);
    auto eval_angles = [&](double t, double p) {
        return objective(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
    };
    double cur = best, step = 0.2;
    for (int iter = 0; iter < 400 && step > 1e-9; ++iter) {
        bool improved = false;
        const double cand[4][2] = {{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}};
        for (const auto& c : cand) {
            const double v = eval_angles(th + c[0], ph + c[1]);
            if (v > cur) {
                cur = v;
                th += c[0];
                ph += c[1];
                improved = true;
                break;
            }
        }
        if (!improved) step *= 0.5;
    }
    out.converged = step <= 1e-6;
    {
        const double h = 1e-5;
        const double gt = (eval_angles(th + h, ph) - eval_angles(th - h, ph)) / (2 * h);
        const double gp = (eval_angles(th, ph + h) - eval_angles(th, ph - h)) / (2 * h);
        out.residual_gradient = std::hypot(gt, gp);
    }
    out.best_direction[0] = std::sin(th) * std::cos(ph);
    out.best_direction[1] = std::sin(th) * std::sin(ph);
    out.best_direction[2] = std::cos(th);

    out.raw_bits = (g_ab - g_b - cur) / std::numbers::ln2;
    out.bits = std::max(0.0, out.raw_bits);
    return out;
}

inline DiscordResult quantum_discord(const DensityMatrix& rho, int grid_points = 600) {
    if (rho.total_dim() != 4) throw std::invalid_argument("quantum_discord: two-qubit state expected");
    const Mat delta = 4.0 * rho.elements - Mat::Identity(4, 4);
    return quantum_discord_from_deviation(delta, grid_points);
}

// ---------------------------------------------------------------------------
// Fig.-6-style correlation trace at charger count N: battery entropy on the
// pure path (eps = 1), discord of the battery/one-charger pair on the mixed
// path (eps = 1e-5), both against the same theta grid.
// ---------------------------------------------------------------------------

struct CorrelationTrace {
    std::vector<double> theta;
    std::vector<double> e_b_pure;
    std::vector<double> e_b_mixed;
    std::vector<double> entropy_nats;      // battery entropy, pure path
    std::vector<double> discord_raw_bits;  // mixed path
    std::vector<double> discord_peak_normalized;
    bool discord_converged = true;
    double max_residual_gradient = 0;
};

inline CorrelationTrace correlation_trace(int n, const std::vector<double>& theta_samples,
                                          double mixed_epsilon = 1e-5, double gamma = 1.0) {
    if (n < 1) throw std::domain_error("correlation_trace: n < 1");
    if (n > 14) throw DimensionError("correlation_trace: full-space path capped at N = 14");
    if (theta_samples.empty()) throw std::invalid_argument("correlation_trace: empty theta grid");

    CorrelationTrace tr;
    tr.theta = theta_samples;

    // pure path in sector space
    {
        SystemConfig pure;
        pure.n_chargers = n;
        pure.epsilon = 1.0;
        pure.gamma = 1.0;
        const SectorState init = invert_chargers(equilibrium_state(pure));
        const SectorEvolver ev(n);
        for (const double th : theta_samples) {
            const DensityMatrix rb = battery_reduced(dephase(ev.evolve(init, th)));
            tr.e_b_pure.push_back(battery_energy(rb));
            tr.entropy_nats.push_back(von_neumann_entropy(rb));
        }
    }

    // mixed path in the full space, carrying the deviation X = 2^(N+1) rho - I
    {
        const long dim = 1L << (n + 1);
        Eigen::VectorXd x0(dim);
        const double lb0 = std::log1p(mixed_epsilon), lb1 = std::log1p(-mixed_epsilon);
        const double lc1 = std::log1p(gamma * mixed_epsilon), lc0 = std::log1p(-gamma * mixed_epsilon);
        for (long r = 0; r < dim; ++r) {
            double acc = ((r >> n) & 1) ? lb1 : lb0;
            for (int i = 0; i < n; ++i) acc += ((r >> (n - 1 - i)) & 1) ? lc1 : lc0;
            x0(r) = std::expm1(acc);
        }
        const FullEvolver ev(n);
        const long rest = n - 1;
        const double scale = 1.0 / static_cast<double>(1L << rest);
        for (const double th : theta_samples) {
            Mat x = ev.evolve_matrix(Mat(x0.cast<complexd>().asDiagonal()), th);
            // normalized battery energy from the deviation
            double sz = 0;
            for (long r = 0; r < dim; ++r) sz += (((r >> n) & 1) ? -1.0 : 1.0) * x(r, r).real();
            sz /= static_cast<double>(dim);
            tr.e_b_mixed.push_back((1.0 - sz / mixed_epsilon) / 2.0);
            // two-spin deviation: battery bit n, charger 0 bit n-1, trace rest
            Mat m4 = Mat::Zero(4, 4);
            for (int a = 0; a < 2; ++a)
                for (int c = 0; c < 2; ++c)
                    for (int b = 0; b < 2; ++b)
                        for (int d = 0; d < 2; ++d) {
                            complexd acc = 0;
                            for (long t = 0; t < (1L << rest); ++t)
                                acc += x((static_cast<long>(a) << n) | (static_cast<long>(c) << (n - 1)) | t,
                                         (static_cast<long>(b) << n) | (static_cast<long>(d) << (n - 1)) | t);
                            m4(a * 2 + c, b * 2 + d) = acc * scale;
                        }
            const DiscordResult dr = quantum_discord_from_deviation(m4);
            tr.discord_raw_bits.push_back(dr.bits);
            tr.discord_converged = tr.discord_converged && dr.converged;
            tr.max_residual_gradient = std::max(tr.max_residual_gradient, dr.residual_gradient);
        }
    }

    const double peak =
        *std::max_element(tr.discord_raw_bits.begin(), tr.discord_raw_bits.end());
    for (const double v : tr.discord_raw_bits)
        tr.discord_peak_normalized.push_back(peak > 0 ? v / peak : 0.0);
    return tr;
}

}  // namespace starqb
