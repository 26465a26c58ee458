#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "starqb/density_matrix.hpp"
#include "starqb/dynamics.hpp"
#include "starqb/trace.hpp"

// Battery observables: energy, polarization, ergotropy, quantum advantage.

namespace starqb {

// Dimensionless battery energy e_B = <1|rho|1> (excited population).
inline double battery_energy(const DensityMatrix& rho_b) {
    if (rho_b.total_dim() != 2) throw std::invalid_argument("battery_energy: qubit expected");
    return rho_b.elements(1, 1).real();
}

// Passive state of rho under h: populations sorted descending paired with
// energies sorted ascending.  Ties are broken by the eigensolver's stable
// ascending order; any tie-break yields the same passive energy.
inline DensityMatrix passive_state(const DensityMatrix& rho, const Hamiltonian& h) {
    if (rho.total_dim() != h.matrix.rows())
        throw std::invalid_argument("passive_state: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Mat> es_r(rho.elements);
    Eigen::SelfAdjointEigenSolver<Mat> es_h(h.matrix);
    const auto& pops = es_r.eigenvalues();   // ascending
    const auto& evec = es_h.eigenvectors();  // energies ascending
    const int d = rho.total_dim();
    Mat out = Mat::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        const double r = pops(d - 1 - k);  // descending populations
        out += r * evec.col(k) * evec.col(k).adjoint();
    }
    return DensityMatrix(rho.dims, std::move(out));
}

// Maximum unitarily extractable work, Tr(rho h) - Tr(rho_p h) >= 0.
inline double ergotropy(const DensityMatrix& rho, const Hamiltonian& h) {
    const DensityMatrix p = passive_state(rho, h);
    const double w = ((rho.elements - p.elements) * h.matrix).trace().real();
    return std::max(0.0, w);
}

// Ergotropy over (-eps' E_B) for a single-qubit battery, with eps' the signed
// eigen-polarization of the instantaneous state: 0 while passive, 2/(1-eps')
// once inverted (eps' < 0), reaching 1 for a fully inverted pure state.
inline double ergotropy_ratio(const DensityMatrix& rho_b) {
    if (rho_b.total_dim() != 2) throw std::invalid_argument("ergotropy_ratio: qubit expected");
    const Hamiltonian hb = battery_hamiltonian();
    const double w = ergotropy(rho_b, hb);
    if (w <= 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(rho_b.elements, Eigen::EigenvaluesOnly);
    const double gap = es.eigenvalues()(1) - es.eigenvalues()(0);  // = -eps' when inverted
    const double energy = (rho_b.elements * hb.matrix).trace().real();
    if (gap * energy == 0) return 0.0;
    return w / (gap * energy);
}

struct BatteryReading {
    double theta = 0;
    double e_b = 0;
    double m_b = 0;
    double ergotropy_ratio = 0;
};

// Normalized polarization m_B = <sigma_z>/eps and energy e_B = (1 - m_B)/2.
// For eps = 1 this is the raw excited population.
inline BatteryReading battery_reading(const DensityMatrix& rho_b, double epsilon, double theta) {
    if (epsilon == 0) throw std::invalid_argument("battery_reading: epsilon must be nonzero");
    BatteryReading r;
    r.theta = theta;
    r.m_b = (rho_b.elements(0, 0) - rho_b.elements(1, 1)).real() / epsilon;
    r.e_b = (1.0 - r.m_b) / 2.0;
    r.ergotropy_ratio = starqb::ergotropy_ratio(rho_b);
    return r;
}

// Three-point quadratic interpolation around the discrete argmax; requires an
// interior maximum.
inline double interpolated_argmax(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        throw AnalysisError("interpolated_argmax: need at least 3 samples");
    std::size_t i = 0;
    for (std::size_t k = 1; k < y.size(); ++k)
        if (y[k] > y[i]) i = k;
    if (i == 0 || i + 1 == y.size())
        throw AnalysisError("interpolated_argmax: no interior maximum in trace");
    const double denom = y[i + 1] - 2 * y[i] + y[i - 1];
    if (denom == 0) return x[i];
    return x[i] - 0.5 * (x[i] - x[i - 1]) * (y[i + 1] - y[i - 1]) / denom;
}

struct AdvantageReport {
    int n = 0;
    double tau_bar_1 = 0;   // seconds when J is configured, else theta units
    double tau_bar_n = 0;
    double gamma_advantage = 0;
    int cluster_size_estimate = 0;
};

// Quantum advantage Gamma = tau_bar_1 / tau_bar_N from empirical argmax times,
// plus the Gamma^2 + 1 correlated-cluster estimate.
inline AdvantageReport advantage_report(const SystemConfig& cfg, const ChargingTrace& trace_n,
                                        const ChargingTrace& trace_1) {
    AdvantageReport rep;
    rep.n = cfg.n_chargers;
    const double th_n = interpolated_argmax(trace_n.theta, trace_n.e_b);
    const double th_1 = interpolated_argmax(trace_1.theta, trace_1.e_b);
    const double to_seconds = cfg.coupling_j_hz ? 1.0 / (2 * M_PI * *cfg.coupling_j_hz) : 1.0;
    rep.tau_bar_n = th_n * to_seconds;
    rep.tau_bar_1 = th_1 * to_seconds;
    rep.gamma_advantage = th_1 / th_n;
    rep.cluster_size_estimate =
        static_cast<int>(std::lround(rep.gamma_advantage * rep.gamma_advantage + 1));
    return rep;
}

}  // namespace starqb
