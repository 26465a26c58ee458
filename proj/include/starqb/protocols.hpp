#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "starqb/dynamics.hpp"
#include "starqb/metrics.hpp"
#include "starqb/sector_state.hpp"
#include "starqb/trace.hpp"

// Experiment orchestration: charging sweeps, iterative asymptotic charging
// with T1 relaxation, the charger-battery-load circuit, and curve fitting.

namespace starqb {

inline double theta_bar(int n) { return M_PI / std::sqrt(static_cast<double>(n)); }

// Uniform theta grid covering one period [0, 2 pi / sqrt(N)].
inline std::vector<double> make_theta_grid(int n, int points_per_period = 200) {
    if (points_per_period < 3) throw std::invalid_argument("make_theta_grid: too few points");
    const double span = 2 * M_PI / std::sqrt(static_cast<double>(n));
    std::vector<double> g(points_per_period);
    for (int i = 0; i < points_per_period; ++i)
        g[i] = span * i / (points_per_period - 1);
    return g;
}

// Collective charging: field-aligned equilibrium -> pi inversion of the
// chargers -> flip-flop evolution per theta -> PFG dephase -> battery readout.
inline ChargingTrace charge_sweep(const SystemConfig& cfg, const std::vector<double>& theta_grid,
                                  bool with_ergotropy = false) {
    cfg.validate();
    if (cfg.epsilon == 0) throw ConfigError("charge_sweep: epsilon must be nonzero");
    ChargingTrace tr;
    tr.config = cfg;
    tr.theta = theta_grid;
    const SectorState init = invert_chargers(equilibrium_state(cfg));
    const SectorEvolver ev(cfg.n_chargers);
    tr.e_b.reserve(theta_grid.size());
    for (const double th : theta_grid) {
        const SectorState evolved = dephase(ev.evolve(init, th));
        const DensityMatrix rb = battery_reduced(evolved);
        const BatteryReading reading = battery_reading(rb, cfg.epsilon, th);
        tr.e_b.push_back(reading.e_b);
        if (with_ergotropy) {
            tr.ergotropy_ratio.push_back(reading.ergotropy_ratio);
            tr.ergotropy_scaled.push_back(ergotropy(rb, battery_hamiltonian()));
        }
    }
    if (with_ergotropy) {
        // Plot normalization: raw ergotropy over |eps| * max e_B of this trace.
        const double e_max = *std::max_element(tr.e_b.begin(), tr.e_b.end());
        if (e_max > 0)
            for (auto& v : tr.ergotropy_scaled) v /= std::abs(cfg.epsilon) * e_max;
    }
    return tr;
}

// Parallel-charging reference: the same dynamics with a single charger.
inline ChargingTrace parallel_baseline(const SystemConfig& cfg,
                                       const std::vector<double>& theta_grid) {
    SystemConfig one = cfg;
    one.n_chargers = 1;
    return charge_sweep(one, theta_grid);
}

// T1 recovery of a polarization toward its equilibrium over dt seconds.
inline double relax_polarization(double m, double m_eq, double dt, double t1) {
    if (t1 <= 0) throw std::domain_error("relax_polarization: t1 must be > 0");
    if (dt < 0) throw std::domain_error("relax_polarization: dt must be >= 0");
    return m_eq + (m - m_eq) * std::exp(-dt / t1);
}

struct AsymptoticRun {
    double delta = 0;
    int iterations = 0;
    std::vector<double> e_b_per_iteration;
    FitResult fit;
    bool t1_order_warning = false;  // set when T1^B <= T1^C
    bool monotone = true;           // non-decreasing trajectory diagnostic
};

enum class FitModel { saturation, decay };

FitResult fit_exponential(std::span<const double> x, std::span<const double> y, FitModel model,
                          bool with_offset);

// Iterative asymptotic charging.  Each iteration: T1 relaxation of battery and
// per-charger polarizations over the delay, pi pulse on the chargers, charging
// unitary at theta_bar, PFG.  The dephased state is rebuilt as a product
// diagonal state of matched polarizations between iterations.
inline AsymptoticRun asymptotic_charge(const SystemConfig& cfg, double delta, int iterations) {
    cfg.validate();
    if (!cfg.t1_battery_s || !cfg.t1_charger_s)
        throw ConfigError("asymptotic_charge: t1_battery_s and t1_charger_s required");
    if (delta < 0) throw std::domain_error("asymptotic_charge: delta must be >= 0");
    if (iterations < 1) throw std::domain_error("asymptotic_charge: iterations must be >= 1");
    if (cfg.epsilon == 0) throw ConfigError("asymptotic_charge: epsilon must be nonzero");

    AsymptoticRun run;
    run.delta = delta;
    run.iterations = iterations;
    run.t1_order_warning = *cfg.t1_battery_s <= *cfg.t1_charger_s;

    const double t1b = *cfg.t1_battery_s;
    const double t1c = *cfg.t1_charger_s;
    const double eq_b = cfg.epsilon;
    const double eq_c = cfg.gamma * cfg.epsilon;
    const double th = theta_bar(cfg.n_chargers);
    const SectorEvolver ev(cfg.n_chargers);

    double m_b = eq_b, m_c = eq_c;  // start from field-aligned equilibrium
    run.e_b_per_iteration.reserve(iterations);
    for (int it = 0; it < iterations; ++it) {
        m_b = relax_polarization(m_b, eq_b, delta, t1b);
        m_c = relax_polarization(m_c, eq_c, delta, t1c);
        m_c = -m_c;  // pi pulse on the chargers
        const SectorState state =
            dephase(ev.evolve(polarization_product_state(cfg.n_chargers, m_b, m_c), th));
        m_b = battery_polarization(state);
        m_c = charger_polarization(state);
        run.e_b_per_iteration.push_back((1.0 - m_b / cfg.epsilon) / 2.0);
    }
    for (std::size_t i = 1; i < run.e_b_per_iteration.size(); ++i)
        if (run.e_b_per_iteration[i] + 1e-12 < run.e_b_per_iteration[i - 1]) run.monotone = false;

    std::vector<double> xs(iterations);
    for (int i = 0; i < iterations; ++i) xs[i] = (i + 1) * delta;
    run.fit = fit_exponential(xs, run.e_b_per_iteration, FitModel::saturation, false);
    return run;
}

struct QcblTrace {
    std::vector<double> jbl_tau_prime;
    std::vector<double> e_b;
    std::vector<double> e_l;
    double tau_s = 0;
    SystemConfig config;
};

// Charger-battery-load circuit: charge the battery at theta_bar, decouple the
// chargers, store for tau_s (T1 on the battery), prepare the load maximally
// mixed, run the exact two-spin flip-flop over the discharge grid, dephase,
// and read both energies (normalized by the battery's epsilon).
inline QcblTrace qcbl_run(const SystemConfig& cfg, const std::vector<double>& jbl_tau_prime_grid,
                          double tau_s) {
    cfg.validate();
    if (!cfg.coupling_j_bl_hz) throw ConfigError("qcbl_run: coupling_j_bl_hz required");
    if (tau_s < 0) throw std::domain_error("qcbl_run: tau_s must be >= 0");
    if (tau_s > 0 && !cfg.t1_battery_s)
        throw ConfigError("qcbl_run: t1_battery_s required for nonzero storage");
    if (cfg.epsilon == 0) throw ConfigError("qcbl_run: epsilon must be nonzero");

    QcblTrace out;
    out.config = cfg;
    out.tau_s = tau_s;
    out.jbl_tau_prime = jbl_tau_prime_grid;

    // charge and read the battery polarization
    const SectorEvolver ev(cfg.n_chargers);
    const SectorState charged =
        dephase(ev.evolve(invert_chargers(equilibrium_state(cfg)), theta_bar(cfg.n_chargers)));
    double m_b = battery_polarization(charged);
    if (tau_s > 0) m_b = relax_polarization(m_b, cfg.epsilon, tau_s, *cfg.t1_battery_s);

    const DensityMatrix battery = polarized_qubit(m_b);
    const DensityMatrix load = polarized_qubit(0.0);  // pi/2 + gradient: maximally mixed
    const DensityMatrix joint = tensor(battery, load);
    const FullEvolver two_spin(1);

    out.e_b.reserve(jbl_tau_prime_grid.size());
    out.e_l.reserve(jbl_tau_prime_grid.size());
    for (const double jt : jbl_tau_prime_grid) {
        const double theta_prime = 2 * M_PI * jt;
        const DensityMatrix evolved = dephase(two_spin.evolve(joint, theta_prime));
        const double mb = (evolved.elements(0, 0) + evolved.elements(1, 1) -
                           evolved.elements(2, 2) - evolved.elements(3, 3))
                              .real();
        const double ml = (evolved.elements(0, 0) - evolved.elements(1, 1) +
                           evolved.elements(2, 2) - evolved.elements(3, 3))
                              .real();
        out.e_b.push_back((1.0 - mb / cfg.epsilon) / 2.0);
        out.e_l.push_back((1.0 - ml / cfg.epsilon) / 2.0);
    }
    return out;
}

struct QcblStorageSweep {
    std::vector<double> tau_s;
    std::vector<double> e_l;  // at J_BL tau' = 0.5
    FitResult fit;            // decay with offset; time constant estimates T_s
};

inline QcblStorageSweep qcbl_storage_sweep(const SystemConfig& cfg,
                                           const std::vector<double>& tau_s_grid) {
    if (!cfg.t1_battery_s) throw ConfigError("qcbl_storage_sweep: t1_battery_s required");
    QcblStorageSweep sweep;
    sweep.tau_s = tau_s_grid;
    sweep.e_l.reserve(tau_s_grid.size());
    for (const double ts : tau_s_grid) {
        const QcblTrace tr = qcbl_run(cfg, {0.5}, ts);
        sweep.e_l.push_back(tr.e_l.front());
    }
    sweep.fit = fit_exponential(sweep.tau_s, sweep.e_l, FitModel::decay, true);
    return sweep;
}

// ---------------------------------------------------------------------------
// Exponential least squares: a(1 - e^{-x/T}) or a e^{-x/T} + c, initialized
// from log-linearization and refined by Levenberg-Marquardt.  Deterministic.
// ---------------------------------------------------------------------------

inline FitResult fit_exponential(std::span<const double> x, std::span<const double> y,
                                 FitModel model, bool with_offset) {
    FitResult res;
    const std::size_t n = x.size();
    if (n != y.size() || n < 4) return res;
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) return res;

    const double y_min = *std::min_element(y.begin(), y.end());
    const double y_max = *std::max_element(y.begin(), y.end());
    const double y_spread = y_max - y_min;
    if (y_spread <= 1e-14 * std::max(1.0, std::abs(y_max))) return res;  // degenerate data
    const double x_max = *std::max_element(x.begin(), x.end());

    const bool offset = (model == FitModel::decay) && with_offset;

    // --- log-linearization for the starting point
    double a0, t0, c0 = 0;
    if (model == FitModel::saturation) {
        a0 = y_max + 0.05 * y_spread;
    } else {
        c0 = offset ? y_min - 0.01 * y_spread : 0.0;
        a0 = y[0] - c0;
    }
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double arg = (model == FitModel::saturation) ? 1.0 - y[i] / a0 : (y[i] - c0) / a0;
            if (arg <= 1e-12) continue;
            const double s = std::log(arg);
            sx += x[i];
            sy += s;
            sxx += x[i] * x[i];
            sxy += x[i] * s;
            ++cnt;
        }
        const double denom = cnt * sxx - sx * sx;
        double slope = (cnt >= 2 && denom != 0) ? (cnt * sxy - sx * sy) / denom : 0.0;
        t0 = slope < 0 ? -1.0 / slope : x_max / 3.0;
        if (!(t0 > 0) || !std::isfinite(t0)) t0 = x_max / 3.0;
    }
    if (model == FitModel::saturation) a0 = y_max;  // amplitude closer to the plateau

    // --- Levenberg-Marquardt
    const int np = offset ? 3 : 2;
    Eigen::VectorXd p(np);
    p(0) = a0;
    p(1) = t0;
    if (offset) p(2) = c0;

    auto eval = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        const double a = q(0), t = q(1), c = offset ? q(2) : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(-x[i] / t);
            double f;
            if (model == FitModel::saturation) {
                f = a * (1 - e);
                jac(i, 0) = 1 - e;
                jac(i, 1) = -a * e * x[i] / (t * t);
            } else {
                f = a * e + c;
                jac(i, 0) = e;
                jac(i, 1) = a * e * x[i] / (t * t);
                if (offset) jac(i, 2) = 1;
            }
            r(i) = f - y[i];
        }
    };

    Eigen::VectorXd r(n);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, np);
    eval(p, r, jac);
    double cost = r.squaredNorm();
    double lambda = 1e-6;
    bool step_converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        Eigen::MatrixXd m = jtj;
        for (int d = 0; d < np; ++d) m(d, d) += lambda * std::max(jtj(d, d), 1e-30);
        const Eigen::VectorXd step = m.ldlt().solve(-g);
        if (!step.allFinite()) break;
        const Eigen::VectorXd p_try = p + step;
        if (!(p_try(1) > 0)) {
            lambda *= 10;
            if (lambda > 1e12) break;
            continue;
        }
        Eigen::VectorXd r_try(n);
        eval(p_try, r_try, jac);
        const double cost_try = r_try.squaredNorm();
        if (cost_try <= cost) {
            const double rel = step.norm() / std::max(p.norm(), 1e-30);
            p = p_try;
            r = r_try;
            cost = cost_try;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-13) {
                step_converged = true;
                break;
            }
        } else {
            lambda *= 10;
            if (lambda > 1e12) break;
        }
        eval(p, r, jac);
    }

    res.amplitude = p(0);
    res.time_constant = p(1);
    res.offset = offset ? p(2) : 0.0;
    res.residual_rms = std::sqrt(cost / n);
    res.converged = std::isfinite(cost) && p(1) > 0 &&
                    (step_converged || res.residual_rms <= 1e-8 * std::max(1.0, std::abs(p(0))));
    return res;
}

}  // namespace starqb
