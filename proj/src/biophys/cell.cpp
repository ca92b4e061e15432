#include "biohybrid/biophys/cell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "biohybrid/errors.hpp"

namespace biohybrid::biophys {

namespace {

// x / (exp(x/a) - 1), continuous through x = 0.
double exp_ratio(double x, double a) {
    const double r = x / a;
    if (std::abs(r) < 1e-6) return a * (1.0 - 0.5 * r);
    return x / std::expm1(r);
}

struct Rates {
    double m_inf;
    double alpha_h, beta_h;
    double alpha_n, beta_n;
    double alpha_s, beta_s;
    double alpha_c, beta_c;
    double alpha_q, beta_q;
    double chi;
};

// Pinsky-Rinzel (1994) rate functions, in voltage relative to rest.
Rates rates(double u_s, double u_d, double ca) {
    Rates r{};
    const double alpha_m = 0.32 * exp_ratio(13.1 - u_s, 4.0);
    const double beta_m = 0.28 * exp_ratio(u_s - 40.1, 5.0);
    r.m_inf = alpha_m / (alpha_m + beta_m);
    r.alpha_h = 0.128 * std::exp((17.0 - u_s) / 18.0);
    r.beta_h = 4.0 / (1.0 + std::exp((40.0 - u_s) / 5.0));
    r.alpha_n = 0.016 * exp_ratio(35.1 - u_s, 5.0);
    r.beta_n = 0.25 * std::exp(0.5 - 0.025 * u_s);

    r.alpha_s = 1.6 / (1.0 + std::exp(-0.072 * (u_d - 65.0)));
    r.beta_s = 0.02 * exp_ratio(u_d - 51.1, 5.0);
    if (u_d <= 50.0) {
        r.alpha_c = std::exp((u_d - 10.0) / 11.0 - (u_d - 6.5) / 27.0) / 18.975;
        r.beta_c = 2.0 * std::exp((6.5 - u_d) / 27.0) - r.alpha_c;
    } else {
        r.alpha_c = 2.0 * std::exp((6.5 - u_d) / 27.0);
        r.beta_c = 0.0;
    }
    r.alpha_q = std::min(2e-5 * ca, 0.01);
    r.beta_q = 1e-3;
    r.chi = std::min(ca / 250.0, 1.0);
    return r;
}

constexpr double kCaInflux = 0.13;
constexpr double kCaDecay = 0.075;

double rest_reference(const NeuronParams& p) { return p.e_leak + p.kinetics_offset; }

// S/cm^2 -> mS/cm^2 so that conductance * mV is uA/cm^2.
constexpr double kMilli = 1e3;

}  // namespace

bool CellState::finite() const noexcept {
    if (!std::isfinite(v_s) || !std::isfinite(v_d) || !std::isfinite(ca)) return false;
    return std::all_of(gating.begin(), gating.end(), [](double g) { return std::isfinite(g); });
}

namespace {

ChannelCurrents currents_with(const CellState& y, const NeuronParams& p, const Rates& r) {
    ChannelCurrents c{};
    c.leak_s = kMilli * p.g_leak * (y.v_s - p.e_leak);
    c.na = kMilli * p.g_na * r.m_inf * r.m_inf * y.gating[kGateH] * (y.v_s - p.e_na);
    c.dr = kMilli * p.g_dr * y.gating[kGateN] * (y.v_s - p.e_k);
    c.leak_d = kMilli * p.g_leak * (y.v_d - p.e_leak);
    const double s = y.gating[kGateS];
    c.ca = kMilli * p.g_ca * s * s * (y.v_d - p.e_ca);
    c.ahp = kMilli * p.g_ahp * y.gating[kGateQ] * (y.v_d - p.e_k);
    c.kca = kMilli * p.g_c_kca * y.gating[kGateC] * r.chi * (y.v_d - p.e_k);
    return c;
}

}  // namespace

ChannelCurrents channel_currents(const CellState& y, const NeuronParams& p) {
    const double ref = rest_reference(p);
    return currents_with(y, p, rates(y.v_s - ref, y.v_d - ref, std::max(y.ca, 0.0)));
}

CellDerivative pr_derivatives(const CellState& y, const NeuronParams& p, double i_inject,
                              double i_syn) {
    if (!y.finite()) throw InvalidStateError("pr_derivatives: non-finite cell state");
    const double ref = rest_reference(p);
    const Rates r = rates(y.v_s - ref, y.v_d - ref, std::max(y.ca, 0.0));
    const ChannelCurrents c = currents_with(y, p, r);
    const double g_c = kMilli * p.g_couple;

    CellDerivative d{};
    d.v_s = (-c.leak_s - c.na - c.dr + g_c / p.p_soma * (y.v_d - y.v_s) + i_inject / p.p_soma) / p.c_m;
    d.v_d = (-c.leak_d - c.ca - c.ahp - c.kca + g_c / (1.0 - p.p_soma) * (y.v_s - y.v_d) -
             i_syn / (1.0 - p.p_soma)) /
            p.c_m;

    const auto& g = y.gating;
    d.gating[kGateH] = r.alpha_h * (1.0 - g[kGateH]) - r.beta_h * g[kGateH];
    d.gating[kGateN] = r.alpha_n * (1.0 - g[kGateN]) - r.beta_n * g[kGateN];
    d.gating[kGateS] = r.alpha_s * (1.0 - g[kGateS]) - r.beta_s * g[kGateS];
    d.gating[kGateC] = r.alpha_c * (1.0 - g[kGateC]) - r.beta_c * g[kGateC];
    d.gating[kGateQ] = r.alpha_q * (1.0 - g[kGateQ]) - r.beta_q * g[kGateQ];
    d.ca = -kCaInflux * c.ca - kCaDecay * y.ca;
    return d;
}

CellState steady_state_at(double v_s, double v_d, const NeuronParams& p) {
    const double ref = rest_reference(p);
    CellState y{};
    y.v_s = v_s;
    y.v_d = v_d;
    Rates r = rates(v_s - ref, v_d - ref, 0.0);
    y.gating[kGateH] = r.alpha_h / (r.alpha_h + r.beta_h);
    y.gating[kGateN] = r.alpha_n / (r.alpha_n + r.beta_n);
    y.gating[kGateS] = r.alpha_s / (r.alpha_s + r.beta_s);
    y.gating[kGateC] = r.alpha_c / (r.alpha_c + r.beta_c);
    const double s = y.gating[kGateS];
    const double i_ca = kMilli * p.g_ca * s * s * (v_d - p.e_ca);
    y.ca = std::max(0.0, -kCaInflux * i_ca / kCaDecay);
    r = rates(v_s - ref, v_d - ref, y.ca);
    y.gating[kGateQ] = r.alpha_q / (r.alpha_q + r.beta_q);
    return y;
}

CellState resting_state(const NeuronParams& p) {
    p.validate();
    // Newton on the two voltage equations with gating and calcium slaved to
    // their steady states.
    auto residual = [&](double vs, double vd) {
        const CellDerivative d = pr_derivatives(steady_state_at(vs, vd, p), p, 0.0, 0.0);
        return std::array<double, 2>{d.v_s, d.v_d};
    };
    double vs = p.e_leak;
    double vd = p.e_leak;
    constexpr double h = 1e-6;
    for (int iter = 0; iter < 100; ++iter) {
        const auto f = residual(vs, vd);
        if (std::abs(f[0]) < 1e-12 && std::abs(f[1]) < 1e-12) break;
        const auto fs = residual(vs + h, vd);
        const auto fd = residual(vs, vd + h);
        const double j00 = (fs[0] - f[0]) / h, j01 = (fd[0] - f[0]) / h;
        const double j10 = (fs[1] - f[1]) / h, j11 = (fd[1] - f[1]) / h;
        const double det = j00 * j11 - j01 * j10;
        if (det == 0.0 || !std::isfinite(det)) break;
        double dvs = (f[0] * j11 - f[1] * j01) / det;
        double dvd = (j00 * f[1] - j10 * f[0]) / det;
        const double step = std::max(std::abs(dvs), std::abs(dvd));
        if (step > 5.0) {
            dvs *= 5.0 / step;
            dvd *= 5.0 / step;
        }
        vs -= dvs;
        vd -= dvd;
    }
    const CellState rest = steady_state_at(vs, vd, p);
    const auto f = residual(vs, vd);
    if (!rest.finite() || std::abs(f[0]) > 1e-8 || std::abs(f[1]) > 1e-8) {
        throw ConfigError("resting_state: no fixed point found near e_leak = " +
                          std::to_string(p.e_leak));
    }
    return rest;
}

namespace {

CellState axpy(const CellState& y, const CellDerivative& k, double a) {
    CellState r = y;
    r.v_s += a * k.v_s;
    r.v_d += a * k.v_d;
    for (std::size_t i = 0; i < kGateCount; ++i) r.gating[i] += a * k.gating[i];
    r.ca += a * k.ca;
    return r;
}

CellDerivative driven_derivative(const CellState& y, const NeuronParams& p, double i_inject,
                                 double g_syn, double g_syn_rev) {
    // uS * mV = nA
    const double i_syn = synaptic_density(g_syn * y.v_d - g_syn_rev, p);
    return pr_derivatives(y, p, i_inject, i_syn);
}

}  // namespace

CellState integrate_step(const CellState& y, const NeuronParams& p, const StepDrive& drive,
                         double dt, Integrator scheme, int neuron_id, double t_ms) {
    if (!(dt > 0.0)) throw PreconditionError("integrate_step: dt must be > 0");
    CellState next{};
    try {
        if (scheme == Integrator::Euler) {
            const auto k1 = driven_derivative(y, p, drive.i_inject[0], drive.g_syn[0], drive.g_syn_rev[0]);
            next = axpy(y, k1, dt);
        } else {
            const auto k1 = driven_derivative(y, p, drive.i_inject[0], drive.g_syn[0], drive.g_syn_rev[0]);
            const auto k2 = driven_derivative(axpy(y, k1, 0.5 * dt), p, drive.i_inject[1],
                                              drive.g_syn[1], drive.g_syn_rev[1]);
            const auto k3 = driven_derivative(axpy(y, k2, 0.5 * dt), p, drive.i_inject[1],
                                              drive.g_syn[1], drive.g_syn_rev[1]);
            const auto k4 = driven_derivative(axpy(y, k3, dt), p, drive.i_inject[2],
                                              drive.g_syn[2], drive.g_syn_rev[2]);
            next = y;
            const double w = dt / 6.0;
            next.v_s += w * (k1.v_s + 2.0 * k2.v_s + 2.0 * k3.v_s + k4.v_s);
            next.v_d += w * (k1.v_d + 2.0 * k2.v_d + 2.0 * k3.v_d + k4.v_d);
            for (std::size_t i = 0; i < kGateCount; ++i) {
                next.gating[i] +=
                    w * (k1.gating[i] + 2.0 * k2.gating[i] + 2.0 * k3.gating[i] + k4.gating[i]);
            }
            next.ca += w * (k1.ca + 2.0 * k2.ca + 2.0 * k3.ca + k4.ca);
        }
    } catch (const InvalidStateError&) {
        next.v_s = std::numeric_limits<double>::quiet_NaN();
    }
    if (!next.finite()) {
        throw DivergenceError("integration diverged for neuron " + std::to_string(neuron_id) +
                                  " at t = " + std::to_string(t_ms) + " ms",
                              neuron_id, t_ms);
    }
    for (double& g : next.gating) g = std::clamp(g, 0.0, 1.0);
    next.ca = std::max(next.ca, 0.0);
    return next;
}

}  // namespace biohybrid::biophys
