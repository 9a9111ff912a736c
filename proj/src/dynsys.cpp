#include "flowcast/dynsys.hpp"

#include <cmath>
#include <string>

#include "flowcast/random.hpp"

namespace flowcast {

bool finite(const State3& s) noexcept {
    return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.z);
}

const SystemParams& ParameterSchedule::params_at(long step) const {
    return segments[segment_at(step)].params;
}

std::size_t ParameterSchedule::segment_at(long step) const {
    validate();
    std::size_t active = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].start_step <= step) active = i;
    }
    return active;
}

void ParameterSchedule::validate() const {
    if (segments.empty()) throw InvalidParameterError("schedule: needs at least one segment");
    if (segments.front().start_step != 0)
        throw InvalidParameterError("schedule: first segment must start at step 0");
    for (std::size_t i = 1; i < segments.size(); ++i) {
        if (segments[i].start_step <= segments[i - 1].start_step)
            throw InvalidParameterError("schedule: start_steps must be strictly increasing");
    }
    for (const auto& seg : segments) {
        const auto& p = seg.params;
        if (!std::isfinite(p.sigma) || !std::isfinite(p.rho) || !std::isfinite(p.beta))
            throw InvalidParameterError("schedule: non-finite system parameter");
    }
}

State3 lorenz_deriv(const State3& s, const SystemParams& p) {
    if (!finite(s)) throw InvalidInputError("lorenz_deriv: non-finite state");
    if (!std::isfinite(p.sigma) || !std::isfinite(p.rho) || !std::isfinite(p.beta))
        throw InvalidInputError("lorenz_deriv: non-finite parameter");
    return {p.sigma * (s.y - s.x), s.x * (p.rho - s.z) - s.y, s.x * s.y - p.beta * s.z};
}

namespace {

State3 axpy(const State3& a, double h, const State3& d) {
    return {a.x + h * d.x, a.y + h * d.y, a.z + h * d.z};
}

State3 rk4_step(const State3& s, const SystemParams& p, double dt) {
    const State3 k1 = lorenz_deriv(s, p);
    const State3 k2 = lorenz_deriv(axpy(s, 0.5 * dt, k1), p);
    const State3 k3 = lorenz_deriv(axpy(s, 0.5 * dt, k2), p);
    const State3 k4 = lorenz_deriv(axpy(s, dt, k3), p);
    return {s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
            s.z + dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
}

State3 euler_step(const State3& s, const SystemParams& p, double dt) {
    return axpy(s, dt, lorenz_deriv(s, p));
}

} // namespace

Trajectory integrate(const ParameterSchedule& schedule, const State3& x0, double dt,
                     long n_steps, IntegrationMethod method) {
    schedule.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameterError("integrate: dt must be > 0");
    if (n_steps < 0) throw InvalidParameterError("integrate: n_steps must be >= 0");
    if (!finite(x0)) throw InvalidInputError("integrate: non-finite initial state");

    Trajectory traj;
    traj.dt = dt;
    traj.schedule = schedule;
    traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.states.push_back(x0);

    State3 s = x0;
    for (long step = 0; step < n_steps; ++step) {
        const SystemParams& p = schedule.params_at(step);
        s = (method == IntegrationMethod::rk4) ? rk4_step(s, p, dt) : euler_step(s, p, dt);
        if (!finite(s))
            throw DivergenceError(
                "integrate: trajectory diverged at step " + std::to_string(step + 1), step + 1);
        traj.states.push_back(s);
    }
    return traj;
}

Trajectory integrate(const SystemParams& params, const State3& x0, double dt, long n_steps,
                     IntegrationMethod method) {
    return integrate(ParameterSchedule::constant(params), x0, dt, n_steps, method);
}

void ObservationConfig::validate() const {
    if (!std::isfinite(wx) || !std::isfinite(wy) || !std::isfinite(wz))
        throw InvalidParameterError("observation: non-finite weight");
    if (wx == 0.0 && wy == 0.0 && wz == 0.0)
        throw InvalidParameterError("observation: weights must not all be zero");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
        throw InvalidParameterError("observation: noise_std must be >= 0");
}

TimeSeries observe(const Trajectory& traj, const ObservationConfig& config) {
    config.validate();
    if (traj.states.empty()) throw InvalidInputError("observe: empty trajectory");

    TimeSeries series;
    series.dt = traj.dt;
    series.values.reserve(traj.states.size());
    Rng rng(config.seed);
    for (const State3& s : traj.states) {
        double v = config.wx * s.x + config.wy * s.y + config.wz * s.z;
        if (config.noise_std > 0.0) v += rng.gaussian(0.0, config.noise_std);
        series.values.push_back(v);
    }
    return series;
}

} // namespace flowcast
