#pragma once

#include <cstdint>
#include <vector>

#include "flowcast/timeseries.hpp"

namespace flowcast {

// Control parameters of the Lorenz convection model. Defaults are the
// classical chaotic setting.
struct SystemParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
};

struct State3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

bool finite(const State3& s) noexcept;

// Piecewise-constant parameter timeline: the segment whose start_step is the
// last one <= s governs step s. Switches are sharp, no smoothing.
struct ScheduleSegment {
    long start_step = 0;
    SystemParams params;
};

struct ParameterSchedule {
    std::vector<ScheduleSegment> segments;

    static ParameterSchedule constant(const SystemParams& p) { return {{{0, p}}}; }

    const SystemParams& params_at(long step) const;
    // Index of the segment governing `step`, for regime labelling.
    std::size_t segment_at(long step) const;
    void validate() const;
};

struct Trajectory {
    double dt = 0.01;
    std::vector<State3> states;
    ParameterSchedule schedule;

    std::size_t size() const noexcept { return states.size(); }
};

enum class IntegrationMethod { rk4, euler };

// Right-hand side of the Lorenz equations:
//   dx/dt = sigma (y - x)
//   dy/dt = x (rho - z) - y
//   dz/dt = x y - beta z
State3 lorenz_deriv(const State3& s, const SystemParams& p);

// Fixed-step integration of the Lorenz system under a parameter schedule.
// Returns n_steps + 1 states starting at x0. Throws DivergenceError naming
// the step if a state goes non-finite.
Trajectory integrate(const ParameterSchedule& schedule, const State3& x0, double dt,
                     long n_steps, IntegrationMethod method = IntegrationMethod::rk4);

Trajectory integrate(const SystemParams& params, const State3& x0, double dt, long n_steps,
                     IntegrationMethod method = IntegrationMethod::rk4);

// A single noisy linear readout of the state: value = wx*x + wy*y + wz*z plus
// seeded Gaussian measurement noise.
struct ObservationConfig {
    double wx = 1.0;
    double wy = 0.0;
    double wz = 0.0;
    double noise_std = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

TimeSeries observe(const Trajectory& traj, const ObservationConfig& config);

} // namespace flowcast
