#pragma once

#include "lfc/model.hpp"
#include "lfc/synthesis.hpp"

#include <string>
#include <vector>

namespace lfc::sim {

// Step load events; steps accumulate per area.
struct DisturbanceEvent {
    double time = 0.0; // s
    int area    = 0;   // 0-based
    double step = 0.0; // p.u.
};

struct DisturbanceSchedule {
    std::vector<DisturbanceEvent> events;
    void validate(int n_areas) const; // sorted, non-negative times, valid areas
};

struct SimConfig {
    double t_end = 300.0; // s
    double dt    = 1e-3;  // s, fixed-step 4th-order integration
    int record_stride = 10;
    Vec x0; // empty => zeros
    Vec z0; // empty => zeros

    void validate() const;
};

// Recorded time series. Row k of each matrix is the sample at time(k).
struct Trajectory {
    int n_areas = 0;
    Vec time;
    Mat x;    // plant states (samples x n)
    Mat z;    // observer states (samples x n)
    Mat xhat; // estimates (samples x n)
    Mat e;    // estimation errors (samples x n)
    Mat u;    // control inputs (samples x m)
    Mat d;    // applied disturbances (samples x q)
    std::vector<std::string> warnings;

    int samples() const { return static_cast<int>(time.size()); }
    // Column of plant state s (0..4) of area i.
    int state_col(int area, int s) const { return model::kStates * area + s; }
};

// Integrates the decentralized implementation: composite plant driven by
// per-area observers z_i' = Phi z_i + G u_i + L y_i, xhat_i = z_i + H y_i,
// u_i = -K xhat_i, with the load vector held piecewise constant. Events are
// snapped to the step grid (with a warning when they move).
// Throws DivergenceError with the blow-up time on non-finite states.
Trajectory simulate(const model::CompositeSystem& sys, const synthesis::GainSet& gains,
                    const DisturbanceSchedule& sched, const SimConfig& cfg);

struct SignalMetrics {
    double peak_abs = 0.0;
    double ise      = 0.0; // integral of squared signal
    double settle_time = 0.0; // last time the signal is outside the band
};

struct Metrics {
    double band = 1e-3;
    std::vector<SignalMetrics> df;    // per area
    std::vector<SignalMetrics> dptie; // per area
    double total_ise_df    = 0.0;
    double total_ise_dptie = 0.0;
};

Metrics metrics(const Trajectory& t, double band = 1e-3);

// True when every |df_i| and |dPtie_i| is inside the band at the last
// recorded sample before each event (past the first) and at the end.
bool regulation_ok(const Trajectory& t, const DisturbanceSchedule& sched, double band = 1e-3);

} // namespace lfc::sim
