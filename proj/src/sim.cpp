#include "lfc/sim.hpp"

#include "lfc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lfc::sim {

using model::kInputs;
using model::kOutputs;
using model::kStates;

void DisturbanceSchedule::validate(int n_areas) const {
    double prev = 0.0;
    for (const auto& ev : events) {
        if (!(ev.time >= 0.0) || !std::isfinite(ev.time))
            throw ParameterError("schedule: event times must be non-negative");
        if (ev.time < prev)
            throw ParameterError("schedule: event times must be sorted");
        if (ev.area < 0 || ev.area >= n_areas)
            throw ParameterError("schedule: event area index outside system");
        if (!std::isfinite(ev.step))
            throw ParameterError("schedule: event step must be finite");
        prev = ev.time;
    }
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || dt > 0.01)
        throw ParameterError("simulation: dt must be in (0, 0.01] s");
    if (!(t_end > 0.0))
        throw ParameterError("simulation: t_end must be positive");
    if (record_stride < 1)
        throw ParameterError("simulation: record stride must be >= 1");
}

namespace {

struct Loop {
    const model::CompositeSystem& sys;
    const synthesis::GainSet& gains;
    Mat Aplant; // A + dA

    // dstate = f([x; z], d); u and xhat are reported through out-params.
    Vec deriv(const Vec& state, const Vec& dvec, Vec& u_out, Vec& xhat_out) const {
        const int n = sys.n();
        const auto x = state.head(n);
        const auto z = state.tail(n);
        const Vec y = sys.C * x;

        Vec u(sys.m());
        Vec xhat(n);
        for (int i = 0; i < sys.N; ++i) {
            const auto& g = gains.areas[i];
            const Vec yi  = y.segment(kOutputs * i, kOutputs);
            const Vec xh  = z.segment(kStates * i, kStates) + g.H * yi;
            xhat.segment(kStates * i, kStates) = xh;
            u(i) = -(g.K * xh)(0);
        }

        Vec ds(2 * n);
        ds.head(n) = Aplant * x + sys.B * u + sys.F * dvec;
        for (int i = 0; i < sys.N; ++i) {
            const auto& g = gains.areas[i];
            ds.segment(n + kStates * i, kStates) =
                g.Phi * z.segment(kStates * i, kStates) + g.G.col(0) * u(i)
                + g.L * y.segment(kOutputs * i, kOutputs);
        }
        u_out    = u;
        xhat_out = xhat;
        return ds;
    }
};

} // namespace

Trajectory simulate(const model::CompositeSystem& sys, const synthesis::GainSet& gains,
                    const DisturbanceSchedule& sched, const SimConfig& cfg) {
    if (gains.n_areas() != sys.N)
        throw DimensionError("simulate: gain set does not match the system");
    cfg.validate();
    sched.validate(sys.N);

    const int n = sys.n();
    const int total_steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    if (total_steps < 1)
        throw ParameterError("simulate: horizon shorter than one step");

    Trajectory traj;
    traj.n_areas = sys.N;

    // Snap events onto the step grid so every jump lands on a step boundary.
    std::vector<std::pair<int, DisturbanceEvent>> events; // (step index, event)
    for (const auto& ev : sched.events) {
        const double exact = ev.time / cfg.dt;
        const int k        = static_cast<int>(std::llround(exact));
        if (std::abs(exact - k) > 1e-9)
            traj.warnings.push_back("event at t=" + std::to_string(ev.time)
                                    + " s snapped to the step grid at t="
                                    + std::to_string(k * cfg.dt) + " s");
        if (k > total_steps)
            traj.warnings.push_back("event at t=" + std::to_string(ev.time)
                                    + " s lies beyond the horizon and never fires");
        events.emplace_back(k, ev);
    }

    Loop loop{sys, gains, Mat(sys.A + sys.dA)};

    Vec state = Vec::Zero(2 * n);
    if (cfg.x0.size() > 0) {
        if (cfg.x0.size() != n)
            throw DimensionError("simulate: x0 length mismatch");
        state.head(n) = cfg.x0;
    }
    if (cfg.z0.size() > 0) {
        if (cfg.z0.size() != n)
            throw DimensionError("simulate: z0 length mismatch");
        state.tail(n) = cfg.z0;
    }

    Vec dvec = Vec::Zero(sys.q());

    const int n_samples = total_steps / cfg.record_stride + 1;
    traj.time.resize(n_samples);
    traj.x.resize(n_samples, n);
    traj.z.resize(n_samples, n);
    traj.xhat.resize(n_samples, n);
    traj.e.resize(n_samples, n);
    traj.u.resize(n_samples, sys.m());
    traj.d.resize(n_samples, sys.q());

    Vec u_now(sys.m()), xhat_now(n);
    std::size_t next_event = 0;
    int sample              = 0;

    auto record = [&](int step) {
        // Derivative evaluation at the sample point refreshes u and xhat.
        (void)loop.deriv(state, dvec, u_now, xhat_now);
        traj.time(sample)  = step * cfg.dt;
        traj.x.row(sample) = state.head(n);
        traj.z.row(sample) = state.tail(n);
        traj.xhat.row(sample) = xhat_now;
        traj.e.row(sample)    = state.head(n) - xhat_now;
        traj.u.row(sample)    = u_now;
        traj.d.row(sample)    = dvec;
        ++sample;
        if (!state.allFinite())
            throw DivergenceError("simulate: state diverged at t="
                                  + std::to_string(step * cfg.dt) + " s",
                                  step * cfg.dt);
    };

    Vec k1, k2, k3, k4;
    Vec utmp(sys.m()), xtmp(n);
    for (int step = 0; step <= total_steps; ++step) {
        while (next_event < events.size() && events[next_event].first <= step) {
            dvec(events[next_event].second.area) += events[next_event].second.step;
            ++next_event;
        }
        if (step % cfg.record_stride == 0)
            record(step);
        if (step == total_steps)
            break;

        const double h = cfg.dt;
        k1 = loop.deriv(state, dvec, utmp, xtmp);
        k2 = loop.deriv(state + 0.5 * h * k1, dvec, utmp, xtmp);
        k3 = loop.deriv(state + 0.5 * h * k2, dvec, utmp, xtmp);
        k4 = loop.deriv(state + h * k3, dvec, utmp, xtmp);
        state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return traj;
}

namespace {

SignalMetrics signal_metrics(const Vec& time, const Vec& s, double band) {
    SignalMetrics m;
    for (int k = 0; k < s.size(); ++k) {
        const double a = std::abs(s(k));
        m.peak_abs = std::max(m.peak_abs, a);
        if (a > band)
            m.settle_time = time(k);
        if (k > 0)
            m.ise += 0.5 * (s(k) * s(k) + s(k - 1) * s(k - 1)) * (time(k) - time(k - 1));
    }
    return m;
}

} // namespace

Metrics metrics(const Trajectory& t, double band) {
    Metrics m;
    m.band = band;
    for (int i = 0; i < t.n_areas; ++i) {
        const Vec df    = t.x.col(t.state_col(i, 0));
        const Vec dptie = t.x.col(t.state_col(i, 3));
        m.df.push_back(signal_metrics(t.time, df, band));
        m.dptie.push_back(signal_metrics(t.time, dptie, band));
        m.total_ise_df += m.df.back().ise;
        m.total_ise_dptie += m.dptie.back().ise;
    }
    return m;
}

bool regulation_ok(const Trajectory& t, const DisturbanceSchedule& sched, double band) {
    if (t.samples() == 0)
        return false;

    // Checkpoints: the last recorded sample strictly before each event after
    // the first, plus the final sample.
    std::vector<int> checkpoints;
    for (std::size_t k = 1; k < sched.events.size(); ++k) {
        const double te = sched.events[k].time;
        int idx = -1;
        for (int s = 0; s < t.samples(); ++s) {
            if (t.time(s) < te - 1e-12)
                idx = s;
            else
                break;
        }
        if (idx > 0)
            checkpoints.push_back(idx);
    }
    checkpoints.push_back(t.samples() - 1);

    for (int idx : checkpoints) {
        for (int i = 0; i < t.n_areas; ++i) {
            if (std::abs(t.x(idx, t.state_col(i, 0))) >= band)
                return false;
            if (std::abs(t.x(idx, t.state_col(i, 3))) >= band)
                return false;
        }
    }
    return true;
}

} // namespace lfc::sim
