#pragma once

#include "pcca/controllers.hpp"

#include <functional>

namespace pcca {

/// Simulation stopped early: agents coincide or a QP that must be feasible was not.
class SimulationAbort : public Error {
public:
    SimulationAbort(std::size_t step, double time, const std::string& what)
        : Error("simulation aborted at step " + std::to_string(step) + " (t = " + std::to_string(time) +
                " s): " + what),
          step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Exact zero-order-hold update of the double integrator.
inline AgentState step_dynamics(const AgentState& x, const Vec2& u, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    return {x.position + x.velocity * dt + 0.5 * u * dt * dt, x.velocity + u * dt};
}

struct PairIndex {
    std::size_t i = 0;
    std::size_t j = 0;
};

inline std::vector<PairIndex> all_pairs(std::size_t n) {
    std::vector<PairIndex> out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out.push_back({i, j});
    return out;
}

/// Sample-by-sample record of a run. Index order is [sample][agent] (or [sample][pair]);
/// controls[k] is held over [t_k, t_k + dt).
struct Trace {
    double dt = 0.0;
    BarrierParams barrier;
    std::vector<ControllerKind> kinds;
    std::vector<double> radii;
    std::vector<PairIndex> pairs;

    std::vector<double> times;
    std::vector<std::vector<AgentState>> states;
    std::vector<std::vector<Vec2>> controls;
    std::vector<std::vector<Vec2>> baselines;               // u0
    std::vector<std::vector<std::vector<Vec2>>> w_hat;      // [k][host][j], zero for non-PCCA hosts
    std::vector<std::vector<double>> h;                     // controller barrier, radius r
    std::vector<std::vector<double>> h_r0;                  // physical contact barrier, radius r0_i + r0_j
    std::vector<std::vector<bool>> braking;

    std::size_t samples() const { return times.size(); }
    std::size_t agents() const { return kinds.size(); }
};

inline double contact_barrier(const AgentState& a, const AgentState& b, double r0a, double r0b) {
    return (a.position - b.position).squaredNorm() - (r0a + r0b) * (r0a + r0b);
}

inline Trace run_scenario(const Scenario& s) {
    {
        std::vector<Violation> v;
        detail::check_scenario(s, false, v);  // single-agent runs are allowed here
        if (!v.empty()) throw ValidationError(std::move(v));
    }

    const std::size_t n = s.agents.size();
    const std::size_t steps = s.steps();
    const LqrGains gains = lqr_gains(s.lqr_state_weight, s.lqr_control_weight);

    Trace tr;
    tr.dt = s.dt;
    tr.barrier = s.barrier;
    tr.pairs = all_pairs(n);
    for (const auto& a : s.agents) {
        tr.kinds.push_back(a.config.controller);
        tr.radii.push_back(a.config.radius);
    }
    tr.times.reserve(steps + 1);

    std::vector<AgentState> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = s.agents[i].initial;
    if (n > 0) x[0].position.y() += s.symmetry_perturbation;

    std::vector<PccaMemory> memory(n, PccaMemory(n));
    std::vector<Vec2> prev_controls(n, Vec2::Zero());
    std::vector<AgentState> prev_states = x;
    const bool centralized = n > 0 && s.agents[0].config.controller == ControllerKind::CentralizedMember;

    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * s.dt;

        std::vector<Vec2> u0(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& cfg = s.agents[i].config;
            u0[i] = cfg.controller == ControllerKind::Pursuer
                        ? pursuer_controller(x[i], x[*s.pursuit_target(i)].position, gains)
                        : lqr_baseline(x[i], cfg.destination, gains);
        }

        std::vector<Vec2> observed(n, Vec2::Zero());
        if (k > 0) {
            for (std::size_t j = 0; j < n; ++j)
                observed[j] = s.accel_mode == AccelObservation::Exact
                                  ? prev_controls[j]
                                  : Vec2((x[j].velocity - prev_states[j].velocity) / s.dt);
        }

        std::vector<Vec2> u(n, Vec2::Zero());
        std::vector<bool> braking(n, false);
        std::vector<std::vector<Vec2>> w(n, std::vector<Vec2>(n, Vec2::Zero()));
        try {
            if (centralized) {
                const auto all = centralized_step(x, u0, s.barrier);
                if (!all) throw SimulationAbort(k, t, "centralized QP infeasible");
                u = *all;
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& cfg = s.agents[i].config;
                    switch (cfg.controller) {
                        case ControllerKind::Decentralized: {
                            const auto r = decentralized_step(i, x, u0[i], cfg.chi, s.barrier, s.brake_decel);
                            u[i] = r.accel;
                            braking[i] = r.braking;
                            break;
                        }
                        case ControllerKind::Pcca: {
                            auto r = pcca_step(i, x, u0[i], memory[i], observed, s.barrier);
                            if (!r) throw SimulationAbort(k, t, "PCCA QP infeasible for agent" + std::to_string(i + 1));
                            u[i] = r->accel;
                            w[i] = r->memory.w_hat;
                            memory[i] = std::move(r->memory);
                            break;
                        }
                        case ControllerKind::NonInteracting:
                        case ControllerKind::Pursuer:
                        case ControllerKind::CentralizedMember:
                            u[i] = u0[i];
                            break;
                    }
                }
            }
        } catch (const DegenerateGeometry& e) {
            throw SimulationAbort(k, t, e.what());
        } catch (const NumericalDegeneracy& e) {
            throw SimulationAbort(k, t, e.what());
        }

        tr.times.push_back(t);
        tr.states.push_back(x);
        tr.controls.push_back(u);
        tr.baselines.push_back(u0);
        tr.w_hat.push_back(std::move(w));
        tr.braking.push_back(braking);
        std::vector<double> hk, hr0k;
        for (const auto& pr : tr.pairs) {
            hk.push_back((x[pr.i].position - x[pr.j].position).squaredNorm() - s.barrier.r * s.barrier.r);
            hr0k.push_back(contact_barrier(x[pr.i], x[pr.j], tr.radii[pr.i], tr.radii[pr.j]));
        }
        tr.h.push_back(std::move(hk));
        tr.h_r0.push_back(std::move(hr0k));

        if (k == steps) break;
        prev_states = x;
        prev_controls = u;
        for (std::size_t i = 0; i < n; ++i) x[i] = step_dynamics(x[i], u[i], s.dt);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct PairMetrics {
    PairIndex pair;
    double min_h = 0.0;
    std::size_t min_h_step = 0;
    double min_h_r0 = 0.0;
    double min_h_r0_sum_sq = 0.0;  // xi'xi - (r0_i^2 + r0_j^2), radii combined in quadrature
    double max_constraint_violation = 0.0;  // max(0, -(a + b(u_i - u_j)))
    bool left_reduced_set = false;
    std::optional<std::size_t> first_exit_step;

    // Only when both agents run PCCA.
    std::optional<double> estimate_identity_residual;  // max_{k>=2} |(w_ji - w_ij)(k) - (u0_i - u0_j)(k-1)|
    std::optional<double> residual_bound_slack;      // min_{k>=1} (a + b(u_i - u_j) + 2 beta M dt)
    double beta = 0.0;                        // max |b|
    double baseline_rate = 0.0;               // M = max |u0(k) - u0(k-1)| / dt
};

struct MetricsReport {
    std::vector<PairMetrics> pairs;
    double max_baseline_norm = 0.0;
    std::size_t braking_samples = 0;
};

inline MetricsReport metrics(const Trace& t, const BarrierParams& p) {
    MetricsReport rep;
    const std::size_t K = t.samples();
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t i = 0; i < t.agents(); ++i) {
            rep.max_baseline_norm = std::max(rep.max_baseline_norm, t.baselines[k][i].norm());
            if (t.braking[k][i]) ++rep.braking_samples;
        }
    }

    for (std::size_t q = 0; q < t.pairs.size(); ++q) {
        const auto [i, j] = t.pairs[q];
        PairMetrics m;
        m.pair = t.pairs[q];
        m.min_h = std::numeric_limits<double>::infinity();
        m.min_h_r0 = std::numeric_limits<double>::infinity();
        m.min_h_r0_sum_sq = std::numeric_limits<double>::infinity();
        const double sum_sq_r2 = t.radii[i] * t.radii[i] + t.radii[j] * t.radii[j];
        const bool both_pcca = t.kinds[i] == ControllerKind::Pcca && t.kinds[j] == ControllerKind::Pcca;

        std::vector<double> residual(K);
        for (std::size_t k = 0; k < K; ++k) {
            const auto& xi = t.states[k][i];
            const auto& xj = t.states[k][j];
            const double h = (xi.position - xj.position).squaredNorm() - p.r * p.r;
            if (h < m.min_h) {
                m.min_h = h;
                m.min_h_step = k;
            }
            m.min_h_r0 = std::min(m.min_h_r0, t.h_r0[k][q]);
            m.min_h_r0_sum_sq = std::min(m.min_h_r0_sum_sq, (xi.position - xj.position).squaredNorm() - sum_sq_r2);
            const auto terms = pair_barrier(xi, xj, p);
            residual[k] = terms.a + terms.b.dot(t.controls[k][i] - t.controls[k][j]);
            m.max_constraint_violation = std::max(m.max_constraint_violation, -residual[k]);
            m.beta = std::max(m.beta, terms.b.norm());
            if (!in_reduced_admissible_set(terms, p) && !m.left_reduced_set) {
                m.left_reduced_set = true;
                m.first_exit_step = k;
            }
            if (k >= 1) {
                for (const auto a : {i, j})
                    m.baseline_rate =
                        std::max(m.baseline_rate, (t.baselines[k][a] - t.baselines[k - 1][a]).norm() / t.dt);
            }
        }

        if (both_pcca) {
            double worst = 0.0;
            for (std::size_t k = 2; k < K; ++k) {
                const Vec2 dw = t.w_hat[k][j][i] - t.w_hat[k][i][j];
                const Vec2 du0 = t.baselines[k - 1][i] - t.baselines[k - 1][j];
                worst = std::max(worst, (dw - du0).norm());
            }
            m.estimate_identity_residual = worst;
            double slack = std::numeric_limits<double>::infinity();
            const double bound = 2.0 * m.beta * m.baseline_rate * t.dt;
            for (std::size_t k = 1; k < K; ++k) slack = std::min(slack, residual[k] + bound);
            m.residual_bound_slack = slack;
        }
        rep.pairs.push_back(m);
    }
    return rep;
}

/// Smallest contact barrier over the run; -inf when the run aborts.
inline double min_contact_barrier(const Scenario& s) {
    try {
        const auto tr = run_scenario(s);
        double m = std::numeric_limits<double>::infinity();
        for (const auto& row : tr.h_r0)
            for (const double v : row) m = std::min(m, v);
        return m;
    } catch (const SimulationAbort&) {
        return -std::numeric_limits<double>::infinity();
    }
}

class BracketError : public Error {
public:
    using Error::Error;
};

/// Smallest radius margin m (r = 2 r0 + m, resolution 1e-4 r0) that keeps the
/// physical contact barrier nonnegative at sample time dt.
inline double margin_required(const Scenario& base, double dt) {
    Scenario s = base;
    s.dt = dt;
    const double r0 = s.max_radius();
    auto safe = [&](double margin) {
        s.barrier.r = 2.0 * r0 + margin;
        return min_contact_barrier(s) >= 0.0;
    };
    if (safe(0.0)) return 0.0;
    double lo = 0.0, hi = r0;
    if (!safe(hi)) throw BracketError("collision even with a margin of r0");
    const double resolution = 1e-4 * r0;
    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        (safe(mid) ? hi : lo) = mid;
    }
    return hi;
}

struct SweepRow {
    double dt = 0.0;
    double margin = 0.0;
    double min_h = 0.0;    // at the scenario's own r
    double min_h_r0 = 0.0;
};

inline std::vector<SweepRow> dt_sweep(const Scenario& s, const std::vector<double>& dts) {
    std::vector<SweepRow> out;
    for (const double dt : dts) {
        SweepRow row{dt, margin_required(s, dt), 0.0, 0.0};
        Scenario at = s;
        at.dt = dt;
        row.min_h = std::numeric_limits<double>::infinity();
        row.min_h_r0 = std::numeric_limits<double>::infinity();
        Trace tr;
        try {
            tr = run_scenario(at);
        } catch (const SimulationAbort&) {
            row.min_h = row.min_h_r0 = -std::numeric_limits<double>::infinity();
        }
        for (std::size_t k = 0; k < tr.samples(); ++k) {
            for (std::size_t q = 0; q < tr.pairs.size(); ++q) {
                row.min_h = std::min(row.min_h, tr.h[k][q]);
                row.min_h_r0 = std::min(row.min_h_r0, tr.h_r0[k][q]);
            }
        }
        out.push_back(row);
    }
    return out;
}

}  // namespace pcca
