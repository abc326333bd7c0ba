#include "margen/sampler.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "margen/parallel.hpp"

namespace margen {

namespace {

constexpr double kDivergenceLimit = 1e6;

bool state_ok(const Eigen::VectorXd& u) {
    for (int i = 0; i < u.size(); ++i) {
        if (!std::isfinite(u(i)) || std::abs(u(i)) > kDivergenceLimit) return false;
    }
    return true;
}

// Conditional target with reusable buffers (Gram form of the softmax).
struct ConditionalWork {
    Eigen::VectorXd gram;
    Eigen::ArrayXd dist2;
    Eigen::VectorXd w;
};

Eigen::VectorXd conditional_target_fast(const DataSupport& ds, const ScheduleCoeffs& k,
                                        const Eigen::VectorXd& u, ConditionalWork& cw) {
    const Eigen::MatrixXd& x = ds.points();
    cw.gram.noalias() = x * u;
    cw.dist2 = k.a * k.a * ds.squared_norms().array() - (2.0 * k.a) * cw.gram.array() +
               u.squaredNorm();
    const double m = cw.dist2.minCoeff();
    const double inv2b2 = 1.0 / (2.0 * k.b * k.b);
    cw.w = ((m - cw.dist2) * inv2b2).exp().matrix();
    cw.w /= cw.w.sum();
    return (k.d / k.b) * u + (k.c - k.d * k.a / k.b) * (x.transpose() * cw.w);
}

Eigen::VectorXd draw_initial_state(const DataSupport& ds, const Schedule& s,
                                   unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, ds.size() - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int k = pick(rng);
    Eigen::VectorXd eps(ds.dim());
    for (int i = 0; i < ds.dim(); ++i) eps(i) = gauss(rng);
    const ScheduleCoeffs c1 = s.eval(1.0);
    return c1.a * ds.point(k) + c1.b * eps;
}

struct VelocityContext {
    const DataSupport& ds;
    const Schedule& s;
    const ScheduleGains gains;
    const FieldEvaluator* eval = nullptr;  // autonomous mode
    FieldEvaluator::Workspace* ws = nullptr;
    ConditionalWork* cw = nullptr;  // oracle mode
    VelocityMode mode;

    Eigen::VectorXd operator()(const Eigen::VectorXd& u, double t) const {
        double mu, nu;
        gains.sampler_gains(t, mu, nu);
        Eigen::VectorXd f = mode == VelocityMode::oracle
                                ? conditional_target_fast(ds, s.eval(t), u, *cw)
                                : eval->autonomous_field(u, *ws);
        return mu * u + nu * f;
    }
};

Trajectory run_integration(const DataSupport& ds, const Schedule& s,
                           std::optional<Eigen::VectorXd> u0, int n_steps, VelocityMode mode,
                           Integrator integrator, const TimeGrid& grid, unsigned long long seed,
                           bool record_all) {
    if (n_steps < 2) throw std::invalid_argument("integrate needs n_steps >= 2");
    Trajectory traj;
    traj.schedule_name = s.name();
    traj.mode = mode == VelocityMode::oracle ? "oracle" : "autonomous";
    traj.n_steps = n_steps;
    traj.integrator = integrator == Integrator::heun ? "heun" : "euler";
    traj.seed = seed;

    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    ConditionalWork cw;
    VelocityContext vel{ds, s, ScheduleGains(s), &eval, &ws, &cw, mode};

    Eigen::VectorXd u = u0 ? *u0 : draw_initial_state(ds, s, seed);
    const double t_min = s.t_min();
    const double h = (1.0 - t_min) / double(n_steps);

    traj.times.push_back(1.0);
    if (record_all) traj.states.push_back(u);

    for (int i = 0; i < n_steps; ++i) {
        const double t0 = 1.0 - h * double(i);
        const double t1 = i + 1 == n_steps ? t_min : 1.0 - h * double(i + 1);
        const double dt = t1 - t0;  // negative
        const Eigen::VectorXd k1 = vel(u, t0);
        if (integrator == Integrator::euler) {
            u += dt * k1;
        } else {
            const Eigen::VectorXd mid = u + dt * k1;
            if (!state_ok(mid)) {
                traj.diverged = true;
                break;
            }
            const Eigen::VectorXd k2 = vel(mid, t1);
            u += 0.5 * dt * (k1 + k2);
        }
        if (!state_ok(u)) {
            traj.diverged = true;
            break;
        }
        traj.times.push_back(t1);
        if (record_all) traj.states.push_back(u);
    }
    if (!record_all) traj.states.push_back(u);
    return traj;
}

}  // namespace

VelocityMode parse_velocity_mode(const std::string& s) {
    if (s == "oracle") return VelocityMode::oracle;
    if (s == "autonomous" || s == "blind") return VelocityMode::autonomous;
    throw std::invalid_argument("unknown velocity mode '" + s + "'");
}

Integrator parse_integrator(const std::string& s) {
    if (s == "euler") return Integrator::euler;
    if (s == "heun") return Integrator::heun;
    throw std::invalid_argument("unknown integrator '" + s + "'");
}

Eigen::VectorXd sampler_velocity(const DataSupport& ds, const Schedule& s,
                                 const Eigen::VectorXd& u, double t, VelocityMode mode,
                                 const TimeGrid& grid) {
    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    ConditionalWork cw;
    VelocityContext vel{ds, s, ScheduleGains(s), &eval, &ws, &cw, mode};
    return vel(u, t);
}

Trajectory integrate(const DataSupport& ds, const Schedule& s, std::optional<Eigen::VectorXd> u0,
                     int n_steps, VelocityMode mode, Integrator integrator, const TimeGrid& grid,
                     unsigned long long seed) {
    return run_integration(ds, s, std::move(u0), n_steps, mode, integrator, grid, seed, true);
}

Trajectory integrate_direct_target(const DataSupport& ds, const Schedule& s,
                                   std::optional<Eigen::VectorXd> u0, int n_steps,
                                   double step_size, Integrator integrator, const TimeGrid& grid,
                                   unsigned long long seed) {
    if (n_steps < 2) throw std::invalid_argument("integrate needs n_steps >= 2");
    if (!(step_size > 0.0)) throw std::invalid_argument("direct target mode needs step_size > 0");
    Trajectory traj;
    traj.schedule_name = s.name();
    traj.mode = "direct-target";
    traj.n_steps = n_steps;
    traj.integrator = integrator == Integrator::heun ? "heun" : "euler";
    traj.seed = seed;

    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    Eigen::VectorXd u = u0 ? *u0 : draw_initial_state(ds, s, seed);

    const double t_min = s.t_min();
    traj.times.push_back(1.0);
    traj.states.push_back(u);
    for (int i = 0; i < n_steps; ++i) {
        const Eigen::VectorXd k1 = -eval.autonomous_field(u, ws);
        if (integrator == Integrator::euler) {
            u += step_size * k1;
        } else {
            const Eigen::VectorXd mid = u + step_size * k1;
            if (!state_ok(mid)) {
                traj.diverged = true;
                break;
            }
            const Eigen::VectorXd k2 = -eval.autonomous_field(mid, ws);
            u += 0.5 * step_size * (k1 + k2);
        }
        if (!state_ok(u)) {
            traj.diverged = true;
            break;
        }
        // Pseudo-time mapped onto [1, t_min] so trajectory consumers see the
        // usual decreasing time column.
        traj.times.push_back(1.0 - (1.0 - t_min) * double(i + 1) / double(n_steps));
        traj.states.push_back(u);
    }
    return traj;
}

std::vector<DriftErrorRecord> drift_error_sweep(const DataSupport& ds, const Schedule& s,
                                                const DriftProbe& probe,
                                                const std::vector<double>& t_list,
                                                const TimeGrid& grid) {
    if (probe.point_index < 0 || probe.point_index >= ds.size()) {
        throw std::invalid_argument("drift probe index out of range");
    }
    const Eigen::VectorXd xk = ds.point(probe.point_index);
    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    ConditionalWork cw;
    ScheduleGains sg(s);

    std::vector<DriftErrorRecord> records;
    records.reserve(t_list.size());
    for (double t : t_list) {
        const ScheduleCoeffs k = s.eval(t);
        const Eigen::VectorXd u = probe.forward
                                      ? (k.a * xk + (k.b * probe.eps) * probe.direction).eval()
                                      : (xk + probe.eps * probe.direction).eval();
        DriftErrorRecord rec;
        rec.t = t;
        rec.nu_abs = std::abs(sg.nu(t));
        rec.est_err =
            (eval.autonomous_field(u, ws) - conditional_target_fast(ds, k, u, cw)).norm();
        rec.delta_v = rec.nu_abs * rec.est_err;
        records.push_back(rec);
    }
    return records;
}

double jensen_gap(const DataSupport& ds, const Schedule& s, const Eigen::VectorXd& u,
                  double t_true, const TimeGrid& grid) {
    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    return eval.jensen_gap(u, t_true, ws);
}

BatchResult sample_finals(const DataSupport& ds, const Schedule& s, int n_samples, int n_steps,
                          VelocityMode mode, Integrator integrator, const TimeGrid& grid,
                          unsigned long long seed, int threads) {
    BatchResult out;
    out.finals.resize(n_samples, ds.dim());
    out.diverged.assign(size_t(n_samples), 0);
    parallel_for(n_samples, threads, [&](int i) {
        Trajectory traj = run_integration(ds, s, std::nullopt, n_steps, mode, integrator, grid,
                                          seed + (unsigned long long)(i), false);
        out.finals.row(i) = traj.states.back().transpose();
        out.diverged[size_t(i)] = traj.diverged ? 1 : 0;
    });
    return out;
}

}  // namespace margen
