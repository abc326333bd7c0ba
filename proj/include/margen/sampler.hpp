#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "margen/data_support.hpp"
#include "margen/field_evaluator.hpp"
#include "margen/schedule.hpp"
#include "margen/time_grid.hpp"

namespace margen {

enum class VelocityMode { oracle, autonomous };
enum class Integrator { euler, heun };

VelocityMode parse_velocity_mode(const std::string& s);
Integrator parse_integrator(const std::string& s);

/// One generation path, recorded from t = 1 down to t_min.
struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    bool diverged = false;
    std::string schedule_name;
    std::string mode;
    int n_steps = 0;
    std::string integrator;
    unsigned long long seed = 0;
};

struct DriftErrorRecord {
    double t = 0.0;
    double nu_abs = 0.0;
    double est_err = 0.0;  // |f*(u) - f*_t(u)|
    double delta_v = 0.0;  // nu_abs * est_err
};

/// Probe placement for drift error sweeps: either the schedule-consistent
/// forward point a(t) x_k + b(t) eps dir, or the fixed point x_k + eps dir.
struct DriftProbe {
    int point_index = 0;
    Eigen::VectorXd direction;  // unit vector
    double eps = 0.05;
    bool forward = true;
};

/// mu(t) u + nu(t) f with f the conditional target (oracle) or the
/// posterior-averaged autonomous field.
Eigen::VectorXd sampler_velocity(const DataSupport& ds, const Schedule& s,
                                 const Eigen::VectorXd& u, double t, VelocityMode mode,
                                 const TimeGrid& grid);

/// Integrates du/dt = mu u + nu f from t = 1 to t_min with uniform steps.
/// A missing u0 is drawn as a(1) x_rand + b(1) eps from the seed.  Divergence
/// (any |u_i| > 1e6 or non-finite state) truncates the path and sets the flag.
Trajectory integrate(const DataSupport& ds, const Schedule& s,
                     std::optional<Eigen::VectorXd> u0, int n_steps, VelocityMode mode,
                     Integrator integrator, const TimeGrid& grid, unsigned long long seed);

/// EqM's target used directly as a descent velocity: du/ds = -f*(u) in
/// pseudo-time with the given step size.  Recorded times map the pseudo-time
/// onto [1, t_min] for uniform trajectory handling.
Trajectory integrate_direct_target(const DataSupport& ds, const Schedule& s,
                                   std::optional<Eigen::VectorXd> u0, int n_steps,
                                   double step_size, Integrator integrator, const TimeGrid& grid,
                                   unsigned long long seed);

std::vector<DriftErrorRecord> drift_error_sweep(const DataSupport& ds, const Schedule& s,
                                                const DriftProbe& probe,
                                                const std::vector<double>& t_list,
                                                const TimeGrid& grid);

double jensen_gap(const DataSupport& ds, const Schedule& s, const Eigen::VectorXd& u,
                  double t_true, const TimeGrid& grid);

struct BatchResult {
    Eigen::MatrixXd finals;  // n_samples x D
    std::vector<char> diverged;
};

/// Independent trajectories with per-sample seeds seed + index; final states
/// only.  Deterministic for any worker count.
BatchResult sample_finals(const DataSupport& ds, const Schedule& s, int n_samples, int n_steps,
                          VelocityMode mode, Integrator integrator, const TimeGrid& grid,
                          unsigned long long seed, int threads);

}  // namespace margen
