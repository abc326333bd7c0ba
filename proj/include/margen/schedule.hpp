#pragma once

#include <functional>
#include <string>

namespace margen {

/// Coefficients of an affine noise schedule at one time point.
/// Forward corruption: u = a(t) x + b(t) eps; training target: c(t) x + d(t) eps.
struct ScheduleCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double a_dot = 0.0;
    double b_dot = 0.0;
    double c_dot = 0.0;
    double d_dot = 0.0;
};

struct ScheduleParams {
    double t_min = 1e-4;
    double sigma_max = 2.0;  // edm only
};

/// An affine noise schedule with analytic derivatives. Presets: ddpm, edm, fm, eqm.
/// Coefficient evaluations clamp t into [t_min, 1]; eval_raw() does not clamp.
class Schedule {
  public:
    using CoeffFn = std::function<ScheduleCoeffs(double)>;

    Schedule() = default;

    // Custom schedule from a coefficient closure. Validates b > 0 and
    // monotonicity of b by sampling 1024 points on [t_min, 1].
    Schedule(std::string name, CoeffFn fn, double t_min);

    ScheduleCoeffs eval(double t) const;      // clamped to [t_min, 1]
    ScheduleCoeffs eval_raw(double t) const;  // no clamping

    double a(double t) const { return eval(t).a; }
    double b(double t) const { return eval(t).b; }
    double c(double t) const { return eval(t).c; }
    double d(double t) const { return eval(t).d; }

    double t_min() const { return t_min_; }
    const std::string& name() const { return name_; }

  private:
    std::string name_;
    CoeffFn fn_;
    double t_min_ = 1e-4;
};

/// Builds one of the four preset schedules (or throws std::invalid_argument).
Schedule make_schedule(const std::string& name, const ScheduleParams& params = {});

/// Wraps a coefficient closure that lacks analytic derivatives; derivatives are
/// filled in by central differences with h = 1e-7 (lower precision than presets).
Schedule make_custom_schedule_numeric(std::string name,
                                      std::function<void(double, ScheduleCoeffs&)> values,
                                      double t_min);

/// Scalar gain functions derived from a schedule.  Ratio-type gains
/// (lambda, c_scale, mu, nu) additionally clamp t at 1 - 1e-6 so schedules
/// with a(1) = 0 (fm, eqm) stay finite at the top grid node.
class ScheduleGains {
  public:
    explicit ScheduleGains(Schedule schedule);

    double lambda(double t) const;   // (b/a) (d a - c b)
    double c_scale(double t) const;  // c/a
    double snr(double t) const;      // a^2/b^2
    double mu(double t) const;       // (a_dot d - b_dot c) / (a d - b c)
    double nu(double t) const;       // (b_dot a - a_dot b) / (a d - b c)

    // mu and nu evaluated together; throws std::domain_error naming t when
    // a d - b c vanishes there.
    void sampler_gains(double t, double& mu_out, double& nu_out) const;

    const Schedule& schedule() const { return schedule_; }

  private:
    double clamp_gain_time(double t) const;
    Schedule schedule_;
};

ScheduleGains gains(const Schedule& s);

/// lambda(t)/t for every preset except eqm, which uses lambda(t)/t^2.
/// Near t = 0 this tends to 1 for fm and eqm.
double asymptotic_gain_ratio(const Schedule& s, double t);

}  // namespace margen
