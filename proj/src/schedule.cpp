#include "margen/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace margen {

namespace {

constexpr double kGainTimeCeil = 1.0 - 1e-6;

// Small angular offset keeps a(1) > 0 so the sampler gains mu, nu stay finite
// at t = 1 (a(1) = 0 would make a d - b c vanish there).
constexpr double kDdpmOffset = 0.008;

void validate_noise_coefficient(const Schedule& s) {
    const int n = 1024;
    double prev = -1.0;
    for (int i = 0; i < n; ++i) {
        const double t = s.t_min() + (1.0 - s.t_min()) * double(i) / double(n - 1);
        const double b = s.eval(t).b;
        if (!(b > 0.0)) {
            std::ostringstream msg;
            msg << "schedule '" << s.name() << "': b(" << t << ") = " << b << " is not positive";
            throw std::domain_error(msg.str());
        }
        if (b <= prev) {
            std::ostringstream msg;
            msg << "schedule '" << s.name() << "': b is not strictly increasing near t = " << t;
            throw std::domain_error(msg.str());
        }
        prev = b;
    }
}

}  // namespace

Schedule::Schedule(std::string name, CoeffFn fn, double t_min)
    : name_(std::move(name)), fn_(std::move(fn)), t_min_(t_min) {
    if (!(t_min_ > 0.0) || t_min_ >= 1.0) {
        throw std::invalid_argument("schedule t_min must lie in (0, 1)");
    }
    validate_noise_coefficient(*this);
}

ScheduleCoeffs Schedule::eval(double t) const {
    return fn_(std::clamp(t, t_min_, 1.0));
}

ScheduleCoeffs Schedule::eval_raw(double t) const { return fn_(t); }

Schedule make_schedule(const std::string& name, const ScheduleParams& params) {
    const double t_min = params.t_min;
    if (name == "ddpm") {
        // Variance preserving: a = cos(theta), b = sin(theta),
        // theta = pi t / (2 (1 + offset)), so a^2 + b^2 = 1 exactly.
        const double rate = std::numbers::pi / (2.0 * (1.0 + kDdpmOffset));
        return Schedule(name,
                        [rate](double t) {
                            ScheduleCoeffs k;
                            const double th = rate * t;
                            k.a = std::cos(th);
                            k.b = std::sin(th);
                            k.c = 0.0;
                            k.d = 1.0;
                            k.a_dot = -rate * std::sin(th);
                            k.b_dot = rate * std::cos(th);
                            return k;
                        },
                        t_min);
    }
    if (name == "edm") {
        const double sig = params.sigma_max;
        if (!(sig > 0.0)) throw std::invalid_argument("edm requires sigma_max > 0");
        return Schedule(name,
                        [sig](double t) {
                            ScheduleCoeffs k;
                            k.a = 1.0;
                            k.b = sig * t;
                            k.c = 1.0;
                            k.d = 0.0;
                            k.b_dot = sig;
                            return k;
                        },
                        t_min);
    }
    if (name == "fm") {
        return Schedule(name,
                        [](double t) {
                            ScheduleCoeffs k;
                            k.a = 1.0 - t;
                            k.b = t;
                            k.c = -1.0;
                            k.d = 1.0;
                            k.a_dot = -1.0;
                            k.b_dot = 1.0;
                            return k;
                        },
                        t_min);
    }
    if (name == "eqm") {
        return Schedule(name,
                        [](double t) {
                            ScheduleCoeffs k;
                            k.a = 1.0 - t;
                            k.b = t;
                            k.c = -t;
                            k.d = t;
                            k.a_dot = -1.0;
                            k.b_dot = 1.0;
                            k.c_dot = -1.0;
                            k.d_dot = 1.0;
                            return k;
                        },
                        t_min);
    }
    throw std::invalid_argument("unknown schedule preset '" + name + "'");
}

Schedule make_custom_schedule_numeric(std::string name,
                                      std::function<void(double, ScheduleCoeffs&)> values,
                                      double t_min) {
    constexpr double h = 1e-7;
    auto fn = [values](double t) {
        ScheduleCoeffs k, lo, hi;
        values(t, k);
        values(t - h, lo);
        values(t + h, hi);
        k.a_dot = (hi.a - lo.a) / (2.0 * h);
        k.b_dot = (hi.b - lo.b) / (2.0 * h);
        k.c_dot = (hi.c - lo.c) / (2.0 * h);
        k.d_dot = (hi.d - lo.d) / (2.0 * h);
        return k;
    };
    return Schedule(std::move(name), fn, t_min);
}

ScheduleGains::ScheduleGains(Schedule schedule) : schedule_(std::move(schedule)) {}

double ScheduleGains::clamp_gain_time(double t) const {
    return std::clamp(t, schedule_.t_min(), kGainTimeCeil);
}

double ScheduleGains::lambda(double t) const {
    const ScheduleCoeffs k = schedule_.eval(clamp_gain_time(t));
    return (k.b / k.a) * (k.d * k.a - k.c * k.b);
}

double ScheduleGains::c_scale(double t) const {
    const ScheduleCoeffs k = schedule_.eval(clamp_gain_time(t));
    return k.c / k.a;
}

double ScheduleGains::snr(double t) const {
    const ScheduleCoeffs k = schedule_.eval(t);
    return (k.a * k.a) / (k.b * k.b);
}

void ScheduleGains::sampler_gains(double t, double& mu_out, double& nu_out) const {
    const ScheduleCoeffs k = schedule_.eval(clamp_gain_time(t));
    const double denom = k.a * k.d - k.b * k.c;
    if (std::abs(denom) < 1e-300) {
        std::ostringstream msg;
        msg << "schedule '" << schedule_.name() << "': a d - b c vanishes at t = " << t;
        throw std::domain_error(msg.str());
    }
    mu_out = (k.a_dot * k.d - k.b_dot * k.c) / denom;
    nu_out = (k.b_dot * k.a - k.a_dot * k.b) / denom;
}

double ScheduleGains::mu(double t) const {
    double m, n;
    sampler_gains(t, m, n);
    return m;
}

double ScheduleGains::nu(double t) const {
    double m, n;
    sampler_gains(t, m, n);
    return n;
}

ScheduleGains gains(const Schedule& s) { return ScheduleGains(s); }

double asymptotic_gain_ratio(const Schedule& s, double t) {
    const double lam = ScheduleGains(s).lambda(t);
    return s.name() == "eqm" ? lam / (t * t) : lam / t;
}

}  // namespace margen
