#include "margen/posterior.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "margen/field_evaluator.hpp"

namespace margen {

double log_likelihood(const DataSupport& ds, const Schedule& s, const Eigen::VectorXd& u,
                      double t) {
    const ScheduleCoeffs k = s.eval(t);
    const Eigen::MatrixXd& x = ds.points();
    const int n = ds.size();
    Eigen::ArrayXd expo(n);
    const double inv2b2 = 1.0 / (2.0 * k.b * k.b);
    for (int j = 0; j < n; ++j) {
        expo(j) = -(u - k.a * x.row(j).transpose()).squaredNorm() * inv2b2;
    }
    const double m = expo.maxCoeff();
    const double lse = m + std::log((expo - m).exp().sum());
    return lse - std::log(double(n)) -
           0.5 * double(ds.dim()) * std::log(2.0 * std::numbers::pi * k.b * k.b);
}

PosteriorProfile posterior_profile(const DataSupport& ds, const Schedule& s,
                                   const Eigen::VectorXd& u, const TimeGrid& grid) {
    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    return eval.profile(u, ws);
}

double sigma_mle_from_residual(double residual_norm, int ambient_dim, int intrinsic_dim) {
    if (ambient_dim - intrinsic_dim < 1) {
        throw std::invalid_argument("sigma_mle needs positive codimension");
    }
    return residual_norm / std::sqrt(double(ambient_dim - intrinsic_dim));
}

double sigma_mle(const DataSupport& ds, const Eigen::VectorXd& u, int intrinsic_dim) {
    if (!ds.intrinsic_meta()) {
        throw std::invalid_argument("sigma_mle requires a support with an embedded subspace");
    }
    const int d = intrinsic_dim >= 0 ? intrinsic_dim : int(ds.intrinsic_meta()->projection.cols());
    const double r = ds.orthogonal_residual(u).norm();
    return sigma_mle_from_residual(r, ds.dim(), d);
}

InverseGammaFit inverse_gamma_fit(const PosteriorProfile& profile, const Schedule& s, int codim,
                                  double eps) {
    InverseGammaFit fit;
    if (codim <= 2) return fit;  // shape would not be positive
    fit.applicable = true;
    fit.shape = 0.5 * double(codim) - 1.0;
    fit.scale = 0.5 * eps * eps;

    const int m = int(profile.nodes.size());
    Eigen::ArrayXd logmass(m);
    Eigen::ArrayXd v(m);
    const double lognorm = fit.shape * std::log(fit.scale) - std::lgamma(fit.shape);
    for (int i = 0; i < m; ++i) {
        const ScheduleCoeffs k = s.eval(profile.nodes(i));
        v(i) = k.b * k.b;
        const double dv = 2.0 * k.b * k.b_dot;
        const double logpdf = lognorm - (fit.shape + 1.0) * std::log(v(i)) - fit.scale / v(i);
        logmass(i) = logpdf + std::log(dv) + std::log(profile.weights(i));
    }
    const double mx = logmass.maxCoeff();
    Eigen::ArrayXd ig_mass = (logmass - mx).exp();
    ig_mass /= ig_mass.sum();

    fit.tv_distance = 0.5 * (profile.probs.array() - ig_mass).abs().sum();
    fit.mean_v_posterior = (profile.probs.array() * v).sum();
    fit.mean_v_ig = (ig_mass * v).sum();
    fit.var_v_posterior =
        (profile.probs.array() * (v - fit.mean_v_posterior).square()).sum();
    fit.var_v_ig = (ig_mass * (v - fit.mean_v_ig).square()).sum();
    return fit;
}

}  // namespace margen
