#pragma once

#include <Eigen/Dense>

#include "margen/data_support.hpp"
#include "margen/schedule.hpp"
#include "margen/time_grid.hpp"

namespace margen {

/// Discretized posterior p(t|u) on a time grid, with summary moments.
/// probs are normalized masses (posterior density times quadrature weight).
struct PosteriorProfile {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
    Eigen::VectorXd log_joint;  // log p(u|t_i) + log p(t_i), unnormalized
    Eigen::VectorXd probs;      // sums to 1
    double log_evidence = 0.0;
    double mean_t = 0.0, var_t = 0.0;
    double mean_v = 0.0, var_v = 0.0;  // moments of v = b(t)^2
    bool concentrated_warning = false;  // > 99.9% of mass on a single node
};

/// log[(1/N) sum_k N(u; a(t) x_k, b(t)^2 I)], entirely in log domain.
double log_likelihood(const DataSupport& ds, const Schedule& s, const Eigen::VectorXd& u,
                      double t);

PosteriorProfile posterior_profile(const DataSupport& ds, const Schedule& s,
                                   const Eigen::VectorXd& u, const TimeGrid& grid);

/// r / sqrt(D - d) where r is the orthogonal residual norm of u against the
/// support's embedded subspace.  intrinsic_dim < 0 uses the embedding width.
double sigma_mle(const DataSupport& ds, const Eigen::VectorXd& u, int intrinsic_dim = -1);

/// Closed form sigma-hat from a known residual norm.
double sigma_mle_from_residual(double residual_norm, int ambient_dim, int intrinsic_dim);

struct InverseGammaFit {
    bool applicable = false;  // requires codim > 2
    double shape = 0.0, scale = 0.0;
    double tv_distance = 0.0;
    double mean_v_posterior = 0.0, mean_v_ig = 0.0;
    double var_v_posterior = 0.0, var_v_ig = 0.0;
};

/// Compares the posterior over v = b(t)^2 against IG(codim/2 - 1, eps^2/2)
/// on the profile's grid (Jacobian dv = 2 b b_dot dt applied analytically).
InverseGammaFit inverse_gamma_fit(const PosteriorProfile& profile, const Schedule& s, int codim,
                                  double eps);

}  // namespace margen
