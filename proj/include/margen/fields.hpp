#pragma once

#include <Eigen/Dense>

#include "margen/data_support.hpp"
#include "margen/posterior.hpp"
#include "margen/schedule.hpp"
#include "margen/time_grid.hpp"

namespace margen {

/// Three-part split of the autonomous field:
///   f*(u) = lambda_bar grad E_marg + transport correction + c_bar u.
struct FieldDecomposition {
    Eigen::VectorXd natural_gradient;
    Eigen::VectorXd transport_correction;
    Eigen::VectorXd linear_drift;
    Eigen::VectorXd total;
    Eigen::VectorXd marginal_gradient;
    double lambda_bar = 0.0;
    double c_scale_bar = 0.0;
};

/// Precision-weighted barycenter of the support: softmax over
/// -|u - a(t) x_k|^2 / (2 b(t)^2), applied to the clean points.
Eigen::VectorXd conditional_denoiser(const DataSupport& ds, const Schedule& s,
                                     const Eigen::VectorXd& u, double t);

/// f*_t(u) = (d/b) u + (c - d a / b) D*_t(u).
Eigen::VectorXd conditional_target(const DataSupport& ds, const Schedule& s,
                                   const Eigen::VectorXd& u, double t);

/// grad E_t(u) = (u - a(t) D*_t(u)) / b(t)^2.
Eigen::VectorXd conditional_energy_gradient(const DataSupport& ds, const Schedule& s,
                                            const Eigen::VectorXd& u, double t);

/// Posterior time-average of the conditional targets.
Eigen::VectorXd autonomous_field(const DataSupport& ds, const Schedule& s,
                                 const Eigen::VectorXd& u, const TimeGrid& grid);

/// E_marg(u) = -log evidence.
double marginal_energy(const DataSupport& ds, const Schedule& s, const Eigen::VectorXd& u,
                       const TimeGrid& grid);

Eigen::VectorXd marginal_energy_gradient(const DataSupport& ds, const Schedule& s,
                                         const Eigen::VectorXd& u, const TimeGrid& grid);

FieldDecomposition decompose_field(const DataSupport& ds, const Schedule& s,
                                   const Eigen::VectorXd& u, const TimeGrid& grid);

}  // namespace margen
