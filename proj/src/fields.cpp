#include "margen/fields.hpp"

#include <cmath>

#include "margen/field_evaluator.hpp"

namespace margen {

Eigen::VectorXd conditional_denoiser(const DataSupport& ds, const Schedule& s,
                                     const Eigen::VectorXd& u, double t) {
    const ScheduleCoeffs k = s.eval(t);
    const Eigen::MatrixXd& x = ds.points();
    const int n = ds.size();
    Eigen::ArrayXd expo(n);
    const double inv2b2 = 1.0 / (2.0 * k.b * k.b);
    for (int j = 0; j < n; ++j) {
        expo(j) = -(u - k.a * x.row(j).transpose()).squaredNorm() * inv2b2;
    }
    const double m = expo.maxCoeff();
    Eigen::VectorXd w = (expo - m).exp().matrix();
    w /= w.sum();
    return x.transpose() * w;
}

Eigen::VectorXd conditional_target(const DataSupport& ds, const Schedule& s,
                                   const Eigen::VectorXd& u, double t) {
    const ScheduleCoeffs k = s.eval(t);
    return (k.d / k.b) * u + (k.c - k.d * k.a / k.b) * conditional_denoiser(ds, s, u, t);
}

Eigen::VectorXd conditional_energy_gradient(const DataSupport& ds, const Schedule& s,
                                            const Eigen::VectorXd& u, double t) {
    const ScheduleCoeffs k = s.eval(t);
    return (u - k.a * conditional_denoiser(ds, s, u, t)) / (k.b * k.b);
}

Eigen::VectorXd autonomous_field(const DataSupport& ds, const Schedule& s,
                                 const Eigen::VectorXd& u, const TimeGrid& grid) {
    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    return eval.autonomous_field(u, ws);
}

double marginal_energy(const DataSupport& ds, const Schedule& s, const Eigen::VectorXd& u,
                       const TimeGrid& grid) {
    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    return eval.marginal_energy(u, ws);
}

Eigen::VectorXd marginal_energy_gradient(const DataSupport& ds, const Schedule& s,
                                         const Eigen::VectorXd& u, const TimeGrid& grid) {
    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    return eval.marginal_energy_gradient(u, ws);
}

FieldDecomposition decompose_field(const DataSupport& ds, const Schedule& s,
                                   const Eigen::VectorXd& u, const TimeGrid& grid) {
    FieldEvaluator eval(ds, s, grid);
    FieldEvaluator::Workspace ws;
    return eval.decompose(u, ws);
}

}  // namespace margen
