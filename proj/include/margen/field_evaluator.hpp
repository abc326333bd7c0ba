#pragma once

#include <Eigen/Dense>
#include <vector>

#include "margen/data_support.hpp"
#include "margen/fields.hpp"
#include "margen/posterior.hpp"
#include "margen/schedule.hpp"
#include "margen/time_grid.hpp"

namespace margen {

/// Shared engine behind posterior profiles, the autonomous field, the marginal
/// energy and the energy-aligned decomposition.  All quantities for one u are
/// taken from a single pass over the grid with one set of posterior masses, so
/// the decomposition identity holds to rounding error by construction.
///
/// Const methods are safe to call concurrently with one Workspace per thread.
class FieldEvaluator {
  public:
    struct Workspace {
        Eigen::VectorXd gram;       // <u, x_k>
        Eigen::ArrayXd dist2;       // scratch, N
        Eigen::ArrayXd ll_bound;    // lower bound per node
        std::vector<int> kept;
        std::vector<double> logjoint;  // per kept node
        std::vector<double> prob;      // per kept node
        std::vector<double> wmat;      // kept x N softmax weights, row-major
        double log_evidence = 0.0;
        bool concentrated = false;
    };

    FieldEvaluator(const DataSupport& ds, const Schedule& s, const TimeGrid& grid);

    PosteriorProfile profile(const Eigen::VectorXd& u, Workspace& ws) const;
    double marginal_energy(const Eigen::VectorXd& u, Workspace& ws) const;
    Eigen::VectorXd marginal_energy_gradient(const Eigen::VectorXd& u, Workspace& ws) const;
    Eigen::VectorXd autonomous_field(const Eigen::VectorXd& u, Workspace& ws) const;
    FieldDecomposition decompose(const Eigen::VectorXd& u, Workspace& ws) const;

    /// b(t_true) E[1/b(tau)] - 1 under the posterior at u.
    double jensen_gap(const Eigen::VectorXd& u, double t_true, Workspace& ws) const;

    const DataSupport& support() const { return *ds_; }
    const Schedule& schedule() const { return schedule_; }
    const TimeGrid& grid() const { return grid_; }

  private:
    struct Node {
        double t;         // reported grid time
        double a, b;      // coefficients at the gain-clamped time
        double b_dot;
        double inv2b2;    // 1/(2 b^2)
        double loggauss;  // -(D/2) log(2 pi b^2)
        double lam;       // (b/a)(d a - c b)
        double cs;        // c/a
        double db;        // d/b
        double cdab;      // c - d a / b
        double v;         // b^2
        double logw;      // log quadrature weight
    };

    // Fills kept nodes, normalized softmax rows, probs and the evidence.
    // With prune = true nodes whose joint mass provably falls 46 nats below
    // the maximum are skipped (posterior mass < 1e-20).
    void posterior_pass(const Eigen::VectorXd& u, Workspace& ws, bool prune) const;

    const DataSupport* ds_;
    Schedule schedule_;
    TimeGrid grid_;
    std::vector<Node> nodes_;
    double log_prior_ = 0.0;
};

}  // namespace margen
