#pragma once

#include <Eigen/Dense>

namespace margen {

/// Quadrature nodes and trapezoid weights on [t_min, 1].  Weights sum to the
/// interval length; the uniform prior density is applied separately.
struct TimeGrid {
    Eigen::VectorXd nodes;    // strictly increasing
    Eigen::VectorXd weights;  // positive, sum = nodes(M-1) - nodes(0)

    int size() const { return int(nodes.size()); }
    double t_min() const { return nodes(0); }
    double t_max() const { return nodes(nodes.size() - 1); }
    double span() const { return t_max() - t_min(); }

    static TimeGrid single(double t);
    static TimeGrid from_nodes(Eigen::VectorXd nodes);
};

/// Hybrid grid: m_log log-spaced nodes on [t_min, 0.1] merged with m_uniform
/// uniform nodes on [0.1, 1] (deduplicated), trapezoid weights.
TimeGrid make_time_grid(double t_min, int m_uniform, int m_log);

}  // namespace margen
