#include "margen/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace margen {

TimeGrid TimeGrid::single(double t) {
    TimeGrid g;
    g.nodes = Eigen::VectorXd::Constant(1, t);
    g.weights = Eigen::VectorXd::Constant(1, 1.0);
    return g;
}

TimeGrid TimeGrid::from_nodes(Eigen::VectorXd nodes) {
    if (nodes.size() < 1) throw std::invalid_argument("time grid needs at least one node");
    if (nodes.size() == 1) return single(nodes(0));
    TimeGrid g;
    const int m = int(nodes.size());
    for (int i = 1; i < m; ++i) {
        if (!(nodes(i) > nodes(i - 1))) {
            throw std::invalid_argument("time grid nodes must be strictly increasing");
        }
    }
    g.weights = Eigen::VectorXd::Zero(m);
    g.weights(0) = 0.5 * (nodes(1) - nodes(0));
    g.weights(m - 1) = 0.5 * (nodes(m - 1) - nodes(m - 2));
    for (int i = 1; i < m - 1; ++i) g.weights(i) = 0.5 * (nodes(i + 1) - nodes(i - 1));
    g.nodes = std::move(nodes);
    return g;
}

TimeGrid make_time_grid(double t_min, int m_uniform, int m_log) {
    if (!(t_min > 0.0)) throw std::invalid_argument("t_min must be positive");
    if (t_min >= 1.0) throw std::invalid_argument("t_min must be below 1");
    if (m_uniform + m_log < 64) throw std::invalid_argument("need at least 64 grid nodes");
    if (m_uniform < 2 || m_log < 2) throw std::invalid_argument("need at least 2 nodes per part");

    const double split = 0.1;
    std::vector<double> raw;
    raw.reserve(size_t(m_uniform + m_log));
    if (t_min < split) {
        const double l0 = std::log(t_min), l1 = std::log(split);
        for (int j = 0; j < m_log; ++j) {
            raw.push_back(std::exp(l0 + (l1 - l0) * double(j) / double(m_log - 1)));
        }
        for (int j = 0; j < m_uniform; ++j) {
            raw.push_back(split + (1.0 - split) * double(j) / double(m_uniform - 1));
        }
    } else {
        const int m = m_uniform + m_log;
        for (int j = 0; j < m; ++j) {
            raw.push_back(t_min + (1.0 - t_min) * double(j) / double(m - 1));
        }
    }
    std::sort(raw.begin(), raw.end());
    std::vector<double> nodes;
    nodes.reserve(raw.size());
    for (double t : raw) {
        if (nodes.empty() || t - nodes.back() > 1e-15) nodes.push_back(t);
    }
    nodes.front() = t_min;
    nodes.back() = 1.0;

    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(nodes.data(), long(nodes.size()));
    return TimeGrid::from_nodes(std::move(v));
}

}  // namespace margen
