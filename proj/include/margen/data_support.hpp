#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace margen {

/// Embedding record for supports built from a 2D source through an orthogonal
/// projection P (D x 2, P^T P = I).
struct EmbeddingMeta {
    Eigen::MatrixXd projection;  // D x 2
    Eigen::MatrixXd source2d;    // N x 2
    std::vector<double> radii;
};

struct NearestPoint {
    int index = -1;
    double distance = 0.0;
};

/// A finite set of clean points in R^D, optionally with an embedded 2D structure.
class DataSupport {
  public:
    static DataSupport make_explicit(Eigen::MatrixXd points);  // rows are points

    // Uniformly spaced angles on each ring, embedded into R^D by a seeded
    // random orthogonal map (orthonormalized Gaussian D x 2).  seed = -1 with
    // ambient_dim == 2 requests the identity embedding.
    static DataSupport make_circles(int n_per_ring, const std::vector<double>& radii,
                                    int ambient_dim, long seed);

    static DataSupport load_csv(const std::string& path);
    void save_csv(const std::string& path) const;

    NearestPoint nearest_point(const Eigen::VectorXd& u) const;

    int size() const { return int(points_.rows()); }
    int dim() const { return int(points_.cols()); }
    const Eigen::MatrixXd& points() const { return points_; }
    Eigen::VectorXd point(int k) const { return points_.row(k).transpose(); }
    const Eigen::VectorXd& squared_norms() const { return sq_norms_; }
    double max_norm() const;

    const std::optional<EmbeddingMeta>& intrinsic_meta() const { return intrinsic_; }

    // Orthogonal residual against the embedded subspace: u - P P^T u.
    Eigen::VectorXd orthogonal_residual(const Eigen::VectorXd& u) const;

  private:
    DataSupport(Eigen::MatrixXd points, std::optional<EmbeddingMeta> meta);
    Eigen::MatrixXd points_;  // N x D
    Eigen::VectorXd sq_norms_;
    std::optional<EmbeddingMeta> intrinsic_;
};

}  // namespace margen
