#include "margen/data_support.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace margen {

DataSupport::DataSupport(Eigen::MatrixXd points, std::optional<EmbeddingMeta> meta)
    : points_(std::move(points)), intrinsic_(std::move(meta)) {
    sq_norms_ = points_.rowwise().squaredNorm();
}

DataSupport DataSupport::make_explicit(Eigen::MatrixXd points) {
    if (points.rows() < 1 || points.cols() < 1) {
        throw std::invalid_argument("data support needs at least one point");
    }
    return DataSupport(std::move(points), std::nullopt);
}

DataSupport DataSupport::make_circles(int n_per_ring, const std::vector<double>& radii,
                                      int ambient_dim, long seed) {
    if (ambient_dim < 2) throw std::invalid_argument("circles need ambient_dim >= 2");
    if (radii.empty()) throw std::invalid_argument("circles need at least one radius");
    if (n_per_ring < 4) throw std::invalid_argument("circles need n_per_ring >= 4");

    const int n_total = n_per_ring * int(radii.size());
    Eigen::MatrixXd source(n_total, 2);
    int row = 0;
    for (double r : radii) {
        for (int i = 0; i < n_per_ring; ++i) {
            const double angle = 2.0 * std::numbers::pi * double(i) / double(n_per_ring);
            source(row, 0) = r * std::cos(angle);
            source(row, 1) = r * std::sin(angle);
            ++row;
        }
    }

    Eigen::MatrixXd projection;
    if (seed < 0) {
        if (ambient_dim != 2) {
            throw std::invalid_argument("identity embedding requires ambient_dim == 2");
        }
        projection = Eigen::MatrixXd::Identity(2, 2);
    } else {
        std::mt19937_64 rng(static_cast<unsigned long long>(seed));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd g(ambient_dim, 2);
        for (int i = 0; i < ambient_dim; ++i)
            for (int j = 0; j < 2; ++j) g(i, j) = gauss(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ambient_dim, 2);
        Eigen::MatrixXd r = q.transpose() * g;
        // Fix signs so the factorization (and thus the support) is unique.
        for (int j = 0; j < 2; ++j)
            if (r(j, j) < 0.0) q.col(j) = -q.col(j);
        projection = q;
    }

    EmbeddingMeta meta{projection, source, radii};
    Eigen::MatrixXd points = source * projection.transpose();  // N x D
    return DataSupport(std::move(points), std::move(meta));
}

NearestPoint DataSupport::nearest_point(const Eigen::VectorXd& u) const {
    if (u.size() != dim()) throw std::invalid_argument("nearest_point: dimension mismatch");
    NearestPoint best;
    double best_sq = std::numeric_limits<double>::infinity();
    for (int k = 0; k < size(); ++k) {
        const double d2 = (points_.row(k).transpose() - u).squaredNorm();
        if (d2 < best_sq) {
            best_sq = d2;
            best.index = k;
        }
    }
    best.distance = std::sqrt(best_sq);
    return best;
}

double DataSupport::max_norm() const { return std::sqrt(sq_norms_.maxCoeff()); }

Eigen::VectorXd DataSupport::orthogonal_residual(const Eigen::VectorXd& u) const {
    if (!intrinsic_) throw std::invalid_argument("support has no embedded subspace");
    const Eigen::MatrixXd& p = intrinsic_->projection;
    return u - p * (p.transpose() * u);
}

void DataSupport::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (int j = 0; j < dim(); ++j) out << (j ? "," : "") << "d" << j;
    out << "\n";
    out.precision(17);
    for (int k = 0; k < size(); ++k) {
        for (int j = 0; j < dim(); ++j) out << (j ? "," : "") << points_(k, j);
        out << "\n";
    }
}

DataSupport DataSupport::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::runtime_error(path + ": inconsistent row widths");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");
    Eigen::MatrixXd points(int(rows.size()), int(rows.front().size()));
    for (int i = 0; i < points.rows(); ++i)
        for (int j = 0; j < points.cols(); ++j) points(i, j) = rows[size_t(i)][size_t(j)];
    return make_explicit(std::move(points));
}

}  // namespace margen
