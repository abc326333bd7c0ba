#include "margen/field_evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace margen {

namespace {
constexpr double kGainTimeCeil = 1.0 - 1e-6;
constexpr double kPruneNats = 46.0;  // exp(-46) ~ 1e-20
}  // namespace

FieldEvaluator::FieldEvaluator(const DataSupport& ds, const Schedule& s, const TimeGrid& grid)
    : ds_(&ds), schedule_(s), grid_(grid) {
    const int m = grid_.size();
    const double dim = double(ds.dim());
    nodes_.resize(size_t(m));
    for (int i = 0; i < m; ++i) {
        Node& nd = nodes_[size_t(i)];
        nd.t = grid_.nodes(i);
        const double teff = std::clamp(nd.t, schedule_.t_min(), kGainTimeCeil);
        const ScheduleCoeffs k = schedule_.eval(teff);
        nd.a = k.a;
        nd.b = k.b;
        nd.b_dot = k.b_dot;
        nd.inv2b2 = 1.0 / (2.0 * k.b * k.b);
        nd.loggauss = -0.5 * dim * std::log(2.0 * std::numbers::pi * k.b * k.b);
        nd.lam = (k.b / k.a) * (k.d * k.a - k.c * k.b);
        nd.cs = k.c / k.a;
        nd.db = k.d / k.b;
        nd.cdab = k.c - k.d * k.a / k.b;
        nd.v = k.b * k.b;
        nd.logw = std::log(grid_.weights(i));
    }
    log_prior_ = grid_.span() > 0.0 ? -std::log(grid_.span()) : 0.0;
}

void FieldEvaluator::posterior_pass(const Eigen::VectorXd& u, Workspace& ws, bool prune) const {
    const int n = ds_->size();
    const int m = int(nodes_.size());
    const Eigen::MatrixXd& x = ds_->points();
    const Eigen::ArrayXd& nsq = ds_->squared_norms().array();
    const double unorm = u.squaredNorm();
    const double logn = std::log(double(n));

    ws.gram.noalias() = x * u;
    const Eigen::ArrayXd& g = ws.gram.array();
    if (ws.dist2.size() != n) ws.dist2.resize(n);
    if (ws.ll_bound.size() != m) ws.ll_bound.resize(m);

    // Phase 1: cheap per-node likelihood bounds from the closest component.
    double best_lower = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        const Node& nd = nodes_[size_t(i)];
        const double m2 =
            std::max(0.0, (nd.a * nd.a * nsq - (2.0 * nd.a) * g + unorm).minCoeff());
        const double lb = nd.loggauss - logn - m2 * nd.inv2b2;
        ws.ll_bound(i) = lb;
        best_lower = std::max(best_lower, lb + nd.logw);
    }

    ws.kept.clear();
    for (int i = 0; i < m; ++i) {
        // ll <= ll_bound + log N, so this keeps every node within kPruneNats.
        if (!prune || ws.ll_bound(i) + logn + nodes_[size_t(i)].logw >= best_lower - kPruneNats) {
            ws.kept.push_back(i);
        }
    }

    const size_t kn = ws.kept.size();
    ws.logjoint.resize(kn);
    ws.prob.resize(kn);
    ws.wmat.resize(kn * size_t(n));

    // Phase 2: exact log-likelihoods and normalized component weights.
    double best_joint = -std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < kn; ++r) {
        const Node& nd = nodes_[size_t(ws.kept[r])];
        ws.dist2 = nd.a * nd.a * nsq - (2.0 * nd.a) * g + unorm;
        const double m2 = std::max(0.0, ws.dist2.minCoeff());
        Eigen::Map<Eigen::ArrayXd> w(ws.wmat.data() + r * size_t(n), n);
        w = ((m2 - ws.dist2) * nd.inv2b2).exp();
        const double sum = w.sum();
        w /= sum;
        const double ll = nd.loggauss - logn - m2 * nd.inv2b2 + std::log(sum);
        ws.logjoint[r] = ll + log_prior_;
        best_joint = std::max(best_joint, ws.logjoint[r] + nd.logw);
    }

    double norm = 0.0;
    for (size_t r = 0; r < kn; ++r) {
        const Node& nd = nodes_[size_t(ws.kept[r])];
        ws.prob[r] = std::exp(ws.logjoint[r] + nd.logw - best_joint);
        norm += ws.prob[r];
    }
    ws.log_evidence = best_joint + std::log(norm);
    double pmax = 0.0;
    for (size_t r = 0; r < kn; ++r) {
        ws.prob[r] /= norm;
        pmax = std::max(pmax, ws.prob[r]);
    }
    ws.concentrated = pmax > 0.999;
}

PosteriorProfile FieldEvaluator::profile(const Eigen::VectorXd& u, Workspace& ws) const {
    posterior_pass(u, ws, /*prune=*/false);
    const int m = int(nodes_.size());
    PosteriorProfile p;
    p.nodes = grid_.nodes;
    p.weights = grid_.weights;
    p.log_joint.resize(m);
    p.probs = Eigen::VectorXd::Zero(m);
    for (size_t r = 0; r < ws.kept.size(); ++r) {
        p.log_joint(ws.kept[r]) = ws.logjoint[r];
        p.probs(ws.kept[r]) = ws.prob[r];
    }
    p.log_evidence = ws.log_evidence;
    p.concentrated_warning = ws.concentrated;
    double mt = 0.0, mv = 0.0;
    for (int i = 0; i < m; ++i) {
        mt += p.probs(i) * nodes_[size_t(i)].t;
        mv += p.probs(i) * nodes_[size_t(i)].v;
    }
    double vt = 0.0, vv = 0.0;
    for (int i = 0; i < m; ++i) {
        vt += p.probs(i) * (nodes_[size_t(i)].t - mt) * (nodes_[size_t(i)].t - mt);
        vv += p.probs(i) * (nodes_[size_t(i)].v - mv) * (nodes_[size_t(i)].v - mv);
    }
    p.mean_t = mt;
    p.var_t = vt;
    p.mean_v = mv;
    p.var_v = vv;
    return p;
}

double FieldEvaluator::marginal_energy(const Eigen::VectorXd& u, Workspace& ws) const {
    posterior_pass(u, ws, true);
    return -ws.log_evidence;
}

Eigen::VectorXd FieldEvaluator::marginal_energy_gradient(const Eigen::VectorXd& u,
                                                         Workspace& ws) const {
    posterior_pass(u, ws, true);
    const int n = ds_->size();
    Eigen::VectorXd qg = Eigen::VectorXd::Zero(n);
    double sum_invb2 = 0.0;
    for (size_t r = 0; r < ws.kept.size(); ++r) {
        const Node& nd = nodes_[size_t(ws.kept[r])];
        const double p = ws.prob[r];
        const double invb2 = 2.0 * nd.inv2b2;
        Eigen::Map<const Eigen::VectorXd> w(ws.wmat.data() + r * size_t(n), n);
        sum_invb2 += p * invb2;
        qg.noalias() += (p * nd.a * invb2) * w;
    }
    return sum_invb2 * u - ds_->points().transpose() * qg;
}

Eigen::VectorXd FieldEvaluator::autonomous_field(const Eigen::VectorXd& u, Workspace& ws) const {
    posterior_pass(u, ws, true);
    const int n = ds_->size();
    Eigen::VectorXd qf = Eigen::VectorXd::Zero(n);
    double sum_db = 0.0;
    for (size_t r = 0; r < ws.kept.size(); ++r) {
        const Node& nd = nodes_[size_t(ws.kept[r])];
        const double p = ws.prob[r];
        Eigen::Map<const Eigen::VectorXd> w(ws.wmat.data() + r * size_t(n), n);
        sum_db += p * nd.db;
        qf.noalias() += (p * nd.cdab) * w;
    }
    return sum_db * u + ds_->points().transpose() * qf;
}

FieldDecomposition FieldEvaluator::decompose(const Eigen::VectorXd& u, Workspace& ws) const {
    posterior_pass(u, ws, true);
    const int n = ds_->size();
    Eigen::VectorXd qf = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd qg = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd ql = Eigen::VectorXd::Zero(n);
    double sum_db = 0.0, sum_invb2 = 0.0, sum_lamb2 = 0.0;
    double lambda_bar = 0.0, c_bar = 0.0;
    for (size_t r = 0; r < ws.kept.size(); ++r) {
        const Node& nd = nodes_[size_t(ws.kept[r])];
        const double p = ws.prob[r];
        const double invb2 = 2.0 * nd.inv2b2;
        Eigen::Map<const Eigen::VectorXd> w(ws.wmat.data() + r * size_t(n), n);
        sum_db += p * nd.db;
        sum_invb2 += p * invb2;
        sum_lamb2 += p * nd.lam * invb2;
        lambda_bar += p * nd.lam;
        c_bar += p * nd.cs;
        qf.noalias() += (p * nd.cdab) * w;
        qg.noalias() += (p * nd.a * invb2) * w;
        ql.noalias() += (p * nd.lam * nd.a * invb2) * w;
    }
    const Eigen::MatrixXd& xt = ds_->points();
    FieldDecomposition dec;
    dec.total = sum_db * u + xt.transpose() * qf;
    dec.marginal_gradient = sum_invb2 * u - xt.transpose() * qg;
    const Eigen::VectorXd lam_grad = sum_lamb2 * u - xt.transpose() * ql;
    dec.lambda_bar = lambda_bar;
    dec.c_scale_bar = c_bar;
    dec.natural_gradient = lambda_bar * dec.marginal_gradient;
    dec.transport_correction = lam_grad - dec.natural_gradient;
    dec.linear_drift = c_bar * u;
    return dec;
}

double FieldEvaluator::jensen_gap(const Eigen::VectorXd& u, double t_true, Workspace& ws) const {
    posterior_pass(u, ws, true);
    double harm = 0.0;
    for (size_t r = 0; r < ws.kept.size(); ++r) {
        harm += ws.prob[r] / nodes_[size_t(ws.kept[r])].b;
    }
    const double b_true = schedule_.eval(std::clamp(t_true, schedule_.t_min(), kGainTimeCeil)).b;
    return b_true * harm - 1.0;
}

}  // namespace margen
