#include "ionlrb/propagator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "ionlrb/csv.hpp"
#include "ionlrb/errors.hpp"
#include "ionlrb/parallel.hpp"

namespace ionlrb::prop {

double spectral_norm_2x2(const Eigen::Matrix2d& b) {
    const double f2 = b.squaredNorm();
    const double det = b.determinant();
    const double disc = std::max(0.0, f2 * f2 - 4.0 * det * det);
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

double Propagator::block_norm(int j, int k) const {
    return spectral_norm_2x2(block(j, k));
}

double Propagator::symplectic_defect() const {
    const int n = size();
    Eigen::MatrixXd jmat = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        jmat(2 * i, 2 * i + 1) = -1.0;
        jmat(2 * i + 1, 2 * i) = 1.0;
    }
    return (w.transpose() * jmat * w - jmat).norm();
}

HarmonicModel::HarmonicModel(const crystal::QuadraticCoupling& q) {
    const int n = q.size();
    omega_t_ = q.omega_t;
    // x-sector dynamics: x'' = -omega_t * A x with A = q.xx
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.xx);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("HarmonicModel: eigensolver failed");
    omega_.resize(n);
    for (int k = 0; k < n; ++k) {
        const double w2 = omega_t_ * es.eigenvalues()(k);
        if (w2 <= 0.0)
            throw UnstableCrystalError("HarmonicModel: non-positive mode frequency");
        omega_(k) = std::sqrt(w2);
    }
    modes_ = es.eigenvectors();
}

// W_jk(dt) = sum_n M_jn M_kn R_n(dt),
// R_n = [[cos w_n dt, (w_t/w_n) sin w_n dt], [-(w_n/w_t) sin w_n dt, cos w_n dt]]
Eigen::Matrix2d HarmonicModel::block(int j, int k, double dt) const {
    const int n = size();
    Eigen::Matrix2d b = Eigen::Matrix2d::Zero();
    for (int m = 0; m < n; ++m) {
        const double mm = modes_(j, m) * modes_(k, m);
        const double c = std::cos(omega_(m) * dt);
        const double s = std::sin(omega_(m) * dt);
        b(0, 0) += mm * c;
        b(0, 1) += mm * (omega_t_ / omega_(m)) * s;
        b(1, 0) -= mm * (omega_(m) / omega_t_) * s;
        b(1, 1) += mm * c;
    }
    return b;
}

double HarmonicModel::block_norm(int j, int k, double dt) const {
    return spectral_norm_2x2(block(j, k, dt));
}

double HarmonicModel::xp_entry(int i, int j, double dt) const {
    double v = 0.0;
    for (int m = 0; m < size(); ++m)
        v += modes_(i, m) * modes_(j, m) * (omega_t_ / omega_(m)) *
             std::sin(omega_(m) * dt);
    return v;
}

Eigen::MatrixXd HarmonicModel::matrix(double dt) const {
    const int n = size();
    Eigen::VectorXd c(n), sxp(n), spx(n);
    for (int m = 0; m < n; ++m) {
        c(m) = std::cos(omega_(m) * dt);
        const double s = std::sin(omega_(m) * dt);
        sxp(m) = (omega_t_ / omega_(m)) * s;
        spx(m) = -(omega_(m) / omega_t_) * s;
    }
    const Eigen::MatrixXd wxx = modes_ * c.asDiagonal() * modes_.transpose();
    const Eigen::MatrixXd wxp = modes_ * sxp.asDiagonal() * modes_.transpose();
    const Eigen::MatrixXd wpx = modes_ * spx.asDiagonal() * modes_.transpose();
    Eigen::MatrixXd w(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            w(2 * i, 2 * j) = wxx(i, j);
            w(2 * i, 2 * j + 1) = wxp(i, j);
            w(2 * i + 1, 2 * j) = wpx(i, j);
            w(2 * i + 1, 2 * j + 1) = wxx(i, j);
        }
    }
    return w;
}

Propagator HarmonicModel::propagator(double t, double t0) const {
    return Propagator{matrix(t - t0), t, t0};
}

Eigen::MatrixXd HarmonicModel::block_norm_field(int source,
                                                const std::vector<double>& times) const {
    const int n = size();
    if (source < 0 || source >= n)
        throw SizeError("block_norm_field: source out of range");
    Eigen::MatrixXd field(n, static_cast<long>(times.size()));
    parallel_for(0, static_cast<long>(times.size()), [&](long ti) {
        const double dt = times[static_cast<size_t>(ti)];
        Eigen::VectorXd cc(n), cxp(n), cpx(n);
        for (int m = 0; m < n; ++m) {
            const double msrc = modes_(source, m);
            const double c = std::cos(omega_(m) * dt);
            const double s = std::sin(omega_(m) * dt);
            cc(m) = msrc * c;
            cxp(m) = msrc * (omega_t_ / omega_(m)) * s;
            cpx(m) = -msrc * (omega_(m) / omega_t_) * s;
        }
        const Eigen::VectorXd xx = modes_ * cc;
        const Eigen::VectorXd xp = modes_ * cxp;
        const Eigen::VectorXd px = modes_ * cpx;
        for (int j = 0; j < n; ++j) {
            Eigen::Matrix2d b;
            b << xx(j), xp(j), px(j), xx(j);
            field(j, ti) = spectral_norm_2x2(b);
        }
    });
    return field;
}

Eigen::MatrixXd HarmonicModel::xp_field(int source,
                                        const std::vector<double>& times) const {
    const int n = size();
    if (source < 0 || source >= n) throw SizeError("xp_field: source out of range");
    Eigen::MatrixXd field(n, static_cast<long>(times.size()));
    parallel_for(0, static_cast<long>(times.size()), [&](long ti) {
        const double dt = times[static_cast<size_t>(ti)];
        Eigen::VectorXd cxp(n);
        for (int m = 0; m < n; ++m)
            cxp(m) = modes_(source, m) * (omega_t_ / omega_(m)) *
                     std::sin(omega_(m) * dt);
        field.col(ti) = modes_ * cxp;
    });
    return field;
}

Propagator propagate_constant(const crystal::QuadraticCoupling& q, double t, double t0) {
    if (!q.profile.constant())
        throw NotApplicableError("propagate_constant: profile is time dependent");
    return HarmonicModel(q).propagator(t, t0);
}

Propagator propagate_constant_generic(const Eigen::MatrixXd& q2n, double t, double t0) {
    const int dim = static_cast<int>(q2n.rows());
    if (dim % 2 != 0 || q2n.cols() != dim)
        throw SizeError("propagate_constant_generic: need a 2N x 2N matrix");
    Eigen::MatrixXd jq(dim, dim);
    // generator -J Q, J = blockdiag [[0,-1],[1,0]]
    for (int i = 0; i < dim / 2; ++i) {
        jq.row(2 * i) = q2n.row(2 * i + 1);
        jq.row(2 * i + 1) = -q2n.row(2 * i);
    }
    const Eigen::MatrixXd w = (jq * (t - t0)).exp();
    return Propagator{w, t, t0};
}

std::vector<Propagator> propagate_timedep(const crystal::QuadraticCoupling& q,
                                          const std::vector<double>& grid) {
    if (grid.size() < 2) throw SizeError("propagate_timedep: grid needs >= 2 points");
    for (size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1]))
            throw SizeError("propagate_timedep: grid must be strictly increasing");

    double max_scale = 1.0;
    for (const auto& [tq, sc] : q.profile.quench) {
        (void)tq;
        max_scale = std::max(max_scale, std::abs(sc));
    }
    const HarmonicModel base(q);
    const double omega_fast = base.omega_max() * std::sqrt(max_scale);
    const double dt_required = 2.0 * M_PI / omega_fast / 20.0;
    double dt_max = 0.0;
    for (size_t k = 1; k < grid.size(); ++k)
        dt_max = std::max(dt_max, grid[k] - grid[k - 1]);
    if (dt_max > dt_required)
        throw ResolutionError("propagate_timedep: grid step " + io::format_double(dt_max) +
                                  " exceeds required " + io::format_double(dt_required),
                              dt_required);

    // cache models per distinct scale (piecewise-constant profile)
    std::vector<std::pair<double, HarmonicModel>> models;
    auto model_for = [&](double scale) -> const HarmonicModel& {
        for (const auto& [s, m] : models)
            if (s == scale) return m;
        crystal::QuadraticCoupling qs = q;
        qs.xx *= scale;
        qs.omega_t *= scale;
        qs.profile = {};
        models.emplace_back(scale, HarmonicModel(qs));
        return models.back().second;
    };

    std::vector<Propagator> out;
    out.reserve(grid.size());
    const int n = q.size();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    out.push_back(Propagator{acc, grid[0], grid[0]});
    for (size_t k = 1; k < grid.size(); ++k) {
        const double tm = 0.5 * (grid[k] + grid[k - 1]);
        const double dt = grid[k] - grid[k - 1];
        acc = model_for(q.profile.scale_at(tm)).matrix(dt) * acc;
        out.push_back(Propagator{acc, grid[k], grid[0]});
    }
    return out;
}

PulseShape delta_like_gaussian(double area, double center, double width) {
    const double norm = area / (width * std::sqrt(2.0 * M_PI));
    PulseShape p;
    p.envelope = [norm, center, width](double t) {
        const double u = (t - center) / width;
        return norm * std::exp(-0.5 * u * u);
    };
    p.support_lo = center - 8.0 * width;
    p.support_hi = center + 8.0 * width;
    return p;
}

PulseShape rectangular_pulse(double area, double start, double width) {
    PulseShape p;
    const double amp = area / width;
    p.envelope = [amp, start, width](double t) {
        return (t >= start && t <= start + width) ? amp : 0.0;
    };
    p.support_lo = start;
    p.support_hi = start + width;
    return p;
}

double impulsive_phase_delta(const HarmonicModel& m, int i, int j, double t0,
                             double tf, double theta_i, double theta_j) {
    return m.xp_entry(i, j, tf - t0) * theta_i * theta_j;
}

namespace {

// composite Simpson over [a,b] with 2^level panels
double simpson(const std::function<double(double)>& f, double a, double b, int level) {
    const int n = 1 << level;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += f(a + k * h) * ((k % 2) ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

double impulsive_phase(const HarmonicModel& m, int i, int j, const PulseShape& fi,
                       const PulseShape& fj, double t0, double tf, double tol,
                       int max_level) {
    const double lo1 = std::max(t0, fi.support_lo), hi1 = std::min(tf, fi.support_hi);
    const double lo2 = std::max(t0, fj.support_lo);
    if (!(hi1 > lo1)) return 0.0;

    auto outer = [&](int level) {
        auto inner_fn = [&](double tau1) {
            const double hi2 = std::min(tau1, fj.support_hi);
            if (!(hi2 > lo2)) return 0.0;
            auto f2 = [&](double tau2) {
                return m.xp_entry(i, j, tau1 - tau2) * fj.envelope(tau2);
            };
            return fi.envelope(tau1) * simpson(f2, lo2, hi2, level);
        };
        return simpson(inner_fn, lo1, hi1, level);
    };

    double prev = outer(3);
    for (int level = 4; level <= max_level; ++level) {
        const double cur = outer(level);
        const double err = std::abs(cur - prev);
        if (err < tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    throw QuadratureToleranceError("impulsive_phase: quadrature did not reach tolerance");
}

}  // namespace ionlrb::prop
