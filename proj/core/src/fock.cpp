#include "ionlrb/fock.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "ionlrb/csv.hpp"
#include "ionlrb/errors.hpp"

namespace ionlrb::fock {

namespace {

const Complex kI(0.0, 1.0);

DenseC pauli(Axis a) {
    DenseC m(2, 2);
    switch (a) {
        case Axis::X: m << 0, 1, 1, 0; break;
        case Axis::Y: m << 0, -kI, kI, 0; break;
        case Axis::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

DenseC boson_ladder(int nb) {  // annihilation on occupations < nb
    DenseC a = DenseC::Zero(nb, nb);
    for (int n = 1; n < nb; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

struct LocalBoson {
    DenseC x, p, xsq, psq;
    explicit LocalBoson(int nb) {
        const DenseC a = boson_ladder(nb);
        const DenseC ad = a.adjoint();
        x = (a + ad) / std::sqrt(2.0);
        p = kI * (ad - a) / std::sqrt(2.0);
        const DenseC num = ad * a;
        const DenseC a2 = a * a;
        const DenseC one = DenseC::Identity(nb, nb);
        // cutoff projections: P x^2 P = (a^2 + (a^dag)^2 + 2 a^dag a + 1)/2,
        // whose matrix elements between kept states all survive truncation
        // (unlike (P x P)^2)
        xsq = 0.5 * (a2 + a2.adjoint() + 2.0 * num + one);
        psq = 0.5 * (-a2 - a2.adjoint() + 2.0 * num + one);
    }
};

// I_left (x) local (x) I_right, site 0 leftmost
SparseC lift_local(int site, int n_sites, long site_dim, const DenseC& local) {
    long left = 1, right = 1;
    for (int k = 0; k < site; ++k) left *= site_dim;
    for (int k = site + 1; k < n_sites; ++k) right *= site_dim;
    const long dim = left * site_dim * right;

    std::vector<Eigen::Triplet<Complex>> trips;
    for (long l = 0; l < left; ++l) {
        for (long r = 0; r < site_dim; ++r) {
            for (long c = 0; c < site_dim; ++c) {
                const Complex v = local(r, c);
                if (v == Complex(0, 0)) continue;
                for (long rr = 0; rr < right; ++rr)
                    trips.emplace_back((l * site_dim + r) * right + rr,
                                       (l * site_dim + c) * right + rr, v);
            }
        }
    }
    SparseC out(dim, dim);
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

double power_norm(const DenseC& m, int iters = 400, double tol = 1e-13) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    Eigen::VectorXcd v(m.cols());
    for (long k = 0; k < v.size(); ++k)
        v(k) = Complex(std::cos(0.7 * double(k) + 0.3), std::sin(1.3 * double(k) + 0.1));
    v.normalize();
    double lam = 0.0, prev = -1.0;
    for (int it = 0; it < iters; ++it) {
        const Eigen::VectorXcd w = m.adjoint() * (m * v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        lam = std::sqrt(nw);
        v = w / nw;
        if (it > 6 && std::abs(lam - prev) < tol * std::max(1.0, lam)) break;
        prev = lam;
    }
    return lam;
}

}  // namespace

FockSystem::FockSystem(const FockParams& p) {
    n_sites_ = static_cast<int>(p.xx.rows());
    if (n_sites_ < 1) throw SizeError("FockSystem: empty coupling matrix");
    if (p.xx.cols() != n_sites_) throw SizeError("FockSystem: xx must be square");
    if (p.n_max < 1) throw SizeError("FockSystem: n_max must be >= 1");
    if (!p.b_field.empty() && static_cast<int>(p.b_field.size()) != n_sites_)
        throw SizeError("FockSystem: b_field size mismatch");
    n_max_ = p.n_max;
    nb_ = p.n_max + 1;
    omega_t_ = p.omega_t;
    xx_ = p.xx;

    double dimf = 1.0;
    for (int i = 0; i < n_sites_; ++i) dimf *= 2.0 * nb_;
    if (dimf > double(p.dim_cap))
        throw SizeError("FockSystem: dimension " + std::to_string((long long)(dimf)) +
                        " exceeds cap " + std::to_string(p.dim_cap));
    dim_ = long(dimf);

    const LocalBoson lb(nb_);
    const long sd = 2 * nb_;
    auto boson_local = [&](const DenseC& b) {
        DenseC loc = DenseC::Zero(sd, sd);
        loc.topLeftCorner(nb_, nb_) = b;
        loc.bottomRightCorner(nb_, nb_) = b;
        return loc;  // I_2 (x) b
    };

    x_ops_.reserve(n_sites_);
    p_ops_.reserve(n_sites_);
    for (int i = 0; i < n_sites_; ++i) {
        x_ops_.push_back(lift_local(i, n_sites_, sd, boson_local(lb.x)));
        p_ops_.push_back(lift_local(i, n_sites_, sd, boson_local(lb.p)));
    }

    h0_ = DenseC::Zero(dim_, dim_);
    for (int i = 0; i < n_sites_; ++i) {
        h0_ += 0.5 * xx_(i, i) * DenseC(lift_local(i, n_sites_, sd, boson_local(lb.xsq)));
        h0_ += 0.5 * omega_t_ * DenseC(lift_local(i, n_sites_, sd, boson_local(lb.psq)));
        for (int j = i + 1; j < n_sites_; ++j)
            if (xx_(i, j) != 0.0) h0_ += xx_(i, j) * DenseC(SparseC(x_ops_[i] * x_ops_[j]));
        if (!p.b_field.empty()) {
            const Eigen::Vector3d& b = p.b_field[i];
            if (b.x() != 0.0) h0_ += b.x() * DenseC(spin(i, Axis::X));
            if (b.y() != 0.0) h0_ += b.y() * DenseC(spin(i, Axis::Y));
            if (b.z() != 0.0) h0_ += b.z() * DenseC(spin(i, Axis::Z));
        }
    }
    norm_estimate_ = power_norm(h0_, 80, 1e-6);
}

SparseC FockSystem::spin(int site, Axis a) const {
    const long sd = 2 * nb_;
    DenseC loc = DenseC::Zero(sd, sd);
    const DenseC pm = pauli(a);
    const DenseC idb = DenseC::Identity(nb_, nb_);
    loc.topLeftCorner(nb_, nb_) = pm(0, 0) * idb;
    loc.topRightCorner(nb_, nb_) = pm(0, 1) * idb;
    loc.bottomLeftCorner(nb_, nb_) = pm(1, 0) * idb;
    loc.bottomRightCorner(nb_, nb_) = pm(1, 1) * idb;
    return lift_local(site, n_sites_, sd, loc);
}

SparseC FockSystem::position(int site) const { return x_ops_.at(site); }
SparseC FockSystem::momentum(int site) const { return p_ops_.at(site); }

void FockSystem::add_force(int site, std::function<double(double)> envelope) {
    DriveTerm t;
    t.coefficient = std::move(envelope);
    t.op = SparseC(x_ops_.at(site) * spin(site, Axis::Z));
    drives_.push_back(std::move(t));
}

void FockSystem::add_drive(DriveTerm term) { drives_.push_back(std::move(term)); }

DenseC FockSystem::hamiltonian(double t) const {
    DenseC h = h0_;
    for (const auto& d : drives_) {
        const double c = d.coefficient(t);
        if (c != 0.0) h += c * DenseC(d.op);
    }
    return h;
}

double FockSystem::hermiticity_defect() const {
    const DenseC h = hamiltonian(0.0);
    const double scale = std::max(1e-300, h.norm());
    return (h - h.adjoint()).norm() / scale;
}

DenseC FockSystem::expm(const DenseC& h, double t) {
    Eigen::SelfAdjointEigenSolver<DenseC> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("FockSystem::expm: eigensolver failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    Eigen::VectorXcd ph(ev.size());
    for (long k = 0; k < ev.size(); ++k) ph(k) = std::exp(-kI * ev(k) * t);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

DenseC FockSystem::evolve(double t0, double t1, int steps) const {
    if (!(t1 >= t0)) throw SizeError("evolve: t1 must be >= t0");
    if (t1 == t0) return DenseC::Identity(dim_, dim_);

    if (drives_.empty()) {
        if (!static_eig_ready_) {
            static_es_.compute(h0_);
            if (static_es_.info() != Eigen::Success)
                throw std::runtime_error("evolve: eigensolver failed");
            static_eig_ready_ = true;
        }
        const Eigen::VectorXd& ev = static_es_.eigenvalues();
        Eigen::VectorXcd ph(ev.size());
        for (long k = 0; k < ev.size(); ++k) ph(k) = std::exp(-kI * ev(k) * (t1 - t0));
        return static_es_.eigenvectors() * ph.asDiagonal() *
               static_es_.eigenvectors().adjoint();
    }

    double amp = norm_estimate_;
    for (const auto& d : drives_) {
        double peak = 0.0;
        for (int k = 0; k <= 64; ++k)
            peak = std::max(peak, std::abs(d.coefficient(t0 + (t1 - t0) * k / 64.0)));
        amp += peak * power_norm(DenseC(d.op), 60, 1e-4);
    }
    const int required =
        std::max(1, int(std::ceil(20.0 * (t1 - t0) * amp / (2.0 * M_PI))));
    if (steps <= 0) steps = required;
    if (steps < required)
        throw ResolutionError("evolve: " + std::to_string(steps) + " steps, need " +
                                  std::to_string(required),
                              (t1 - t0) / required);

    DenseC u = DenseC::Identity(dim_, dim_);
    const double dt = (t1 - t0) / steps;
    for (int k = 0; k < steps; ++k) {
        const double tm = t0 + (k + 0.5) * dt;
        u = expm(hamiltonian(tm), dt) * u;
    }
    return u;
}

double FockSystem::unitarity_defect(const DenseC& u) const {
    return (u.adjoint() * u - DenseC::Identity(u.rows(), u.cols())).norm();
}

std::vector<long> FockSystem::bulk_indices(int n_phys) const {
    if (n_phys < 0) n_phys = n_max_ / 2;
    std::vector<long> keep;
    for (long idx = 0; idx < dim_; ++idx) {
        long rest = idx;
        bool ok = true;
        for (int s = 0; s < n_sites_; ++s) {
            const long local = rest % (2L * nb_);
            rest /= 2L * nb_;
            if (local % nb_ > n_phys) {
                ok = false;
                break;
            }
        }
        if (ok) keep.push_back(idx);
    }
    return keep;
}

double FockSystem::commutator_norm(const DenseC& u, int site_a, Axis a, int site_b,
                                   Axis b, int n_phys) const {
    const SparseC sa = spin(site_a, a);
    const SparseC sb = spin(site_b, b);
    const DenseC at = u.adjoint() * (sa * u);
    const DenseC c = at * DenseC(sb) - DenseC(sb) * at;
    const auto keep = bulk_indices(n_phys);
    DenseC cp(keep.size(), keep.size());
    for (size_t r = 0; r < keep.size(); ++r)
        for (size_t cc = 0; cc < keep.size(); ++cc)
            cp(long(r), long(cc)) = c(keep[r], keep[cc]);
    return power_norm(cp);
}

Eigen::Matrix2d FockSystem::boson_commutator_block(const DenseC& u, int i, int k,
                                                   int n_phys, double* scatter) const {
    const DenseC xt = u.adjoint() * (x_ops_[i] * u);
    const DenseC pt = u.adjoint() * (p_ops_[i] * u);
    const DenseC xk = DenseC(x_ops_[k]);
    const DenseC pk = DenseC(p_ops_[k]);
    const auto keep = bulk_indices(n_phys);

    double worst = 0.0;
    auto scalar_part = [&](const DenseC& c) {
        Complex tr(0, 0);
        for (long idx : keep) tr += c(idx, idx);
        const Complex s = tr / double(keep.size());
        double dev = 0.0;
        for (size_t r = 0; r < keep.size(); ++r)
            for (size_t cc = 0; cc < keep.size(); ++cc)
                dev += std::norm(c(keep[r], keep[cc]) - (r == cc ? s : Complex(0, 0)));
        worst = std::max(worst, std::sqrt(dev / double(keep.size())));
        return s;
    };

    Eigen::Matrix2d w;
    w(0, 1) = std::real(scalar_part(kI * (xt * xk - xk * xt)));   // W_xp
    w(0, 0) = std::real(scalar_part(-kI * (xt * pk - pk * xt)));  // W_xx
    w(1, 1) = std::real(scalar_part(kI * (pt * xk - xk * pt)));   // W_pp
    w(1, 0) = std::real(scalar_part(-kI * (pt * pk - pk * pt)));  // W_px
    if (scatter) *scatter = worst;
    return w;
}

// ---------------------------------------------------------------------------
// thermal states
// ---------------------------------------------------------------------------

namespace {

struct BosonSpace {
    int n_sites, nb;
    long dim;
    std::vector<SparseC> x, p;
    DenseC hb;

    BosonSpace(const Eigen::MatrixXd& xx, double omega_t, int n_max)
        : n_sites(static_cast<int>(xx.rows())), nb(n_max + 1) {
        dim = 1;
        for (int i = 0; i < n_sites; ++i) dim *= nb;
        const LocalBoson lb(nb);
        for (int i = 0; i < n_sites; ++i) {
            x.push_back(lift_local(i, n_sites, nb, lb.x));
            p.push_back(lift_local(i, n_sites, nb, lb.p));
        }
        hb = DenseC::Zero(dim, dim);
        for (int i = 0; i < n_sites; ++i) {
            hb += 0.5 * xx(i, i) * DenseC(lift_local(i, n_sites, nb, lb.xsq));
            hb += 0.5 * omega_t * DenseC(lift_local(i, n_sites, nb, lb.psq));
            for (int j = i + 1; j < n_sites; ++j)
                if (xx(i, j) != 0.0) hb += xx(i, j) * DenseC(SparseC(x[i] * x[j]));
        }
    }
};

}  // namespace

ThermalState thermal_state(const FockSystem& sys, double n_bar_target,
                           const Eigen::VectorXcd* spin_state) {
    const int n = sys.sites();
    const int nb = sys.n_max() + 1;
    BosonSpace bs(sys.coupling_xx(), sys.omega_t(), sys.n_max());

    Eigen::SelfAdjointEigenSolver<DenseC> es(bs.hb);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("thermal_state: eigensolver failed");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mx(sys.coupling_xx());
    Eigen::VectorXd wn(n);
    for (int k = 0; k < n; ++k) wn(k) = std::sqrt(sys.omega_t() * mx.eigenvalues()(k));
    const double w_top = wn.maxCoeff();

    ThermalState out;
    DenseC rho_b;
    if (n_bar_target <= 0.0) {
        out.temperature = 0.0;
        rho_b = es.eigenvectors().col(0) * es.eigenvectors().col(0).adjoint();
    } else {
        out.temperature = w_top / std::log1p(1.0 / n_bar_target);
        const Eigen::VectorXd& ev = es.eigenvalues();
        Eigen::VectorXd weights = (-(ev.array() - ev(0)) / out.temperature).exp();
        weights /= weights.sum();
        rho_b = es.eigenvectors() * weights.asDiagonal() * es.eigenvectors().adjoint();
    }

    double leak = 0.0;
    for (long idx = 0; idx < bs.dim; ++idx) {
        long rest = idx;
        bool at_cut = false;
        for (int s = 0; s < n; ++s) {
            if (rest % nb == sys.n_max()) at_cut = true;
            rest /= nb;
        }
        if (at_cut) leak += std::real(rho_b(idx, idx));
    }
    out.leakage = leak;
    rho_b /= std::real(rho_b.trace());

    out.mode_occupation.resize(n);
    for (int k = 0; k < n; ++k) {
        DenseC xn = DenseC::Zero(bs.dim, bs.dim);
        DenseC pn = DenseC::Zero(bs.dim, bs.dim);
        for (int i = 0; i < n; ++i) {
            xn += mx.eigenvectors()(i, k) * DenseC(bs.x[i]);
            pn += mx.eigenvectors()(i, k) * DenseC(bs.p[i]);
        }
        const double r = std::sqrt(wn(k) / sys.omega_t());
        const DenseC bop = (r * xn + kI * pn / r) / std::sqrt(2.0);
        out.mode_occupation(k) = std::real((rho_b * (bop.adjoint() * bop)).trace());
    }

    Eigen::VectorXcd psi;
    const long sdim = 1L << n;
    if (spin_state) {
        if (spin_state->size() != sdim)
            throw SizeError("thermal_state: spin state dimension mismatch");
        psi = *spin_state;
    } else {
        psi = Eigen::VectorXcd::Zero(sdim);
        psi(sdim - 1) = 1.0;  // |down...down>, local spin index 1 = down
    }

    // lift rho_spin (x) rho_b into the site-major interleaved basis
    std::vector<long> sidx(sys.dim()), bidx(sys.dim());
    for (long idx = 0; idx < sys.dim(); ++idx) {
        long rest = idx, sacc = 0, bacc = 0, bmult = 1;
        for (int s = n - 1; s >= 0; --s) {
            const long local = rest % (2L * nb);
            rest /= 2L * nb;
            sacc |= (local / nb) << (n - 1 - s);
            bacc += (local % nb) * bmult;
            bmult *= nb;
        }
        sidx[idx] = sacc;
        bidx[idx] = bacc;
    }
    out.rho = DenseC::Zero(sys.dim(), sys.dim());
    for (long r = 0; r < sys.dim(); ++r) {
        const Complex sr = psi(sidx[r]);
        if (sr == Complex(0, 0)) continue;
        for (long c = 0; c < sys.dim(); ++c) {
            const Complex sc = psi(sidx[c]);
            if (sc == Complex(0, 0)) continue;
            out.rho(r, c) = sr * std::conj(sc) * rho_b(bidx[r], bidx[c]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// impulsive regime
// ---------------------------------------------------------------------------

double impulsive_closed_form(const prop::HarmonicModel& m, int i, int j, double t0,
                             double tf, double theta_i, double theta_j, double h) {
    if (h != 0.0) throw NotApplicableError("impulsive_closed_form: requires h = 0");
    return 8.0 * std::abs(std::sin(m.xp_entry(i, j, tf - t0) * theta_i * theta_j));
}

ImpulsiveFockResult run_impulsive_fock(const crystal::QuadraticCoupling& q, int i,
                                       int j, double t0, double tf, double theta_i,
                                       double theta_j, double pulse_width, int n_max,
                                       int n_phys) {
    if (!(pulse_width > 0.0) || !(tf - t0 > 2.0 * pulse_width))
        throw SizeError("run_impulsive_fock: bad pulse window");
    FockParams p;
    p.xx = q.xx;
    p.omega_t = q.omega_t;
    p.n_max = n_max;
    FockSystem sys(p);

    const DenseC& h0 = sys.static_hamiltonian();
    const DenseC fj = DenseC(SparseC(sys.position(j) * sys.spin(j, Axis::Z)));
    const DenseC fi = DenseC(SparseC(sys.position(i) * sys.spin(i, Axis::Z)));
    const DenseC u = FockSystem::expm(h0 + (theta_i / pulse_width) * fi, pulse_width) *
                     FockSystem::expm(h0, tf - t0 - 2.0 * pulse_width) *
                     FockSystem::expm(h0 + (theta_j / pulse_width) * fj, pulse_width);

    ImpulsiveFockResult r;
    r.commutator_norm = sys.commutator_norm(u, i, Axis::X, j, Axis::X, n_phys);
    r.theta_fock = 0.5 * std::asin(std::min(1.0, r.commutator_norm / 2.0));

    prop::HarmonicModel hm(q);
    r.phase_delta = hm.xp_entry(i, j, tf - t0) * theta_i * theta_j;
    r.closed_form = 8.0 * std::abs(std::sin(r.phase_delta));
    r.fock_form = 8.0 * std::abs(std::sin(r.theta_fock));
    r.exact_prediction = 2.0 * std::abs(std::sin(2.0 * r.phase_delta));
    return r;
}

// ---------------------------------------------------------------------------
// linear-response protocol
// ---------------------------------------------------------------------------

namespace {

DenseC local_rotation(const FockSystem& sys, int site, Axis a, double angle) {
    // exp(i angle sigma) = cos(angle) + i sin(angle) sigma
    return std::cos(angle) * DenseC::Identity(sys.dim(), sys.dim()) +
           kI * std::sin(angle) * DenseC(sys.spin(site, a));
}

DenseC global_pi_x(const FockSystem& sys) {
    DenseC u = DenseC::Identity(sys.dim(), sys.dim());
    for (int s = 0; s < sys.sites(); ++s) u = DenseC(sys.spin(s, Axis::X)) * u;
    return u;
}

}  // namespace

std::string protocol_report_json(const ProtocolResult& r) {
    std::ostringstream os;
    os << "{\"lambda_B\": " << io::format_double(r.lambda_b)
       << ", \"derivative_fd\": " << io::format_double(r.derivative_fd)
       << ", \"commutator_direct\": " << io::format_double(r.commutator_direct)
       << ", \"abs_error\": " << io::format_double(r.abs_error)
       << ", \"n_max\": " << r.n_max
       << ", \"leakage\": " << io::format_double(r.leakage) << "}";
    return os.str();
}

ProtocolResult linear_response_protocol(FockSystem& sys, const ProtocolSetup& setup) {
    const int j = setup.source, i = setup.probe;
    const double t0 = setup.t0, tf = setup.tf;
    if (!(tf > t0)) throw SizeError("protocol: tf must exceed t0");
    const double tmid = 0.5 * (t0 + tf);
    const crystal::DriveSpec& dr = setup.drive;

    DenseC u1, u2;
    if (setup.schedule == ForceSchedule::Continuous) {
        auto half = [&](double lo, double hi, double sign) {
            sys.clear_forces();
            for (int s = 0; s < sys.sites(); ++s)
                sys.add_force(s, [&dr, sign](double t) {
                    return sign * dr.g * std::sin(dr.nu_tilde * t - dr.phi_tilde);
                });
            DenseC u = sys.evolve(lo, hi, setup.steps);
            sys.clear_forces();
            return u;
        };
        u1 = half(t0, tmid, +1.0);
        u2 = half(tmid, tf, -1.0);
    } else {
        const double w = setup.pulse_width;
        if (!(w > 0.0) || !(tmid - t0 > w) || !(tf - tmid > w))
            throw SizeError("protocol: pulse width incompatible with the window");
        DenseC fsum = DenseC::Zero(sys.dim(), sys.dim());
        for (int s = 0; s < sys.sites(); ++s)
            fsum += DenseC(SparseC(sys.position(s) * sys.spin(s, Axis::Z)));
        const DenseC& h0 = sys.static_hamiltonian();
        // pulse at the start of the first half, pulse at the end of the
        // second half, amplitude flipped by the echo convention
        u1 = FockSystem::expm(h0, tmid - t0 - w) * FockSystem::expm(h0 + dr.g * fsum, w);
        u2 = FockSystem::expm(h0 - dr.g * fsum, w) * FockSystem::expm(h0, tf - w - tmid);
    }

    const DenseC u_total = u2 * global_pi_x(sys) * u1;

    const ThermalState th = thermal_state(sys, setup.n_bar);
    const DenseC prep = local_rotation(sys, j, Axis::Y, M_PI / 4.0);  // |down> -> |+>
    const DenseC rho0 = prep * th.rho * prep.adjoint();

    const DenseC rot_i = local_rotation(sys, i, Axis::Y, M_PI / 4.0);
    const DenseC sz_i = DenseC(sys.spin(i, Axis::Z));
    const DenseC sx_j = DenseC(sys.spin(j, Axis::X));

    auto measure = [&](double lam) {
        const DenseC uv = std::cos(lam) * DenseC::Identity(sys.dim(), sys.dim()) -
                          kI * std::sin(lam) * sx_j;
        const DenseC u = rot_i * u_total * uv;
        return std::real((u * rho0 * u.adjoint() * sz_i).trace());
    };

    ProtocolResult r;
    r.lambda_b = setup.lambda_b;
    r.n_max = sys.n_max();
    r.leakage = th.leakage;
    r.derivative_fd =
        (measure(setup.lambda_b) - measure(-setup.lambda_b)) / (2.0 * setup.lambda_b);

    const DenseC sx_i_t = u_total.adjoint() * (rot_i.adjoint() * sz_i * rot_i) * u_total;
    const Complex direct = -kI * (rho0 * (sx_i_t * sx_j - sx_j * sx_i_t)).trace();
    r.commutator_direct = std::real(direct);
    r.abs_error = std::abs(r.derivative_fd - r.commutator_direct);
    return r;
}

double spin_echo_defect(FockSystem& sys, const crystal::DriveSpec& drive,
                        double delta_ac, double t_total, int steps) {
    const double tmid = 0.5 * t_total;
    const DenseC se = global_pi_x(sys);

    auto run_half = [&](double lo, double hi, double sign, bool spurious) {
        sys.clear_forces();
        for (int s = 0; s < sys.sites(); ++s)
            sys.add_force(s, [&drive, sign](double t) {
                return sign * drive.g * std::sin(drive.nu_tilde * t - drive.phi_tilde);
            });
        if (spurious) {
            for (int s = 0; s < sys.sites(); ++s) {
                DriveTerm term;
                term.coefficient = [&drive, delta_ac, sign](double t) {
                    return 0.5 * delta_ac +
                           sign * drive.omega_tilde * std::cos(drive.nu_tilde * t);
                };
                term.op = sys.spin(s, Axis::Z);
                sys.add_drive(std::move(term));
            }
        }
        const DenseC u = sys.evolve(lo, hi, steps);
        sys.clear_forces();
        return u;
    };

    const DenseC u_spur =
        run_half(tmid, t_total, -1.0, true) * se * run_half(0.0, tmid, +1.0, true);
    const DenseC u_clean =
        run_half(tmid, t_total, -1.0, false) * se * run_half(0.0, tmid, +1.0, false);
    return power_norm(u_spur - u_clean);
}

}  // namespace ionlrb::fock
