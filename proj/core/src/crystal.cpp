#include "ionlrb/crystal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "ionlrb/constants.hpp"
#include "ionlrb/csv.hpp"
#include "ionlrb/errors.hpp"

namespace ionlrb::crystal {

using constants::hz_to_rad;

double stiffness(const CrystalSpec& spec) {
    if (!(spec.d_m > 0.0)) throw SizeError("stiffness: d_m must be positive");
    return spec.e0_sq / (spec.mass_kg * spec.omega_t * spec.omega_t *
                         spec.d_m * spec.d_m * spec.d_m);
}

std::vector<double> solve_chain_equilibrium(int n, const CrystalSpec& spec,
                                            int max_iter) {
    if (n < 2) throw SizeError("solve_chain_equilibrium: need at least 2 ions");
    if (!(spec.omega_ax > 0.0))
        throw SizeError("solve_chain_equilibrium: omega_ax must be positive");
    const double ell = std::cbrt(spec.e0_sq / (spec.mass_kg * spec.omega_ax * spec.omega_ax));

    // dimensionless positions u, force balance u_i = sum_j sgn(u_i-u_j)/(u_i-u_j)^2
    Eigen::VectorXd u(n);
    const double spread = std::pow(double(n), 0.56);
    for (int i = 0; i < n; ++i)
        u(i) = spread * (2.0 * i / double(n - 1) - 1.0);

    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);
    double residual = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        grad = u;
        hess.setZero();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const double d = u(i) - u(j);
                const double ad = std::abs(d);
                grad(i) -= (d > 0 ? 1.0 : -1.0) / (d * d);
                const double h = 2.0 / (ad * ad * ad);
                hess(i, j) = -h;
                hess(i, i) += h;
            }
            hess(i, i) += 1.0;
        }
        residual = grad.cwiseAbs().maxCoeff();
        if (residual < 1e-13) break;
        u -= hess.ldlt().solve(grad);
    }
    if (residual >= 1e-12)
        throw ConvergenceError("solve_chain_equilibrium: Newton stalled, residual " +
                                   io::format_double(residual),
                               residual);
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[i] = u(i) * ell;
    std::sort(z.begin(), z.end());
    return z;
}

double TimeProfile::scale_at(double t) const {
    double s = 1.0;
    for (const auto& [tq, scale] : quench) {
        if (t >= tq) s = scale;
    }
    return s;
}

Eigen::Matrix2d QuadraticCoupling::block(int i, int j) const {
    Eigen::Matrix2d b = Eigen::Matrix2d::Zero();
    b(0, 0) = xx(i, j);
    b(1, 1) = (i == j) ? omega_t : 0.0;
    return b;
}

Eigen::MatrixXd QuadraticCoupling::full(double scale) const {
    const int n = size();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) q(2 * i, 2 * j) = scale * xx(i, j);
        q(2 * i + 1, 2 * i + 1) = scale * omega_t;
    }
    return q;
}

QuadraticCoupling build_Q(const CrystalSpec& spec, const lattice::DecayEnvelope& env) {
    const int n = static_cast<int>(spec.physical_positions.size());
    if (n < 1) throw SizeError("build_Q: crystal has no physical positions");
    if (spec.geometry.size() != n)
        throw SizeError("build_Q: geometry and physical positions disagree");

    QuadraticCoupling q;
    q.omega_t = spec.omega_t;
    q.envelope_distance = spec.geometry.distance;
    q.xx = Eigen::MatrixXd::Zero(n, n);

    const double m_wt = spec.mass_kg * spec.omega_t;
    for (int i = 0; i < n; ++i) {
        double vii = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double r = (spec.physical_positions[i] - spec.physical_positions[j]).norm();
            if (!(r > 0.0)) throw SingularCouplingError("build_Q: coincident ions");
            const double vij = spec.e0_sq / (r * r * r);
            q.xx(i, j) = vij / m_wt;
            vii -= vij;
        }
        q.xx(i, i) = spec.omega_t + vii / m_wt;
    }

    double kappa = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = q.envelope_distance(i, j);
            kappa = std::max(kappa, std::abs(q.xx(i, j)) / env(d));
        }
    }
    q.kappa = kappa;
    return q;
}

double kappa_value(const CrystalSpec& spec, const QuadraticCoupling& q,
                   KappaConvention conv) {
    switch (conv) {
        case KappaConvention::Supplement: return 8.0 * stiffness(spec) * spec.omega_t;
        case KappaConvention::MainText: return 4.0 * stiffness(spec) * spec.omega_t;
        case KappaConvention::Measured: return q.kappa;
    }
    return q.kappa;
}

DriveSpec DriveSpec::from_force(double g, double gamma, double delta_t,
                                double omega_t, double phi_tilde) {
    DriveSpec d;
    d.gamma = gamma;
    d.g = g;
    d.omega_tilde = g / (std::sqrt(2.0) * gamma);
    d.delta_t = delta_t;
    d.nu_tilde = omega_t + delta_t;
    d.phi_tilde = phi_tilde;
    return d;
}

void DriveSpec::validate() const {
    for (double th : pulse_areas) {
        if (!std::isfinite(th) || std::abs(th) > max_pulse_area)
            throw SizeError("DriveSpec: pulse area out of configured range");
    }
}

ModeData normal_modes(const QuadraticCoupling& q, const CrystalSpec& spec,
                      const DriveSpec& drive) {
    if (!q.profile.constant())
        throw NotApplicableError("normal_modes: needs a constant time profile");
    const int n = q.size();
    const double beta = stiffness(spec);

    // rescaled coupling: xx = omega_t (I + beta Vt)  =>  Vt = (xx/omega_t - I)/beta
    Eigen::MatrixXd vt = (q.xx / spec.omega_t - Eigen::MatrixXd::Identity(n, n)) / beta;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vt);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("normal_modes: eigensolver failed");

    ModeData m;
    m.omega_t = spec.omega_t;
    m.beta_omega_t = beta * spec.omega_t;
    m.omega.resize(n);
    m.modes.resize(n, n);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& ev = es.eigenvalues();
    // descending mode frequency, stable under degeneracy
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ev(a) > ev(b); });
    for (int k = 0; k < n; ++k) {
        const double arg = 1.0 + beta * ev(order[k]);
        if (arg <= 0.0)
            throw UnstableCrystalError("normal_modes: 1 + beta*Vt_n <= 0, mode " +
                                       std::to_string(k));
        m.omega(k) = spec.omega_t * std::sqrt(arg);
        m.modes.col(k) = es.eigenvectors().col(order[k]);
        // sign convention: largest-magnitude component positive
        int imax = 0;
        m.modes.col(k).cwiseAbs().maxCoeff(&imax);
        if (m.modes(imax, k) < 0) m.modes.col(k) = -m.modes.col(k);
    }

    m.gamma_n.resize(n);
    m.delta_n.resize(n);
    m.f_in.resize(n, n);
    const std::complex<double> i_phase =
        std::complex<double>(0.0, 1.0) * std::exp(std::complex<double>(0.0, drive.phi_tilde));
    for (int k = 0; k < n; ++k) {
        m.gamma_n(k) = drive.gamma * std::sqrt(spec.omega_t / m.omega(k));
        m.delta_n(k) = m.omega(k) - drive.nu_tilde;
        for (int i = 0; i < n; ++i)
            m.f_in(i, k) = i_phase * drive.omega_tilde * m.gamma_n(k) * m.modes(i, k) / 2.0;
    }

    m.scaled_distance.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m.scaled_distance(i, j) =
                (spec.physical_positions[i] - spec.physical_positions[j]).norm() / spec.d_m;
    return m;
}

CouplingResult effective_couplings(const ModeData& modes, const DriveSpec& drive) {
    const int n = static_cast<int>(modes.omega.size());
    const double wscale = modes.omega.cwiseAbs().maxCoeff();
    for (int k = 0; k < n; ++k) {
        if (std::abs(modes.delta_n(k)) < 1e-12 * wscale)
            throw ResonantDetuningError("effective_couplings: mode " + std::to_string(k) +
                                        " resonant with the drive");
    }

    CouplingResult r;
    r.far_detuned = true;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (std::abs(modes.f_in(i, k)) > 0.1 * std::abs(modes.delta_n(k)))
                r.far_detuned = false;

    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const Eigen::VectorXcd col = modes.f_in.col(k);
        j.noalias() -= (col.conjugate() * col.transpose()) / modes.delta_n(k);
    }
    double scale = j.cwiseAbs().maxCoeff();
    r.max_imag_rel = (scale > 0.0) ? j.imag().cwiseAbs().maxCoeff() / scale : 0.0;
    r.j_exact = j.real();

    r.j0 = (1.0 / 16.0) * (drive.g / drive.delta_t) * (drive.g / drive.delta_t) *
           modes.beta_omega_t;
    r.j_dipolar.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            if (i == k) {
                r.j_dipolar(i, k) = 0.0;
            } else {
                const double d = modes.scaled_distance(i, k);
                r.j_dipolar(i, k) = r.j0 / (d * d * d);
            }
        }
    }
    return r;
}

namespace {

CrystalSpec make_chain_spec(const std::string& species, double mass_kg, int n,
                            double omega_t_hz, double omega_ax_hz) {
    CrystalSpec s;
    s.species = species;
    s.mass_kg = mass_kg;
    s.e0_sq = constants::e0_squared;
    s.omega_t = hz_to_rad(omega_t_hz);
    s.omega_ax = hz_to_rad(omega_ax_hz);
    s.geometry = lattice::build_chain(n);
    const auto z = solve_chain_equilibrium(n, s);
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < n; ++i) dmin = std::min(dmin, z[i + 1] - z[i]);
    s.d_m = dmin;
    s.physical_positions.reserve(n);
    for (int i = 0; i < n; ++i) s.physical_positions.emplace_back(z[i], 0.0);
    return s;
}

CrystalSpec make_triangular_spec(const std::string& species, double mass_kg,
                                 int shells, int keep, double omega_t_hz,
                                 double d_m_um) {
    CrystalSpec s;
    s.species = species;
    s.mass_kg = mass_kg;
    s.e0_sq = constants::e0_squared;
    s.omega_t = hz_to_rad(omega_t_hz);
    s.d_m = d_m_um * 1e-6;
    auto g = lattice::build_triangular(shells);
    if (keep > 0 && keep < g.size()) g = lattice::truncate_radial(g, keep);
    s.geometry = g;
    s.physical_positions.reserve(g.size());
    for (const auto& p : g.positions) s.physical_positions.emplace_back(p * s.d_m);
    return s;
}

}  // namespace

CrystalSpec preset(const std::string& name) {
    using constants::ion_mass_kg;
    if (name == "mg_chain")
        return make_chain_spec("25Mg+", ion_mass_kg("25Mg+"), 30, 5e6, 0.25e6);
    if (name == "be_penning")
        return make_triangular_spec("9Be+", ion_mass_kg("9Be+"), 9, 253, 0.8e6, 20.0);
    if (name == "be_surface")
        return make_triangular_spec("9Be+", ion_mass_kg("9Be+"), 5, -1, 10e6, 40.0);
    throw std::invalid_argument("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
    return {"mg_chain", "be_penning", "be_surface"};
}

CrystalSpec spec_from_config(const std::map<std::string, std::string>& kv) {
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw std::invalid_argument("config missing key: " + k);
        return it->second;
    };
    const std::string geom = need("geometry");
    const int n_or_shells = std::stoi(need("N_or_shells"));
    const double omega_t_hz = std::stod(need("omega_t_hz"));
    const std::string species = kv.count("species") ? kv.at("species") : "";
    const double mass_kg = kv.count("mass_amu")
                               ? std::stod(kv.at("mass_amu")) * constants::amu_kg
                               : constants::ion_mass_kg(species);

    if (geom == "chain") {
        return make_chain_spec(species, mass_kg, n_or_shells, omega_t_hz,
                               std::stod(need("omega_ax_hz")));
    }
    if (geom == "triangular") {
        const int keep = kv.count("truncate_to") ? std::stoi(kv.at("truncate_to")) : -1;
        return make_triangular_spec(species, mass_kg, n_or_shells, keep, omega_t_hz,
                                    std::stod(need("d_m_um")));
    }
    throw std::invalid_argument("config geometry must be chain or triangular");
}

void write_modes_csv(std::ostream& os, const ModeData& m) {
    const int n = static_cast<int>(m.omega.size());
    os << "mode_index,omega_n_hz";
    for (int i = 0; i < n; ++i) os << ",participation_" << i;
    os << '\n';
    for (int k = 0; k < n; ++k) {
        os << k << ',' << io::format_double(constants::rad_to_hz(m.omega(k)));
        for (int i = 0; i < n; ++i) os << ',' << io::format_double(m.modes(i, k));
        os << '\n';
    }
}

}  // namespace ionlrb::crystal
