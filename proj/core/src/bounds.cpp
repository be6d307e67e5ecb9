#include "ionlrb/bounds.hpp"

#include <cmath>
#include <ostream>

#include "ionlrb/csv.hpp"
#include "ionlrb/errors.hpp"

namespace ionlrb::bounds {

BoundModel BoundModel::build(double a0, double beta_omega_t, double g, double delta_t,
                             double eta, double mu, double spin_norm,
                             crystal::KappaConvention conv) {
    BoundModel m;
    m.a0 = a0;
    m.alpha = (1.0 + a0) / a0;
    m.kappa = (conv == crystal::KappaConvention::MainText ? 4.0 : 8.0) * beta_omega_t;
    m.kappa_convention = conv;
    m.v_lr = m.kappa * a0;
    m.g = g;
    m.spin_norm = spin_norm;
    m.chi = 2.0 * g * g * spin_norm * m.alpha;
    m.eta = eta;
    m.mu = mu;
    m.alpha1 = 8.0 * a0;
    m.alpha2 = 0.25 * (1.0 + 1.0 / a0) * (g / beta_omega_t) * (g / beta_omega_t);
    m.beta_omega_t = beta_omega_t;
    m.delta_t = delta_t;
    if (delta_t != 0.0) {
        m.alpha2_tilde = (a0 / 8.0) * (g / delta_t) * (g / delta_t);
        m.j0 = (1.0 / 16.0) * (g / delta_t) * (g / delta_t) * beta_omega_t;
    }
    return m;
}

BoundModel BoundModel::from_crystal(const crystal::CrystalSpec& spec,
                                    const crystal::DriveSpec& drive, double a0,
                                    crystal::KappaConvention conv) {
    const double bwt = crystal::stiffness(spec) * spec.omega_t;
    return build(a0, bwt, drive.g, drive.delta_t, 3.0, 0.0, 1.0, conv);
}

double BoundModel::envelope(double d) const {
    return std::exp(-mu * d) * std::pow(1.0 + d, -eta);
}

std::string to_string(Kind k) {
    switch (k) {
        case Kind::Eq4: return "eq4";
        case Kind::Eq4Main: return "eq4_main";
        case Kind::Eq9: return "eq9";
        case Kind::Eq10: return "eq10";
        case Kind::Eq11Main: return "eq11_main";
        case Kind::Eq11Supp: return "eq11_supp";
        case Kind::Bosonic: return "bosonic";
        case Kind::ImpulsiveExact: return "impulsive_exact";
    }
    return "?";
}

Kind kind_from_string(const std::string& s) {
    if (s == "eq4") return Kind::Eq4;
    if (s == "eq4_main") return Kind::Eq4Main;
    if (s == "eq9") return Kind::Eq9;
    if (s == "eq10") return Kind::Eq10;
    if (s == "eq11_main" || s == "eq11") return Kind::Eq11Main;
    if (s == "eq11_supp") return Kind::Eq11Supp;
    if (s == "bosonic") return Kind::Bosonic;
    if (s == "impulsive_exact") return Kind::ImpulsiveExact;
    throw std::invalid_argument("unknown bound kind: " + s);
}

double generic_spin_boson_bound(const BoundModel& m, double d, double t,
                                bool main_text_prefactor) {
    if (t < 0.0 || d < 0.0) throw SizeError("generic_spin_boson_bound: t, d >= 0");
    const double s2 = m.spin_norm * m.spin_norm;
    double v = (2.0 * s2 / m.a0) * std::exp(m.v_lr * t) * m.envelope(d) *
               std::expm1(m.chi * m.a0 * t / m.v_lr);
    if (main_text_prefactor) v *= m.alpha;
    return v;
}

double trapped_ion_bound(const BoundModel& m, double d, double t) {
    if (t < 0.0 || d < 0.0) throw SizeError("trapped_ion_bound: t, d >= 0");
    const double x = m.beta_omega_t * t;
    return 2.0 / (m.a0 * std::pow(1.0 + d, 3.0)) * std::exp(m.alpha1 * x) *
           std::expm1(m.alpha2 * x);
}

double bosonic_bound(const BoundModel& m, double d, double t) {
    if (t < 0.0 || d < 0.0) throw SizeError("bosonic_bound: t, d >= 0");
    const double delta = (d == 0.0) ? 1.0 : 0.0;
    return delta + std::exp(m.kappa * m.a0 * t - m.mu * d) /
                       (m.a0 * std::pow(1.0 + d, m.eta));
}

double spin_model_bound(const BoundModel& m, double d, double t,
                        bool supplement_variant) {
    if (t < 0.0 || d < 0.0) throw SizeError("spin_model_bound: t, d >= 0");
    const double gd = m.g / m.delta_t;
    const double expo = supplement_variant ? m.a0 * gd * gd : m.alpha2_tilde;
    return 2.0 / (m.a0 * std::pow(1.0 + d, 3.0)) * std::expm1(expo * m.beta_omega_t * t);
}

double impulsive_bound(const BoundModel& m, double d, double t, double theta_i,
                       double theta_j) {
    if (t < 0.0 || d < 0.0) throw SizeError("impulsive_bound: t, d >= 0");
    return 8.0 * (1.0 + m.a0) / (m.a0 * std::pow(1.0 + d, 3.0)) *
           std::exp(m.alpha1 * m.beta_omega_t * t) * std::abs(theta_i * theta_j);
}

Eigen::MatrixXd impulsive_exact_envelope(const prop::HarmonicModel& model, int source,
                                         const std::vector<double>& times,
                                         double theta_i, double theta_j,
                                         ThetaConvention conv) {
    for (size_t k = 1; k < times.size(); ++k)
        if (!(times[k] >= times[k - 1]))
            throw SizeError("impulsive_exact_envelope: times must be nondecreasing");
    const Eigen::MatrixXd xp = model.xp_field(source, times);
    Eigen::MatrixXd env(xp.rows(), xp.cols());
    const double thth = theta_i * theta_j;
    for (int j = 0; j < xp.rows(); ++j) {
        double running = 0.0;
        for (int ti = 0; ti < xp.cols(); ++ti) {
            const double f = (conv == ThetaConvention::OutsideSine)
                                 ? 8.0 * std::abs(std::sin(xp(j, ti))) * std::abs(thth)
                                 : 8.0 * std::abs(std::sin(xp(j, ti) * thth));
            running = std::max(running, f);
            env(j, ti) = running;
        }
    }
    return env;
}

Eigen::MatrixXd bound_field(const BoundModel& m, Kind kind,
                            const Eigen::VectorXd& distances,
                            const std::vector<double>& times, double theta_i,
                            double theta_j) {
    Eigen::MatrixXd field(distances.size(), static_cast<long>(times.size()));
    for (long j = 0; j < distances.size(); ++j) {
        for (size_t ti = 0; ti < times.size(); ++ti) {
            const double d = distances(j);
            const double t = times[ti];
            double v = 0.0;
            switch (kind) {
                case Kind::Eq4: v = generic_spin_boson_bound(m, d, t); break;
                case Kind::Eq4Main: v = generic_spin_boson_bound(m, d, t, true); break;
                case Kind::Eq9: v = trapped_ion_bound(m, d, t); break;
                case Kind::Eq10: v = impulsive_bound(m, d, t, theta_i, theta_j); break;
                case Kind::Eq11Main: v = spin_model_bound(m, d, t, false); break;
                case Kind::Eq11Supp: v = spin_model_bound(m, d, t, true); break;
                case Kind::Bosonic: v = bosonic_bound(m, d, t); break;
                case Kind::ImpulsiveExact:
                    throw NotApplicableError(
                        "bound_field: impulsive_exact needs a propagator model");
            }
            field(j, static_cast<long>(ti)) = v;
        }
    }
    return field;
}

std::vector<std::optional<double>> front_extract(const Eigen::MatrixXd& field,
                                                 const std::vector<double>& times,
                                                 double threshold) {
    if (!(threshold > 0.0)) throw SizeError("front_extract: threshold must be > 0");
    if (field.cols() != static_cast<long>(times.size()))
        throw SizeError("front_extract: field/times size mismatch");
    if (field.minCoeff() < 0.0)
        throw SizeError("front_extract: field must be nonnegative");
    std::vector<std::optional<double>> out(field.rows());
    for (long j = 0; j < field.rows(); ++j) {
        for (long ti = 0; ti < field.cols(); ++ti) {
            if (field(j, ti) >= threshold) {
                if (ti == 0) {
                    out[j] = times[0];
                } else {
                    const double f0 = field(j, ti - 1), f1 = field(j, ti);
                    const double t0 = times[ti - 1], t1 = times[ti];
                    const double frac = (threshold - f0) / (f1 - f0);
                    out[j] = t0 + frac * (t1 - t0);
                }
                break;
            }
        }
    }
    return out;
}

FrontFit fit_front_speed(const Eigen::VectorXd& distances,
                         const std::vector<std::optional<double>>& crossings,
                         double d_min) {
    // least squares t = d / v + c
    double sd = 0, st = 0, sdd = 0, sdt = 0;
    int n = 0;
    for (long j = 0; j < distances.size(); ++j) {
        if (!crossings[j] || distances(j) < d_min) continue;
        const double d = distances(j), t = *crossings[j];
        sd += d;
        st += t;
        sdd += d * d;
        sdt += d * t;
        ++n;
    }
    FrontFit fit;
    fit.points = n;
    if (n < 2) return fit;
    const double slope = (n * sdt - sd * st) / (n * sdd - sd * sd);  // s per unit d
    fit.intercept = (st - slope * sd) / n;
    fit.speed = (slope != 0.0) ? 1.0 / slope : 0.0;
    return fit;
}

void write_field_csv(std::ostream& os, const lattice::LatticeGeometry& geom,
                     const Eigen::MatrixXd& field, const std::vector<double>& times,
                     const std::string& bound_kind) {
    if (field.rows() != geom.size() || field.cols() != static_cast<long>(times.size()))
        throw SizeError("write_field_csv: shape mismatch");
    os << "site_index,x,y,time_s,block_norm";
    if (!bound_kind.empty()) os << ",bound_kind";
    os << '\n';
    for (long j = 0; j < field.rows(); ++j) {
        for (size_t ti = 0; ti < times.size(); ++ti) {
            os << j << ',' << io::format_double(geom.positions[j].x()) << ','
               << io::format_double(geom.positions[j].y()) << ','
               << io::format_double(times[ti]) << ','
               << io::format_double(field(j, static_cast<long>(ti)));
            if (!bound_kind.empty()) os << ',' << bound_kind;
            os << '\n';
        }
    }
}

}  // namespace ionlrb::bounds
