// bounds.hpp — Lieb-Robinson bound evaluators for spin-boson lattices and
// their trapped-ion forms, plus cone-front extraction from (site,time) fields.

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ionlrb/crystal.hpp"
#include "ionlrb/lattice.hpp"
#include "ionlrb/propagator.hpp"

namespace ionlrb::bounds {

// Parameter bundle shared by every bound formula. Derived fields are kept
// exactly consistent by the builder:
//   alpha  = (1 + a0)/a0          (power-law case)
//   v_lr   = kappa a0
//   chi    = 2 g^2 S alpha
//   alpha1 = 8 a0
//   alpha2 = (1/4)(1 + 1/a0)(g / beta_omega_t)^2
//   alpha2_tilde = (a0/8)(g/delta_t)^2
//   j0     = (1/16)(g/delta_t)^2 beta_omega_t
struct BoundModel {
    double a0 = 0.0;
    double alpha = 0.0;
    double v_lr = 0.0;           // rad/s
    double kappa = 0.0;          // rad/s
    double g = 0.0;              // rad/s
    double spin_norm = 1.0;      // S, 1 for Pauli
    double chi = 0.0;            // rad/s
    double eta = 3.0;
    double mu = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha2_tilde = 0.0;
    double beta_omega_t = 0.0;   // rad/s
    double delta_t = 0.0;        // rad/s
    double j0 = 0.0;             // rad/s
    crystal::KappaConvention kappa_convention = crystal::KappaConvention::Supplement;

    static BoundModel build(double a0, double beta_omega_t, double g, double delta_t,
                            double eta = 3.0, double mu = 0.0, double spin_norm = 1.0,
                            crystal::KappaConvention conv = crystal::KappaConvention::Supplement);

    // preset + drive + converged lattice constant
    static BoundModel from_crystal(const crystal::CrystalSpec& spec,
                                   const crystal::DriveSpec& drive,
                                   double a0,
                                   crystal::KappaConvention conv =
                                       crystal::KappaConvention::Supplement);

    double envelope(double d) const;  // e^{-mu d} (1+d)^{-eta}
};

enum class Kind {
    Eq4,             // general spin-boson bound (consistent normalization)
    Eq4Main,         // printed main-text variant, extra alpha prefactor
    Eq9,             // trapped-ion spin-boson bound
    Eq10,            // impulsive bound (needs pulse areas)
    Eq11Main,        // perturbative spin-model bound, alpha2_tilde = (a0/8)(g/dt)^2
    Eq11Supp,        // variant with alpha_tilde = a0
    Bosonic,         // free-boson propagator-norm bound
    ImpulsiveExact,  // running max of 8|sin W^xp| theta_i theta_j
};

std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);

// (2 S^2 / a0) e^{v_lr t} f(d) (e^{chi a0 t / v_lr} - 1); the Eq4Main variant
// multiplies by alpha.
double generic_spin_boson_bound(const BoundModel& m, double d, double t,
                                bool main_text_prefactor = false);

// 2/(a0 (1+d)^3) e^{alpha1 bwt t} (e^{alpha2 bwt t} - 1)
double trapped_ion_bound(const BoundModel& m, double d, double t);

// delta_{d==0} + e^{kappa a0 t - mu d} / (a0 (1+d)^eta)
double bosonic_bound(const BoundModel& m, double d, double t);

// 2/(a0 (1+d)^3) (e^{alpha_tilde2 bwt t} - 1); variant selects the exponent
double spin_model_bound(const BoundModel& m, double d, double t,
                        bool supplement_variant = false);

// 8 (1+a0) / (a0 (1+d)^3) e^{alpha1 bwt t} |theta_i theta_j|
double impulsive_bound(const BoundModel& m, double d, double t, double theta_i,
                       double theta_j);

enum class ThetaConvention { OutsideSine, InsideSine };

// Running max over tau <= t of 8|sin(W^xp_{i,source}(tau,0))| x theta_i theta_j
// (OutsideSine) or 8|sin(W^xp theta_i theta_j)| (InsideSine); one row per
// site, one column per grid time, nondecreasing along rows.
Eigen::MatrixXd impulsive_exact_envelope(const prop::HarmonicModel& model, int source,
                                         const std::vector<double>& times,
                                         double theta_i, double theta_j,
                                         ThetaConvention conv = ThetaConvention::OutsideSine);

// Bound field over (site,time) given distances from the source site.
Eigen::MatrixXd bound_field(const BoundModel& m, Kind kind,
                            const Eigen::VectorXd& distances,
                            const std::vector<double>& times,
                            double theta_i = 1.0, double theta_j = 1.0);

// First grid time at which field(row) crosses threshold, linearly
// interpolated; nullopt = never.
std::vector<std::optional<double>> front_extract(const Eigen::MatrixXd& field,
                                                 const std::vector<double>& times,
                                                 double threshold);

struct FrontFit {
    double speed = 0.0;      // distance units per second
    double intercept = 0.0;  // seconds
    int points = 0;
};

// Least-squares t = d/speed + intercept over sites with a crossing and
// distance >= d_min.
FrontFit fit_front_speed(const Eigen::VectorXd& distances,
                         const std::vector<std::optional<double>>& crossings,
                         double d_min = 1.5);

// CSV schema: site_index,x,y,time_s,block_norm[,bound_kind]
void write_field_csv(std::ostream& os, const lattice::LatticeGeometry& geom,
                     const Eigen::MatrixXd& field, const std::vector<double>& times,
                     const std::string& bound_kind = "");

}  // namespace ionlrb::bounds
