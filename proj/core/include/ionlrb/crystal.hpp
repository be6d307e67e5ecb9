// crystal.hpp — trapped-ion physics layer: equilibrium structure, Coulomb
// couplings, the quadratic coupling matrix, normal modes, and effective
// spin-spin couplings in the far-detuned regime.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ionlrb/lattice.hpp"

namespace ionlrb::crystal {

// All frequencies are angular (rad/s). Config files take frequency/2pi in Hz.
struct CrystalSpec {
    std::string species;
    double mass_kg = 0.0;
    double e0_sq = 0.0;      // e^2/(4 pi eps0), J*m
    double omega_t = 0.0;    // transverse trap, rad/s
    double omega_ax = 0.0;   // axial trap (chains), rad/s
    double d_m = 0.0;        // minimal ion spacing, m
    lattice::LatticeGeometry geometry;

    // physical equilibrium positions in meters, projected on the crystal
    // plane; for chains these come from the axial solve, for triangular
    // presets from the ideal lattice scaled by d_m
    std::vector<Eigen::Vector2d> physical_positions;
};

// beta = e0^2 / (m omega_t^2 d_m^3)
double stiffness(const CrystalSpec& spec);

// Axial equilibrium positions (meters) minimizing trap + Coulomb energy.
// Residual force per ion < 1e-12 of the characteristic scale, else throws
// ConvergenceError with the residual.
std::vector<double> solve_chain_equilibrium(int n, const CrystalSpec& spec,
                                            int max_iter = 200);

// Piecewise-constant scale factor c(t) applied to the whole coupling matrix;
// empty breakpoint list = constant profile.
struct TimeProfile {
    std::vector<std::pair<double, double>> quench;  // (time, scale), times ascending

    bool constant() const { return quench.empty(); }
    double scale_at(double t) const;
};

// N x N array of 2x2 blocks: diagonal diag(omega_t + V_ii/(m omega_t), omega_t),
// off-diagonal diag(V_ij/(m omega_t), 0). Stored through the x-sector matrix.
struct QuadraticCoupling {
    Eigen::MatrixXd xx;        // omega_t I + V/(m omega_t), rad/s
    double omega_t = 0.0;
    double kappa = 0.0;        // max_{i!=j} |Q_ij| (1+d_ij)^eta e^{mu d_ij}
    Eigen::MatrixXd envelope_distance;  // idealized lattice distances
    TimeProfile profile;

    int size() const { return static_cast<int>(xx.rows()); }
    Eigen::Matrix2d block(int i, int j) const;
    Eigen::MatrixXd full(double scale = 1.0) const;  // 2N x 2N, site-major (x,p)
};

// V_ij from physical positions (throws SingularCouplingError on coincident
// ions); envelope distances from the idealized unit lattice.
QuadraticCoupling build_Q(const CrystalSpec& spec,
                          const lattice::DecayEnvelope& env = {});

enum class KappaConvention { Supplement, MainText, Measured };

// Supplement: 8 beta omega_t; MainText: 4 beta omega_t; Measured: the value
// recorded in the QuadraticCoupling.
double kappa_value(const CrystalSpec& spec, const QuadraticCoupling& q,
                   KappaConvention conv);

struct DriveSpec {
    double gamma = 0.0;        // Lamb-Dicke parameter
    double omega_tilde = 0.0;  // Rabi / ac-Stark amplitude, rad/s
    double g = 0.0;            // sqrt(2) omega_tilde gamma, rad/s
    double nu_tilde = 0.0;     // force frequency, rad/s
    double phi_tilde = 0.0;    // force phase
    double delta_t = 0.0;      // nu_tilde - omega_t (detuning from COM mode)
    std::vector<double> pulse_areas;
    double h = 0.0;            // transverse field Omega/2, rad/s
    double max_pulse_area = 16.0;

    // keeps g = sqrt(2) * omega_tilde * gamma exact; nu_tilde = omega_t + delta_t
    static DriveSpec from_force(double g, double gamma, double delta_t,
                                double omega_t, double phi_tilde = 0.0);
    void validate() const;
};

struct ModeData {
    Eigen::VectorXd omega;     // rad/s, sorted descending, ties by index
    Eigen::MatrixXd modes;     // orthogonal, column n = mode n
    Eigen::VectorXd gamma_n;   // gamma (omega_t/omega_n)^(1/2)
    Eigen::MatrixXcd f_in;     // i omega_tilde gamma_n e^{i phi} M_in / 2, rad/s
    Eigen::VectorXd delta_n;   // omega_n - nu_tilde, rad/s
    double omega_t = 0.0;
    double beta_omega_t = 0.0;
    Eigen::MatrixXd scaled_distance;  // |r_i - r_j| / d_m from physical positions
};

// Symmetric eigendecomposition of the rescaled coupling matrix;
// omega_n = omega_t (1 + beta Vt_n)^(1/2). Throws UnstableCrystalError when
// 1 + beta Vt_n <= 0.
ModeData normal_modes(const QuadraticCoupling& q, const CrystalSpec& spec,
                      const DriveSpec& drive = {});

struct CouplingResult {
    Eigen::MatrixXd j_exact;     // J_ij = -Re sum_n F*_in F_jn / delta_n
    double j0 = 0.0;             // (1/16) (g/delta_t)^2 beta omega_t
    Eigen::MatrixXd j_dipolar;   // J0 / |r_i - r_j|^3 (scaled distances)
    double max_imag_rel = 0.0;   // residual imaginary part of the mode sum
    bool far_detuned = true;     // |F_in| << |delta_n| held for all (i,n)
};

// Throws ResonantDetuningError if any delta_n is (numerically) zero.
CouplingResult effective_couplings(const ModeData& modes, const DriveSpec& drive);

// Built-in presets: "mg_chain", "be_penning", "be_surface".
CrystalSpec preset(const std::string& name);
std::vector<std::string> preset_names();

// key = value structured text (keys: species, mass_amu, omega_t_hz,
// omega_ax_hz, d_m_um, geometry, N_or_shells)
CrystalSpec spec_from_config(const std::map<std::string, std::string>& kv);

void write_modes_csv(std::ostream& os, const ModeData& m);

}  // namespace ionlrb::crystal
