// fock.hpp — exact spin-boson dynamics on truncated number spaces: the
// brute-force oracle for the bound formulas, the impulsive closed form, and
// the linear-response measurement protocol.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "ionlrb/crystal.hpp"
#include "ionlrb/propagator.hpp"

namespace ionlrb::fock {

using Complex = std::complex<double>;
using SparseC = Eigen::SparseMatrix<Complex>;
using DenseC = Eigen::MatrixXcd;

enum class Axis { X, Y, Z };

// time-dependent coefficient times a fixed Hermitian operator
struct DriveTerm {
    std::function<double(double)> coefficient;
    SparseC op;
};

struct FockParams {
    Eigen::MatrixXd xx;   // boson x-sector coupling (rad/s); p-sector omega_t
    double omega_t = 0.0;
    std::vector<Eigen::Vector3d> b_field;  // per-site constant B (rad/s)
    int n_max = 7;
    std::size_t dim_cap = std::size_t(1) << 16;
};

// Basis: site-major, per site spin (x) boson; local index s*(n_max+1)+n with
// s = 0 for spin up (sigma^z = +1). Same-site x^2, p^2 enter as exact cutoff
// projections so the uncoupled spectrum is harmonic up to the top level.
class FockSystem {
  public:
    explicit FockSystem(const FockParams& p);

    int sites() const { return n_sites_; }
    int n_max() const { return n_max_; }
    long dim() const { return dim_; }
    double omega_t() const { return omega_t_; }
    const Eigen::MatrixXd& coupling_xx() const { return xx_; }
    const DenseC& static_hamiltonian() const { return h0_; }

    SparseC spin(int site, Axis a) const;
    SparseC position(int site) const;
    SparseC momentum(int site) const;

    // coefficient(t) * x_site sigma_site^z
    void add_force(int site, std::function<double(double)> envelope);
    void add_drive(DriveTerm term);
    void clear_forces() { drives_.clear(); }
    const std::vector<DriveTerm>& drives() const { return drives_; }

    DenseC hamiltonian(double t) const;
    double hermiticity_defect() const;  // relative, on H(0)

    // U(t1, t0). A static Hamiltonian takes the exact eigendecomposition
    // path; time-dependent ones use midpoint-frozen step exponentials and
    // require the steps to resolve the spectral span by >= 20 per period
    // (ResolutionError otherwise). steps <= 0 picks the minimal valid count.
    DenseC evolve(double t0, double t1, int steps = 0) const;
    double unitarity_defect(const DenseC& u) const;

    // exact exp(-i h t) of a Hermitian matrix
    static DenseC expm(const DenseC& h, double t);

    // basis states with every site occupation <= n_phys
    std::vector<long> bulk_indices(int n_phys) const;

    // || P [U^dag A U, B] P ||_2 with A, B Pauli operators and P the
    // occupation projector (n_phys < 0 selects n_max/2)
    double commutator_norm(const DenseC& u, int site_a, Axis a, int site_b, Axis b,
                           int n_phys = -1) const;

    // phase-space block reconstructed from boson commutators:
    // W_xp = i[x_i(t), x_k], W_xx = -i[x_i(t), p_k], W_pp = i[p_i(t), x_k],
    // W_px = -i[p_i(t), p_k]; scalar part over the projected subspace.
    // scatter reports the rms deviation from a multiple of the identity.
    Eigen::Matrix2d boson_commutator_block(const DenseC& u, int i, int k,
                                           int n_phys = -1,
                                           double* scatter = nullptr) const;

  private:
    int n_sites_ = 0;
    int n_max_ = 0;
    int nb_ = 0;
    long dim_ = 0;
    double omega_t_ = 0.0;
    Eigen::MatrixXd xx_;
    DenseC h0_;
    std::vector<DriveTerm> drives_;
    double norm_estimate_ = 0.0;
    std::vector<SparseC> x_ops_, p_ops_;
    mutable Eigen::SelfAdjointEigenSolver<DenseC> static_es_;
    mutable bool static_eig_ready_ = false;
};

struct ThermalState {
    DenseC rho;                      // full-space density operator, trace 1
    Eigen::VectorXd mode_occupation; // per normal mode
    double leakage = 0.0;            // population with any site at n_max
    double temperature = 0.0;        // rad/s units
};

// Gibbs state of the truncated boson Hamiltonian combined with a spin pure
// state (default all spins down). n_bar_target sets the occupation of the
// highest (COM) mode; <= 0 selects the boson ground state.
ThermalState thermal_state(const FockSystem& sys, double n_bar_target,
                           const Eigen::VectorXcd* spin_state = nullptr);

// 8 |sin(W^xp_ij(tf, t0) theta_i theta_j)| from the propagator model (theta
// inside the sine). Throws NotApplicableError when h != 0.
double impulsive_closed_form(const prop::HarmonicModel& m, int i, int j, double t0,
                             double tf, double theta_i, double theta_j, double h = 0.0);

struct ImpulsiveFockResult {
    double commutator_norm = 0.0;  // projected ||[sx_i(tf), sx_j(t0)]||
    double theta_fock = 0.0;       // arcsin(norm/2)/2, the interaction phase
    double phase_delta = 0.0;      // theta_i theta_j W^xp(tf - t0)
    double closed_form = 0.0;      // 8|sin(phase_delta)|
    double fock_form = 0.0;        // 8|sin(theta_fock)|
    double exact_prediction = 0.0; // 2|sin(2 phase_delta)|
};

// Exact evolution with two rectangular sigma^z force pulses (site j starting
// at t0, site i ending at tf) and h = 0; piecewise-constant segments are
// exponentiated exactly, so the only approximations are the finite pulse
// width and the boson cutoff.
ImpulsiveFockResult run_impulsive_fock(const crystal::QuadraticCoupling& q, int i,
                                       int j, double t0, double tf, double theta_i,
                                       double theta_j, double pulse_width, int n_max,
                                       int n_phys = -1);

enum class ForceSchedule { Continuous, Pulsed };

struct ProtocolResult {
    double lambda_b = 0.0;
    double derivative_fd = 0.0;
    double commutator_direct = 0.0;
    double abs_error = 0.0;
    int n_max = 0;
    double leakage = 0.0;
};

std::string protocol_report_json(const ProtocolResult& r);

struct ProtocolSetup {
    int source = 0;        // j: pi/2 preparation and impulsive kick
    int probe = 1;         // i: measurement rotation and fluorescence signal
    double lambda_b = 1e-3;
    double t0 = 0.0;
    double tf = 0.0;
    ForceSchedule schedule = ForceSchedule::Continuous;
    crystal::DriveSpec drive;   // g, nu_tilde, phi_tilde (transverse field h
                                // belongs in the system's B field)
    double pulse_width = 0.0;   // Pulsed schedule
    double n_bar = 0.0;
    int steps = 0;              // Continuous schedule (0 = auto)
};

// Full sequence: pump to all-down, pi/2 at source, impulsive perturbation
// exp(-i lambda sx_j), force evolution with the ideal mid-point spin echo
// (global sigma^x, force sign flip), pi/2 at probe, measure <sigma_probe^z>.
// Central difference over +-lambda vs the operator-level
// -i<[sx_i(tf), sx_j(t0)]>.
ProtocolResult linear_response_protocol(FockSystem& sys, const ProtocolSetup& setup);

// Pulsed-regime evolution with spurious ac-Stark + carrier sigma^z terms vs
// the same schedule without them; the mid-point echo must cancel the
// spurious phases when nu_tilde*(T/2) is a multiple of 2 pi.
// Returns ||U_spurious - U_clean||_2.
double spin_echo_defect(FockSystem& sys, const crystal::DriveSpec& drive,
                        double delta_ac, double t_total, int steps);

}  // namespace ionlrb::fock
