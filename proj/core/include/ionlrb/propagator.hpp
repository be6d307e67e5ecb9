// propagator.hpp — symplectic phase-space propagator W(t,t0) of the free
// harmonic lattice, its 2x2 blocks and block norms, and the pulse-mediated
// interaction phases built from the xp entries.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "ionlrb/crystal.hpp"

namespace ionlrb::prop {

// Materialized W at a fixed (t, t0): 2N x 2N real, site-major (x_i, p_i).
struct Propagator {
    Eigen::MatrixXd w;
    double t = 0.0;
    double t0 = 0.0;

    int size() const { return static_cast<int>(w.rows()) / 2; }
    Eigen::Matrix2d block(int j, int k) const { return w.block<2, 2>(2 * j, 2 * k); }
    double block_norm(int j, int k) const;  // spectral norm of the 2x2 block
    double xp(int i, int j) const { return w(2 * i, 2 * j + 1); }

    // || W^T J W - J || with J = blockdiag of [[0,-1],[1,0]]
    double symplectic_defect() const;
};

double spectral_norm_2x2(const Eigen::Matrix2d& b);

// Eigendecomposition of the x-sector; evaluates W(dt) in O(N^2) per time.
class HarmonicModel {
  public:
    explicit HarmonicModel(const crystal::QuadraticCoupling& q);

    int size() const { return static_cast<int>(omega_.size()); }
    double omega_max() const { return omega_.maxCoeff(); }
    const Eigen::VectorXd& mode_frequencies() const { return omega_; }

    Eigen::Matrix2d block(int j, int k, double dt) const;
    double block_norm(int j, int k, double dt) const;
    double xp_entry(int i, int j, double dt) const;
    Eigen::MatrixXd matrix(double dt) const;  // full 2N x 2N
    Propagator propagator(double t, double t0) const;

    // ||W_{j,source}(t,0)|| for every site j (rows) and grid time (cols)
    Eigen::MatrixXd block_norm_field(int source, const std::vector<double>& times) const;

    // W^{xp}_{i,source}(t,0) field, same layout
    Eigen::MatrixXd xp_field(int source, const std::vector<double>& times) const;

  private:
    Eigen::MatrixXd modes_;   // columns
    Eigen::VectorXd omega_;   // rad/s
    double omega_t_ = 0.0;
};

// exp(-J Q dt) for constant Q with the structured (x-sector) layout.
Propagator propagate_constant(const crystal::QuadraticCoupling& q, double t, double t0);

// Arbitrary symmetric 2N x 2N coupling matrix; scaling-and-squaring expm of
// the Hamiltonian generator -J Q dt.
Propagator propagate_constant_generic(const Eigen::MatrixXd& q2n, double t, double t0);

// Ordered per-step exponentials with the coupling frozen at each midpoint.
// Grid must resolve the fastest mode by >= 20 steps per period, else throws
// ResolutionError carrying the required step.
std::vector<Propagator> propagate_timedep(const crystal::QuadraticCoupling& q,
                                          const std::vector<double>& grid);

// Pulse envelopes for the interaction phase quadrature.
struct PulseShape {
    std::function<double(double)> envelope;  // F(t), rad/s after area scaling
    double support_lo = 0.0;
    double support_hi = 0.0;
};

PulseShape delta_like_gaussian(double area, double center, double width);
PulseShape rectangular_pulse(double area, double start, double width);

// Delta-pulse phase W^{xp}_{ij}(tf, t0) * theta_i * theta_j.
double impulsive_phase_delta(const HarmonicModel& m, int i, int j, double t0,
                             double tf, double theta_i, double theta_j);

// General shapes: time-ordered double integral
// int_{t0}^{tf} dtau1 int_{t0}^{tau1} dtau2 F_i(tau1) W^{xp}_{ij}(tau1-tau2) F_j(tau2)
// by composite Simpson refinement; throws QuadratureToleranceError when the
// refinement stalls above tol.
double impulsive_phase(const HarmonicModel& m, int i, int j, const PulseShape& fi,
                       const PulseShape& fj, double t0, double tf,
                       double tol = 1e-10, int max_level = 12);

}  // namespace ionlrb::prop
