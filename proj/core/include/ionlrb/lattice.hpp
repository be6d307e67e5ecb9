// lattice.hpp — lattice geometries, decay envelopes, and the convolution
// factor a0 that controls Lieb-Robinson bound constants.

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace ionlrb::lattice {

enum class Kind { Chain, Triangular, Explicit };

std::string to_string(Kind k);

// Vertex set with Euclidean distances in units of the minimal spacing.
struct LatticeGeometry {
    Kind kind = Kind::Explicit;
    std::vector<Eigen::Vector2d> positions;  // unit minimal spacing
    Eigen::MatrixXd distance;                // symmetric, zero diagonal

    int size() const { return static_cast<int>(positions.size()); }
};

// f(d) = exp(-mu d) (1+d)^-eta. alpha is the bound normalization carried
// alongside the envelope; it does not enter f itself.
struct DecayEnvelope {
    double mu = 0.0;
    double eta = 3.0;
    double alpha = 1.0;

    double operator()(double d) const;
};

LatticeGeometry build_chain(int n);           // sites (i,0), i = 0..n-1
LatticeGeometry build_triangular(int shells); // hexagonal patch, N = 1+3s(s+1)

// Explicit geometry from raw points; rescales so the minimal spacing is 1
// when normalize is set.
LatticeGeometry from_positions(std::vector<Eigen::Vector2d> pts, bool normalize = true);

// Keep the `keep` sites closest to the patch centroid (stable tie-break on
// index). Used to cut a hexagonal patch down to a given crystal size.
LatticeGeometry truncate_radial(const LatticeGeometry& g, int keep);

struct A0Result {
    double a0 = 0.0;
    int argmax_i = -1;
    int argmax_k = -1;
    int patch_size = 0;
    double eta = 0.0;
    double mu = 0.0;
    bool converged = true;
    double last_delta = 0.0;
};

// max over ordered pairs (i,k), i != k, of sum_j f(d_ij) f(d_jk) / f(d_ik),
// j running over the whole patch including i and k.
A0Result compute_a0(const LatticeGeometry& geom, const DecayEnvelope& env);

// Growing-patch sweep; stops when successive patch values differ by < tol
// or the patch would exceed max_sites (converged=false in that case).
A0Result converge_a0(Kind kind, const DecayEnvelope& env, double tol = 1e-3,
                     int max_sites = 3000);

// Supremum of the convolution ratio over the infinite lattice: maximum of
// well-embedded pair ratios and the large-separation limit
// 2 (1 + sum_{j!=0} f(|r_j|)). Cheap; valid upper bound for every patch.
double a0_infinite(Kind kind, const DecayEnvelope& env);

// Graph-distance estimate c_D 2^{eta+1} zeta(eta+D-1) for D = 1, 2.
// Throws DivergentEstimateError when the zeta argument is <= 1.
double zeta_estimate_a0(int dimension, double eta);

void write_geometry_csv(std::ostream& os, const LatticeGeometry& g);
std::string a0_report_json(const A0Result& r);

}  // namespace ionlrb::lattice
