#include "ionlrb/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ionlrb/csv.hpp"
#include "ionlrb/errors.hpp"

namespace ionlrb::lattice {

std::string to_string(Kind k) {
    switch (k) {
        case Kind::Chain: return "chain";
        case Kind::Triangular: return "triangular";
        case Kind::Explicit: return "explicit";
    }
    return "?";
}

double DecayEnvelope::operator()(double d) const {
    return std::exp(-mu * d) * std::pow(1.0 + d, -eta);
}

namespace {

Eigen::MatrixXd pairwise_distance(const std::vector<Eigen::Vector2d>& pts) {
    const int n = static_cast<int>(pts.size());
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = (pts[i] - pts[j]).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

}  // namespace

LatticeGeometry build_chain(int n) {
    if (n < 2) throw SizeError("build_chain: need at least 2 sites");
    LatticeGeometry g;
    g.kind = Kind::Chain;
    g.positions.reserve(n);
    for (int i = 0; i < n; ++i) g.positions.emplace_back(double(i), 0.0);
    g.distance = pairwise_distance(g.positions);
    return g;
}

LatticeGeometry build_triangular(int shells) {
    if (shells < 0) throw SizeError("build_triangular: shells must be >= 0");
    const Eigen::Vector2d a1(1.0, 0.0);
    const Eigen::Vector2d a2(0.5, std::sqrt(3.0) / 2.0);
    LatticeGeometry g;
    g.kind = Kind::Triangular;
    for (int i = -shells; i <= shells; ++i) {
        for (int j = -shells; j <= shells; ++j) {
            const int ring = std::max({std::abs(i), std::abs(j), std::abs(i + j)});
            if (ring <= shells) g.positions.push_back(i * a1 + j * a2);
        }
    }
    g.distance = pairwise_distance(g.positions);
    return g;
}

LatticeGeometry from_positions(std::vector<Eigen::Vector2d> pts, bool normalize) {
    if (pts.size() < 2) throw SizeError("from_positions: need at least 2 sites");
    LatticeGeometry g;
    g.kind = Kind::Explicit;
    g.positions = std::move(pts);
    g.distance = pairwise_distance(g.positions);
    if (normalize) {
        double dmin = std::numeric_limits<double>::infinity();
        const int n = g.size();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) dmin = std::min(dmin, g.distance(i, j));
        if (!(dmin > 0.0))
            throw SingularCouplingError("from_positions: coincident sites");
        for (auto& p : g.positions) p /= dmin;
        g.distance /= dmin;
    }
    return g;
}

LatticeGeometry truncate_radial(const LatticeGeometry& g, int keep) {
    if (keep < 1 || keep > g.size())
        throw SizeError("truncate_radial: keep out of range");
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& p : g.positions) c += p;
    c /= double(g.size());
    std::vector<int> idx(g.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        const double ra = (g.positions[a] - c).squaredNorm();
        const double rb = (g.positions[b] - c).squaredNorm();
        if (ra != rb) return ra < rb;
        return a < b;
    });
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(keep);
    for (int k = 0; k < keep; ++k) pts.push_back(g.positions[idx[k]]);
    LatticeGeometry out = from_positions(std::move(pts), false);
    return out;
}

A0Result compute_a0(const LatticeGeometry& geom, const DecayEnvelope& env) {
    const int n = geom.size();
    if (n < 2) throw SizeError("compute_a0: need at least 2 sites");
    Eigen::MatrixXd f(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f(i, j) = env(geom.distance(i, j));
    const Eigen::MatrixXd conv = f * f;  // conv(i,k) = sum_j f_ij f_jk

    A0Result r;
    r.eta = env.eta;
    r.mu = env.mu;
    r.patch_size = n;
    double best = -std::numeric_limits<double>::infinity();
    int bi = -1, bk = -1;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            if (i == k) continue;
            const double v = conv(i, k) / f(i, k);
            if (v > best) {
                best = v;
                bi = i;
                bk = k;
            }
        }
    }
    r.a0 = best;
    r.argmax_i = bi;
    r.argmax_k = bk;
    return r;
}

A0Result converge_a0(Kind kind, const DecayEnvelope& env, double tol, int max_sites) {
    if (kind == Kind::Explicit)
        throw SizeError("converge_a0: patch growth needs Chain or Triangular");
    A0Result prev{};
    bool have_prev = false;
    int chain_n = 8;
    int shells = 1;
    while (true) {
        LatticeGeometry g = (kind == Kind::Chain) ? build_chain(chain_n)
                                                  : build_triangular(shells);
        A0Result cur = compute_a0(g, env);
        if (have_prev) {
            cur.last_delta = std::abs(cur.a0 - prev.a0);
            if (cur.last_delta < tol) {
                cur.converged = true;
                return cur;
            }
        }
        prev = cur;
        have_prev = true;
        int next_n = (kind == Kind::Chain) ? chain_n + std::max(4, chain_n / 2)
                                           : 1 + 3 * (shells + 1) * (shells + 2);
        if (next_n > max_sites) {
            prev.converged = false;
            return prev;
        }
        if (kind == Kind::Chain)
            chain_n += std::max(4, chain_n / 2);
        else
            ++shells;
    }
}

namespace {

// sum_{j != 0} f(|r_j|) over the infinite lattice, radius cutoff + tail.
double endpoint_sum(Kind kind, const DecayEnvelope& env) {
    if (kind == Kind::Chain) {
        double s = 0.0;
        double term = 1.0;
        for (int m = 1; m < 2000000 && term > 1e-16; ++m) {
            term = env(double(m));
            s += 2.0 * term;
        }
        return s;
    }
    // triangular: direct sum to radius R, continuum tail with density 2/sqrt(3)
    const double R = 600.0;
    const Eigen::Vector2d a1(1.0, 0.0);
    const Eigen::Vector2d a2(0.5, std::sqrt(3.0) / 2.0);
    const int nmax = static_cast<int>(R / (std::sqrt(3.0) / 2.0)) + 2;
    double s = 0.0;
    for (int i = -nmax; i <= nmax; ++i) {
        for (int j = -nmax; j <= nmax; ++j) {
            if (i == 0 && j == 0) continue;
            const double r = (i * a1 + j * a2).norm();
            if (r <= R) s += env(r);
        }
    }
    if (env.mu == 0.0 && env.eta > 2.0) {
        // continuum tail: rho * int_R^inf 2 pi r (1+r)^-eta dr with
        // int r (1+r)^-eta dr = (1+R)^(2-eta)/(eta-2) - (1+R)^(1-eta)/(eta-1)
        const double rho = 2.0 / std::sqrt(3.0);
        const double e = env.eta;
        const double integral = std::pow(1.0 + R, 2.0 - e) / (e - 2.0) -
                                std::pow(1.0 + R, 1.0 - e) / (e - 1.0);
        s += rho * 2.0 * 3.14159265358979323846 * integral;
    }
    return s;
}

// ratio for a pair at separation `sep` embedded in a padded lattice
double embedded_ratio_chain(int sep, int pad, const DecayEnvelope& env) {
    double s = 0.0;
    const int lo = -pad, hi = sep + pad;
    for (int m = lo; m <= hi; ++m)
        s += env(std::abs(double(m))) * env(std::abs(double(m - sep)));
    return s / env(double(sep));
}

double embedded_ratio_triangular(int sep, int pad, const DecayEnvelope& env) {
    const Eigen::Vector2d a1(1.0, 0.0);
    const Eigen::Vector2d a2(0.5, std::sqrt(3.0) / 2.0);
    const double R = sep / 2.0 + pad;
    const Eigen::Vector2d pi_(-sep / 2.0, 0.0), pk(sep - sep / 2.0, 0.0);
    const Eigen::Vector2d mid = 0.5 * (pi_ + pk);
    const int nmax = static_cast<int>((R + sep) / (std::sqrt(3.0) / 2.0)) + 2;
    double s = 0.0;
    for (int i = -nmax; i <= nmax; ++i) {
        for (int j = -nmax; j <= nmax; ++j) {
            const Eigen::Vector2d p = i * a1 + j * a2;
            if ((p - mid).norm() > R) continue;
            s += env((p - pi_).norm()) * env((p - pk).norm());
        }
    }
    return s / env(double(sep));
}

}  // namespace

double a0_infinite(Kind kind, const DecayEnvelope& env) {
    if (kind == Kind::Explicit)
        throw SizeError("a0_infinite: defined for Chain or Triangular");
    double best = 0.0;
    if (kind == Kind::Chain) {
        for (int sep = 1; sep <= 256; ++sep)
            best = std::max(best, embedded_ratio_chain(sep, 4000, env));
    } else {
        for (int sep = 1; sep <= 40; ++sep)
            best = std::max(best, embedded_ratio_triangular(sep, std::max(60, 2 * sep), env));
    }
    const double limit = 2.0 * (1.0 + endpoint_sum(kind, env));
    return std::max(best, limit);
}

double zeta_estimate_a0(int dimension, double eta) {
    if (dimension != 1 && dimension != 2)
        throw SizeError("zeta_estimate_a0: dimension must be 1 or 2");
    const double arg = eta + dimension - 1;
    if (arg <= 1.0)
        throw DivergentEstimateError("zeta_estimate_a0: zeta argument <= 1 diverges");
    const double c_d = (dimension == 1) ? 2.0 : 6.0;
    return c_d * std::pow(2.0, eta + 1.0) * std::riemann_zeta(arg);
}

void write_geometry_csv(std::ostream& os, const LatticeGeometry& g) {
    os << "site_index,x,y\n";
    for (int i = 0; i < g.size(); ++i)
        os << i << ',' << io::format_double(g.positions[i].x()) << ','
           << io::format_double(g.positions[i].y()) << '\n';
}

std::string a0_report_json(const A0Result& r) {
    std::ostringstream os;
    os << "{\"a0\": " << io::format_double(r.a0) << ", \"argmax_pair\": ["
       << r.argmax_i << ", " << r.argmax_k << "], \"patch_size\": " << r.patch_size
       << ", \"eta\": " << io::format_double(r.eta)
       << ", \"mu\": " << io::format_double(r.mu)
       << ", \"converged\": " << (r.converged ? "true" : "false")
       << ", \"last_delta\": " << io::format_double(r.last_delta) << "}";
    return os.str();
}

}  // namespace ionlrb::lattice
