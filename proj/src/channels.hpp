#pragma once

// Solutions anchored at a finite endpoint and decaying solutions toward an infinite one, shared
// by the bound-state and scattering solvers.

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sax/model.hpp"
#include "sax/numerics.hpp"
#include "sax/refmodes.hpp"

namespace sax::detail {

// Samples collected along an integration, in the order they were produced.
struct Trace {
    std::vector<double> x;
    std::vector<std::complex<double>> psi;
    std::vector<std::complex<double>> p_dpsi;

    void push(double xi, std::complex<double> v, std::complex<double> d) {
        x.push_back(xi);
        psi.push_back(v);
        p_dpsi.push_back(d);
    }
    void scale(std::complex<double> f) {
        for (auto& v : psi) v *= f;
        for (auto& v : p_dpsi) v *= f;
    }
};

// The basis chi1, chi2 of solutions at energy E whose limit numbers at the endpoint are (1, 0)
// and (0, 1), i.e. the reference-mode heads rebuilt at E. At a limit-point endpoint chi1 is the
// subdominant solution and chi2 is some solution with p W[chi1, chi2] = 1.
class SideBasis {
public:
    SideBasis(const Problem& p, Side side);

    const ReferenceModes& modes() const { return modes_; }
    int orientation() const { return modes_.orientation(); }
    double endpoint() const { return modes_.endpoint(); }
    bool limit_point() const { return lp_; }
    double start(double E) const { return modes_.start_distance(E); }

    // Rows chi1, chi2 (value, p psi') at coordinate x.
    Eigen::Matrix2d at(double E, double x) const;

    // c(0) chi1 + c(1) chi2 from close to the endpoint out to x_to, with node spacing at most h.
    // Nodes closer than start(E) come from the series; the first node sits at tail_distance()
    // for singular endpoints and at the endpoint itself otherwise.
    Trace sample(double E, const Eigen::Vector2cd& c, double x_to, double h) const;

    // Distance of the first sample from a singular endpoint.
    static constexpr double tail_distance = 1e-10;

private:
    Eigen::Matrix2d start_rows(double E, double& x0) const;

    ReferenceModes modes_;
    StationaryEquation eq_;
    bool lp_ = false;
};

// Outermost point, walking from x_from in direction o, where V(x) < E; nullopt when V >= E
// everywhere. Throws NumericalError when V < E persists to very large distances (no decaying
// solution).
std::optional<double> outer_turning_point(const StationaryEquation& eq, double x_from, int o);

// Where to seed the decaying solution: far enough beyond x_from that the WKB action reaches 25.
double far_cutoff(const StationaryEquation& eq, double x_from, int o);

// Solution decaying in direction o (toward +inf for o = +1), seeded by its WKB tail at x_far and
// integrated back to x_match. Returned at x_match with unit Euclidean norm of (psi, p psi').
// `norm` receives the factor that was divided out; `trace`, if given, receives the unscaled
// samples from x_far to x_match spaced at most h apart.
Eigen::Vector2d decaying_solution(const StationaryEquation& eq, int o, double x_match, double x_far,
                                  double* norm = nullptr, Trace* trace = nullptr, double h = 0.0);

// Integrates y0 from x0 to x1 recording nodes at most h apart (x0 included).
Trace integrate_trace(const StationaryEquation& eq, const Eigen::Vector2cd& y0, double x0, double x1,
                      double h);

}  // namespace sax::detail
