#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sax/errors.hpp"
#include "sax/model.hpp"

namespace sax {

// Strictly increasing sample points.
class Grid {
public:
    enum class Spacing { uniform, geometric, custom };

    Grid() = default;
    // Uniform nodes a = x_0 < ... < x_{n-1} = b.
    static Grid uniform(double a, double b, Eigen::Index n);
    // Geometric spacing of the distance to `endpoint`, from `near` to `far` (both distances).
    // Nodes accumulate toward the endpoint, which may lie on either side of the grid.
    static Grid geometric(double endpoint, double near, double far, Eigen::Index n, bool above = true);
    static Grid from_nodes(Eigen::VectorXd nodes);

    const Eigen::VectorXd& nodes() const { return nodes_; }
    Eigen::Index size() const { return nodes_.size(); }
    double operator[](Eigen::Index i) const { return nodes_[i]; }
    double front() const { return nodes_[0]; }
    double back() const { return nodes_[nodes_.size() - 1]; }
    Spacing spacing() const { return spacing_; }
    Eigen::Index nearest(double x) const;

    static constexpr Eigen::Index min_nodes = 32;

private:
    Grid(Eigen::VectorXd n, Spacing s);
    Eigen::VectorXd nodes_;
    Spacing spacing_ = Spacing::custom;
};

// A solution sampled on a grid: psi and the quasi-derivative p psi'.
template <typename Scalar>
struct Samples {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Grid grid;
    Vector psi;
    Vector p_dpsi;

    Eigen::Index size() const { return grid.size(); }
    Eigen::Matrix<Scalar, 2, 1> at(Eigen::Index i) const { return {psi[i], p_dpsi[i]}; }
};

using SolutionSamples = Samples<std::complex<double>>;
using RealSamples = Samples<double>;

template <typename Scalar>
Scalar wronskian(const Eigen::Matrix<Scalar, 2, 1>& a, const Eigen::Matrix<Scalar, 2, 1>& b) {
    return a(0) * b(1) - a(1) * b(0);
}

// p (a b' - a' b) at the node nearest to x.
template <typename Scalar>
Scalar wronskian(const Samples<Scalar>& a, const Samples<Scalar>& b, double x) {
    const Eigen::Index i = a.grid.nearest(x);
    return wronskian<Scalar>(a.at(i), b.at(i));
}

// The stationary equation -(p psi')' + V psi = E psi written as a first-order system
// for (psi, p psi').
struct StationaryEquation {
    PotentialSpec potential;
    KineticWeight weight;
    double energy = 0.0;

    template <typename State>
    State rhs(double x, const State& y) const {
        return State(y(1) / weight(x), (potential(x) - energy) * y(0));
    }
};

struct IntegratorOptions {
    double rtol = 1e-12;
    double overflow = 1e150;
    long max_steps = 2'000'000;
};

// Adaptive Dormand-Prince 5(4) integrator for the stationary equation.
template <typename Scalar>
class Stepper {
public:
    using State = Eigen::Matrix<Scalar, 2, 1>;

    Stepper(StationaryEquation eq, IntegratorOptions opt = {}) : eq_(std::move(eq)), opt_(opt) {}

    // Integrates from x0 to x1 (either direction) and lands on x1 exactly.
    State advance(State y, double x0, double x1);

    const StationaryEquation& equation() const { return eq_; }

private:
    StationaryEquation eq_;
    IntegratorOptions opt_;
    double h_ = 0.0;
    double peak_[2] = {0.0, 0.0};
};

// Where the initial data of integrate_stationary sits.
enum class From { front, back };

// Solves the stationary equation at energy E on the grid, starting from (psi, p psi') = init at
// the first or last node. Uniform grids with unit weight use Numerov; everything else uses
// adaptive Dormand-Prince.
template <typename Scalar>
Samples<Scalar> integrate_stationary(const Problem& problem, double E, From from,
                                     const Eigen::Matrix<Scalar, 2, 1>& init, const Grid& grid,
                                     const IntegratorOptions& opt = {});

// Forces the adaptive path regardless of grid spacing.
template <typename Scalar>
Samples<Scalar> integrate_adaptive(const StationaryEquation& eq, From from,
                                   const Eigen::Matrix<Scalar, 2, 1>& init, const Grid& grid,
                                   const IntegratorOptions& opt = {});

// Numerov on a uniform grid (unit weight only).
template <typename Scalar>
Samples<Scalar> integrate_numerov(const StationaryEquation& eq, From from,
                                  const Eigen::Matrix<Scalar, 2, 1>& init, const Grid& grid);

struct Bracket {
    double lo;
    double hi;
};

// Sign-change brackets of f on [a, b] from n equally spaced probes. Sub-intervals that contain
// a declared pole are split at the pole so that a sign flip across a pole is not reported.
std::vector<Bracket> bracket_roots(const std::function<double(double)>& f, double a, double b,
                                   int n_probes, const std::vector<double>& poles = {});

// Brent's method on a sign-change bracket; |x - root| <= tol.
double polish_root(const std::function<double(double)>& f, Bracket br, double tol = 1e-12,
                   int max_iter = 200);

struct Extrapolated {
    std::complex<double> value;
    double error;
};

// Aitken delta-squared limit of three consecutive terms of a geometrically converging sequence.
Extrapolated aitken_limit(std::complex<double> s0, std::complex<double> s1, std::complex<double> s2);

// Limit at s -> 0 of W(s) = L + A s^q (q > 0 unknown) from three samples s0 < s1 < s2.
Extrapolated power_law_limit(const std::array<double, 3>& s,
                             const std::array<std::complex<double>, 3>& w);

// Integral of |f|^2 over the samples, using the cubic Hermite interpolant built from f and f'.
double hermite_norm2(const Eigen::VectorXd& x, const Eigen::VectorXcd& f, const Eigen::VectorXcd& df);

}  // namespace sax
