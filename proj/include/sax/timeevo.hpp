#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "sax/model.hpp"

namespace sax {

// Uniform finite-difference mesh on [endpoint, endpoint + extent] per side, with psi = 0 at the
// far ends. Near a limit-circle endpoint the first node sits at distance h and carries the
// boundary condition transported there by the reference modes; a limit-point endpoint is
// treated as psi = 0 at the endpoint.
struct Discretization {
    double h = 0.02;
    double extent = 100.0;
};

// Node coordinates in ascending order. On a line with a regular origin the node x = 0 appears
// twice, once per side (minus side first), since psi may jump there.
struct Mesh {
    Eigen::VectorXd x;
    Eigen::VectorXd weight;     // quadrature weight of each node
    Eigen::Index plus_begin = 0;  // first node of the origin_plus (or lower) side
};

struct WavePacket {
    double x0 = 0.0;
    double sigma = 1.0;
    double k0 = 0.0;  // negative: moving toward smaller x
    Mesh mesh;
    Eigen::VectorXcd psi;  // on mesh nodes, sum weight |psi|^2 = 1
};

struct Snapshot {
    double t = 0.0;
    Eigen::VectorXcd psi;
    double norm = 0.0;
    double norm_minus = 0.0;  // line: x < 0 part
    double norm_plus = 0.0;   // line: x > 0 part (the whole norm on a half line)
    double energy = 0.0;
};

struct Trajectory {
    Mesh mesh;
    std::vector<Snapshot> frames;
    double max_step_drift = 0.0;  // largest |norm change| over a single step
    long steps = 0;
};

// Crank-Nicolson propagator (M + i dt/2 K) psi' = (M - i dt/2 K) psi, where K is the Hermitian
// matrix of the quadratic form of H on the mesh (boundary terms from the condition included)
// and M the diagonal quadrature weights. M-norm and K-energy are conserved exactly.
class Evolver {
public:
    Evolver(const Problem& problem, const Discretization& d);
    ~Evolver();
    Evolver(Evolver&&) noexcept;
    Evolver& operator=(Evolver&&) noexcept;

    const Mesh& mesh() const;
    // Sets the time step; refactors the propagator.
    void set_dt(double dt);
    double dt() const;

    // psi on mesh nodes (components outside the admissible subspace are projected away).
    void load(const Eigen::VectorXcd& psi);
    void step(long n = 1);
    Eigen::VectorXcd state() const;

    double norm() const;
    double norm_minus() const;
    double norm_plus() const;
    double energy() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Mesh make_mesh(const Problem& problem, const Discretization& d);

// Gaussian (2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / (4 sigma^2) + i k0 x), renormalized on the mesh.
WavePacket gaussian_packet(const Problem& problem, const Discretization& d, double x0, double sigma,
                           double k0);

struct EvolveOptions {
    long snapshot_every = 0;          // 0: first and last frame only
    std::vector<double> snapshot_times;  // rounded to the nearest step
};

// Refuses (ConfigError, with a suggested step) when dt k0^2 > 0.1 or the mesh does not resolve
// sigma and 1/k0.
Trajectory evolve(const WavePacket& packet, const Problem& problem, const Discretization& d, double dt,
                  double T, const EvolveOptions& opt = {});

struct DelayMeasurement {
    double tau = 0.0;
    double v_in = 0.0;   // fitted speed of the incoming peak
    double v_out = 0.0;  // fitted speed of the reflected peak
    std::vector<std::pair<double, double>> incoming;  // (t, peak position)
    std::vector<std::pair<double, double>> outgoing;
};

struct DelayOptions {
    double x0 = 0.0;     // 0: 8 sigma
    double sigma = 10.0;
    double k0 = -1.0;
    double h = 0.0;      // 0: min(0.05 / |k0|, sigma / 20)
    double dt = 0.0;     // 0: 0.02 / k0^2
};

// Reflection delay off the lower end of a half line with psi + L psi' = 0: the peak is tracked
// (quadratic interpolation around the largest node) while it is at least 4 sigma from the wall,
// straight lines are fitted to the inbound and outbound legs, and tau is the time shift between
// the outbound line and the mirror image of the inbound one. Needs sigma |k0| >= 5 and k0 < 0.
// Throws NumericalError when the peak is ambiguous.
DelayMeasurement measure_time_delay(const Problem& problem, ExtendedReal L, const DelayOptions& opt = {});

}  // namespace sax
