#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sax/model.hpp"
#include "sax/numerics.hpp"

namespace sax {

enum class Backend { automatic, shooting, closed_form, digamma };

const char* to_string(Backend b);  // "Shooting", "ClosedForm", "DigammaEq", "Auto"

struct BoundState {
    double energy = 0.0;
    int nodes = 0;
    SolutionSamples psi;  // normalized, integral of |psi|^2 dx = 1
    Backend backend = Backend::shooting;
};

struct EnergyWindow {
    double lo;
    double hi;
};

struct ShootingOptions {
    // Probe spacing in s = 1/sqrt(-E) for problems with a continuum at E = 0, in E otherwise.
    double max_probe_spacing = 0.125;
    int min_probes = 48;
    double root_tol = 1e-13;
    // Grid spacing of the returned eigenfunctions in units of the local decay/oscillation length.
    double sample_spacing = 0.02;
};

// Bound states in the window by matching solutions anchored at the endpoints (with the initial
// ray fixed by the boundary condition) to solutions decaying toward infinity. Sorted by energy;
// at most max_states are returned (0 means no limit). Windows must lie below 0 when the
// potential vanishes at infinity.
std::vector<BoundState> bound_states_shooting(const Problem& problem, EnergyWindow window,
                                              std::size_t max_states = 0,
                                              const ShootingOptions& opt = {});

// Eigenfunction of a known eigenvalue, built as in the shooting solver.
BoundState bound_state_at(const Problem& problem, double energy, Backend backend,
                          const ShootingOptions& opt = {});

// Coulomb half line V = g/r, levels from g F(xi) = -1/L with xi = g/(2 sqrt(-E)), where
// F(xi) = digamma(1 + xi) - ln|xi| - 1/(2 xi) - digamma(1) - digamma(2). For g < 0 one level lies
// in each interval -n < xi < -n + 1; L = 0 gives xi = -n exactly. Energies ascending.
std::vector<double> coulomb_levels(double g, ExtendedReal L, std::size_t n_levels);

// Level shifts c_n = n + xi_n of the L = infinity sequence, i.e. roots of F in (-n, -n + 1).
double coulomb_shift(std::size_t n);

// Free half line with psi(0) + L psi'(0) = 0: E = -1/L^2 when L > 0, nothing otherwise.
std::optional<double> free_halfline_level(ExtendedReal L);

// Free line with a point interaction U: one level E = -1/L_j^2 per eigen-channel with L_j > 0.
std::vector<double> free_line_levels(const Eigen::Matrix2cd& U, double L0 = 1.0);

// Number of eigenphases of U in (0, pi), which is the number of bound states of the free line.
int point_interaction_bound_count(const Eigen::Matrix2cd& U);

// Dispatch: closed forms for free problems, the digamma equation for the Coulomb half line,
// shooting otherwise.
std::vector<BoundState> bound_states(const Problem& problem, EnergyWindow window,
                                     std::size_t max_states = 0, Backend backend = Backend::automatic,
                                     const ShootingOptions& opt = {});

}  // namespace sax
