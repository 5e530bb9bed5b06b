#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sax/model.hpp"

namespace sax {

// Half line: the scattering solution behaves as e^{-ikx} - e^{2 i delta} e^{ikx} at infinity.
// Line: S maps incoming to outgoing amplitudes, channels ordered (left, right), so that
// S = [[r_left, t_right], [t_left, r_right]] with incidence from the left in column 0.
struct ScatteringPoint {
    double k = 0.0;
    double delta = 0.0;                                   // half line, in (-pi/2, pi/2]
    Eigen::Matrix2cd S = Eigen::Matrix2cd::Zero();        // half line: S(0, 0) = e^{2 i delta}
    double transmission = 0.0;                            // |t_left|^2 on the line, 0 on a half line
    std::optional<double> tau;                            // Wigner delay, half line only
    double error = 0.0;                                   // change of S between two matching radii
};

// delta = -atan(kL) on the free half line with psi(0) + L psi'(0) = 0, so that
// e^{2 i delta} = (1 - ikL) / (1 + ikL); pi/2 for L = infinity.
double free_phase_shift(ExtendedReal L, double k);
// -L / (k (1 + k^2 L^2)), the group delay 2 d(delta)/dE in internal units.
double free_time_delay(ExtendedReal L, double k);

// e^{2 i delta} of a half-line problem with its own boundary condition, or with the Robin
// length L. Throws ConfigError for long-range tails (Coulomb) and for k <= 0.
std::complex<double> reflection_halfline(const Problem& problem, double k, double* error = nullptr);
double phase_shift_halfline(const Problem& problem, double k);
double phase_shift_halfline(const Problem& problem, ExtendedReal L, double k);

// tau = 2 (d delta / dk) / (dE / dk) by centered differences with step 1e-3 k. k must be at
// least wigner_k_min.
constexpr double wigner_k_min = 1e-3;
double wigner_time_delay(const Problem& problem, double k);
double wigner_time_delay(const Problem& problem, ExtendedReal L, double k);

// S-matrix of a line problem (condition taken from the problem, or U).
Eigen::Matrix2cd smatrix_line(const Problem& problem, double k, double* error = nullptr);
Eigen::Matrix2cd smatrix_line(const Problem& problem, const Eigen::Matrix2cd& U, double k,
                              double* error = nullptr);

// Everything the CLI reports at one k.
ScatteringPoint scattering_point(const Problem& problem, double k);

enum class FilterKind { low_pass, high_pass, neither };
const char* to_string(FilterKind f);

struct FilterCurve {
    std::vector<double> k;
    std::vector<double> transmission;
    FilterKind kind = FilterKind::neither;
};

// |t|^2 over the grid. The kind compares the mean transmission of the lower and upper halves of
// the grid; a difference below 0.1 (or no transmission at all) is "neither".
FilterCurve filter_curve(const Problem& problem, const Eigen::Matrix2cd& U,
                         const std::vector<double>& k_grid);

}  // namespace sax
