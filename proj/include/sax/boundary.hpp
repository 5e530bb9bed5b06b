#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sax/model.hpp"
#include "sax/numerics.hpp"
#include "sax/refmodes.hpp"

namespace sax {

// Boundary values of a wave function, one component per side that carries a condition.
//
// With limit numbers (c1, c2) taken against the reference modes of a side,
//   gamma1 = c2 = lim p W[phi1, psi],
//   gamma2 = -o L0 c1 = o L0 lim p W[phi2, psi],
// where o = +1 for sides that extend in the +x direction from their endpoint (lower end,
// origin_plus) and o = -1 otherwise. At a regular endpoint with modes (-x, 1) this is
// gamma1 = psi(0), gamma2 = L0 psi'(0); across the origin of a line the second component picks
// up the minus sign of the outward normal.
//
// Line components are ordered (origin_plus, origin_minus).
struct BoundaryData {
    Eigen::VectorXcd gamma1;
    Eigen::VectorXcd gamma2;
    std::vector<Side> sides;
    double L0 = 1.0;
    double error = 0.0;  // extrapolation error carried over from the limit numbers

    Eigen::Index dimension() const { return gamma1.size(); }
};

BoundaryData boundary_data(const LimitNumbers& ln, int orientation, Side side, double L0 = 1.0);

// Boundary data of psi on the sides of `problem` that are regular or limit circle. Modes are
// built at problem.E0. On a line the samples may cover both half lines (the origin node itself
// is skipped) or one of them.
// With `energy`, psi is taken to solve the equation at that energy (see limit_numbers).
BoundaryData boundary_data(const SolutionSamples& psi, const Problem& problem,
                           std::optional<double> energy = std::nullopt);
BoundaryData boundary_data(const SolutionSamples& minus, const SolutionSamples& plus,
                           const Problem& problem, std::optional<double> energy = std::nullopt);

struct ConditionCheck {
    bool satisfied = false;
    double residual = 0.0;
    double scale = 0.0;
};

// gamma1 + (L / L0) gamma2 = 0 on component `index` (gamma2 = 0 for L = infinity). Checked in
// the normalized form sin(theta/2) gamma1 + cos(theta/2) gamma2 with L = L0 cot(theta/2); the
// residual is compared against tol * |(gamma1, gamma2)|.
ConditionCheck robin_satisfied(const BoundaryData& data, ExtendedReal L, double tol = 1e-6,
                               Eigen::Index index = 0);

// (U - 1) gamma1 + i (U + 1) gamma2 = 0, relative to the size of the boundary data.
ConditionCheck u2_satisfied(const BoundaryData& data, const Eigen::Matrix2cd& U, double tol = 1e-6);

// The same check with the angle given directly.
ConditionCheck robin_theta_satisfied(const BoundaryData& data, double theta, double tol = 1e-6,
                                     Eigen::Index index = 0);

// Re-choosing the modes as phi' = M phi (det M = 1) changes which parameter labels a given
// condition. These return the parameter that selects the same set of wave functions.
double transform_theta(double theta, const Eigen::Matrix2d& M, int orientation, double L0 = 1.0);
ExtendedReal transform_robin(ExtendedReal L, const Eigen::Matrix2d& M, int orientation = 1,
                             double L0 = 1.0);
// Independent re-choices on the origin_plus and origin_minus sides of a line.
Eigen::Matrix2cd transform_u2(const Eigen::Matrix2cd& U, const Eigen::Matrix2d& M_plus,
                              const Eigen::Matrix2d& M_minus, double L0 = 1.0);

struct TransformedModes {
    ReferenceModes modes;
    ExtendedReal L;
};

TransformedModes transform_modes(const ReferenceModes& modes, const Eigen::Matrix2d& M,
                                 ExtendedReal L, double L0 = 1.0);

// The unitary of the condition A gamma1 + B gamma2 = 0, U = -(A + iB)^-1 (A - iB). Throws
// ConfigError when (A, B) does not describe a self-adjoint condition (A B^dagger not Hermitian,
// or [A B] not of full rank).
Eigen::Matrix2cd u2_from_conditions(const Eigen::Matrix2cd& A, const Eigen::Matrix2cd& B);

// psi and psi' continuous at a regular origin: U = [[0, 1], [1, 0]].
Eigen::Matrix2cd transparent_u2();

// psi continuous, psi'(+0) - psi'(-0) = alpha psi(0) at a regular origin.
Eigen::Matrix2cd delta_u2(double alpha, double L0 = 1.0);

}  // namespace sax
