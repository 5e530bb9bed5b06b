#pragma once

#include <complex>
#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "sax/classify.hpp"
#include "sax/model.hpp"
#include "sax/numerics.hpp"

namespace sax {

namespace detail {
class Heads;
}

// A pair of reference modes phi1, phi2 at a finite endpoint with p W[phi1, phi2] = 1, solving
// the stationary equation at the reference energy E0. Near the endpoint they come from local
// series; further out they are continued numerically by sample().
class ReferenceModes {
public:
    // Rows phi1, phi2; columns value and p dphi/dx, at coordinate x within head_range().
    Eigen::Matrix2d at(double x) const { return at(x, E0_); }
    // The same pair of leading behaviours, built as solutions at energy E.
    Eigen::Matrix2d at(double x, double E) const;

    // Like at(x), continuing the modes numerically beyond the head region.
    Eigen::Matrix2d evaluate(double x) const;

    // Distance from the endpoint up to which at() is accurate.
    double head_range() const;
    double head_range(double E) const;
    // Distance from the endpoint where integrations at energy E start (0 at regular endpoints).
    double start_distance() const { return start_distance(E0_); }
    double start_distance(double E) const;
    bool has_second() const;

    Side side() const { return geometry_.side; }
    double endpoint() const { return geometry_.x; }
    int orientation() const { return geometry_.orientation; }
    double E0() const { return E0_; }
    const EndpointClassification& classification() const { return classification_; }
    const Eigen::Matrix2d& transform() const { return transform_; }

    // phi -> M phi with det M = 1.
    ReferenceModes transformed(const Eigen::Matrix2d& M) const;

    // Mode `which` (0 or 1) on the grid at energy E0; every node must lie on this side.
    RealSamples sample(const Grid& grid, int which) const;

private:
    friend ReferenceModes asymptotic_modes(const Problem&, Side);
    friend ReferenceModes reference_modes(const Problem&, Side, double);

    std::shared_ptr<const detail::Heads> heads_;
    EndpointGeometry geometry_{};
    EndpointClassification classification_;
    StationaryEquation equation_;
    Eigen::Matrix2d transform_ = Eigen::Matrix2d::Identity();
    double E0_ = 0.0;
};

// Reference modes without checking the endpoint type (limit-point endpoints get only a
// meaningful phi1). Throws NumericalError when no local model is available.
ReferenceModes asymptotic_modes(const Problem& p, Side side);

// Reference modes at a regular or limit-circle endpoint; ConfigError at limit-point ones.
ReferenceModes reference_modes(const Problem& p, Side side, double E0);

// phi2 = phi1 * integral_{x_ref}^x dt / (p phi1^2), so that p W[phi1, phi2] = 1. phi1 returns
// (value, p phi1') and must not vanish between x_ref and x.
std::function<Eigen::Vector2d(double)> second_solution(
    std::function<Eigen::Vector2d(double)> phi1, KineticWeight weight, double x_ref);

struct LimitNumbers {
    std::complex<double> c1;
    std::complex<double> c2;
    double error = 0.0;
};

// c1 = -lim p W[phi2, psi], c2 = lim p W[phi1, psi] at the modes' endpoint, extrapolated from
// the samples nearest to it. Throws NumericalError when the extrapolation does not settle.
LimitNumbers limit_numbers(const SolutionSamples& psi, const ReferenceModes& modes);

// The same limits for a psi known to solve the equation at `energy`: the Wronskians are taken
// with the heads rebuilt at that energy, which have the same limits and are exactly constant
// near the endpoint, so no extrapolation is needed.
LimitNumbers limit_numbers(const SolutionSamples& psi, const ReferenceModes& modes, double energy);

// lim p W[conj(psi), chi] at the endpoint from the limit numbers of psi and chi.
std::complex<double> wronskian_from_limits(const LimitNumbers& psi, const LimitNumbers& chi);

}  // namespace sax
