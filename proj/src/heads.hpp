#pragma once

// Local solutions near an endpoint, in the distance variable s >= 0 from the endpoint.

#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "sax/classify.hpp"
#include "sax/model.hpp"

namespace sax::detail {

// Two local solutions f1, f2 with p W[f1, f2] = 1 in the variable s. eval() returns
// [[f1, p df1/ds], [f2, p df2/ds]].
class Heads {
public:
    enum class Kind {
        regular,    // finite endpoint with bounded potential; valid at s = 0 only
        frobenius,  // V = c/s^2 + g/s near the endpoint, unit weight
        euler,      // p = k s^alpha, V = a s^(alpha-2); leading powers only
    };

    static Heads regular(double weight_at_endpoint);
    static Heads frobenius(double c, double g, double weight_coefficient);
    static Heads euler(double alpha, double k, double a);

    Kind kind() const { return kind_; }
    // False at limit-point endpoints where only f1 (the subdominant solution) is meaningful.
    bool has_second() const { return has_second_; }
    void set_has_second(bool b) { has_second_ = b; }

    Eigen::Matrix2d eval(double s, double E) const;
    // Distance up to which eval() is accurate at energy E.
    double range(double E) const;
    // Distance from the endpoint where outward integrations start. Convergent series are used
    // up to the edge of their range: near a singular point the coefficient of the subdominant
    // solution is ill-conditioned, so starting further out keeps it accurate.
    double start(double E) const;

private:
    Kind kind_ = Kind::regular;
    bool has_second_ = true;
    double c_ = 0.0, g_ = 0.0, k_ = 1.0, alpha_ = 0.0;
    // Frobenius data
    std::complex<double> rp_, rm_;
    bool complex_ = false;
    bool log_ = false;  // second solution carries a logarithm
    int resonance_ = -1;
    double w0_ = 1.0;
    bool regular_sign_ = false;  // exponents (1, 0): f1 = -u1, f2 = u2
};

// Heads at a finite endpoint, or nullopt when no local model is available.
std::optional<Heads> heads_for(const Problem& p, const EndpointGeometry& g,
                               const EndpointClassification& cls);

// Start distance when only leading-order behaviour is known.
constexpr double singular_start = 1e-6;

}  // namespace sax::detail
