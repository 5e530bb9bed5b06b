#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sax/model.hpp"

namespace sax {

enum class Verdict { regular, limit_circle, limit_point };
const char* to_string(Verdict v);

enum class EvidencePath { analytic, numerical };
enum class EvidenceMode { prefer_analytic, numerical_only };

struct EndpointClassification {
    Side side = Side::lower;
    Verdict verdict = Verdict::regular;
    EvidencePath path = EvidencePath::analytic;
    // Frobenius exponents at E = 0, larger real part first, when the local equation is of
    // Euler or Frobenius type.
    std::optional<std::array<std::complex<double>, 2>> exponents;
    // Numerical evidence: integral of |phi|^2 over successive decades toward the endpoint for
    // two independent solutions.
    std::array<std::vector<double>, 2> decade_norms;
    std::string rule;
};

// Endpoint location: x_e, the direction pointing into the domain (+1 or -1), finiteness.
struct EndpointGeometry {
    Side side;
    double x;
    int orientation;
    bool finite;
};
EndpointGeometry endpoint_geometry(const Domain1D& d, Side s);

EndpointClassification classify_endpoint(const Problem& p, Side side, double E0,
                                         EvidenceMode mode = EvidenceMode::prefer_analytic);

// Coupling c of c/x^2 at and above which the origin is limit point.
constexpr double inverse_square_threshold() { return 0.75; }

// (n, n) with n the number of regular or limit-circle endpoints, counting both sides of the
// marked point of the line.
std::pair<int, int> deficiency_indices(const Problem& p);

}  // namespace sax
