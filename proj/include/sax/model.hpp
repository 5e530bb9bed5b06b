#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace sax {

using Complex = std::complex<double>;

// A real number or +infinity. Used for Robin lengths, where L = infinity is Neumann-like.
class ExtendedReal {
public:
    constexpr ExtendedReal(double v = 0.0) : value_(v) {}
    static constexpr ExtendedReal infinity() {
        ExtendedReal r;
        r.infinite_ = true;
        return r;
    }
    constexpr bool is_infinite() const { return infinite_; }
    // Finite value; throws ConfigError for infinity.
    double value() const;

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

struct Domain1D {
    enum class Kind { half_line, line, interval };
    Kind kind = Kind::half_line;
    double lower = 0.0;  // interval only
    double upper = 0.0;  // interval only

    static Domain1D half_line() { return {Kind::half_line, 0.0, 0.0}; }
    static Domain1D line() { return {Kind::line, 0.0, 0.0}; }
    static Domain1D interval(double a, double b) { return {Kind::interval, a, b}; }
};

// Endpoints of a domain. The line has a marked point at 0 with two sides.
enum class Side { lower, upper, origin_minus, origin_plus };

std::vector<Side> sides_of(const Domain1D& d);
const char* to_string(Side s);
std::optional<Side> side_from_string(const std::string& s);

namespace potential {
struct Free {};
struct InverseSquare {
    double c;  // V = c / x^2
};
struct Coulomb {
    double g;  // V = g / x
};
struct CoulombPlusCentrifugal {
    double g;
    int l;  // V = g / x + l(l+1) / x^2
};
struct PowerLaw {
    double a;
    double s;  // V = a * x^s
};
// Linear interpolation on samples, zero beyond the last sample. If the table does not start
// at the lower endpoint, the behaviour below the first sample is c / x^2 with c fixed by the
// declared Frobenius exponents (which must sum to 1).
struct Tabulated {
    std::vector<double> x;
    std::vector<double> v;
    std::optional<std::array<double, 2>> lower_exponents;
};
}  // namespace potential

class PotentialSpec {
public:
    using Family = std::variant<potential::Free, potential::InverseSquare, potential::Coulomb,
                                potential::CoulombPlusCentrifugal, potential::PowerLaw,
                                potential::Tabulated>;

    PotentialSpec() = default;
    PotentialSpec(Family f) : family_(std::move(f)) {}

    const Family& family() const { return family_; }
    std::string name() const;

    // Potential at coordinate x. Analytic families depend on |x|.
    double operator()(double x) const;

    // Inverse-square and Coulomb strength of the leading singularity at the origin, if the
    // family has one of the form c/x^2 + g/x near 0.
    struct Singularity {
        double c = 0.0;
        double g = 0.0;
    };
    std::optional<Singularity> origin_singularity() const;

    bool vanishes_at_infinity() const;

private:
    Family family_ = potential::Free{};
};

// p(x) = coefficient * |x|^power
struct KineticWeight {
    double coefficient = 1.0;
    double power = 0.0;

    bool is_unit() const { return coefficient == 1.0 && power == 0.0; }
    double operator()(double x) const;
};

// Robin condition psi + L psi' = 0 at the lower end, stored as the angle theta with
// L = L0 cot(theta/2). On an interval the upper end uses psi - L psi' = 0 with its own angle.
struct RobinBC {
    double theta = 0.0;
    double upper_theta = 3.14159265358979323846;  // Dirichlet
};

// Two-sided condition (U - 1) G1 + i (U + 1) G2 = 0 at the marked point of the line.
struct U2BC {
    Eigen::Matrix2cd U = Eigen::Matrix2cd::Identity();
};

struct U2Params {
    double theta_plus = 0.0;
    double theta_minus = 0.0;
    double mixing = 0.0;  // mu
    double phase = 0.0;   // phi
};

struct BoundaryCondition {
    std::variant<RobinBC, U2BC> variant = RobinBC{};
    double L0 = 1.0;

    static BoundaryCondition robin(ExtendedReal L, double L0 = 1.0);
    static BoundaryCondition robin_theta(double theta, double L0 = 1.0);
    static BoundaryCondition interval_robin(ExtendedReal lower_L, ExtendedReal upper_L,
                                            double L0 = 1.0);
    static BoundaryCondition u2(const Eigen::Matrix2cd& U, double L0 = 1.0);
    static BoundaryCondition u2(const U2Params& p, double L0 = 1.0);

    bool is_robin() const { return std::holds_alternative<RobinBC>(variant); }
    const RobinBC& robin() const { return std::get<RobinBC>(variant); }
    const Eigen::Matrix2cd& unitary() const { return std::get<U2BC>(variant).U; }
};

ExtendedReal robin_from_theta(double theta, double L0 = 1.0);
double theta_from_robin(ExtendedReal L, double L0 = 1.0);

Eigen::Matrix2cd u2_from_params(const U2Params& p);
U2Params params_from_u2(const Eigen::Matrix2cd& U);
bool is_unitary(const Eigen::Matrix2cd& U, double tol = 1e-12);

struct Problem {
    Domain1D domain;
    PotentialSpec potential;
    KineticWeight weight;
    BoundaryCondition bc;
    double E0 = 0.0;  // reference energy for reference modes
};

// Builds a problem and checks its invariants; throws ConfigError on violation.
Problem make_problem(Domain1D domain, PotentialSpec potential, BoundaryCondition bc,
                     double E0 = 0.0, KineticWeight weight = {});
void validate(const Problem& p);

// Physical units: kinetic term -(hbar^2 / 2m) (p psi')'. Internally hbar^2 / 2m = 1.
struct Units {
    double hbar = 1.0;
    double mass = 0.5;
    double energy_scale() const { return hbar * hbar / (2.0 * mass); }
};

double energy_to_internal(double E, const Units& u);
double energy_to_physical(double E, const Units& u);
double time_to_internal(double t, const Units& u);
double time_to_physical(double t, const Units& u);
Problem to_internal_units(const Problem& p, const Units& u);
Problem to_physical_units(const Problem& p, const Units& u);

}  // namespace sax
