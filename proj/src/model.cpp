#include "sax/model.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "sax/errors.hpp"

namespace sax {

double ExtendedReal::value() const {
    if (infinite_) throw ConfigError("infinite length has no finite value");
    return value_;
}

std::vector<Side> sides_of(const Domain1D& d) {
    switch (d.kind) {
    case Domain1D::Kind::half_line:
    case Domain1D::Kind::interval:
        return {Side::lower, Side::upper};
    case Domain1D::Kind::line:
        return {Side::lower, Side::origin_minus, Side::origin_plus, Side::upper};
    }
    return {};
}

const char* to_string(Side s) {
    switch (s) {
    case Side::lower: return "lower";
    case Side::upper: return "upper";
    case Side::origin_minus: return "origin_minus";
    case Side::origin_plus: return "origin_plus";
    }
    return "?";
}

std::optional<Side> side_from_string(const std::string& s) {
    for (Side side : {Side::lower, Side::upper, Side::origin_minus, Side::origin_plus})
        if (s == to_string(side)) return side;
    return std::nullopt;
}

std::string PotentialSpec::name() const {
    struct Visitor {
        std::string operator()(const potential::Free&) const { return "free"; }
        std::string operator()(const potential::InverseSquare&) const { return "inverse_square"; }
        std::string operator()(const potential::Coulomb&) const { return "coulomb"; }
        std::string operator()(const potential::CoulombPlusCentrifugal&) const {
            return "coulomb_centrifugal";
        }
        std::string operator()(const potential::PowerLaw&) const { return "power_law"; }
        std::string operator()(const potential::Tabulated&) const { return "tabulated"; }
    };
    return std::visit(Visitor{}, family_);
}

namespace {

double tabulated_value(const potential::Tabulated& t, double x) {
    if (x > t.x.back()) return 0.0;
    if (x < t.x.front()) {
        if (!t.lower_exponents) return t.v.front();
        const double r = (*t.lower_exponents)[0];
        return r * (r - 1.0) / (x * x);
    }
    auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
    if (it == t.x.end()) return t.v.back();
    const auto j = static_cast<std::size_t>(it - t.x.begin());
    const double w = (x - t.x[j - 1]) / (t.x[j] - t.x[j - 1]);
    return (1.0 - w) * t.v[j - 1] + w * t.v[j];
}

}  // namespace

double PotentialSpec::operator()(double x) const {
    const double r = std::abs(x);
    struct Visitor {
        double x, r;
        double operator()(const potential::Free&) const { return 0.0; }
        double operator()(const potential::InverseSquare& p) const { return p.c / (r * r); }
        double operator()(const potential::Coulomb& p) const { return p.g / r; }
        double operator()(const potential::CoulombPlusCentrifugal& p) const {
            return p.g / r + p.l * (p.l + 1.0) / (r * r);
        }
        double operator()(const potential::PowerLaw& p) const {
            return p.s == 0.0 ? p.a : p.a * std::pow(r, p.s);
        }
        double operator()(const potential::Tabulated& t) const { return tabulated_value(t, x); }
    };
    return std::visit(Visitor{x, r}, family_);
}

std::optional<PotentialSpec::Singularity> PotentialSpec::origin_singularity() const {
    struct Visitor {
        std::optional<Singularity> operator()(const potential::Free&) const {
            return Singularity{};
        }
        std::optional<Singularity> operator()(const potential::InverseSquare& p) const {
            return Singularity{p.c, 0.0};
        }
        std::optional<Singularity> operator()(const potential::Coulomb& p) const {
            return Singularity{0.0, p.g};
        }
        std::optional<Singularity> operator()(const potential::CoulombPlusCentrifugal& p) const {
            return Singularity{p.l * (p.l + 1.0), p.g};
        }
        std::optional<Singularity> operator()(const potential::PowerLaw& p) const {
            if (p.s == -2.0) return Singularity{p.a, 0.0};
            if (p.s == -1.0) return Singularity{0.0, p.a};
            return std::nullopt;
        }
        std::optional<Singularity> operator()(const potential::Tabulated& t) const {
            if (!t.lower_exponents) return std::nullopt;
            const double r = (*t.lower_exponents)[0];
            return Singularity{r * (r - 1.0), 0.0};
        }
    };
    return std::visit(Visitor{}, family_);
}

bool PotentialSpec::vanishes_at_infinity() const {
    if (const auto* p = std::get_if<potential::PowerLaw>(&family_)) return p->s < 0.0 || p->a == 0.0;
    return true;
}

double KineticWeight::operator()(double x) const {
    return power == 0.0 ? coefficient : coefficient * std::pow(std::abs(x), power);
}

ExtendedReal robin_from_theta(double theta, double L0) {
    if (theta == 0.0) return ExtendedReal::infinity();
    if (theta == std::numbers::pi) return ExtendedReal(0.0);
    const double h = 0.5 * theta;
    return ExtendedReal(L0 * std::cos(h) / std::sin(h));
}

double theta_from_robin(ExtendedReal L, double L0) {
    if (L.is_infinite()) return 0.0;
    return 2.0 * std::atan2(L0, L.value());
}

BoundaryCondition BoundaryCondition::robin(ExtendedReal L, double L0) {
    return robin_theta(theta_from_robin(L, L0), L0);
}

BoundaryCondition BoundaryCondition::robin_theta(double theta, double L0) {
    BoundaryCondition bc;
    bc.variant = RobinBC{theta, std::numbers::pi};
    bc.L0 = L0;
    return bc;
}

BoundaryCondition BoundaryCondition::interval_robin(ExtendedReal lower_L, ExtendedReal upper_L,
                                                    double L0) {
    BoundaryCondition bc;
    bc.variant = RobinBC{theta_from_robin(lower_L, L0), theta_from_robin(upper_L, L0)};
    bc.L0 = L0;
    return bc;
}

BoundaryCondition BoundaryCondition::u2(const Eigen::Matrix2cd& U, double L0) {
    BoundaryCondition bc;
    bc.variant = U2BC{U};
    bc.L0 = L0;
    return bc;
}

BoundaryCondition BoundaryCondition::u2(const U2Params& p, double L0) {
    return u2(u2_from_params(p), L0);
}

Eigen::Matrix2cd u2_from_params(const U2Params& p) {
    const Complex e = std::polar(1.0, p.phase);
    const double c = std::cos(p.mixing), s = std::sin(p.mixing);
    Eigen::Matrix2cd V;
    V << c, -e * s, std::conj(e) * s, c;
    Eigen::Matrix2cd D = Eigen::Matrix2cd::Zero();
    D(0, 0) = std::polar(1.0, p.theta_plus);
    D(1, 1) = std::polar(1.0, p.theta_minus);
    return V * D * V.adjoint();
}

namespace {

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * std::numbers::pi);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
}

}  // namespace

U2Params params_from_u2(const Eigen::Matrix2cd& U) {
    Eigen::ComplexSchur<Eigen::Matrix2cd> schur(U);
    const Eigen::Matrix2cd& Q = schur.matrixU();
    const Eigen::Matrix2cd& T = schur.matrixT();
    // A unitary matrix is normal, so T is diagonal up to rounding.
    Eigen::Index first = std::abs(Q(0, 0)) >= std::abs(Q(0, 1)) ? 0 : 1;
    Eigen::Vector2cd v = Q.col(first);
    const Complex lam_plus = T(first, first);
    const Complex lam_minus = T(1 - first, 1 - first);
    const Complex ph = std::abs(v(0)) > 0.0 ? std::conj(v(0)) / std::abs(v(0)) : Complex(1.0);
    v *= ph;
    U2Params p;
    p.theta_plus = wrap_angle(std::arg(lam_plus));
    p.theta_minus = wrap_angle(std::arg(lam_minus));
    p.mixing = std::atan2(std::abs(v(1)), std::abs(v(0)));
    p.phase = std::abs(v(1)) > 0.0 ? -std::arg(v(1)) : 0.0;
    return p;
}

bool is_unitary(const Eigen::Matrix2cd& U, double tol) {
    return (U.adjoint() * U - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <= tol;
}

void validate(const Problem& p) {
    using K = Domain1D::Kind;
    if (p.domain.kind == K::interval && !(p.domain.lower < p.domain.upper))
        throw ConfigError("interval requires lower < upper");
    if (!(p.bc.L0 > 0.0) || !std::isfinite(p.bc.L0))
        throw ConfigError("L0 must be positive and finite");
    if (!std::isfinite(p.E0)) throw ConfigError("E0 must be finite");
    if (!(p.weight.coefficient > 0.0) || !std::isfinite(p.weight.power))
        throw ConfigError("kinetic weight must be positive");

    if (p.domain.kind == K::line) {
        if (p.bc.is_robin()) throw ConfigError("the line requires a U(2) condition");
        if (!is_unitary(p.bc.unitary())) throw ConfigError("U(2) matrix is not unitary");
    } else {
        if (!p.bc.is_robin()) throw ConfigError("half line and interval take Robin conditions");
        const RobinBC& r = p.bc.robin();
        if (!std::isfinite(r.theta) || !std::isfinite(r.upper_theta))
            throw ConfigError("Robin angle must be finite");
    }

    struct Check {
        const Problem& p;
        void operator()(const potential::Free&) const {}
        void operator()(const potential::InverseSquare& v) const {
            if (!std::isfinite(v.c)) throw ConfigError("inverse_square: c must be finite");
        }
        void operator()(const potential::Coulomb& v) const {
            if (!std::isfinite(v.g)) throw ConfigError("coulomb: g must be finite");
        }
        void operator()(const potential::CoulombPlusCentrifugal& v) const {
            if (!std::isfinite(v.g) || v.l < 0)
                throw ConfigError("coulomb_centrifugal: need finite g and l >= 0");
        }
        void operator()(const potential::PowerLaw& v) const {
            if (!std::isfinite(v.a) || !std::isfinite(v.s))
                throw ConfigError("power_law: a and s must be finite");
        }
        void operator()(const potential::Tabulated& t) const {
            if (p.domain.kind == K::line)
                throw ConfigError("tabulated potentials are supported on the half line and intervals");
            if (t.x.size() < 2 || t.x.size() != t.v.size())
                throw ConfigError("tabulated: need at least two (x, V) samples of equal length");
            for (std::size_t i = 0; i < t.x.size(); ++i) {
                if (!std::isfinite(t.x[i]) || !std::isfinite(t.v[i]))
                    throw ConfigError("tabulated: samples must be finite");
                if (i > 0 && !(t.x[i] > t.x[i - 1]))
                    throw ConfigError("tabulated: x must be strictly increasing");
            }
            const double lo = p.domain.kind == K::interval ? p.domain.lower : 0.0;
            if (t.x.front() < lo) throw ConfigError("tabulated: samples start below the domain");
            if (t.x.front() > lo) {
                if (!t.lower_exponents)
                    throw ConfigError(
                        "tabulated: table does not reach the endpoint; declare its Frobenius exponents");
                if (lo != 0.0)
                    throw ConfigError("tabulated: declared exponents refer to a singular point at 0");
                const auto& e = *t.lower_exponents;
                if (std::abs(e[0] + e[1] - 1.0) > 1e-12)
                    throw ConfigError("tabulated: declared exponents must sum to 1");
            }
        }
    };
    std::visit(Check{p}, p.potential.family());
}

Problem make_problem(Domain1D domain, PotentialSpec potential, BoundaryCondition bc, double E0,
                     KineticWeight weight) {
    Problem p{domain, std::move(potential), weight, std::move(bc), E0};
    validate(p);
    return p;
}

double energy_to_internal(double E, const Units& u) { return E / u.energy_scale(); }
double energy_to_physical(double E, const Units& u) { return E * u.energy_scale(); }
double time_to_internal(double t, const Units& u) { return t * u.energy_scale() / u.hbar; }
double time_to_physical(double t, const Units& u) { return t * u.hbar / u.energy_scale(); }

namespace {

PotentialSpec scale_potential(const PotentialSpec& v, double f) {
    struct Visitor {
        double f;
        PotentialSpec operator()(const potential::Free& p) const { return {p}; }
        PotentialSpec operator()(const potential::InverseSquare& p) const {
            return {potential::InverseSquare{p.c * f}};
        }
        PotentialSpec operator()(const potential::Coulomb& p) const {
            return {potential::Coulomb{p.g * f}};
        }
        PotentialSpec operator()(const potential::CoulombPlusCentrifugal& p) const {
            return {potential::CoulombPlusCentrifugal{p.g * f, p.l}};
        }
        PotentialSpec operator()(const potential::PowerLaw& p) const {
            return {potential::PowerLaw{p.a * f, p.s}};
        }
        PotentialSpec operator()(const potential::Tabulated& p) const {
            potential::Tabulated t = p;
            for (double& v : t.v) v *= f;
            return {t};
        }
    };
    return std::visit(Visitor{f}, v.family());
}

}  // namespace

// The centrifugal term l(l+1)/x^2 comes from the kinetic operator and carries no energy unit.
Problem to_internal_units(const Problem& p, const Units& u) {
    if (!(u.hbar > 0.0) || !(u.mass > 0.0)) throw ConfigError("units: hbar and mass must be positive");
    Problem q = p;
    q.potential = scale_potential(p.potential, 1.0 / u.energy_scale());
    q.E0 = energy_to_internal(p.E0, u);
    return q;
}

Problem to_physical_units(const Problem& p, const Units& u) {
    if (!(u.hbar > 0.0) || !(u.mass > 0.0)) throw ConfigError("units: hbar and mass must be positive");
    Problem q = p;
    q.potential = scale_potential(p.potential, u.energy_scale());
    q.E0 = energy_to_physical(p.E0, u);
    return q;
}

}  // namespace sax
