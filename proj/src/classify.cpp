#include "sax/classify.hpp"

#include <cmath>
#include <numbers>

#include "sax/errors.hpp"
#include "sax/numerics.hpp"

namespace sax {

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::regular: return "Regular";
    case Verdict::limit_circle: return "LimitCircle";
    case Verdict::limit_point: return "LimitPoint";
    }
    return "?";
}

EndpointGeometry endpoint_geometry(const Domain1D& d, Side s) {
    using K = Domain1D::Kind;
    switch (s) {
    case Side::lower:
        if (d.kind == K::half_line) return {s, 0.0, +1, true};
        if (d.kind == K::interval) return {s, d.lower, +1, true};
        return {s, -INFINITY, +1, false};
    case Side::upper:
        if (d.kind == K::interval) return {s, d.upper, -1, true};
        return {s, INFINITY, -1, false};
    case Side::origin_minus:
        if (d.kind != K::line) throw ConfigError("origin sides exist only on the line");
        return {s, 0.0, -1, true};
    case Side::origin_plus:
        if (d.kind != K::line) throw ConfigError("origin sides exist only on the line");
        return {s, 0.0, +1, true};
    }
    throw ConfigError("unknown side");
}

namespace {

using Exponents = std::array<std::complex<double>, 2>;

// Roots of r^2 + (alpha - 1) r - q = 0, larger real part first.
Exponents euler_exponents(double alpha, double q) {
    const double b = alpha - 1.0;
    const std::complex<double> disc = std::sqrt(std::complex<double>(b * b + 4.0 * q, 0.0));
    std::complex<double> r1 = 0.5 * (-b + disc), r2 = 0.5 * (-b - disc);
    if (r2.real() > r1.real()) std::swap(r1, r2);
    return {r1, r2};
}

Verdict verdict_from_exponents(const Exponents& e) {
    // x^r is square integrable near 0 iff Re r > -1/2; a double root adds a logarithm, which
    // does not change integrability away from the threshold.
    return (e[0].real() > -0.5 && e[1].real() > -0.5) ? Verdict::limit_circle : Verdict::limit_point;
}

EndpointClassification make(Side s, Verdict v, std::string rule,
                             std::optional<Exponents> ex = std::nullopt) {
    EndpointClassification c;
    c.side = s;
    c.verdict = v;
    c.path = EvidencePath::analytic;
    c.exponents = ex;
    c.rule = std::move(rule);
    return c;
}

// Exponents of the local Frobenius/Euler problem at a finite singular point at the origin,
// when they are known in closed form.
std::optional<Exponents> origin_exponents(const Problem& p) {
    const KineticWeight& w = p.weight;
    const auto& fam = p.potential.family();
    if (w.power == 0.0) {
        auto sing = p.potential.origin_singularity();
        if (!sing) return std::nullopt;
        return euler_exponents(0.0, sing->c / w.coefficient);
    }
    if (std::holds_alternative<potential::Free>(fam)) return euler_exponents(w.power, 0.0);
    if (const auto* pl = std::get_if<potential::PowerLaw>(&fam)) {
        if (pl->s == w.power - 2.0) return euler_exponents(w.power, pl->a / w.coefficient);
    }
    if (const auto* is = std::get_if<potential::InverseSquare>(&fam)) {
        if (w.power == 0.0) return euler_exponents(0.0, is->c / w.coefficient);
    }
    return std::nullopt;
}

std::optional<EndpointClassification> analytic(const Problem& p, const EndpointGeometry& g) {
    const auto& fam = p.potential.family();
    if (!g.finite) {
        if (p.weight.power != 0.0) return std::nullopt;
        if (const auto* pl = std::get_if<potential::PowerLaw>(&fam)) {
            if (pl->a < 0.0 && pl->s > 2.0)
                return make(g.side, Verdict::limit_circle, "attraction faster than x^2 at infinity");
            return make(g.side, Verdict::limit_point, "potential bounded below by -C x^2 at infinity");
        }
        return make(g.side, Verdict::limit_point, "potential vanishes at infinity");
    }

    if (const auto* t = std::get_if<potential::Tabulated>(&fam)) {
        if (g.x >= t->x.front() || !t->lower_exponents)
            return make(g.side, Verdict::regular, "tabulated potential finite at endpoint");
        const auto& e = *t->lower_exponents;
        Exponents ex{std::complex<double>(std::max(e[0], e[1])), std::complex<double>(std::min(e[0], e[1]))};
        return make(g.side, verdict_from_exponents(ex), "declared Frobenius exponents", ex);
    }

    if (g.x != 0.0) return make(g.side, Verdict::regular, "potential and weight finite at endpoint");

    const KineticWeight& w = p.weight;
    if (w.power == 0.0) {
        if (const auto* pl = std::get_if<potential::PowerLaw>(&fam)) {
            if (pl->s >= 0.0 || pl->a == 0.0)
                return make(g.side, Verdict::regular, "potential finite at endpoint");
            if (pl->s > -2.0 && pl->s != -1.0)
                return make(g.side, Verdict::limit_circle, "singularity weaker than 1/x^2",
                            Exponents{1.0, 0.0});
            if (pl->s < -2.0)
                return make(g.side, pl->a > 0.0 ? Verdict::limit_point : Verdict::limit_circle,
                            pl->a > 0.0 ? "strongly repulsive singularity" : "strongly attractive singularity");
        }
        auto sing = p.potential.origin_singularity();
        if (sing) {
            const Exponents ex = euler_exponents(0.0, sing->c / w.coefficient);
            if (sing->c == 0.0 && sing->g == 0.0)
                return make(g.side, Verdict::regular, "potential finite at endpoint", ex);
            return make(g.side, verdict_from_exponents(ex), "Frobenius exponents", ex);
        }
        return std::nullopt;
    }
    if (auto ex = origin_exponents(p))
        return make(g.side, verdict_from_exponents(*ex), "Euler exponents", *ex);
    return std::nullopt;
}

// Per-decade L^2 test on two independent solutions at energy E0.
EndpointClassification numerical(const Problem& p, const EndpointGeometry& g, double E0) {
    EndpointClassification c;
    c.side = g.side;
    c.path = EvidencePath::numerical;
    if (g.finite) {
        const double v = p.potential(g.x);
        const double pw = p.weight(g.x);
        if (std::isfinite(v) && std::isfinite(pw) && pw > 0.0) {
            c.verdict = Verdict::regular;
            c.rule = "potential finite and weight positive at endpoint";
            return c;
        }
    }

    StationaryEquation eq{p.potential, p.weight, E0};
    const int decades = g.finite ? 7 : 4;
    const int per_decade = 40;
    double start = 1.0;
    if (g.finite && p.domain.kind == Domain1D::Kind::interval)
        start = std::min(1.0, 0.5 * (p.domain.upper - p.domain.lower));
    // Position at distance d from a finite endpoint, or at d for an infinite one.
    auto pos = [&](double d) {
        if (g.finite) return g.x + g.orientation * d;
        return g.orientation < 0 ? d : -d;
    };

    for (int sol = 0; sol < 2; ++sol) {
        Stepper<double> stepper(eq, IntegratorOptions{1e-10, 1e150, 400'000});
        Eigen::Vector2d y = sol == 0 ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
        double d = start;
        double x = pos(d);
        std::vector<double>& norms = c.decade_norms[static_cast<std::size_t>(sol)];
        bool overflow = false;
        for (int dec = 0; dec < decades && !overflow; ++dec) {
            Eigen::VectorXd xs(per_decade + 1);
            Eigen::VectorXcd f(per_decade + 1), df(per_decade + 1);
            for (int k = 0; k <= per_decade; ++k) {
                const double dk = g.finite ? d * std::pow(10.0, -double(k) / per_decade)
                                           : d * std::pow(10.0, double(k) / per_decade);
                const double xk = pos(dk);
                try {
                    y = stepper.advance(y, x, xk);
                } catch (const NumericalError&) {
                    overflow = true;
                    break;
                }
                x = xk;
                xs[k] = xk;
                f[k] = y(0);
                df[k] = y(1) / p.weight(xk);
            }
            if (overflow) break;
            d = g.finite ? d / 10.0 : d * 10.0;
            if (xs[0] > xs[per_decade]) {
                xs.reverseInPlace();
                f.reverseInPlace();
                df.reverseInPlace();
            }
            norms.push_back(hermite_norm2(xs, f, df));
        }
        if (overflow) norms.push_back(INFINITY);
    }

    auto exps = g.finite && g.x == 0.0 ? origin_exponents(p) : std::nullopt;
    c.exponents = exps;
    auto integrable = [&](const std::vector<double>& n, std::string& rule) -> bool {
        if (n.empty()) throw NumericalError("numerical L2 test produced no data");
        if (!std::isfinite(n.back())) {
            rule = "solution overflow";
            return false;
        }
        if (n.size() < 3) throw NumericalError("numerical L2 test inconclusive: too few decades");
        double total = 0.0;
        for (double v : n) total += v;
        const double last = n.back(), prev = n[n.size() - 2];
        if (total == 0.0 || last < 1e-6 * total) {
            rule = "last decade negligible";
            return true;
        }
        if (prev > 0.0 && last > 10.0 * prev) {
            rule = "growth faster than tenfold per decade";
            return false;
        }
        // Trend over the last three decades.
        const double a = n[n.size() - 3];
        const double trend = a > 0.0 && last > 0.0 ? 0.5 * std::log10(last / a) : 0.0;
        if (trend > 0.1) {
            rule = "decade integrals grow";
            return false;
        }
        if (trend < -0.1) {
            rule = "decade integrals shrink";
            return true;
        }
        if (exps) {
            rule = "marginal decay; Frobenius exponents decide";
            return verdict_from_exponents(*exps) == Verdict::limit_circle;
        }
        rule = "marginal decay treated as divergent";
        return false;
    };
    std::string r0, r1;
    const bool l0 = integrable(c.decade_norms[0], r0);
    const bool l1 = integrable(c.decade_norms[1], r1);
    c.verdict = (l0 && l1) ? Verdict::limit_circle : Verdict::limit_point;
    c.rule = r0 == r1 ? r0 : r0 + "; " + r1;
    return c;
}

}  // namespace

EndpointClassification classify_endpoint(const Problem& p, Side side, double E0, EvidenceMode mode) {
    const EndpointGeometry g = endpoint_geometry(p.domain, side);
    if (p.domain.kind == Domain1D::Kind::interval && p.domain.lower < 0.0 && p.domain.upper > 0.0 &&
        p.potential.origin_singularity() &&
        (p.potential.origin_singularity()->c != 0.0 || p.potential.origin_singularity()->g != 0.0))
        throw ConfigError("interval contains the singular point in its interior; use the line");
    if (mode == EvidenceMode::prefer_analytic) {
        if (auto a = analytic(p, g)) return *a;
    }
    EndpointClassification c = numerical(p, g, E0);
    if (!c.exponents && g.finite && g.x == 0.0) {
        if (auto a = analytic(p, g)) c.exponents = a->exponents;
    }
    return c;
}

std::pair<int, int> deficiency_indices(const Problem& p) {
    int n = 0;
    for (Side s : sides_of(p.domain))
        if (classify_endpoint(p, s, p.E0).verdict != Verdict::limit_point) ++n;
    return {n, n};
}

}  // namespace sax
