#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sax/refmodes.hpp"

using namespace sax;

namespace {

Problem half_line(PotentialSpec v, KineticWeight w = {}) {
    Problem p = make_problem(Domain1D::half_line(), std::move(v), BoundaryCondition::robin(0.0));
    p.weight = w;
    return p;
}

const Problem lc = half_line(PotentialSpec(potential::InverseSquare{5.0 / 16}));

// a phi1 + b phi2 of `modes` on the grid, plus r(x) = x^(9/4), which decays faster than both.
SolutionSamples combination(const ReferenceModes& modes, const Grid& g, std::complex<double> a,
                            std::complex<double> b, double remainder = 0.0) {
    const RealSamples s1 = modes.sample(g, 0), s2 = modes.sample(g, 1);
    SolutionSamples out{g, Eigen::VectorXcd(g.size()), Eigen::VectorXcd(g.size())};
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        out.psi[i] = a * s1.psi[i] + b * s2.psi[i] + remainder * std::pow(g[i], 2.25);
        out.p_dpsi[i] = a * s1.p_dpsi[i] + b * s2.p_dpsi[i] + remainder * 2.25 * std::pow(g[i], 1.25);
    }
    return out;
}

}  // namespace

TEST_CASE("inverse square pair") {
    const ReferenceModes m = reference_modes(lc, Side::lower, 0.0);
    for (double x : {1e-6, 1e-3, 0.1}) {
        const Eigen::Matrix2d v = m.at(x);
        CHECK(v(0, 0) == doctest::Approx(std::pow(x, 1.25)).epsilon(1e-12));
        CHECK(v(1, 0) == doctest::Approx(-2.0 / 3 * std::pow(x, -0.25)).epsilon(1e-12));
        CHECK(v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("coulomb pair") {
    const double g = -2.0;
    const ReferenceModes m = reference_modes(half_line(PotentialSpec(potential::Coulomb{g})), Side::lower, 0.0);
    const double r = 1e-4;
    const Eigen::Matrix2d v = m.at(r);
    CHECK(v(0, 0) / -r == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(v(1, 0) == doctest::Approx(1.0 + g * r * std::log(std::abs(g) * r)).epsilon(1e-6));
    for (double x : {1e-5, 1e-2, 0.2})
        CHECK(m.at(x).determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("regular endpoint pair") {
    const ReferenceModes m = reference_modes(half_line(PotentialSpec(potential::Free{})), Side::lower, 0.0);
    for (double x : {0.0, 0.5, 2.0}) {
        const Eigen::Matrix2d v = m.at(x);
        CHECK(v(0, 0) == doctest::Approx(-x));
        CHECK(v(0, 1) == doctest::Approx(-1.0));
        CHECK(v(1, 0) == doctest::Approx(1.0));
        CHECK(v(1, 1) == doctest::Approx(0.0));
    }
}

TEST_CASE("limit point endpoints have no reference pair") {
    const Problem q = half_line(PotentialSpec(potential::PowerLaw{-2.0, 2.0}), {1.0, 4.0});
    const ReferenceModes m = asymptotic_modes(q, Side::lower);
    for (double x : {1e-3, 0.05}) {
        CHECK(m.at(x)(0, 0) == doctest::Approx(1.0 / x).epsilon(1e-6));
        CHECK(m.at(x).determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK_THROWS_AS(reference_modes(q, Side::lower, 0.0), ConfigError);
    CHECK_THROWS_AS(reference_modes(half_line(PotentialSpec(potential::InverseSquare{21.0 / 16})), Side::lower, 0.0),
                    ConfigError);
}

TEST_CASE("second solution by quadrature") {
    auto one = [](double) { return Eigen::Vector2d(1.0, 0.0); };
    const auto lin = second_solution(one, {}, 0.7);
    for (double x : {0.1, 1.0, 3.0}) CHECK(lin(x)(0) == doctest::Approx(x - 0.7));

    auto sine = [](double x) { return Eigen::Vector2d(std::sin(x), std::cos(x)); };
    const auto s2 = second_solution(sine, {}, 1.3);
    for (double x : {0.4, 1.0, 2.5}) CHECK(wronskian<double>(sine(x), s2(x)) == doctest::Approx(1.0).epsilon(1e-10));

    auto power = [](double x) { return Eigen::Vector2d(std::pow(x, 1.25), 1.25 * std::pow(x, 0.25)); };
    const auto p2 = second_solution(power, {}, 0.5);
    // phi2 = -(2/3) x^(-1/4) + const x^(5/4)
    auto admixture = [&](double x) { return (p2(x)(0) + 2.0 / 3 * std::pow(x, -0.25)) / std::pow(x, 1.25); };
    CHECK(admixture(0.2) == doctest::Approx(admixture(2.0)).epsilon(1e-10));
    CHECK(wronskian<double>(power(0.9), p2(0.9)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("limit numbers of the modes themselves") {
    const ReferenceModes m = reference_modes(lc, Side::lower, 0.0);
    const Grid g = Grid::geometric(0.0, 1e-6, 0.5, 200);
    const LimitNumbers a = limit_numbers(combination(m, g, 1.0, 0.0), m);
    CHECK(std::abs(a.c1 - 1.0) < 1e-8);
    CHECK(std::abs(a.c2) < 1e-8);
    const LimitNumbers b = limit_numbers(combination(m, g, 0.0, 1.0), m);
    CHECK(std::abs(b.c1) < 1e-8);
    CHECK(std::abs(b.c2 - 1.0) < 1e-8);
}

TEST_CASE("limit numbers with a decaying remainder") {
    const ReferenceModes m = reference_modes(lc, Side::lower, 0.0);
    const Grid g = Grid::geometric(0.0, 1e-6, 0.5, 200);
    const std::complex<double> a(2.0, 0.0), b(0.0, 3.0);
    const LimitNumbers ln = limit_numbers(combination(m, g, a, b, 0.8), m);
    CHECK(std::abs(ln.c1 - a) < 1e-6);
    CHECK(std::abs(ln.c2 - b) < 1e-6);

    // Linearity within the extrapolation tolerance.
    const SolutionSamples u = combination(m, g, {1.0, -1.0}, 0.5, 0.3);
    const SolutionSamples v = combination(m, g, -0.25, {0.0, 2.0}, -1.1);
    const std::complex<double> alpha(0.3, 1.7), beta(-2.0, 0.4);
    SolutionSamples w{g, alpha * u.psi + beta * v.psi, alpha * u.p_dpsi + beta * v.p_dpsi};
    const LimitNumbers lu = limit_numbers(u, m), lv = limit_numbers(v, m), lw = limit_numbers(w, m);
    const double tol = 10 * (lu.error + lv.error + lw.error) + 1e-9;
    CHECK(std::abs(lw.c1 - (alpha * lu.c1 + beta * lv.c1)) <= tol);
    CHECK(std::abs(lw.c2 - (alpha * lu.c2 + beta * lv.c2)) <= tol);
}

TEST_CASE("wronskian from limit numbers") {
    const ReferenceModes m = reference_modes(lc, Side::lower, 0.0);
    const Grid g = Grid::geometric(0.0, 1e-6, 0.5, 200);
    const SolutionSamples u = combination(m, g, {1.0, 2.0}, {-0.5, 0.1});
    const SolutionSamples v = combination(m, g, {0.3, 0.0}, {1.0, -1.0});
    const std::complex<double> w = wronskian_from_limits(limit_numbers(u, m), limit_numbers(v, m));
    // Both are solutions at E0, so p W[conj u, v] is constant and can be read off any node.
    const Eigen::Index i = g.size() / 2;
    const std::complex<double> direct = std::conj(u.psi[i]) * v.p_dpsi[i] - std::conj(u.p_dpsi[i]) * v.psi[i];
    CHECK(std::abs(w - direct) < 1e-8 * std::abs(direct));
}

TEST_CASE("limit numbers do not depend on the reference energy") {
    const ReferenceModes m0 = reference_modes(lc, Side::lower, 0.0);
    const ReferenceModes m1 = reference_modes(lc, Side::lower, -1.0);
    const Grid g = Grid::geometric(0.0, 1e-6, 0.5, 200);
    const SolutionSamples psi = combination(m1, g, {0.4, 0.0}, {1.0, 0.5});
    const LimitNumbers a = limit_numbers(psi, m0), b = limit_numbers(psi, m1);
    CHECK(std::abs(a.c1 - b.c1) < 1e-6);
    CHECK(std::abs(a.c2 - b.c2) < 1e-6);
    CHECK(std::abs(b.c1 - 0.4) < 1e-8);

    // The known-energy path gives the same numbers.
    const LimitNumbers c = limit_numbers(psi, m0, -1.0);
    CHECK(std::abs(c.c1 - b.c1) < 1e-8);
    CHECK(std::abs(c.c2 - b.c2) < 1e-8);
}
