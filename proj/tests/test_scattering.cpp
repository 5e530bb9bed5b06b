#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sax/boundary.hpp"
#include "sax/scattering.hpp"

using namespace sax;

namespace {

constexpr double pi = std::numbers::pi;
using cd = std::complex<double>;

Problem half_line(PotentialSpec v, ExtendedReal L) {
    return make_problem(Domain1D::half_line(), std::move(v), BoundaryCondition::robin(L));
}

Problem line(PotentialSpec v, const Eigen::Matrix2cd& U) {
    return make_problem(Domain1D::line(), std::move(v), BoundaryCondition::u2(U));
}

double unitarity(const Eigen::Matrix2cd& S) { return (S.adjoint() * S - Eigen::Matrix2cd::Identity()).norm(); }

// delta': psi' continuous, psi(+0) - psi(-0) = beta psi'(0).
Eigen::Matrix2cd delta_prime_u2(double beta) {
    Eigen::Matrix2cd A, B;
    A << 1, -1, 0, 0;
    B << -beta, 0, 1, 1;
    return u2_from_conditions(A, B);
}

// c = nu^2 - 1/4 with nu = 3/4: psi = a sqrt(x) J_nu(kx) + b sqrt(x) J_-nu(kx), and the small-x
// coefficients of x^(5/4) and x^(-1/4) fix b / a from psi + L psi' = 0 read off those terms.
cd inverse_square_reflection(double L, double k) {
    const double nu = 0.75;
    const double p = std::pow(k / 2, nu) / std::tgamma(1 + nu);
    const double q = -1.5 * std::pow(k / 2, -nu) / std::tgamma(1 - nu);
    const cd a = 1.0, b = L * p / q;
    const double bp = nu * pi / 2 + pi / 4, bm = -nu * pi / 2 + pi / 4;
    return -(a * std::exp(cd(0, -bp)) + b * std::exp(cd(0, -bm))) / (a * std::exp(cd(0, bp)) + b * std::exp(cd(0, bm)));
}

}  // namespace

TEST_CASE("free half line phase shift") {
    CHECK(free_phase_shift(1.0, 1.0) == doctest::Approx(-pi / 4));
    CHECK(free_phase_shift(0.0, 3.0) == 0.0);
    CHECK(free_phase_shift(ExtendedReal::infinity(), 3.0) == doctest::Approx(pi / 2));
    for (double L : {-2.0, 0.0, 0.5, 1.0, 3.0}) {
        const Problem p = half_line(PotentialSpec(potential::Free{}), L);
        for (double k = 0.1; k <= 10.0001; k *= 1.25) {
            const cd exact = (1.0 - cd(0, k * L)) / (1.0 + cd(0, k * L));
            CHECK(std::abs(reflection_halfline(p, k) - exact) < 1e-8);
            CHECK(phase_shift_halfline(p, k) == doctest::Approx(free_phase_shift(L, k)).epsilon(1e-8));
        }
    }
    const Problem n = half_line(PotentialSpec(potential::Free{}), ExtendedReal::infinity());
    CHECK(std::abs(reflection_halfline(n, 2.0) + 1.0) < 1e-12);
    CHECK(std::abs(reflection_halfline(half_line(PotentialSpec(potential::Free{}), 1.0), 1.0) - cd(0, -1)) < 1e-12);
}

TEST_CASE("inverse square phase shift") {
    for (double L : {0.0, 0.5, -2.0, 3.0})
        for (double k : {0.3, 1.0, 4.0}) {
            const Problem p = half_line(PotentialSpec(potential::InverseSquare{5.0 / 16}), L);
            double err = 0;
            const cd S = reflection_halfline(p, k, &err);
            CHECK(std::abs(S - inverse_square_reflection(L, k)) < 1e-8);
            CHECK(err < 1e-8);
            CHECK(std::abs(std::abs(S) - 1.0) < 1e-12);
        }
}

TEST_CASE("wigner time delay") {
    for (double L : {-3.0, -1.0, -0.2, 0.5, 1.0, 2.0})
        for (double k : {0.2, 0.7, 1.0, 3.0}) {
            const Problem p = half_line(PotentialSpec(potential::Free{}), L);
            const double tau = wigner_time_delay(p, k);
            CHECK(tau == doctest::Approx(free_time_delay(L, k)).epsilon(1e-4));
            CHECK((tau > 0) == (L < 0));
        }
    CHECK(free_time_delay(1.0, 1.0) == doctest::Approx(-0.5));
    CHECK(wigner_time_delay(half_line(PotentialSpec(potential::Free{}), 0.0), 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(wigner_time_delay(half_line(PotentialSpec(potential::Free{}), 1.0), 1e-4), ConfigError);
}

TEST_CASE("unsupported inputs") {
    CHECK_THROWS_AS(reflection_halfline(half_line(PotentialSpec(potential::Coulomb{-2.0}), 0.0), 1.0), ConfigError);
    CHECK_THROWS_AS(reflection_halfline(half_line(PotentialSpec(potential::Free{}), 0.0), 0.0), ConfigError);
    CHECK_THROWS_AS(reflection_halfline(half_line(PotentialSpec(potential::Free{}), 0.0), -1.0), ConfigError);
}

TEST_CASE("delta interaction") {
    for (double alpha : {1.0, -2.0, 5.0})
        for (double k : {0.2, 1.0, 5.0}) {
            const Eigen::Matrix2cd S = smatrix_line(line(PotentialSpec(potential::Free{}), delta_u2(alpha)), k);
            CHECK(std::norm(S(1, 0)) == doctest::Approx(4 * k * k / (4 * k * k + alpha * alpha)).epsilon(1e-10));
            // t = 2ik / (2ik - alpha), r = t - 1
            const cd t = cd(0, 2 * k) / (cd(0, 2 * k) - alpha);
            CHECK(std::abs(S(1, 0) - t) < 1e-10);
            CHECK(std::abs(S(0, 0) - (t - 1.0)) < 1e-10);
            CHECK(unitarity(S) < 1e-8);
        }
}

TEST_CASE("delta prime interaction") {
    for (double beta : {0.5, 2.0})
        for (double k : {0.2, 1.0, 5.0}) {
            const Eigen::Matrix2cd S = smatrix_line(line(PotentialSpec(potential::Free{}), delta_prime_u2(beta)), k);
            CHECK(std::norm(S(1, 0)) == doctest::Approx(4.0 / (4.0 + beta * beta * k * k)).epsilon(1e-10));
        }
}

TEST_CASE("transparent and decoupled points") {
    const Eigen::Matrix2cd S = smatrix_line(line(PotentialSpec(potential::Free{}), transparent_u2()), 1.3);
    CHECK(std::abs(S(1, 0) - 1.0) < 1e-12);
    CHECK(std::abs(S(0, 0)) < 1e-12);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int n = 0; n < 20; ++n) {
        Eigen::Matrix2cd D = Eigen::Matrix2cd::Zero();
        D(0, 0) = std::polar(1.0, u(rng));
        D(1, 1) = std::polar(1.0, u(rng));
        for (double k : {0.05, 0.5, 2.0, 20.0}) {
            const Eigen::Matrix2cd Sd = smatrix_line(line(PotentialSpec(potential::Free{}), D), k);
            CHECK(std::norm(Sd(1, 0)) <= 1e-12);
            CHECK(std::norm(Sd(0, 1)) <= 1e-12);
        }
    }
}

TEST_CASE("unitarity and reciprocity") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int n = 0; n < 30; ++n) {
        const U2Params par{u(rng), u(rng), u(rng), u(rng)};
        const Eigen::Matrix2cd U = u2_from_params(par);
        const PotentialSpec v = n % 2 ? PotentialSpec(potential::InverseSquare{5.0 / 16}) : PotentialSpec(potential::Free{});
        for (double k : {0.1, 1.0, 7.0}) {
            double err = 0;
            const Eigen::Matrix2cd S = smatrix_line(line(v, U), k, &err);
            CHECK(unitarity(S) < 1e-8);
            CHECK(std::abs(std::abs(S(1, 0)) - std::abs(S(0, 1))) < 1e-8);
            CHECK(err < 1e-8);
        }
    }
    // Real symmetric U: t_left = t_right.
    const Eigen::Matrix2cd U = u2_from_params({0.3, -1.2, 0.7, 0.0});
    const Eigen::Matrix2cd S = smatrix_line(line(PotentialSpec(potential::Free{}), U), 0.9);
    CHECK(std::abs(S(1, 0) - S(0, 1)) < 1e-10);
}

TEST_CASE("tunneling through inverse square wings") {
    const Problem p = line(PotentialSpec(potential::InverseSquare{5.0 / 16}), transparent_u2());
    double best = 0;
    for (double k : {0.1, 1.0, 10.0}) best = std::max(best, std::norm(smatrix_line(p, k)(1, 0)));
    CHECK(best > 0.1);
}

TEST_CASE("filter curves") {
    std::vector<double> ks;
    for (double k = 0.1; k <= 10.0001; k *= std::pow(10.0, 0.1)) ks.push_back(k);
    const Problem base = line(PotentialSpec(potential::Free{}), transparent_u2());
    CHECK(filter_curve(base, delta_u2(1.0), ks).kind == FilterKind::high_pass);
    CHECK(filter_curve(base, delta_prime_u2(1.0), ks).kind == FilterKind::low_pass);
    Eigen::Matrix2cd D = Eigen::Matrix2cd::Zero();
    D(0, 0) = cd(0, 1);
    D(1, 1) = -1.0;
    const FilterCurve sep = filter_curve(base, D, ks);
    CHECK(sep.kind == FilterKind::neither);
    for (double T : sep.transmission) CHECK(T <= 1e-12);
    CHECK(std::string(to_string(FilterKind::low_pass)) == "low-pass");
}

TEST_CASE("scattering point summary") {
    const ScatteringPoint h = scattering_point(half_line(PotentialSpec(potential::Free{}), 1.0), 1.0);
    CHECK(h.delta == doctest::Approx(-pi / 4));
    REQUIRE(h.tau);
    CHECK(*h.tau == doctest::Approx(-0.5).epsilon(1e-4));
    const ScatteringPoint l = scattering_point(line(PotentialSpec(potential::Free{}), delta_u2(2.0)), 1.0);
    CHECK(l.transmission == doctest::Approx(0.5));
    CHECK_FALSE(l.tau);
}
