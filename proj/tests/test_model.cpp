#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sax/errors.hpp"
#include "sax/model.hpp"

using namespace sax;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("robin angle and length") {
    CHECK(robin_from_theta(pi).value() == doctest::Approx(0.0));
    CHECK(robin_from_theta(0.0).is_infinite());
    CHECK(robin_from_theta(pi / 2).value() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(theta_from_robin(ExtendedReal::infinity()) == 0.0);
    CHECK(theta_from_robin(0.0) == doctest::Approx(pi));

    for (double theta : {0.1, 0.7, 1.5, 2.0, 3.0, 3.5, 5.0, 6.2}) {
        const ExtendedReal L = robin_from_theta(theta, 2.0);
        double back = theta_from_robin(L, 2.0);
        if (back < 0) back += 2 * pi;
        CHECK(back == doctest::Approx(std::fmod(theta, 2 * pi)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(ExtendedReal::infinity().value(), ConfigError);
}

TEST_CASE("internal units are the identity for hbar = 1, m = 1/2") {
    const Units u{1.0, 0.5};
    CHECK(energy_to_internal(-0.25, u) == -0.25);
    const Problem p = make_problem(Domain1D::half_line(), PotentialSpec(potential::Free{}), BoundaryCondition::robin(3.0));
    const Problem q = to_internal_units(p, u);
    CHECK(robin_from_theta(q.bc.robin().theta).value() == doctest::Approx(3.0));
}

TEST_CASE("unit round trip") {
    const Units u{1.054571817e-34, 9.1093837015e-31};
    const double g = -2.307077e-28;
    const Problem p = make_problem(Domain1D::half_line(), PotentialSpec(potential::Coulomb{g}), BoundaryCondition::robin(0.0));
    const Problem back = to_physical_units(to_internal_units(p, u), u);
    const double g2 = std::get<potential::Coulomb>(back.potential.family()).g;
    CHECK(std::abs(g2 - g) <= 1e-14 * std::abs(g));
    const double g_int = std::get<potential::Coulomb>(to_internal_units(p, u).potential.family()).g;
    CHECK(g_int == doctest::Approx(g / u.energy_scale()).epsilon(1e-14));
    const double E = 3.7e-19;
    CHECK(std::abs(energy_to_physical(energy_to_internal(E, u), u) - E) <= 1e-14 * E);
    CHECK(std::abs(time_to_physical(time_to_internal(2.5e-15, u), u) - 2.5e-15) <= 1e-14 * 2.5e-15);
}

TEST_CASE("problem validation") {
    CHECK_THROWS_AS(make_problem(Domain1D::line(), PotentialSpec(potential::Free{}), BoundaryCondition::robin(1.0)), ConfigError);
    CHECK_THROWS_AS(make_problem(Domain1D::half_line(), PotentialSpec(potential::Free{}), BoundaryCondition::u2(Eigen::Matrix2cd::Identity().eval())),
                    ConfigError);
    CHECK_THROWS_AS(make_problem(Domain1D::interval(1.0, 0.0), PotentialSpec(potential::Free{}), BoundaryCondition::robin(0.0)),
                    ConfigError);
    Eigen::Matrix2cd bad = Eigen::Matrix2cd::Identity();
    bad(0, 1) = 0.5;
    CHECK_THROWS_AS(make_problem(Domain1D::line(), PotentialSpec(potential::Free{}), BoundaryCondition::u2(bad)), ConfigError);
}

TEST_CASE("U(2) parameters round trip") {
    const U2Params p{0.4, 2.1, 0.3, 1.1};
    const Eigen::Matrix2cd U = u2_from_params(p);
    CHECK(is_unitary(U));
    const Eigen::Matrix2cd V = u2_from_params(params_from_u2(U));
    CHECK((U - V).norm() < 1e-12);
}

TEST_CASE("potential values") {
    const PotentialSpec v(potential::CoulombPlusCentrifugal{-2.0, 1});
    CHECK(v(0.5) == doctest::Approx(-4.0 + 8.0));
    CHECK(v.origin_singularity()->c == 2.0);
    CHECK(v.origin_singularity()->g == -2.0);
    CHECK(v.vanishes_at_infinity());
    CHECK_FALSE(PotentialSpec(potential::PowerLaw{1.0, 2.0}).vanishes_at_infinity());
    const KineticWeight w{1.0, 4.0};
    CHECK(w(2.0) == 16.0);
}
