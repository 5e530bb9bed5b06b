#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sax/boundary.hpp"

using namespace sax;

namespace {

constexpr double pi = std::numbers::pi;
using cd = std::complex<double>;

BoundaryData data(cd g1, cd g2) {
    BoundaryData d;
    d.gamma1 = Eigen::VectorXcd::Constant(1, g1);
    d.gamma2 = Eigen::VectorXcd::Constant(1, g2);
    d.sides = {Side::lower};
    return d;
}

BoundaryData data2(Eigen::Vector2cd g1, Eigen::Vector2cd g2) {
    BoundaryData d;
    d.gamma1 = g1;
    d.gamma2 = g2;
    d.sides = {Side::origin_plus, Side::origin_minus};
    return d;
}

SolutionSamples combination(const ReferenceModes& modes, const Grid& g, cd a, cd b) {
    const RealSamples s1 = modes.sample(g, 0), s2 = modes.sample(g, 1);
    return {g, a * s1.psi.cast<cd>() + b * s2.psi.cast<cd>(), a * s1.p_dpsi.cast<cd>() + b * s2.p_dpsi.cast<cd>()};
}

}  // namespace

TEST_CASE("free half line boundary values") {
    for (double L0 : {1.0, 2.5}) {
        Problem p = make_problem(Domain1D::half_line(), PotentialSpec(potential::Free{}), BoundaryCondition::robin(0.0, L0));
        const double a = 0.7, b = -1.9, k = 1.3;
        const Grid g = Grid::uniform(0.0, 2.0, 201);
        SolutionSamples s{g, Eigen::VectorXcd(g.size()), Eigen::VectorXcd(g.size())};
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            s.psi[i] = a * std::cos(k * g[i]) + b / k * std::sin(k * g[i]);
            s.p_dpsi[i] = -a * k * std::sin(k * g[i]) + b * std::cos(k * g[i]);
        }
        const BoundaryData d = boundary_data(s, p, k * k);
        CHECK(std::abs(d.gamma1[0] - a) < 1e-10);
        CHECK(std::abs(d.gamma2[0] - L0 * b) < 1e-10);
    }
}

TEST_CASE("boundary values of the reference modes") {
    // Gamma1 = c2 and Gamma2 = -L0 c1 on a lower end.
    const BoundaryData d1 = boundary_data(LimitNumbers{1.0, 0.0}, 1, Side::lower);
    CHECK(std::abs(d1.gamma1[0]) < 1e-15);
    CHECK(std::abs(d1.gamma2[0] - -1.0) < 1e-15);
    const BoundaryData d2 = boundary_data(LimitNumbers{0.0, 1.0}, 1, Side::lower);
    CHECK(std::abs(d2.gamma1[0] - 1.0) < 1e-15);
    CHECK(std::abs(d2.gamma2[0]) < 1e-15);

    // Equal limit numbers on both sides of the origin: the second component flips sign.
    const BoundaryData plus = boundary_data(LimitNumbers{1.0, 1.0}, 1, Side::origin_plus);
    const BoundaryData minus = boundary_data(LimitNumbers{1.0, 1.0}, -1, Side::origin_minus);
    CHECK(plus.gamma1[0] == minus.gamma1[0]);
    CHECK(plus.gamma2[0] == -minus.gamma2[0]);
}

TEST_CASE("robin conditions") {
    CHECK(robin_satisfied(data(0.0, 0.3), 0.0).satisfied);
    CHECK(robin_satisfied(data(-2.0, 1.0), 2.0).satisfied);
    CHECK(robin_satisfied(data(5.0, 0.0), ExtendedReal::infinity()).satisfied);
    CHECK_FALSE(robin_satisfied(data(5.0, 0.0), 0.0).satisfied);
    CHECK_FALSE(robin_satisfied(data(-2.0, 1.0), 1.0).satisfied);
    CHECK_FALSE(robin_satisfied(data(1e-15, 1.0), ExtendedReal::infinity()).satisfied);
    CHECK(robin_satisfied(data(1e-15, 1.0), 0.0).satisfied);
    CHECK(robin_theta_satisfied(data(-1.0, 1.0), pi / 2).satisfied);
}

TEST_CASE("two-sided conditions") {
    // U = -1: Gamma1 = 0; U = +1: Gamma2 = 0.
    const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    CHECK(u2_satisfied(data2({0, 0}, {1.0, cd(0, 2)}), -I).satisfied);
    CHECK_FALSE(u2_satisfied(data2({0.1, 0}, {1.0, 2.0}), -I).satisfied);
    CHECK(u2_satisfied(data2({1.0, cd(0, 2)}, {0, 0}), I).satisfied);
    CHECK_FALSE(u2_satisfied(data2({1.0, 2.0}, {0, 0.1}), I).satisfied);

    // Diagonal U decouples into one Robin condition per side.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int n = 0; n < 50; ++n) {
        const double tp = u(rng), tm = u(rng);
        Eigen::Matrix2cd U = Eigen::Matrix2cd::Zero();
        U(0, 0) = std::polar(1.0, tp);
        U(1, 1) = std::polar(1.0, tm);
        const Eigen::Vector2cd g1(cd(u(rng), u(rng)), cd(u(rng), u(rng)));
        Eigen::Vector2cd g2(-std::tan(tp / 2) * g1[0], -std::tan(tm / 2) * g1[1]);
        if (n % 3 == 1) g2[1] += 0.5;
        const BoundaryData d = data2(g1, g2);
        const bool both = robin_theta_satisfied(d, tp, 1e-6, 0).satisfied && robin_theta_satisfied(d, tm, 1e-6, 1).satisfied;
        CHECK(u2_satisfied(d, U).satisfied == both);
        CHECK(both == (n % 3 != 1));
    }
}

TEST_CASE("presets") {
    // psi and psi' continuous: Gamma1 equal, Gamma2 opposite.
    CHECK(u2_satisfied(data2({1.3, 1.3}, {0.4, -0.4}), transparent_u2()).satisfied);
    CHECK_FALSE(u2_satisfied(data2({1.3, 1.0}, {0.4, -0.4}), transparent_u2()).satisfied);
    // Delta: continuity and a derivative jump alpha psi(0).
    const double alpha = 1.7, psi0 = 0.9, dminus = 0.3;
    const double dplus = dminus + alpha * psi0;
    CHECK(u2_satisfied(data2({psi0, psi0}, {dplus, -dminus}), delta_u2(alpha)).satisfied);
    CHECK_FALSE(u2_satisfied(data2({psi0, psi0}, {dminus, -dminus}), delta_u2(alpha)).satisfied);
    CHECK(is_unitary(delta_u2(alpha)));
    CHECK((delta_u2(0.0) - transparent_u2()).norm() < 1e-14);
}

TEST_CASE("conditions from (A, B)") {
    // Robin per side: A = 1, B = diag(L/L0).
    const Eigen::Matrix2cd A = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd B = Eigen::Matrix2cd::Zero();
    B(0, 0) = 2.0;
    B(1, 1) = -0.5;
    const Eigen::Matrix2cd U = u2_from_conditions(A, B);
    CHECK(is_unitary(U));
    CHECK(u2_satisfied(data2({-2.0, 0.5}, {1.0, 1.0}), U).satisfied);
    Eigen::Matrix2cd bad = B;
    bad(0, 1) = cd(0, 1);
    CHECK_THROWS_AS(u2_from_conditions(A, bad), ConfigError);
}

TEST_CASE("re-choosing the modes relabels the condition") {
    CHECK(transform_robin(1.7, Eigen::Matrix2d::Identity()).value() == doctest::Approx(1.7));
    Eigen::Matrix2d swap;
    swap << 0, 1, -1, 0;
    Eigen::Matrix2d shear;
    shear << 1, 0, 0.3, 1;
    for (double L : {-2.0, 0.5, 3.0}) {
        CHECK(transform_robin(L, swap).value() == doctest::Approx(-1.0 / L));
        CHECK(transform_robin(L, shear).value() == doctest::Approx(L / (1.0 - 0.3 * L)));
    }
    CHECK(transform_robin(0.0, swap).is_infinite());
    CHECK(transform_robin(1.0 / 0.3, shear).is_infinite());
}

TEST_CASE("domain invariance under SL(2,R)") {
    // For random (psi, M, L): psi obeys the condition L in the original modes exactly when it
    // obeys the transformed condition in the transformed modes.
    const Problem p = make_problem(Domain1D::half_line(), PotentialSpec(potential::InverseSquare{5.0 / 16}),
                                   BoundaryCondition::robin(0.0));
    const ReferenceModes modes = reference_modes(p, Side::lower, 0.0);
    const Grid g = Grid::geometric(0.0, 1e-6, 0.5, 160);
    std::mt19937 rng(20261018);
    std::uniform_real_distribution<double> u(-2, 2);
    int agree = 0, accepted = 0, total = 0;
    for (int n = 0; n < 120; ++n) {
        const double L = u(rng) * 3;
        Eigen::Matrix2d M;
        M << u(rng), u(rng), u(rng), 0.0;
        if (std::abs(M(0, 0)) < 0.1) M(0, 0) = 0.7;
        M(1, 1) = (1.0 + M(0, 1) * M(1, 0)) / M(0, 0);
        // On the ray of L half the time, off it otherwise.
        const double theta = theta_from_robin(L);
        cd scale(u(rng), u(rng));
        cd c1 = scale * std::sin(theta / 2), c2 = scale * std::cos(theta / 2);
        if (n % 2) c2 += 0.3 * scale;
        const SolutionSamples psi = combination(modes, g, c1, c2);

        const bool before = robin_satisfied(boundary_data(psi, p, 0.0), L, 1e-6).satisfied;
        const TransformedModes t = transform_modes(modes, M, L);
        const LimitNumbers ln = limit_numbers(psi, t.modes, 0.0);
        const bool after = robin_satisfied(boundary_data(ln, 1, Side::lower), t.L, 1e-6).satisfied;
        agree += before == after;
        accepted += before;
        ++total;
    }
    CHECK(total >= 100);
    CHECK(agree == total);
    CHECK(accepted == total / 2);
}
