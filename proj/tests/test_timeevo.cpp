#include <doctest.h>

#include <cmath>

#include "sax/boundary.hpp"
#include "sax/scattering.hpp"
#include "sax/timeevo.hpp"

using namespace sax;

namespace {

Problem half_line(PotentialSpec v, ExtendedReal L) {
    return make_problem(Domain1D::half_line(), std::move(v), BoundaryCondition::robin(L));
}

double weighted_norm(const Mesh& m, const Eigen::VectorXcd& psi) {
    return (m.weight.array() * psi.array().abs2()).sum();
}

}  // namespace

TEST_CASE("mesh and packet") {
    const Problem p = half_line(PotentialSpec(potential::Free{}), 0.0);
    const Discretization d{0.05, 20.0};
    const Mesh m = make_mesh(p, d);
    CHECK(m.x[0] == doctest::Approx(0.0));
    CHECK(m.x[m.x.size() - 1] <= 20.0 + 1e-12);
    const WavePacket pk = gaussian_packet(p, d, 10.0, 1.0, -2.0);
    CHECK(weighted_norm(pk.mesh, pk.psi) == doctest::Approx(1.0).epsilon(1e-14));

    const Problem l = make_problem(Domain1D::line(), PotentialSpec(potential::Free{}), BoundaryCondition::u2(transparent_u2()));
    const Mesh ml = make_mesh(l, d);
    REQUIRE(ml.plus_begin > 0);
    CHECK(ml.x[ml.plus_begin - 1] == doctest::Approx(0.0));
    CHECK(ml.x[ml.plus_begin] == doctest::Approx(0.0));
}

TEST_CASE("dirichlet wall conserves the norm over 10^4 steps") {
    const Problem p = half_line(PotentialSpec(potential::Free{}), 0.0);
    const Discretization d{0.05, 60.0};
    const Trajectory tr = evolve(gaussian_packet(p, d, 30.0, 3.0, -1.0), p, d, 0.005, 50.0);
    CHECK(tr.steps == 10000);
    CHECK(std::abs(tr.frames.back().norm - 1.0) < 1e-8);
    CHECK(tr.max_step_drift <= 1e-10);
    CHECK(tr.frames.back().energy == doctest::Approx(tr.frames.front().energy).epsilon(1e-10));
}

TEST_CASE("bound state survives at a wall with L > 0") {
    const double L = 1.0;
    const Problem p = half_line(PotentialSpec(potential::Free{}), L);
    const Discretization d{0.02, 150.0};
    const WavePacket pk = gaussian_packet(p, d, 1.5, 1.0, 0.0);
    // Projection on the bound state sqrt(2 / L) exp(-x / L).
    std::complex<double> overlap = 0;
    for (Eigen::Index i = 0; i < pk.mesh.x.size(); ++i)
        overlap += pk.mesh.weight[i] * std::sqrt(2.0 / L) * std::exp(-pk.mesh.x[i] / L) * pk.psi[i];
    const double projection = std::norm(overlap);
    REQUIRE(projection > 0.3);

    EvolveOptions opt;
    const Trajectory tr = evolve(pk, p, d, 0.01, 60.0, opt);
    const Snapshot& last = tr.frames.back();
    double near_wall = 0;
    for (Eigen::Index i = 0; i < tr.mesh.x.size(); ++i)
        if (tr.mesh.x[i] <= 10.0 * L) near_wall += tr.mesh.weight[i] * std::norm(last.psi[i]);
    CHECK(near_wall == doctest::Approx(projection).epsilon(0.01));

    // Without a bound state (L < 0) the lump disperses.
    const Problem q = half_line(PotentialSpec(potential::Free{}), -L);
    const Trajectory tq = evolve(gaussian_packet(q, d, 1.5, 1.0, 0.0), q, d, 0.01, 60.0);
    double left = 0;
    for (Eigen::Index i = 0; i < tq.mesh.x.size(); ++i)
        if (tq.mesh.x[i] <= 10.0 * L) left += tq.mesh.weight[i] * std::norm(tq.frames.back().psi[i]);
    CHECK(left < 0.05);
}

TEST_CASE("separated U keeps the half lines apart") {
    Eigen::Matrix2cd U = Eigen::Matrix2cd::Zero();
    U(0, 0) = std::polar(1.0, 1.0);
    U(1, 1) = std::polar(1.0, 2.5);
    const Problem l = make_problem(Domain1D::line(), PotentialSpec(potential::Free{}), BoundaryCondition::u2(U));
    const Discretization d{0.05, 60.0};
    EvolveOptions opt;
    opt.snapshot_every = 100;
    const Trajectory tr = evolve(gaussian_packet(l, d, 5.0, 2.0, -1.5), l, d, 0.01, 20.0, opt);
    const double plus0 = tr.frames.front().norm_plus, minus0 = tr.frames.front().norm_minus;
    for (const Snapshot& s : tr.frames) {
        CHECK(std::abs(s.norm_plus - plus0) < 1e-8);
        CHECK(std::abs(s.norm_minus - minus0) < 1e-8);
    }

    // With the transparent condition the packet crosses.
    const Problem t = make_problem(Domain1D::line(), PotentialSpec(potential::Free{}), BoundaryCondition::u2(transparent_u2()));
    const Trajectory tt = evolve(gaussian_packet(t, d, 5.0, 2.0, -1.5), t, d, 0.01, 10.0);
    CHECK(tt.frames.back().norm_minus > 0.99);
}

TEST_CASE("limit circle endpoint") {
    const Problem q = half_line(PotentialSpec(potential::InverseSquare{5.0 / 16}), 0.5);
    const Discretization d{0.05, 60.0};
    const Trajectory tr = evolve(gaussian_packet(q, d, 10.0, 2.0, -1.0), q, d, 0.01, 20.0);
    CHECK(tr.max_step_drift <= 1e-10);
    CHECK(std::abs(tr.frames.back().norm - 1.0) < 1e-8);
    CHECK(tr.frames.back().energy == doctest::Approx(tr.frames.front().energy).epsilon(1e-9));
}

TEST_CASE("time reversal") {
    const Problem p = half_line(PotentialSpec(potential::Free{}), 0.7);
    const Discretization d{0.05, 60.0};
    const WavePacket pk = gaussian_packet(p, d, 20.0, 3.0, -1.0);
    Evolver ev(p, d);
    ev.set_dt(0.005);
    ev.load(pk.psi);
    ev.step(2000);
    ev.set_dt(-0.005);
    ev.step(2000);
    CHECK(std::sqrt(weighted_norm(ev.mesh(), ev.state() - pk.psi)) < 1e-9);
}

TEST_CASE("resolution checks") {
    const Problem p = half_line(PotentialSpec(potential::Free{}), 0.0);
    const Discretization d{0.05, 60.0};
    const WavePacket pk = gaussian_packet(p, d, 30.0, 3.0, -2.0);
    CHECK_THROWS_AS(evolve(pk, p, d, 0.1, 1.0), ConfigError);
    const Discretization coarse{0.5, 60.0};
    CHECK_THROWS_AS(evolve(gaussian_packet(p, coarse, 30.0, 3.0, -2.0), p, coarse, 0.01, 1.0), ConfigError);
    const Problem box = make_problem(Domain1D::interval(0.0, 1.0), PotentialSpec(potential::Free{}), BoundaryCondition::robin(0.0));
    CHECK_THROWS_AS(Evolver(box, d), ConfigError);
}

TEST_CASE("reflection delay from packet peaks") {
    const Problem p = half_line(PotentialSpec(potential::Free{}), 0.0);
    const DelayMeasurement m1 = measure_time_delay(p, 1.0);
    CHECK(m1.tau == doctest::Approx(free_time_delay(1.0, 1.0)).epsilon(0.05));
    CHECK(m1.v_in == doctest::Approx(2.0).epsilon(0.01));
    const DelayMeasurement m0 = measure_time_delay(p, 0.0);
    CHECK(std::abs(m0.tau) < 0.025);
    DelayOptions narrow;
    narrow.sigma = 2.0;
    CHECK_THROWS_AS(measure_time_delay(p, 1.0, narrow), ConfigError);
}
