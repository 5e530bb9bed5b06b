#include <doctest.h>

#include "sax/classify.hpp"

using namespace sax;

namespace {

Problem half_line(PotentialSpec v, KineticWeight w = {}) {
    Problem p = make_problem(Domain1D::half_line(), std::move(v), BoundaryCondition::robin(0.0));
    p.weight = w;
    return p;
}

Verdict at_origin(const Problem& p, EvidenceMode m = EvidenceMode::prefer_analytic) {
    return classify_endpoint(p, Side::lower, 0.0, m).verdict;
}

}  // namespace

TEST_CASE("inverse square examples") {
    const auto lc = classify_endpoint(half_line(PotentialSpec(potential::InverseSquare{5.0 / 16})), Side::lower, 0.0);
    CHECK(lc.verdict == Verdict::limit_circle);
    REQUIRE(lc.exponents);
    CHECK((*lc.exponents)[0].real() == doctest::Approx(1.25));
    CHECK((*lc.exponents)[1].real() == doctest::Approx(-0.25));

    const auto lp = classify_endpoint(half_line(PotentialSpec(potential::InverseSquare{21.0 / 16})), Side::lower, 0.0);
    CHECK(lp.verdict == Verdict::limit_point);
    REQUIRE(lp.exponents);
    CHECK((*lp.exponents)[0].real() == doctest::Approx(1.75));
    CHECK((*lp.exponents)[1].real() == doctest::Approx(-0.75));
}

TEST_CASE("threshold bracketing") {
    CHECK(at_origin(half_line(PotentialSpec(potential::InverseSquare{0.74}))) == Verdict::limit_circle);
    CHECK(at_origin(half_line(PotentialSpec(potential::InverseSquare{0.76}))) == Verdict::limit_point);
    CHECK(at_origin(half_line(PotentialSpec(potential::InverseSquare{inverse_square_threshold()}))) ==
          Verdict::limit_point);
    // Attractive below -1/4: complex exponents, still limit circle.
    CHECK(at_origin(half_line(PotentialSpec(potential::InverseSquare{-1.0}))) == Verdict::limit_circle);
}

TEST_CASE("free and coulomb endpoints") {
    const Problem f = half_line(PotentialSpec(potential::Free{}));
    CHECK(at_origin(f) == Verdict::regular);
    CHECK(classify_endpoint(f, Side::upper, 0.0).verdict == Verdict::limit_point);

    CHECK(at_origin(half_line(PotentialSpec(potential::Coulomb{-2.0}))) == Verdict::limit_circle);
    CHECK(at_origin(half_line(PotentialSpec(potential::CoulombPlusCentrifugal{-2.0, 0}))) == Verdict::limit_circle);
    CHECK(at_origin(half_line(PotentialSpec(potential::CoulombPlusCentrifugal{-2.0, 1}))) == Verdict::limit_point);
    CHECK(at_origin(half_line(PotentialSpec(potential::CoulombPlusCentrifugal{-2.0, 3}))) == Verdict::limit_point);
    CHECK(at_origin(half_line(PotentialSpec(potential::InverseSquare{0.0}))) == Verdict::regular);
    CHECK(at_origin(half_line(PotentialSpec(potential::InverseSquare{2.0}))) == Verdict::limit_point);
}

TEST_CASE("quartic kinetic weight") {
    const Problem p = half_line(PotentialSpec(potential::PowerLaw{-2.0, 2.0}), {1.0, 4.0});
    CHECK(at_origin(p) == Verdict::limit_point);
}

TEST_CASE("analytic and numerical evidence agree") {
    const std::vector<Problem> cases = {
        half_line(PotentialSpec(potential::InverseSquare{5.0 / 16})),
        half_line(PotentialSpec(potential::InverseSquare{21.0 / 16})),
        half_line(PotentialSpec(potential::Coulomb{-2.0})),
        half_line(PotentialSpec(potential::CoulombPlusCentrifugal{-2.0, 1})),
        half_line(PotentialSpec(potential::PowerLaw{-2.0, 2.0}), {1.0, 4.0}),
    };
    for (const Problem& p : cases) {
        const auto a = classify_endpoint(p, Side::lower, 0.0, EvidenceMode::prefer_analytic);
        const auto n = classify_endpoint(p, Side::lower, 0.0, EvidenceMode::numerical_only);
        CHECK(a.verdict == n.verdict);
        CHECK(n.path == EvidencePath::numerical);
        CHECK(n.decade_norms[0].size() >= 4);
    }
}

TEST_CASE("deficiency indices") {
    CHECK(deficiency_indices(half_line(PotentialSpec(potential::Free{}))) == std::pair{1, 1});
    const Problem line = make_problem(Domain1D::line(), PotentialSpec(potential::Free{}),
                                      BoundaryCondition::u2(Eigen::Matrix2cd::Identity().eval()));
    CHECK(deficiency_indices(line) == std::pair{2, 2});
    CHECK(deficiency_indices(half_line(PotentialSpec(potential::CoulombPlusCentrifugal{-2.0, 1}))) ==
          std::pair{0, 0});
    const Problem box = make_problem(Domain1D::interval(0.0, 1.0), PotentialSpec(potential::Free{}),
                                     BoundaryCondition::robin(0.0));
    CHECK(deficiency_indices(box) == std::pair{2, 2});
}
