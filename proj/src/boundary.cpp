#include "sax/boundary.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "sax/classify.hpp"
#include "sax/errors.hpp"

namespace sax {

namespace {

std::vector<Side> condition_sides(const Domain1D& d) {
    switch (d.kind) {
        case Domain1D::Kind::half_line: return {Side::lower};
        case Domain1D::Kind::interval: return {Side::lower, Side::upper};
        case Domain1D::Kind::line: return {Side::origin_plus, Side::origin_minus};
    }
    return {};
}

// Nodes of psi lying strictly on the side of the endpoint (or at it, unless `strict`).
SolutionSamples restrict_to(const SolutionSamples& psi, double xe, int o, bool strict) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        const double s = o * (psi.grid[i] - xe);
        if (s > 0.0 || (!strict && s == 0.0)) keep.push_back(i);
    }
    const auto n = static_cast<Eigen::Index>(keep.size());
    if (n == psi.size()) return psi;
    Eigen::VectorXd x(n);
    Eigen::VectorXcd v(n), d(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index i = keep[static_cast<std::size_t>(j)];
        x[j] = psi.grid[i];
        v[j] = psi.psi[i];
        d[j] = psi.p_dpsi[i];
    }
    return {Grid::from_nodes(std::move(x)), std::move(v), std::move(d)};
}

void append(BoundaryData& out, const BoundaryData& one) {
    const Eigen::Index n = out.dimension();
    out.gamma1.conservativeResize(n + 1);
    out.gamma2.conservativeResize(n + 1);
    out.gamma1[n] = one.gamma1[0];
    out.gamma2[n] = one.gamma2[0];
    out.sides.push_back(one.sides.front());
    out.error = std::max(out.error, one.error);
}

BoundaryData side_data(const SolutionSamples& psi, const Problem& problem, Side side, bool strict,
                       std::optional<double> energy) {
    const ReferenceModes modes = reference_modes(problem, side, problem.E0);
    const SolutionSamples part = restrict_to(psi, modes.endpoint(), modes.orientation(), strict);
    const LimitNumbers ln = energy ? limit_numbers(part, modes, *energy) : limit_numbers(part, modes);
    return boundary_data(ln, modes.orientation(), side, problem.bc.L0);
}

bool carries_condition(const Problem& problem, Side side) {
    return classify_endpoint(problem, side, problem.E0).verdict != Verdict::limit_point;
}

}  // namespace

BoundaryData boundary_data(const LimitNumbers& ln, int orientation, Side side, double L0) {
    BoundaryData out;
    out.gamma1 = Eigen::VectorXcd::Constant(1, ln.c2);
    out.gamma2 = Eigen::VectorXcd::Constant(1, -static_cast<double>(orientation) * L0 * ln.c1);
    out.sides = {side};
    out.L0 = L0;
    out.error = ln.error;
    return out;
}

BoundaryData boundary_data(const SolutionSamples& psi, const Problem& problem, std::optional<double> energy) {
    BoundaryData out;
    out.L0 = problem.bc.L0;
    const bool line = problem.domain.kind == Domain1D::Kind::line;
    for (Side side : condition_sides(problem.domain)) {
        if (!carries_condition(problem, side)) continue;
        if (line) {
            const int o = side == Side::origin_plus ? 1 : -1;
            bool any = false;
            for (Eigen::Index i = 0; i < psi.size() && !any; ++i) any = o * psi.grid[i] > 0.0;
            if (!any) continue;
        }
        append(out, side_data(psi, problem, side, line, energy));
    }
    return out;
}

BoundaryData boundary_data(const SolutionSamples& minus, const SolutionSamples& plus,
                           const Problem& problem, std::optional<double> energy) {
    if (problem.domain.kind != Domain1D::Kind::line)
        throw ConfigError("two-sided boundary data needs a line domain");
    BoundaryData out;
    out.L0 = problem.bc.L0;
    if (carries_condition(problem, Side::origin_plus))
        append(out, side_data(plus, problem, Side::origin_plus, false, energy));
    if (carries_condition(problem, Side::origin_minus))
        append(out, side_data(minus, problem, Side::origin_minus, false, energy));
    return out;
}

ConditionCheck robin_satisfied(const BoundaryData& data, ExtendedReal L, double tol, Eigen::Index index) {
    return robin_theta_satisfied(data, theta_from_robin(L, data.L0), tol, index);
}

ConditionCheck robin_theta_satisfied(const BoundaryData& data, double theta, double tol, Eigen::Index index) {
    if (index < 0 || index >= data.dimension()) throw ConfigError("robin_satisfied: no such component");
    // Normalized form sin(theta/2) gamma1 + cos(theta/2) gamma2, which stays meaningful at
    // L = 0 and L = infinity alike.
    const double sn = std::sin(0.5 * theta), cs = std::cos(0.5 * theta);
    const std::complex<double> g1 = data.gamma1[index], g2 = data.gamma2[index];
    ConditionCheck c;
    c.residual = std::abs(sn * g1 + cs * g2);
    c.scale = std::sqrt(std::norm(g1) + std::norm(g2));
    c.satisfied = c.residual <= tol * c.scale;
    return c;
}

ConditionCheck u2_satisfied(const BoundaryData& data, const Eigen::Matrix2cd& U, double tol) {
    if (data.dimension() != 2) throw ConfigError("u2_satisfied needs two-component boundary data");
    if (!is_unitary(U)) throw ConfigError("u2_satisfied: U is not unitary");
    const std::complex<double> i(0.0, 1.0);
    const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    const Eigen::Vector2cd r = (U - I) * data.gamma1 + i * (U + I) * data.gamma2;
    ConditionCheck c;
    c.residual = r.norm();
    c.scale = data.gamma1.norm() + data.gamma2.norm();
    c.satisfied = c.residual <= tol * c.scale;
    return c;
}

double transform_theta(double theta, const Eigen::Matrix2d& M, int orientation, double L0) {
    if (std::abs(M.determinant() - 1.0) > 1e-12) throw ConfigError("transform must have unit determinant");
    // Condition a c1 + b c2 = 0 on the limit numbers; c = M^T c'.
    const double o = orientation;
    const double a = -o * L0 * std::cos(0.5 * theta), b = std::sin(0.5 * theta);
    const double a2 = a * M(0, 0) + b * M(0, 1);
    const double b2 = a * M(1, 0) + b * M(1, 1);
    double half = std::atan2(b2, -a2 / (o * L0));
    if (half < 0.0) half += std::numbers::pi;
    if (half >= std::numbers::pi) half -= std::numbers::pi;
    return 2.0 * half;
}

ExtendedReal transform_robin(ExtendedReal L, const Eigen::Matrix2d& M, int orientation, double L0) {
    return robin_from_theta(transform_theta(theta_from_robin(L, L0), M, orientation, L0), L0);
}

Eigen::Matrix2cd transform_u2(const Eigen::Matrix2cd& U, const Eigen::Matrix2d& M_plus,
                              const Eigen::Matrix2d& M_minus, double L0) {
    if (!is_unitary(U)) throw ConfigError("transform_u2: U is not unitary");
    for (const Eigen::Matrix2d* m : {&M_plus, &M_minus})
        if (std::abs(m->determinant() - 1.0) > 1e-12) throw ConfigError("transform must have unit determinant");
    // gamma = P gamma1' + Q gamma2' (first), R gamma1' + S gamma2' (second), per side.
    Eigen::Matrix2cd P = Eigen::Matrix2cd::Zero(), Q = P, R = P, S = P;
    const std::array<const Eigen::Matrix2d*, 2> Ms{&M_plus, &M_minus};
    for (int j = 0; j < 2; ++j) {
        const Eigen::Matrix2d& m = *Ms[static_cast<std::size_t>(j)];
        const double o = j == 0 ? 1.0 : -1.0;
        P(j, j) = m(1, 1);
        Q(j, j) = -m(0, 1) / (o * L0);
        R(j, j) = -o * L0 * m(1, 0);
        S(j, j) = m(0, 0);
    }
    const std::complex<double> i(0.0, 1.0);
    const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd A = U - I, B = i * (U + I);
    return u2_from_conditions(A * P + B * R, A * Q + B * S);
}

TransformedModes transform_modes(const ReferenceModes& modes, const Eigen::Matrix2d& M, ExtendedReal L,
                                 double L0) {
    return {modes.transformed(M), transform_robin(L, M, modes.orientation(), L0)};
}

Eigen::Matrix2cd u2_from_conditions(const Eigen::Matrix2cd& A, const Eigen::Matrix2cd& B) {
    Eigen::Matrix<std::complex<double>, 2, 4> AB;
    AB << A, B;
    const double scale = AB.norm();
    if (scale == 0.0) throw ConfigError("empty boundary condition");
    Eigen::JacobiSVD<Eigen::Matrix<std::complex<double>, 2, 4>> svd(AB);
    if (svd.singularValues()(1) <= 1e-12 * scale) throw ConfigError("boundary condition has rank < 2");
    const Eigen::Matrix2cd H = A * B.adjoint();
    if ((H - H.adjoint()).norm() > 1e-10 * scale * scale)
        throw ConfigError("boundary condition is not self-adjoint (A B^dagger not Hermitian)");
    const std::complex<double> i(0.0, 1.0);
    const Eigen::Matrix2cd U = -(A + i * B).partialPivLu().solve(A - i * B);
    return U;
}

Eigen::Matrix2cd transparent_u2() {
    Eigen::Matrix2cd U;
    U << 0.0, 1.0, 1.0, 0.0;
    return U;
}

Eigen::Matrix2cd delta_u2(double alpha, double L0) {
    // rows: gamma1+ - gamma1- = 0 and gamma2+ + gamma2- - alpha L0 gamma1+ = 0
    Eigen::Matrix2cd A, B;
    A << 1.0, -1.0, -alpha * L0, 0.0;
    B << 0.0, 0.0, 1.0, 1.0;
    return u2_from_conditions(A, B);
}

}  // namespace sax
