#include "sax/refmodes.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "heads.hpp"
#include "sax/errors.hpp"

namespace sax {

Eigen::Matrix2d ReferenceModes::at(double x, double E) const {
    const double s = geometry_.orientation * (x - geometry_.x);
    if (s < 0.0) throw ConfigError("point lies outside the side of the reference modes");
    Eigen::Matrix2d b = heads_->eval(s, E);
    if (geometry_.orientation < 0) {
        // x = x_e - s: phi1 = -f1(s), phi2 = f2(s), d/dx = -d/ds
        b(0, 0) = -b(0, 0);
        b(1, 1) = -b(1, 1);
    }
    return transform_ * b;
}

Eigen::Matrix2d ReferenceModes::evaluate(double x) const {
    const double s = geometry_.orientation * (x - geometry_.x);
    const double range = head_range();
    if (s <= range && (s > 0.0 || start_distance() == 0.0)) return at(x);
    const double s0 = start_distance() == 0.0 ? 0.0 : std::min(range, s);
    const double x0 = geometry_.x + geometry_.orientation * s0;
    const Eigen::Matrix2d m = at(x0);
    Eigen::Matrix2d out;
    for (int k = 0; k < 2; ++k) {
        Stepper<double> stepper(equation_);
        out.row(k) = stepper.advance(Eigen::Vector2d(m.row(k).transpose()), x0, x).transpose();
    }
    return out;
}

double ReferenceModes::head_range() const { return heads_->range(E0_); }
double ReferenceModes::head_range(double E) const { return heads_->range(E); }

double ReferenceModes::start_distance(double E) const { return heads_->start(E); }

bool ReferenceModes::has_second() const { return heads_->has_second(); }

ReferenceModes ReferenceModes::transformed(const Eigen::Matrix2d& M) const {
    if (std::abs(M.determinant() - 1.0) > 1e-12) throw ConfigError("transform must have unit determinant");
    ReferenceModes r = *this;
    r.transform_ = M * transform_;
    return r;
}

RealSamples ReferenceModes::sample(const Grid& grid, int which) const {
    const Eigen::Index n = grid.size();
    RealSamples out{grid, Eigen::VectorXd(n), Eigen::VectorXd(n)};
    const int o = geometry_.orientation;
    for (Eigen::Index i = 0; i < n; ++i)
        if (o * (grid[i] - geometry_.x) < 0.0) throw ConfigError("grid leaves the side of the reference modes");

    const double range = head_range();
    // Visit nodes in order of increasing distance from the endpoint.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = o > 0 ? i : n - 1 - i;

    const double s0 = std::abs(grid[order.front()] - geometry_.x);
    const double sa = start_distance() == 0.0 ? 0.0 : std::min(range, s0 > 0.0 ? s0 : start_distance());
    double x = geometry_.x + o * sa;
    Eigen::Vector2d y = at(x).row(which).transpose();
    Stepper<double> stepper(equation_);
    for (Eigen::Index i : order) {
        const double s = o * (grid[i] - geometry_.x);
        if (s <= range && (s > 0.0 || start_distance() == 0.0))
            y = at(grid[i]).row(which).transpose();
        else
            y = stepper.advance(y, x, grid[i]);
        x = grid[i];
        out.psi[i] = y(0);
        out.p_dpsi[i] = y(1);
    }
    return out;
}

ReferenceModes asymptotic_modes(const Problem& p, Side side) {
    ReferenceModes r;
    r.geometry_ = endpoint_geometry(p.domain, side);
    if (!r.geometry_.finite) throw NumericalError("no reference modes at an infinite endpoint");
    r.classification_ = classify_endpoint(p, side, p.E0);
    auto h = detail::heads_for(p, r.geometry_, r.classification_);
    if (!h) throw NumericalError(std::string("no local model for the endpoint ") + to_string(side));
    r.heads_ = std::make_shared<const detail::Heads>(*h);
    r.E0_ = p.E0;
    r.equation_ = StationaryEquation{p.potential, p.weight, p.E0};
    return r;
}

ReferenceModes reference_modes(const Problem& p, Side side, double E0) {
    Problem q = p;
    q.E0 = E0;
    const EndpointGeometry g = endpoint_geometry(p.domain, side);
    if (g.finite && classify_endpoint(q, side, E0).verdict == Verdict::limit_point)
        throw ConfigError(std::string("endpoint ") + to_string(side) + " is limit point; no boundary condition applies");
    return asymptotic_modes(q, side);
}

namespace {

double simpson_adaptive(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_adaptive(f, a, b, fa, fm, fb, whole, tol, 50);
}

}  // namespace

std::function<Eigen::Vector2d(double)> second_solution(std::function<Eigen::Vector2d(double)> phi1,
                                                       KineticWeight weight, double x_ref) {
    return [phi1 = std::move(phi1), weight, x_ref](double x) {
        auto integrand = [&](double t) {
            const double v = phi1(t)(0);
            if (v == 0.0) throw NumericalError("second_solution: phi1 vanishes on the range");
            return 1.0 / (weight(t) * v * v);
        };
        const double I = integrate(integrand, x_ref, x, 1e-14 * (1.0 + std::abs(x - x_ref)));
        const Eigen::Vector2d f = phi1(x);
        return Eigen::Vector2d(f(0) * I, f(1) * I + 1.0 / f(0));
    };
}

LimitNumbers limit_numbers(const SolutionSamples& psi, const ReferenceModes& modes) {
    const Grid& grid = psi.grid;
    const int o = modes.orientation();
    const double xe = modes.endpoint();
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        if (o * (grid[i] - xe) >= 0.0) idx.push_back(i);
    if (idx.empty()) throw ConfigError("samples do not reach the side of the endpoint");
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(grid[a] - xe) < std::abs(grid[b] - xe);
    });

    // Wronskians with the modes at the nodes nearest the endpoint.
    auto wr = [&](Eigen::Index i, const Eigen::Matrix2d& m) {
        const std::complex<double> p0 = psi.psi[i], p1 = psi.p_dpsi[i];
        const std::complex<double> w1 = m(0, 0) * p1 - m(0, 1) * p0;
        const std::complex<double> w2 = m(1, 0) * p1 - m(1, 1) * p0;
        return std::pair{w1, w2};
    };

    // Skip nodes where the Wronskians are dominated by cancellation (near singular points the
    // products grow like s^(-3/2) while their difference stays finite).
    auto cancellation = [&](Eigen::Index i) {
        const Eigen::Matrix2d m = modes.evaluate(grid[i]);
        const double a = std::abs(psi.psi[i]), b = std::abs(psi.p_dpsi[i]);
        const auto [w1, w2] = wr(i, m);
        const double t1 = std::abs(m(0, 0)) * b + std::abs(m(0, 1)) * a;
        const double t2 = std::abs(m(1, 0)) * b + std::abs(m(1, 1)) * a;
        return std::max(t1, t2) / std::max({std::abs(w1), std::abs(w2), 1e-300});
    };
    if (modes.start_distance() > 0.0) {
        std::size_t first = 0;
        while (first + 8 < idx.size() && cancellation(idx[first]) > 1e5) ++first;
        idx.erase(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(first));
    }
    const double s1 = std::abs(grid[idx.front()] - xe);
    if (s1 == 0.0) {
        auto [w1, w2] = wr(idx.front(), modes.evaluate(grid[idx.front()]));
        return {-w2, w1, 0.0};
    }
    if (modes.start_distance() == 0.0 && idx.size() >= 6) {
        // Regular endpoint: the Wronskians are analytic in s, so extrapolate the nearest nodes
        // polynomially (Neville) and compare degrees 5 and 4.
        std::array<double, 6> sv{};
        std::array<std::complex<double>, 6> w1{}, w2{};
        for (std::size_t k = 0; k < 6; ++k) {
            sv[k] = std::abs(grid[idx[k]] - xe);
            std::tie(w1[k], w2[k]) = wr(idx[k], modes.evaluate(grid[idx[k]]));
        }
        auto neville = [&](std::array<std::complex<double>, 6> p, std::size_t n) {
            for (std::size_t m = 1; m < n; ++m)
                for (std::size_t i = 0; i + m < n; ++i)
                    p[i] = (sv[i + m] * p[i] - sv[i] * p[i + 1]) / (sv[i + m] - sv[i]);
            return p[0];
        };
        const std::complex<double> a1 = neville(w1, 6), a2 = neville(w2, 6);
        const double err = std::max(std::abs(a1 - neville(w1, 5)), std::abs(a2 - neville(w2, 5)));
        LimitNumbers out{-a2, a1, err};
        const double scale = std::max({std::abs(out.c1), std::abs(out.c2), 1e-300});
        if (!(err <= 1e-3 * scale)) throw NumericalError("limit numbers: extrapolation did not settle");
        return out;
    }
    // Nodes near s1 * 4^k, k = 0..3.
    std::array<Eigen::Index, 4> pick{};
    for (int k = 0; k < 4; ++k) {
        const double target = s1 * std::pow(4.0, k);
        double bd = INFINITY;
        for (Eigen::Index i : idx) {
            const double d = std::abs(std::log(std::abs(grid[i] - xe) / target));
            if (d < bd) {
                bd = d;
                pick[static_cast<std::size_t>(k)] = i;
            }
        }
    }
    std::array<double, 4> sv{};
    std::array<std::complex<double>, 4> w1{}, w2{};
    for (std::size_t k = 0; k < 4; ++k) {
        sv[k] = std::abs(grid[pick[k]] - xe);
        std::tie(w1[k], w2[k]) = wr(pick[k], modes.evaluate(grid[pick[k]]));
    }
    auto extrapolate = [&](const std::array<std::complex<double>, 4>& w) {
        const Extrapolated a = power_law_limit({sv[0], sv[1], sv[2]}, {w[0], w[1], w[2]});
        const Extrapolated b = power_law_limit({sv[1], sv[2], sv[3]}, {w[1], w[2], w[3]});
        return Extrapolated{a.value, std::min(std::abs(a.value - b.value) + 1e-15 * std::abs(a.value),
                                              a.error)};
    };
    const Extrapolated a1 = extrapolate(w1), a2 = extrapolate(w2);
    const double err = std::max(a1.error, a2.error);
    LimitNumbers out{-a2.value, a1.value, err};
    const double scale = std::max({std::abs(out.c1), std::abs(out.c2), 1e-300});
    if (!(err <= 1e-3 * scale)) throw NumericalError("limit numbers: extrapolation did not settle");
    return out;
}

LimitNumbers limit_numbers(const SolutionSamples& psi, const ReferenceModes& modes, double energy) {
    const Grid& grid = psi.grid;
    const int o = modes.orientation();
    const double xe = modes.endpoint();
    const double range = modes.head_range(energy);
    // Nodes inside the head range; the farthest ones suffer least from cancellation.
    std::vector<std::pair<double, Eigen::Index>> in;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const double s = o * (grid[i] - xe);
        if (s >= 0.0 && s <= range && (s > 0.0 || modes.start_distance() == 0.0)) in.emplace_back(s, i);
    }
    if (in.empty()) throw ConfigError("samples do not reach the head region of the endpoint");
    std::sort(in.begin(), in.end());
    const std::size_t n = std::min<std::size_t>(3, in.size());
    std::complex<double> c1[3], c2[3];
    for (std::size_t k = 0; k < n; ++k) {
        const Eigen::Index i = in[in.size() - 1 - k].second;
        const Eigen::Matrix2d m = modes.at(grid[i], energy);
        const std::complex<double> p0 = psi.psi[i], p1 = psi.p_dpsi[i];
        c2[k] = m(0, 0) * p1 - m(0, 1) * p0;
        c1[k] = -(m(1, 0) * p1 - m(1, 1) * p0);
    }
    double err = 0.0;
    for (std::size_t k = 1; k < n; ++k) err = std::max({err, std::abs(c1[k] - c1[0]), std::abs(c2[k] - c2[0])});
    return {c1[0], c2[0], err};
}

std::complex<double> wronskian_from_limits(const LimitNumbers& psi, const LimitNumbers& chi) {
    return std::conj(psi.c1) * chi.c2 - std::conj(psi.c2) * chi.c1;
}

}  // namespace sax
