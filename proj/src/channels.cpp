#include "channels.hpp"

#include <algorithm>
#include <cmath>

#include "sax/classify.hpp"
#include "sax/errors.hpp"

namespace sax::detail {

SideBasis::SideBasis(const Problem& p, Side side)
    : modes_(asymptotic_modes(p, side)), eq_{p.potential, p.weight, p.E0} {
    lp_ = modes_.classification().verdict == Verdict::limit_point;
}

Eigen::Matrix2d SideBasis::start_rows(double E, double& x0) const {
    const double s0 = start(E);
    x0 = endpoint() + orientation() * s0;
    Eigen::Matrix2d m = modes_.at(x0, E);
    if (lp_ || !modes_.has_second()) {
        // Any partner with p W[chi1, chi2] = 1 will do.
        if (m(0, 0) == 0.0) throw NumericalError("subdominant solution vanishes at the start point");
        m(1, 0) = 0.0;
        m(1, 1) = 1.0 / m(0, 0);
    }
    return m;
}

Eigen::Matrix2d SideBasis::at(double E, double x) const {
    double x0 = 0.0;
    const Eigen::Matrix2d m = start_rows(E, x0);
    const double s = orientation() * (x - endpoint());
    if (s < 0.0) throw ConfigError("point lies outside the side of the endpoint");
    StationaryEquation eq = eq_;
    eq.energy = E;
    Eigen::Matrix2d out;
    for (int k = 0; k < 2; ++k) {
        Stepper<double> stepper(eq);
        out.row(k) = stepper.advance(Eigen::Vector2d(m.row(k).transpose()), x0, x).transpose();
    }
    return out;
}

Trace SideBasis::sample(double E, const Eigen::Vector2cd& c, double x_to, double h) const {
    Trace tr;
    const int o = orientation();
    const double xe = endpoint();
    const double s_to = o * (x_to - xe);
    double x0 = 0.0;
    const Eigen::Matrix2d m = start_rows(E, x0);
    const double s0 = start(E);
    if (s0 > 0.0 && !lp_) {
        // Series region: 50 nodes per decade from the tail distance to the start point.
        const int n = std::max(2, static_cast<int>(std::ceil(50.0 * std::log10(s0 / tail_distance))));
        for (int i = 0; i < n; ++i) {
            const double s = tail_distance * std::pow(s0 / tail_distance, static_cast<double>(i) / n);
            if (s >= s_to) break;
            const Eigen::Matrix2d b = modes_.at(xe + o * s, E);
            tr.push(xe + o * s, c(0) * b(0, 0) + c(1) * b(1, 0), c(0) * b(0, 1) + c(1) * b(1, 1));
        }
    }
    StationaryEquation eq = eq_;
    eq.energy = E;
    Eigen::Vector2cd y = m.transpose().cast<std::complex<double>>() * c;
    Stepper<std::complex<double>> stepper(eq);
    double s = s0;
    tr.push(x0, y(0), y(1));
    while (s < s_to) {
        double next = s > 0.0 ? std::min(1.05 * s, s + h) : std::min(h, s_to);
        if (next > s_to * (1.0 - 1e-12)) next = s_to;
        y = stepper.advance(y, xe + o * s, xe + o * next);
        s = next;
        tr.push(xe + o * s, y(0), y(1));
    }
    return tr;
}

std::optional<double> outer_turning_point(const StationaryEquation& eq, double x_from, int o) {
    auto f = [&](double d) { return eq.potential(x_from + o * d) - eq.energy; };
    // Geometric scan of the distance, then bisection.
    constexpr int n = 480;
    const double d0 = 1e-4, d1 = 1e8;
    double last_below = -1.0;
    int last_i = -1;
    for (int i = 0; i <= n; ++i) {
        const double d = d0 * std::pow(d1 / d0, static_cast<double>(i) / n);
        if (f(d) < 0.0) {
            last_below = d;
            last_i = i;
        }
    }
    if (last_i < 0) return std::nullopt;
    if (last_i == n) throw NumericalError("no decaying solution: the energy lies above the potential at infinity");
    double lo = last_below, hi = d0 * std::pow(d1 / d0, static_cast<double>(last_i + 1) / n);
    for (int it = 0; it < 100 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return x_from + o * 0.5 * (lo + hi);
}

double far_cutoff(const StationaryEquation& eq, double x_from, int o) {
    constexpr double action_target = 25.0;
    double x = x_from, action = 0.0;
    auto kappa = [&](double xi) {
        return std::sqrt(std::max(eq.potential(xi) - eq.energy, 0.0) / eq.weight(xi));
    };
    for (long it = 0; it < 10'000'000; ++it) {
        const double k = kappa(x);
        const double dx = k > 0.0 ? std::min(0.05 / k, 1.0 + 0.01 * std::abs(x)) : 1.0 + 0.01 * std::abs(x);
        const double k2 = kappa(x + o * dx);
        action += 0.5 * (k + k2) * dx;
        x += o * dx;
        if (action >= action_target) return x;
        if (std::abs(x - x_from) > 1e7) break;
    }
    throw NumericalError("no decaying solution: the WKB action does not grow (energy at or above threshold)");
}

Trace integrate_trace(const StationaryEquation& eq, const Eigen::Vector2cd& y0, double x0, double x1,
                      double h) {
    Trace tr;
    tr.push(x0, y0(0), y0(1));
    const double span = std::abs(x1 - x0);
    const auto n = std::max<long>(1, static_cast<long>(std::ceil(span / h)));
    Stepper<std::complex<double>> stepper(eq);
    Eigen::Vector2cd y = y0;
    double x = x0;
    for (long i = 1; i <= n; ++i) {
        const double xn = i == n ? x1 : x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(n);
        y = stepper.advance(y, x, xn);
        x = xn;
        tr.push(x, y(0), y(1));
    }
    return tr;
}

Eigen::Vector2d decaying_solution(const StationaryEquation& eq, int o, double x_match, double x_far,
                                  double* norm, Trace* trace, double h) {
    const double k = std::sqrt(std::max(eq.potential(x_far) - eq.energy, 0.0) / eq.weight(x_far));
    const Eigen::Vector2d seed(1.0, -o * eq.weight(x_far) * k);
    Eigen::Vector2d y;
    if (trace) {
        *trace = integrate_trace(eq, seed.cast<std::complex<double>>(), x_far, x_match, h);
        y = Eigen::Vector2d(trace->psi.back().real(), trace->p_dpsi.back().real());
    } else {
        Stepper<double> stepper(eq);
        y = stepper.advance(seed, x_far, x_match);
    }
    const double n = y.norm();
    if (norm) *norm = n;
    return y / n;
}

}  // namespace sax::detail
