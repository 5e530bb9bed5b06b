#include "sax/numerics.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>

namespace sax {

Grid::Grid(Eigen::VectorXd n, Spacing s) : nodes_(std::move(n)), spacing_(s) {
    if (nodes_.size() < min_nodes)
        throw ConfigError("grid needs at least " + std::to_string(min_nodes) + " nodes");
    for (Eigen::Index i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1])) throw ConfigError("grid nodes must be strictly increasing");
}

Grid Grid::uniform(double a, double b, Eigen::Index n) {
    if (n < min_nodes) throw ConfigError("grid needs at least 32 nodes");
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, a, b);
    x[0] = a;
    x[n - 1] = b;
    return Grid(std::move(x), Spacing::uniform);
}

Grid Grid::geometric(double endpoint, double near, double far, Eigen::Index n, bool above) {
    if (!(near > 0.0) || !(far > near)) throw ConfigError("geometric grid needs 0 < near < far");
    if (n < min_nodes) throw ConfigError("grid needs at least 32 nodes");
    Eigen::VectorXd d(n);
    const double ratio = std::log(far / near);
    for (Eigen::Index i = 0; i < n; ++i)
        d[i] = near * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
    d[0] = near;
    d[n - 1] = far;
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i)
        x[i] = above ? endpoint + d[i] : endpoint - d[n - 1 - i];
    return Grid(std::move(x), Spacing::geometric);
}

Grid Grid::from_nodes(Eigen::VectorXd nodes) { return Grid(std::move(nodes), Spacing::custom); }

Eigen::Index Grid::nearest(double x) const {
    const double* b = nodes_.data();
    const double* e = b + nodes_.size();
    const double* it = std::lower_bound(b, e, x);
    if (it == b) return 0;
    if (it == e) return nodes_.size() - 1;
    const Eigen::Index j = it - b;
    return (x - nodes_[j - 1] <= nodes_[j] - x) ? j - 1 : j;
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

[[noreturn]] void overflow_at(double x) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "solution overflow at x = %.6g", x);
    throw NumericalError(buf);
}

}  // namespace

template <typename Scalar>
typename Stepper<Scalar>::State Stepper<Scalar>::advance(State y, double x0, double x1) {
    if (x0 == x1) return y;
    const double dir = x1 > x0 ? 1.0 : -1.0;
    const double span = std::abs(x1 - x0);
    // First guess follows the local length scale, which is small near a singular point at 0.
    double h = h_ > 0.0 ? std::min(h_, span) : std::min(span, 1e-2 * std::max(std::abs(x0), 1e-6));

    double x = x0;
    for (int k = 0; k < 2; ++k) peak_[k] = std::max(peak_[k], std::abs(y(k)));
    long steps = 0;
    while (dir * (x1 - x) > 0.0) {
        if (++steps > opt_.max_steps) throw NumericalError("integrator step limit exceeded");
        bool last = false;
        if (h >= std::abs(x1 - x)) {
            h = std::abs(x1 - x);
            last = true;
        }
        const double s = dir * h;
        const State k1 = eq_.rhs(x, y);
        const State k2 = eq_.rhs(x + c2 * s, State(y + s * (a21 * k1)));
        const State k3 = eq_.rhs(x + c3 * s, State(y + s * (a31 * k1 + a32 * k2)));
        const State k4 = eq_.rhs(x + c4 * s, State(y + s * (a41 * k1 + a42 * k2 + a43 * k3)));
        const State k5 =
            eq_.rhs(x + c5 * s, State(y + s * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const State k6 = eq_.rhs(
            x + s, State(y + s * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        const State yn = y + s * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = eq_.rhs(x + s, yn);
        const State err = s * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = 0.0;
        for (int k = 0; k < 2; ++k) {
            const double scale =
                opt_.rtol * std::max({std::abs(y(k)), std::abs(yn(k)), 1e-6 * peak_[k], 1e-300});
            en = std::max(en, std::abs(err(k)) / scale);
        }
        if (!std::isfinite(en)) {
            h *= 0.25;
            if (h < 1e-300) overflow_at(x);
            continue;
        }
        if (en <= 1.0) {
            x = last ? x1 : x + s;
            y = yn;
            for (int k = 0; k < 2; ++k) {
                const double m = std::abs(y(k));
                if (m > opt_.overflow) overflow_at(x);
                peak_[k] = std::max(peak_[k], m);
            }
            h_ = h * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-30), -0.2)));
            h = h_;
        } else {
            h *= std::max(0.1, 0.9 * std::pow(en, -0.2));
            if (h < 1e-15 * std::max(1.0, std::abs(x)))
                throw NumericalError("integrator step size underflow");
        }
    }
    return y;
}

template class Stepper<double>;
template class Stepper<std::complex<double>>;

template <typename Scalar>
Samples<Scalar> integrate_adaptive(const StationaryEquation& eq, From from,
                                   const Eigen::Matrix<Scalar, 2, 1>& init, const Grid& grid,
                                   const IntegratorOptions& opt) {
    const Eigen::Index n = grid.size();
    Samples<Scalar> out{grid, typename Samples<Scalar>::Vector(n), typename Samples<Scalar>::Vector(n)};
    Stepper<Scalar> stepper(eq, opt);
    Eigen::Matrix<Scalar, 2, 1> y = init;
    const bool fwd = from == From::front;
    Eigen::Index i = fwd ? 0 : n - 1;
    out.psi[i] = y(0);
    out.p_dpsi[i] = y(1);
    for (Eigen::Index k = 1; k < n; ++k) {
        const Eigen::Index j = fwd ? i + 1 : i - 1;
        y = stepper.advance(y, grid[i], grid[j]);
        out.psi[j] = y(0);
        out.p_dpsi[j] = y(1);
        i = j;
    }
    return out;
}

template <typename Scalar>
Samples<Scalar> integrate_numerov(const StationaryEquation& eq, From from,
                                  const Eigen::Matrix<Scalar, 2, 1>& init, const Grid& grid) {
    if (!eq.weight.is_unit()) throw ConfigError("Numerov requires unit kinetic weight");
    const Eigen::Index n = grid.size();
    const double h = (grid.back() - grid.front()) / static_cast<double>(n - 1);
    const bool fwd = from == From::front;
    auto node = [&](Eigen::Index k) { return fwd ? k : n - 1 - k; };

    Eigen::VectorXd f(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        f[k] = eq.potential(grid[node(k)]) - eq.energy;
        if (!std::isfinite(f[k])) throw NumericalError("potential is not finite on the grid");
    }
    std::vector<Scalar> y(static_cast<std::size_t>(n));
    Samples<Scalar> out{grid, typename Samples<Scalar>::Vector(n), typename Samples<Scalar>::Vector(n)};

    // First step with the adaptive integrator.
    Stepper<Scalar> stepper(eq);
    const Eigen::Matrix<Scalar, 2, 1> y1 = stepper.advance(init, grid[node(0)], grid[node(1)]);
    y[0] = init(0);
    y[1] = y1(0);
    const double h2 = h * h / 12.0;
    for (Eigen::Index k = 1; k + 1 < n; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        y[ku + 1] = (2.0 * (1.0 + 5.0 * h2 * f[k]) * y[ku] - (1.0 - h2 * f[k - 1]) * y[ku - 1]) /
                    (1.0 - h2 * f[k + 1]);
        if (std::abs(y[ku + 1]) > 1e150) overflow_at(grid[node(k + 1)]);
    }
    // Derivatives: fourth-order central formula consistent with Numerov at interior nodes.
    // The step direction flips the sign of d/dx when sweeping from the back.
    const double sgn = fwd ? 1.0 : -1.0;
    const double h6 = h * h / 6.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const Eigen::Index j = node(k);
        out.psi[j] = y[ku];
        if (k == 0) {
            out.p_dpsi[j] = init(1);
        } else if (k + 1 < n) {
            out.p_dpsi[j] = sgn * ((1.0 - h6 * f[k + 1]) * y[ku + 1] - (1.0 - h6 * f[k - 1]) * y[ku - 1]) /
                            (2.0 * h);
        }
    }
    // Last node: one adaptive step from the previous node.
    {
        const Eigen::Index jp = node(n - 2), jl = node(n - 1);
        Stepper<Scalar> tail(eq);
        const Eigen::Matrix<Scalar, 2, 1> yl =
            tail.advance(Eigen::Matrix<Scalar, 2, 1>(out.psi[jp], out.p_dpsi[jp]), grid[jp], grid[jl]);
        out.p_dpsi[jl] = yl(1);
    }
    return out;
}

template <typename Scalar>
Samples<Scalar> integrate_stationary(const Problem& problem, double E, From from,
                                     const Eigen::Matrix<Scalar, 2, 1>& init, const Grid& grid,
                                     const IntegratorOptions& opt) {
    StationaryEquation eq{problem.potential, problem.weight, E};
    if (grid.spacing() == Grid::Spacing::uniform && problem.weight.is_unit()) {
        bool finite = true;
        for (Eigen::Index i = 0; i < grid.size() && finite; ++i)
            finite = std::isfinite(problem.potential(grid[i]));
        if (finite) return integrate_numerov<Scalar>(eq, from, init, grid);
    }
    return integrate_adaptive<Scalar>(eq, from, init, grid, opt);
}

#define SAX_INSTANTIATE(S)                                                                       \
    template Samples<S> integrate_adaptive<S>(const StationaryEquation&, From,                   \
                                              const Eigen::Matrix<S, 2, 1>&, const Grid&,        \
                                              const IntegratorOptions&);                         \
    template Samples<S> integrate_numerov<S>(const StationaryEquation&, From,                    \
                                             const Eigen::Matrix<S, 2, 1>&, const Grid&);        \
    template Samples<S> integrate_stationary<S>(const Problem&, double, From,                    \
                                                const Eigen::Matrix<S, 2, 1>&, const Grid&,      \
                                                const IntegratorOptions&);
SAX_INSTANTIATE(double)
SAX_INSTANTIATE(std::complex<double>)
#undef SAX_INSTANTIATE

std::vector<Bracket> bracket_roots(const std::function<double(double)>& f, double a, double b,
                                   int n_probes, const std::vector<double>& poles) {
    if (n_probes < 2 || !(b > a)) return {};
    std::vector<double> cuts{a};
    std::vector<double> sorted = poles;
    std::sort(sorted.begin(), sorted.end());
    for (double p : sorted)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);

    std::vector<Bracket> out;
    const double width = b - a;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        // Keep away from the poles themselves.
        const double eps = 1e-12 * std::max(1.0, width);
        const double lo = cuts[s] + (s > 0 ? eps : 0.0);
        const double hi = cuts[s + 1] - (s + 2 < cuts.size() ? eps : 0.0);
        const int m = std::max(2, static_cast<int>(std::ceil(n_probes * (hi - lo) / width)));
        double xp = lo, fp = f(lo);
        for (int i = 1; i <= m; ++i) {
            const double x = i == m ? hi : lo + (hi - lo) * i / m;
            const double fx = f(x);
            if (fp == 0.0) {
                out.push_back({xp, xp});
            } else if (std::isfinite(fp) && std::isfinite(fx) && fx != 0.0 &&
                       std::signbit(fp) != std::signbit(fx)) {
                out.push_back({xp, x});
            }
            xp = x;
            fp = fx;
        }
        if (fp == 0.0) out.push_back({xp, xp});
    }
    return out;
}

double polish_root(const std::function<double(double)>& f, Bracket br, double tol, int max_iter) {
    double a = br.lo, b = br.hi;
    if (a == b) return a;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::signbit(fa) == std::signbit(fb)) throw NumericalError("polish_root: no sign change");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::signbit(fb) == std::signbit(fc)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    throw NumericalError("polish_root: no convergence");
}

Extrapolated aitken_limit(std::complex<double> s0, std::complex<double> s1, std::complex<double> s2) {
    const std::complex<double> d1 = s1 - s0, d2 = s2 - s1;
    const std::complex<double> den = d2 - d1;
    const double scale = std::max({std::abs(s0), std::abs(s1), std::abs(s2), 1e-300});
    if (std::abs(den) <= 1e-14 * scale) return {s2, std::abs(d2)};
    const std::complex<double> lim = s2 - d2 * d2 / den;
    return {lim, std::abs(lim - s2)};
}

Extrapolated power_law_limit(const std::array<double, 3>& s,
                             const std::array<std::complex<double>, 3>& w) {
    const std::complex<double> d0 = w[1] - w[0], d1 = w[2] - w[1];
    const double scale = std::max({std::abs(w[0]), std::abs(w[1]), std::abs(w[2]), 1e-300});
    if (std::abs(d0) <= 1e-15 * scale) return {w[0], std::abs(d0)};
    const double R = (d1 * std::conj(d0)).real() / std::norm(d0);
    // (s2^q - s1^q) / (s1^q - s0^q) increases with q; match it to R.
    auto ratio = [&](double q) {
        return (std::pow(s[2], q) - std::pow(s[1], q)) / (std::pow(s[1], q) - std::pow(s[0], q));
    };
    double lo = 1e-3, hi = 12.0;
    if (!(R > ratio(lo)) || !(R < ratio(hi))) return {w[0], std::abs(d0) + std::abs(d1)};
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ratio(mid) < R ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    const std::complex<double> A = d0 / (std::pow(s[1], q) - std::pow(s[0], q));
    const std::complex<double> L = w[0] - A * std::pow(s[0], q);
    return {L, std::abs(L - w[0])};
}

double hermite_norm2(const Eigen::VectorXd& x, const Eigen::VectorXcd& f, const Eigen::VectorXcd& df) {
    // Integrates |H|^2 exactly, H the cubic Hermite interpolant, with 4-point Gauss-Legendre.
    static const std::array<double, 4> t = {-0.8611363115940526, -0.3399810435848563,
                                            0.3399810435848563, 0.8611363115940526};
    static const std::array<double, 4> w = {0.3478548451374538, 0.6521451548625461,
                                            0.6521451548625461, 0.3478548451374538};
    double sum = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        for (int q = 0; q < 4; ++q) {
            const double u = 0.5 * (t[q] + 1.0);
            const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
            const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
            const std::complex<double> v =
                h00 * f[i] + h10 * h * df[i] + h01 * f[i + 1] + h11 * h * df[i + 1];
            sum += 0.5 * h * w[q] * std::norm(v);
        }
    }
    return sum;
}

}  // namespace sax
