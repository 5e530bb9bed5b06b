#include "sax/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "channels.hpp"
#include "sax/classify.hpp"
#include "sax/errors.hpp"
#include "sax/special_functions.hpp"

namespace sax {

const char* to_string(Backend b) {
    switch (b) {
        case Backend::automatic: return "Auto";
        case Backend::shooting: return "Shooting";
        case Backend::closed_form: return "ClosedForm";
        case Backend::digamma: return "DigammaEq";
    }
    return "?";
}

namespace {

constexpr double pi = std::numbers::pi;
using cd = std::complex<double>;

double wrap(double a) {
    a = std::remainder(a, 2.0 * pi);
    return a <= -pi ? a + 2.0 * pi : a;
}

// Quantities of one side at the matching point.
struct SideEval {
    double x_match = 0.0;
    double x_far = 0.0;     // seed point of the far solution (infinite sides)
    Eigen::Vector2d c;      // limit numbers (c1, c2) of the unit-normalized far solution
    cd z;                   // gamma1 + i gamma2 of the far solution
};

// Bound states are the energies where T(E) = U diag(z_j / conj z_j) has eigenvalue 1; z_j are
// the boundary values of the solution that behaves correctly away from side j.
class Matcher {
public:
    explicit Matcher(const Problem& p);

    bool has_threshold() const { return threshold_; }
    Eigen::VectorXd phases(double E) const;
    std::vector<BoundState> assemble(double E, int multiplicity, const ShootingOptions& opt) const;

private:
    std::vector<SideEval> evaluate(double E) const;
    Eigen::MatrixXcd transfer(const std::vector<SideEval>& ev) const;
    double match_distance(std::size_t j, double E) const;

    Problem p_;
    std::vector<detail::SideBasis> sides_;
    std::optional<detail::SideBasis> upper_;  // interval: the far solution is anchored here
    Eigen::Vector2d upper_ray_;
    Eigen::MatrixXcd U_;
    bool threshold_ = false;
};

Matcher::Matcher(const Problem& p) : p_(p) {
    validate(p_);
    const double L0 = p.bc.L0;
    auto robin_u = [&](const detail::SideBasis& s, double theta) {
        return s.limit_point() ? cd(-1.0) : std::polar(1.0, theta);
    };
    switch (p.domain.kind) {
        case Domain1D::Kind::half_line: {
            if (classify_endpoint(p, Side::upper, p.E0).verdict != Verdict::limit_point)
                throw ConfigError("bound states need a limit-point end at infinity");
            sides_.emplace_back(p, Side::lower);
            U_ = Eigen::MatrixXcd::Constant(1, 1, robin_u(sides_[0], p.bc.robin().theta));
            threshold_ = p.potential.vanishes_at_infinity();
            break;
        }
        case Domain1D::Kind::interval: {
            sides_.emplace_back(p, Side::lower);
            upper_.emplace(p, Side::upper);
            U_ = Eigen::MatrixXcd::Constant(1, 1, robin_u(sides_[0], p.bc.robin().theta));
            const double tu = p.bc.robin().upper_theta;
            if (upper_->limit_point())
                upper_ray_ = {1.0, 0.0};
            else
                upper_ray_ = {std::sin(0.5 * tu), -L0 * std::cos(0.5 * tu)};
            break;
        }
        case Domain1D::Kind::line: {
            for (Side s : {Side::lower, Side::upper})
                if (classify_endpoint(p, s, p.E0).verdict != Verdict::limit_point)
                    throw ConfigError("bound states need limit-point ends at infinity");
            sides_.emplace_back(p, Side::origin_plus);
            sides_.emplace_back(p, Side::origin_minus);
            if (sides_[0].limit_point())
                U_ = -Eigen::MatrixXcd::Identity(2, 2);
            else
                U_ = p.bc.unitary();
            threshold_ = p.potential.vanishes_at_infinity();
            break;
        }
    }
}

double Matcher::match_distance(std::size_t j, double E) const {
    const detail::SideBasis& s = sides_[j];
    if (upper_) return 0.5 * (p_.domain.upper - p_.domain.lower);
    StationaryEquation eq{p_.potential, p_.weight, E};
    const auto xt = detail::outer_turning_point(eq, s.endpoint(), s.orientation());
    const double dt = xt ? std::abs(*xt - s.endpoint()) : 0.0;
    const double kappa = threshold_ ? std::sqrt(-E) : 1.0;
    return std::max({dt, 2.0 * s.start(E), std::min(1.0, 1.0 / kappa)});
}

std::vector<SideEval> Matcher::evaluate(double E) const {
    std::vector<SideEval> out;
    const StationaryEquation eq{p_.potential, p_.weight, E};
    for (std::size_t j = 0; j < sides_.size(); ++j) {
        const detail::SideBasis& s = sides_[j];
        const int o = s.orientation();
        SideEval ev;
        ev.x_match = s.endpoint() + o * match_distance(j, E);
        Eigen::Vector2d u;
        if (upper_) {
            const Eigen::Matrix2d b = upper_->at(E, ev.x_match);
            u = b.transpose() * upper_ray_;
            u /= u.norm();
        } else {
            ev.x_far = detail::far_cutoff(eq, ev.x_match, o);
            u = detail::decaying_solution(eq, o, ev.x_match, ev.x_far);
        }
        const Eigen::Matrix2d chi = s.at(E, ev.x_match);
        const double c2 = chi(0, 0) * u(1) - chi(0, 1) * u(0);
        const double c1 = -(chi(1, 0) * u(1) - chi(1, 1) * u(0));
        ev.c = {c1, c2};
        if (s.limit_point()) {
            // Only gamma1 = 0 matters; measure u in a frame aligned with chi1 at the matching
            // point so that the angle turns steadily with E.
            const double n1 = chi.row(0).norm();
            ev.z = cd(c2 / n1, (chi(0, 0) * u(0) + chi(0, 1) * u(1)) / n1);
        } else {
            ev.z = cd(c2, -o * p_.bc.L0 * c1);
        }
        out.push_back(ev);
    }
    return out;
}

Eigen::MatrixXcd Matcher::transfer(const std::vector<SideEval>& ev) const {
    const auto n = static_cast<Eigen::Index>(ev.size());
    Eigen::VectorXcd d(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const cd z = ev[static_cast<std::size_t>(j)].z;
        d[j] = z / std::conj(z);
    }
    return U_ * d.asDiagonal();
}

Eigen::VectorXd Matcher::phases(double E) const {
    const Eigen::MatrixXcd T = transfer(evaluate(E));
    if (T.rows() == 1) return Eigen::VectorXd::Constant(1, std::arg(T(0, 0)));
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(T, false);
    Eigen::VectorXd w(T.rows());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::arg(es.eigenvalues()[i]);
    std::sort(w.data(), w.data() + w.size());
    return w;
}

struct SideSamples {
    std::vector<double> x;
    std::vector<cd> psi, dpsi;  // dpsi = p psi'
};

// Integral of |psi|^2 between the endpoint and the first sample, from a two-power fit.
double tail_norm(const detail::SideBasis& s, const SideSamples& ss, const KineticWeight& w) {
    const auto& cls = s.modes().classification();
    if (!cls.exponents || !w.is_unit() || ss.x.empty()) return 0.0;
    const cd r1c = (*cls.exponents)[0], r2c = (*cls.exponents)[1];
    if (std::abs(r1c.imag()) > 0.0 || std::abs(r2c.imag()) > 0.0) return 0.0;
    const double r1 = r1c.real(), r2 = r2c.real();
    if (std::abs(r1 - r2) < 1e-9) return 0.0;
    const double s0 = std::abs(ss.x.front() - s.endpoint());
    if (s0 == 0.0) return 0.0;
    const cd v = ss.psi.front(), d = static_cast<double>(s.orientation()) * ss.dpsi.front();
    // v = A s0^r1 + B s0^r2, d = A r1 s0^(r1-1) + B r2 s0^(r2-1)
    const double a = std::pow(s0, r1), b = std::pow(s0, r2);
    const double da = r1 * a / s0, db = r2 * b / s0;
    const double det = a * db - b * da;
    const cd A = (v * db - b * d) / det, B = (a * d - da * v) / det;
    double t = 0.0;
    auto term = [&](double e, double coef) {
        if (e > 0.0) t += coef * std::pow(s0, e) / e;
    };
    term(2 * r1 + 1, std::norm(A));
    term(r1 + r2 + 1, 2.0 * (A * std::conj(B)).real());
    term(2 * r2 + 1, std::norm(B));
    return std::max(t, 0.0);
}

std::vector<BoundState> Matcher::assemble(double E, int multiplicity, const ShootingOptions& opt) const {
    const std::vector<SideEval> ev = evaluate(E);
    const auto n = static_cast<Eigen::Index>(ev.size());
    std::vector<Eigen::VectorXcd> amps;
    if (n == 1) {
        amps.emplace_back(Eigen::VectorXcd::Ones(1));
    } else {
        Eigen::VectorXcd z(n);
        for (Eigen::Index j = 0; j < n; ++j) z[j] = ev[static_cast<std::size_t>(j)].z;
        const Eigen::MatrixXcd M = U_ * z.asDiagonal().toDenseMatrix() - Eigen::MatrixXcd(z.conjugate().asDiagonal());
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
        const int m = std::min<int>(multiplicity, static_cast<int>(n));
        Eigen::MatrixXcd N = svd.matrixV().rightCols(m);
        // Reduced basis: localizes each state on one side when the sides decouple.
        if (m > 1) {
            const Eigen::MatrixXcd top = N.topRows(m);
            if (std::abs(top.determinant()) > 1e-8) N = N * top.inverse();
        }
        for (int k = 0; k < m; ++k) amps.emplace_back(N.col(k).normalized());
    }

    const StationaryEquation eq{p_.potential, p_.weight, E};
    const double ell = 1.0 / std::sqrt(std::max(1.0, std::abs(E)));
    const double h = opt.sample_spacing * ell;

    std::vector<BoundState> out;
    for (const Eigen::VectorXcd& a : amps) {
        std::vector<SideSamples> parts;
        double norm2 = 0.0;
        for (std::size_t j = 0; j < ev.size(); ++j) {
            const detail::SideBasis& s = sides_[j];
            const cd aj = a[static_cast<Eigen::Index>(j)];
            const Eigen::Vector2cd coef = aj * ev[j].c.cast<cd>();
            detail::Trace inner = s.sample(E, coef, ev[j].x_match, h);
            detail::Trace outer;
            if (upper_) {
                const Eigen::Matrix2d b = upper_->at(E, ev[j].x_match);
                const double nu = (b.transpose() * upper_ray_).norm();
                outer = upper_->sample(E, (aj / nu) * upper_ray_.cast<cd>(), ev[j].x_match, h);
            } else {
                double nu = 1.0;
                detail::decaying_solution(eq, s.orientation(), ev[j].x_match, ev[j].x_far, &nu, &outer, h);
                outer.scale(aj / nu);
            }
            // Order by distance from the endpoint: inner outward, then the far part inward.
            SideSamples ss;
            for (std::size_t i = 0; i < inner.x.size(); ++i) {
                ss.x.push_back(inner.x[i]);
                ss.psi.push_back(inner.psi[i]);
                ss.dpsi.push_back(inner.p_dpsi[i]);
            }
            for (std::size_t i = outer.x.size(); i-- > 0;) {
                if (std::abs(outer.x[i] - ss.x.back()) <= 1e-12 * (1.0 + std::abs(ss.x.back()))) continue;
                ss.x.push_back(outer.x[i]);
                ss.psi.push_back(outer.psi[i]);
                ss.dpsi.push_back(outer.p_dpsi[i]);
            }
            // Ascending copy for the quadrature.
            const auto m = static_cast<Eigen::Index>(ss.x.size());
            Eigen::VectorXd xs(m);
            Eigen::VectorXcd f(m), df(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const auto k = static_cast<std::size_t>(s.orientation() > 0 ? i : m - 1 - i);
                xs[i] = ss.x[k];
                f[i] = ss.psi[k];
                df[i] = ss.dpsi[k] / p_.weight(ss.x[k]);
            }
            norm2 += hermite_norm2(xs, f, df) + tail_norm(s, ss, p_.weight);
            parts.push_back(std::move(ss));
        }
        if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw NumericalError("eigenfunction has no norm");

        // Common phase: real and positive at the largest sample.
        cd peak = 0.0;
        for (const auto& ss : parts)
            for (const cd& v : ss.psi)
                if (std::abs(v) > std::abs(peak)) peak = v;
        const cd f = std::conj(peak / std::abs(peak)) / std::sqrt(norm2);

        // Nodes: sign changes of the real part along each side, plus one across the origin.
        int nodes = 0;
        std::vector<double> first_value;
        double gmax = 0.0;
        for (const auto& ss : parts)
            for (const cd& v : ss.psi) gmax = std::max(gmax, std::abs((v * f).real()));
        for (const auto& ss : parts) {
            double vmax = 0.0;
            for (const cd& v : ss.psi) vmax = std::max(vmax, std::abs((v * f).real()));
            if (vmax < 1e-8 * gmax) continue;
            double prev = 0.0;
            bool first = true;
            for (const cd& v : ss.psi) {
                const double r = (v * f).real();
                if (std::abs(r) < 1e-7 * vmax) continue;
                if (first) first_value.push_back(r);
                if (!first && (r > 0.0) != (prev > 0.0)) ++nodes;
                prev = r;
                first = false;
            }
        }
        if (parts.size() == 2 && first_value.size() == 2 && !sides_[0].limit_point() &&
            (first_value[0] > 0.0) != (first_value[1] > 0.0))
            ++nodes;

        // Merge into one ascending grid; a shared node at a regular origin is kept once.
        std::vector<std::tuple<double, cd, cd>> all;
        for (const auto& ss : parts)
            for (std::size_t i = 0; i < ss.x.size(); ++i) all.emplace_back(ss.x[i], ss.psi[i] * f, ss.dpsi[i] * f);
        std::stable_sort(all.begin(), all.end(),
                         [](const auto& l, const auto& r) { return std::get<0>(l) < std::get<0>(r); });
        std::vector<std::tuple<double, cd, cd>> uniq;
        for (const auto& t : all)
            if (uniq.empty() || std::get<0>(t) > std::get<0>(uniq.back())) uniq.push_back(t);
        const auto m = static_cast<Eigen::Index>(uniq.size());
        Eigen::VectorXd xs(m);
        Eigen::VectorXcd ps(m), ds(m);
        for (Eigen::Index i = 0; i < m; ++i) std::tie(xs[i], ps[i], ds[i]) = uniq[static_cast<std::size_t>(i)];

        BoundState st;
        st.energy = E;
        st.nodes = nodes;
        st.psi = SolutionSamples{Grid::from_nodes(std::move(xs)), std::move(ps), std::move(ds)};
        st.backend = Backend::shooting;
        out.push_back(std::move(st));
    }
    return out;
}

struct PhaseBracket {
    double a, b;      // in the scan variable
    double wa, d;     // phase at a and its (unwrapped) change to b
};

void check_window(const EnergyWindow& w, bool threshold) {
    if (!(w.lo < w.hi) || !std::isfinite(w.lo) || !std::isfinite(w.hi))
        throw ConfigError("energy window must satisfy lo < hi");
    if (threshold && !(w.hi < 0.0))
        throw ConfigError("energy window must lie below the continuum threshold E = 0");
}

}  // namespace

std::vector<BoundState> bound_states_shooting(const Problem& problem, EnergyWindow window,
                                              std::size_t max_states, const ShootingOptions& opt) {
    const Matcher m(problem);
    check_window(window, m.has_threshold());

    // Scan variable t: s = 1/sqrt(-E) with a continuum at 0 (levels accumulate at t = inf and
    // are roughly evenly spaced in t for Coulomb tails), E itself otherwise.
    const bool thr = m.has_threshold();
    auto energy = [thr](double t) { return thr ? -1.0 / (t * t) : t; };
    const double t_lo = thr ? 1.0 / std::sqrt(-window.lo) : window.lo;
    const double t_hi = thr ? 1.0 / std::sqrt(-window.hi) : window.hi;
    const double span = t_hi - t_lo;
    const double spacing = thr ? opt.max_probe_spacing : std::max(opt.max_probe_spacing, span / 400.0);
    const int n = std::max(opt.min_probes, static_cast<int>(std::ceil(span / spacing)));

    std::vector<double> ts(static_cast<std::size_t>(n) + 1);
    std::vector<Eigen::VectorXd> ws(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        ts[i] = i == ts.size() - 1 ? t_hi : t_lo + span * static_cast<double>(i) / n;
        ws[i] = m.phases(energy(ts[i]));
    }

    std::vector<PhaseBracket> brackets;
    // Pairs eigenphases of neighbouring probes, splitting intervals where they move too far.
    std::function<void(double, double, const Eigen::VectorXd&, const Eigen::VectorXd&, int)> scan =
        [&](double a, double b, const Eigen::VectorXd& wa, const Eigen::VectorXd& wb, int depth) {
            std::vector<int> perm(static_cast<std::size_t>(wa.size()));
            for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
            if (wa.size() == 2) {
                const double keep = std::abs(wrap(wb[0] - wa[0])) + std::abs(wrap(wb[1] - wa[1]));
                const double swap = std::abs(wrap(wb[1] - wa[0])) + std::abs(wrap(wb[0] - wa[1]));
                if (swap < keep) perm = {1, 0};
            }
            double worst = 0.0;
            for (Eigen::Index k = 0; k < wa.size(); ++k)
                worst = std::max(worst, std::abs(wrap(wb[perm[static_cast<std::size_t>(k)]] - wa[k])));
            if (worst > 1.0 && depth < 12) {
                const double mid = 0.5 * (a + b);
                const Eigen::VectorXd wm = m.phases(energy(mid));
                scan(a, mid, wa, wm, depth + 1);
                scan(mid, b, wm, wb, depth + 1);
                return;
            }
            for (Eigen::Index k = 0; k < wa.size(); ++k) {
                const double w0 = wa[k];
                const double d = wrap(wb[perm[static_cast<std::size_t>(k)]] - w0);
                const double w1 = w0 + d;
                if ((w0 < 0.0 && w1 >= 0.0) || (w1 < 0.0 && w0 >= 0.0)) brackets.push_back({a, b, w0, d});
            }
        };
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) scan(ts[i], ts[i + 1], ws[i], ws[i + 1], 0);

    std::vector<double> roots;
    for (const PhaseBracket& br : brackets) {
        // Follow the eigenphase closest to the straight line between the bracket ends.
        auto f = [&](double t) {
            const double guess = br.wa + br.d * (t - br.a) / (br.b - br.a);
            const Eigen::VectorXd w = m.phases(energy(t));
            double best = w[0];
            for (Eigen::Index k = 1; k < w.size(); ++k)
                if (std::abs(wrap(w[k] - guess)) < std::abs(wrap(best - guess))) best = w[k];
            return wrap(best - guess) + guess;
        };
        const double tol = opt.root_tol * std::max(1.0, std::abs(br.a));
        roots.push_back(energy(polish_root(f, {br.a, br.b}, tol)));
    }
    std::sort(roots.begin(), roots.end());

    std::vector<BoundState> out;
    for (std::size_t i = 0; i < roots.size();) {
        std::size_t j = i + 1;
        while (j < roots.size() && std::abs(roots[j] - roots[i]) <= 1e-8 * std::max(1.0, std::abs(roots[i]))) ++j;
        for (BoundState& s : m.assemble(roots[i], static_cast<int>(j - i), opt)) out.push_back(std::move(s));
        i = j;
        if (max_states > 0 && out.size() >= max_states) break;
    }
    if (max_states > 0 && out.size() > max_states) out.resize(max_states);
    return out;
}

BoundState bound_state_at(const Problem& problem, double energy, Backend backend, const ShootingOptions& opt) {
    const Matcher m(problem);
    BoundState s = m.assemble(energy, 1, opt).front();
    s.backend = backend;
    return s;
}

namespace {

double f_tilde_checked(double xi) {
    const double v = f_tilde(xi);
    if (std::isnan(v)) throw NumericalError("f_tilde evaluated at a pole");
    return v;
}

}  // namespace

std::vector<double> coulomb_levels(double g, ExtendedReal L, std::size_t n_levels) {
    if (!(g != 0.0) || !std::isfinite(g)) throw ConfigError("coulomb_levels: g must be nonzero");
    std::vector<double> out;
    if (n_levels == 0) return out;
    const bool inf = L.is_infinite();
    const double invL = inf ? 0.0 : (L.value() == 0.0 ? INFINITY : 1.0 / L.value());
    auto energy = [g](double xi) { return -g * g / (4.0 * xi * xi); };
    auto f = [&](double xi) { return g * f_tilde_checked(xi) + invL; };
    if (g < 0.0) {
        for (std::size_t k = 1; k <= n_levels; ++k) {
            const double kk = static_cast<double>(k);
            if (std::isinf(invL)) {
                out.push_back(energy(-kk));
                continue;
            }
            const double eps = 1e-12 * kk;
            out.push_back(energy(polish_root(f, {-kk + eps, -kk + 1.0 - eps}, 1e-15)));
        }
        return out;
    }
    // Repulsive tail: at most one level, with xi > 0.
    if (std::isinf(invL)) return out;
    double lo = 1e-12, hi = 1.0;
    if (f(lo) * f(hi) > 0.0) {
        while (hi < 1e12 && f(lo) * f(hi) > 0.0) hi *= 2.0;
        if (f(lo) * f(hi) > 0.0) return out;
    }
    out.push_back(energy(polish_root(f, {lo, hi}, 1e-15)));
    return out;
}

double coulomb_shift(std::size_t n) {
    if (n == 0) throw ConfigError("coulomb_shift: n starts at 1");
    const double nn = static_cast<double>(n);
    const double eps = 1e-12 * nn;
    const double xi = polish_root(f_tilde_checked, {-nn + eps, -nn + 1.0 - eps}, 1e-15);
    return nn + xi;
}

std::optional<double> free_halfline_level(ExtendedReal L) {
    if (L.is_infinite() || !(L.value() > 0.0)) return std::nullopt;
    return -1.0 / (L.value() * L.value());
}

namespace {

std::vector<std::pair<double, Eigen::Vector2cd>> channels_of(const Eigen::Matrix2cd& U) {
    if (!is_unitary(U)) throw ConfigError("U is not unitary");
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(U);
    std::vector<std::pair<double, Eigen::Vector2cd>> out;
    for (int i = 0; i < 2; ++i) {
        double th = std::arg(es.eigenvalues()[i]);
        if (th < 0.0) th += 2.0 * pi;
        out.emplace_back(th, es.eigenvectors().col(i).normalized());
    }
    return out;
}

bool binding(double theta) { return theta > 1e-12 && theta < pi - 1e-12; }

}  // namespace

std::vector<double> free_line_levels(const Eigen::Matrix2cd& U, double L0) {
    std::vector<double> out;
    for (const auto& [th, v] : channels_of(U)) {
        if (!binding(th)) continue;
        const double L = L0 / std::tan(0.5 * th);
        out.push_back(-1.0 / (L * L));
    }
    std::sort(out.begin(), out.end());
    return out;
}

int point_interaction_bound_count(const Eigen::Matrix2cd& U) {
    int n = 0;
    for (const auto& [th, v] : channels_of(U)) n += binding(th) ? 1 : 0;
    return n;
}

namespace {

bool is_free(const Problem& p) {
    return std::holds_alternative<potential::Free>(p.potential.family()) && p.weight.is_unit();
}

bool is_coulomb_halfline(const Problem& p) {
    if (p.domain.kind != Domain1D::Kind::half_line || !p.weight.is_unit()) return false;
    if (std::holds_alternative<potential::Coulomb>(p.potential.family())) return true;
    if (const auto* c = std::get_if<potential::CoulombPlusCentrifugal>(&p.potential.family()))
        return c->l == 0;
    return false;
}

double coulomb_g(const Problem& p) {
    if (const auto* c = std::get_if<potential::Coulomb>(&p.potential.family())) return c->g;
    return std::get<potential::CoulombPlusCentrifugal>(p.potential.family()).g;
}

SolutionSamples exponential_samples(const Eigen::VectorXd& x, const Eigen::Vector2cd& amp, double kappa) {
    const Eigen::Index n = x.size();
    Eigen::VectorXcd ps(n), ds(n);
    const double c = std::sqrt(2.0 * kappa);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cd a = x[i] >= 0.0 ? amp(0) : amp(1);
        const double e = c * std::exp(-kappa * std::abs(x[i]));
        ps[i] = a * e;
        ds[i] = a * e * (x[i] >= 0.0 ? -kappa : kappa);
    }
    return {Grid::from_nodes(x), std::move(ps), std::move(ds)};
}

std::vector<BoundState> closed_form_states(const Problem& p, EnergyWindow w) {
    std::vector<BoundState> out;
    if (p.domain.kind == Domain1D::Kind::half_line) {
        const auto E = free_halfline_level(robin_from_theta(p.bc.robin().theta, p.bc.L0));
        if (!E || *E < w.lo || *E > w.hi) return out;
        const double kappa = std::sqrt(-*E);
        const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(4001, 0.0, 40.0 / kappa);
        out.push_back({*E, 0, exponential_samples(x, Eigen::Vector2cd(1.0, 0.0), kappa), Backend::closed_form});
        return out;
    }
    // Line: one exponential per binding eigen-channel; amplitudes (plus, minus) from the
    // eigenvector.
    std::vector<std::pair<double, Eigen::Vector2cd>> levels;
    for (const auto& [th, v] : channels_of(p.bc.unitary())) {
        if (!binding(th)) continue;
        const double L = p.bc.L0 / std::tan(0.5 * th);
        levels.emplace_back(-1.0 / (L * L), v);
    }
    std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [E, v] : levels) {
        if (E < w.lo || E > w.hi) continue;
        const double kappa = std::sqrt(-E);
        const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(8001, -40.0 / kappa, 40.0 / kappa);
        // Phase: largest component real and positive.
        const cd ph = std::abs(v(0)) >= std::abs(v(1)) ? v(0) : v(1);
        const Eigen::Vector2cd a = v * std::conj(ph / std::abs(ph));
        const bool odd = (a(0) * std::conj(a(1))).real() < 0.0;
        out.push_back({E, odd ? 1 : 0, exponential_samples(x, a, kappa), Backend::closed_form});
    }
    return out;
}

}  // namespace

std::vector<BoundState> bound_states(const Problem& problem, EnergyWindow window, std::size_t max_states,
                                     Backend backend, const ShootingOptions& opt) {
    validate(problem);
    const bool free_ok = is_free(problem) && problem.domain.kind != Domain1D::Kind::interval;
    const bool coulomb_ok = is_coulomb_halfline(problem);
    if (backend == Backend::automatic)
        backend = free_ok ? Backend::closed_form : coulomb_ok ? Backend::digamma : Backend::shooting;

    std::vector<BoundState> out;
    switch (backend) {
        case Backend::closed_form:
            if (!free_ok) throw ConfigError("closed-form levels exist only for the free half line and line");
            check_window(window, true);
            out = closed_form_states(problem, window);
            break;
        case Backend::digamma: {
            if (!coulomb_ok) throw ConfigError("the digamma equation applies to the Coulomb half line (l = 0)");
            check_window(window, true);
            const double g = coulomb_g(problem);
            const ExtendedReal L = robin_from_theta(problem.bc.robin().theta, problem.bc.L0);
            // Levels ascend towards 0; generate until past the window.
            std::size_t n = 8;
            std::vector<double> E;
            for (;;) {
                E = coulomb_levels(g, L, n);
                if (E.empty() || E.back() > window.hi || n >= 100000) break;
                if (max_states > 0 && std::count_if(E.begin(), E.end(), [&](double e) { return e >= window.lo; }) >=
                                          static_cast<long>(max_states))
                    break;
                n *= 2;
            }
            for (double e : E) {
                if (e < window.lo || e > window.hi) continue;
                out.push_back(bound_state_at(problem, e, Backend::digamma, opt));
                if (max_states > 0 && out.size() >= max_states) break;
            }
            break;
        }
        case Backend::shooting:
        case Backend::automatic:
            return bound_states_shooting(problem, window, max_states, opt);
    }
    if (max_states > 0 && out.size() > max_states) out.resize(max_states);
    return out;
}

}  // namespace sax
