#include "sax/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "channels.hpp"
#include "sax/errors.hpp"

namespace sax {

namespace {

using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

// The potential beyond some distance from the origin is c / s^2 exactly (c = 0 for finite
// range), so the waves there are Riccati-Hankel functions.
struct Tail {
    double c = 0.0;
    double onset = 0.0;  // |x| beyond which the tail form holds
};

Tail tail_of(const PotentialSpec& v) {
    struct Visitor {
        Tail operator()(const potential::Free&) const { return {}; }
        Tail operator()(const potential::InverseSquare& p) const { return {p.c, 0.0}; }
        Tail operator()(const potential::Coulomb& p) const {
            if (p.g != 0.0) throw ConfigError("Coulomb tails are long range; no phase shift is defined");
            return {};
        }
        Tail operator()(const potential::CoulombPlusCentrifugal& p) const {
            if (p.g != 0.0) throw ConfigError("Coulomb tails are long range; no phase shift is defined");
            return {static_cast<double>(p.l) * (p.l + 1), 0.0};
        }
        Tail operator()(const potential::PowerLaw& p) const {
            if (p.a == 0.0) return {};
            if (p.s == -2.0) return {p.a, 0.0};
            throw ConfigError("scattering needs a finite-range or inverse-square tail");
        }
        Tail operator()(const potential::Tabulated& t) const {
            if (t.x.empty()) return {};
            return {0.0, std::max(std::abs(t.x.front()), std::abs(t.x.back()))};
        }
    };
    return std::visit(Visitor{}, v.family());
}

// e^{sigma i k s} sum_n b_n s^-n and its s-derivative, truncated at the smallest term.
Eigen::Vector2cd hankel_wave(double c, double k, double s, int sigma) {
    const cd iks(0.0, sigma * k);
    cd sum = 0.0, dsum = 0.0, b = 1.0;
    double last = INFINITY;
    for (int n = 0; n < 200; ++n) {
        const cd term = b * std::pow(s, -n);
        const double mag = std::abs(term);
        if (mag > last) break;
        sum += term;
        dsum += -static_cast<double>(n) * term / s;
        if (mag < 1e-18 * std::abs(sum)) break;
        last = mag;
        // 2 i sigma k (n + 1) b_{n+1} = -(c - n (n + 1)) b_n
        b *= -(c - n * (n + 1.0)) / (2.0 * iks * (n + 1.0));
    }
    const cd e = std::exp(iks * s);
    return {e * sum, e * (dsum + iks * sum)};
}

// Boundary values (gamma1, gamma2) on one side of the incoming and outgoing waves at energy k^2.
struct WaveData {
    cd in1, in2, out1, out2;
};

class Channel {
public:
    Channel(const Problem& p, Side side) : basis_(p, side), L0_(p.bc.L0), tail_(tail_of(p.potential)) {}

    bool limit_point() const { return basis_.limit_point(); }

    double radius(double k) const {
        const double s_tail = tail_.c == 0.0 ? 1.0 : (40.0 + 4.0 * std::sqrt(std::abs(tail_.c))) / k;
        return std::max({s_tail, tail_.onset, 2.0 * basis_.start(k * k)});
    }

    WaveData at(double k, double s) const {
        const int o = basis_.orientation();
        const double x = basis_.endpoint() + o * s;
        const Eigen::Matrix2d chi = basis_.at(k * k, x);
        auto gammas = [&](const Eigen::Vector2cd& w_s) {
            // back to x: p psi' = o d/ds
            const cd v = w_s(0), d = static_cast<double>(o) * w_s(1);
            const cd c2 = chi(0, 0) * d - chi(0, 1) * v;
            const cd c1 = -(chi(1, 0) * d - chi(1, 1) * v);
            return std::pair<cd, cd>{c2, -o * L0_ * c1};
        };
        const auto [i1, i2] = gammas(hankel_wave(tail_.c, k, s, -1));
        const auto [o1, o2] = gammas(hankel_wave(tail_.c, k, s, +1));
        return {i1, i2, o1, o2};
    }

private:
    detail::SideBasis basis_;
    double L0_;
    Tail tail_;
};

void check_k(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("wavenumber must be positive");
}

void require_unit_weight(const Problem& p) {
    if (!p.weight.is_unit()) throw ConfigError("scattering supports p(x) = 1 only");
}

// out = -(A O1 + B O2)^-1 (A I1 + B I2) in, with A = U - 1 and B = i (U + 1).
Eigen::MatrixXcd outgoing_map(const Eigen::MatrixXcd& U, const std::vector<WaveData>& w) {
    const auto n = static_cast<Eigen::Index>(w.size());
    Eigen::MatrixXcd I1 = Eigen::MatrixXcd::Zero(n, n), I2 = I1, O1 = I1, O2 = I1;
    for (Eigen::Index j = 0; j < n; ++j) {
        const WaveData& d = w[static_cast<std::size_t>(j)];
        I1(j, j) = d.in1;
        I2(j, j) = d.in2;
        O1(j, j) = d.out1;
        O2(j, j) = d.out2;
    }
    const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd A = U - Id, B = cd(0.0, 1.0) * (U + Id);
    const Eigen::MatrixXcd lhs = A * O1 + B * O2;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(lhs);
    if (!lu.isInvertible()) throw NumericalError("scattering condition is singular");
    return -lu.solve(A * I1 + B * I2);
}

Problem with_robin(const Problem& p, ExtendedReal L) {
    if (p.domain.kind != Domain1D::Kind::half_line) throw ConfigError("expected a half-line problem");
    Problem q = p;
    q.bc = BoundaryCondition::robin(L, p.bc.L0);
    return q;
}

cd halfline_s(const Problem& p, double k, double* error) {
    validate(p);
    check_k(k);
    require_unit_weight(p);
    if (p.domain.kind != Domain1D::Kind::half_line) throw ConfigError("expected a half-line problem");
    const Channel ch(p, Side::lower);
    const Eigen::MatrixXcd U = Eigen::MatrixXcd::Constant(
        1, 1, ch.limit_point() ? cd(-1.0) : std::polar(1.0, p.bc.robin().theta));
    const double s = ch.radius(k);
    // psi = e^{-iks} - S e^{iks}, so S = -out/in.
    const cd S1 = -outgoing_map(U, {ch.at(k, s)})(0, 0);
    if (error) {
        const cd S2 = -outgoing_map(U, {ch.at(k, 1.5 * s)})(0, 0);
        *error = std::abs(S1 - S2);
    }
    return S1 / std::abs(S1);
}

Eigen::Matrix2cd line_s(const Problem& p, const Eigen::Matrix2cd& U, double k, double* error) {
    validate(p);
    check_k(k);
    require_unit_weight(p);
    if (p.domain.kind != Domain1D::Kind::line) throw ConfigError("expected a line problem");
    if (!is_unitary(U)) throw ConfigError("U is not unitary");
    const Channel plus(p, Side::origin_plus), minus(p, Side::origin_minus);
    const Eigen::MatrixXcd Ueff = plus.limit_point() ? Eigen::MatrixXcd(-Eigen::Matrix2cd::Identity())
                                                     : Eigen::MatrixXcd(U);
    const double s = std::max(plus.radius(k), minus.radius(k));
    // (plus, minus) order internally; (left, right) = (minus, plus) outside.
    auto reorder = [](const Eigen::MatrixXcd& m) {
        Eigen::Matrix2cd r;
        r << m(1, 1), m(1, 0), m(0, 1), m(0, 0);
        return r;
    };
    const Eigen::Matrix2cd S1 = reorder(outgoing_map(Ueff, {plus.at(k, s), minus.at(k, s)}));
    if (error) {
        const Eigen::Matrix2cd S2 = reorder(outgoing_map(Ueff, {plus.at(k, 1.5 * s), minus.at(k, 1.5 * s)}));
        *error = (S1 - S2).norm();
    }
    return S1;
}

double delta_of(cd S) {
    double d = 0.5 * std::arg(S);
    if (d <= -0.5 * pi) d += pi;
    return d;
}

double group_delay(const std::function<cd(double)>& S, double k) {
    if (!(k >= wigner_k_min)) throw ConfigError("time delay is ill-conditioned for k below 1e-3");
    const double h = 1e-3 * k;
    // d delta/dk from the phase of S(k + h) / S(k - h); 2 (d delta/dk) / (dE/dk) with E = k^2.
    const double ddelta = 0.5 * std::arg(S(k + h) / S(k - h)) / (2.0 * h);
    return ddelta / k;
}

}  // namespace

double free_phase_shift(ExtendedReal L, double k) {
    check_k(k);
    if (L.is_infinite()) return 0.5 * pi;
    return -std::atan(k * L.value());
}

double free_time_delay(ExtendedReal L, double k) {
    check_k(k);
    if (L.is_infinite()) return 0.0;
    const double l = L.value();
    return -l / (k * (1.0 + k * k * l * l));
}

cd reflection_halfline(const Problem& problem, double k, double* error) {
    return halfline_s(problem, k, error);
}

double phase_shift_halfline(const Problem& problem, double k) {
    return delta_of(halfline_s(problem, k, nullptr));
}

double phase_shift_halfline(const Problem& problem, ExtendedReal L, double k) {
    return phase_shift_halfline(with_robin(problem, L), k);
}

double wigner_time_delay(const Problem& problem, double k) {
    return group_delay([&](double q) { return halfline_s(problem, q, nullptr); }, k);
}

double wigner_time_delay(const Problem& problem, ExtendedReal L, double k) {
    return wigner_time_delay(with_robin(problem, L), k);
}

Eigen::Matrix2cd smatrix_line(const Problem& problem, double k, double* error) {
    if (problem.bc.is_robin()) throw ConfigError("line problems carry a U(2) condition");
    return line_s(problem, problem.bc.unitary(), k, error);
}

Eigen::Matrix2cd smatrix_line(const Problem& problem, const Eigen::Matrix2cd& U, double k, double* error) {
    return line_s(problem, U, k, error);
}

ScatteringPoint scattering_point(const Problem& problem, double k) {
    ScatteringPoint pt;
    pt.k = k;
    if (problem.domain.kind == Domain1D::Kind::half_line) {
        const cd S = halfline_s(problem, k, &pt.error);
        pt.delta = delta_of(S);
        pt.S(0, 0) = S;
        if (k >= wigner_k_min) pt.tau = wigner_time_delay(problem, k);
    } else if (problem.domain.kind == Domain1D::Kind::line) {
        pt.S = smatrix_line(problem, k, &pt.error);
        pt.transmission = std::norm(pt.S(1, 0));
    } else {
        throw ConfigError("scattering needs a half line or a line");
    }
    return pt;
}

const char* to_string(FilterKind f) {
    switch (f) {
        case FilterKind::low_pass: return "low-pass";
        case FilterKind::high_pass: return "high-pass";
        case FilterKind::neither: return "neither";
    }
    return "?";
}

FilterCurve filter_curve(const Problem& problem, const Eigen::Matrix2cd& U, const std::vector<double>& k_grid) {
    if (k_grid.size() < 2) throw ConfigError("filter curve needs at least two wavenumbers");
    if (!std::is_sorted(k_grid.begin(), k_grid.end())) throw ConfigError("k grid must be ascending");
    FilterCurve fc;
    fc.k = k_grid;
    for (double k : k_grid) fc.transmission.push_back(std::norm(line_s(problem, U, k, nullptr)(1, 0)));
    const std::size_t half = k_grid.size() / 2;
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < half; ++i) lo += fc.transmission[i];
    for (std::size_t i = k_grid.size() - half; i < k_grid.size(); ++i) hi += fc.transmission[i];
    lo /= static_cast<double>(half);
    hi /= static_cast<double>(half);
    if (lo - hi > 0.1)
        fc.kind = FilterKind::low_pass;
    else if (hi - lo > 0.1)
        fc.kind = FilterKind::high_pass;
    return fc;
}

}  // namespace sax
