#include "heads.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "sax/errors.hpp"

namespace sax::detail {

namespace {

constexpr int max_terms = 400;

using cplx = std::complex<double>;

// Sum of s^r * sum_n coef[n] s^n and of its s-derivative.
struct SeriesValue {
    cplx f, df;
};

SeriesValue sum_series(const std::vector<cplx>& coef, cplx r, double s) {
    cplx f = 0.0, df = 0.0, sn = 1.0;
    for (std::size_t n = 0; n < coef.size(); ++n) {
        const cplx t = coef[n] * sn;
        f += t;
        df += (static_cast<double>(n) + r) * t;
        sn *= s;
    }
    const cplx pr = std::exp(r * std::log(s));
    return {pr * f, pr * df / s};
}

// Coefficients of s^r sum a_n s^n solving u'' = (c/s^2 + g/s - E) u, with
// r(r-1) = c and (r+n)(r+n-1) - c = n(n + 2r - 1).
std::vector<cplx> frobenius_coefficients(cplx r, double g, double E, double s) {
    std::vector<cplx> a{1.0};
    const cplx N = 2.0 * r - 1.0;
    double sn = 1.0;
    int small = 0;
    for (int n = 1; n < max_terms; ++n) {
        const cplx prev2 = n >= 2 ? a[static_cast<std::size_t>(n - 2)] : cplx(0.0);
        const cplx an = (g * a[static_cast<std::size_t>(n - 1)] - E * prev2) / (double(n) * (double(n) + N));
        a.push_back(an);
        sn *= s;
        small = std::abs(an) * sn < 1e-18 ? small + 1 : 0;
        if (n > 4 && small >= 2) break;
    }
    return a;
}

}  // namespace

Heads Heads::regular(double weight_at_endpoint) {
    Heads h;
    h.kind_ = Kind::regular;
    h.k_ = weight_at_endpoint;
    return h;
}

Heads Heads::frobenius(double c, double g, double weight_coefficient) {
    Heads h;
    h.kind_ = Kind::frobenius;
    h.k_ = weight_coefficient;
    h.c_ = c / weight_coefficient;
    h.g_ = g / weight_coefficient;
    const double disc = 1.0 + 4.0 * h.c_;
    if (disc < 0.0) {
        h.complex_ = true;
        h.rp_ = cplx(0.5, 0.5 * std::sqrt(-disc));
        h.rm_ = std::conj(h.rp_);
        return h;
    }
    const double N = std::sqrt(disc);
    h.rp_ = 0.5 * (1.0 + N);
    h.rm_ = 0.5 * (1.0 - N);
    const double Nr = std::round(N);
    if (std::abs(N - Nr) < 1e-12) h.resonance_ = static_cast<int>(Nr);
    h.regular_sign_ = h.c_ == 0.0;
    h.w0_ = h.resonance_ == 0 ? weight_coefficient : -weight_coefficient * N;
    return h;
}

Heads Heads::euler(double alpha, double k, double a) {
    Heads h;
    h.kind_ = Kind::euler;
    h.alpha_ = alpha;
    h.k_ = k;
    const double b = alpha - 1.0;
    const double disc = b * b + 4.0 * a / k;
    if (disc <= 0.0) throw NumericalError("Euler endpoint with complex or double exponents is not supported");
    h.rp_ = 0.5 * (-b + std::sqrt(disc));
    h.rm_ = 0.5 * (-b - std::sqrt(disc));
    return h;
}

double Heads::range(double E) const {
    switch (kind_) {
    case Kind::regular: return 0.0;
    case Kind::euler: return E == 0.0 ? std::numeric_limits<double>::infinity() : 1e-3;
    case Kind::frobenius: {
        const double e = std::abs(E) / k_;
        return 0.5 / std::max({1.0, std::abs(g_), std::sqrt(e)});
    }
    }
    return 0.0;
}

double Heads::start(double E) const {
    switch (kind_) {
    case Kind::regular: return 0.0;
    case Kind::euler: return singular_start;
    case Kind::frobenius:
        if (!complex_ && c_ == 0.0 && g_ == 0.0) return 0.0;
        return range(E);
    }
    return 0.0;
}

Eigen::Matrix2d Heads::eval(double s, double E) const {
    Eigen::Matrix2d m;
    if (kind_ == Kind::regular) {
        if (s != 0.0) throw NumericalError("regular-endpoint heads are only defined at the endpoint");
        m << 0.0, -1.0, 1.0, 0.0;
        return m;
    }
    if (kind_ == Kind::euler) {
        const double r1 = rp_.real(), r2 = rm_.real();
        const double f1 = std::pow(s, r1), f2 = std::pow(s, r2) / (k_ * (r2 - r1));
        const double pa = k_ * std::pow(s, alpha_);
        m << f1, pa * r1 * f1 / s, f2, pa * r2 * f2 / s;
        return m;
    }

    if (s == 0.0) {
        if (complex_ || c_ != 0.0 || g_ != 0.0)
            throw NumericalError("singular-endpoint heads cannot be evaluated at the endpoint");
        m << 0.0, -k_, 1.0 / k_, 0.0;
        return m;
    }
    const double Ek = E / k_;
    if (complex_) {
        const std::vector<cplx> a = frobenius_coefficients(rp_, g_, Ek, s);
        const SeriesValue F = sum_series(a, rp_, s);
        const double norm = 1.0 / std::sqrt(k_ * rp_.imag());
        m << norm * F.f.real(), k_ * norm * F.df.real(), norm * F.f.imag(), k_ * norm * F.df.imag();
        return m;
    }

    const std::vector<cplx> a = frobenius_coefficients(rp_, g_, Ek, s);
    const SeriesValue u1 = sum_series(a, rp_, s);
    if (!has_second_) {
        // Only f1 is meaningful; the zero row keeps linear maps of the pair finite.
        m << u1.f.real(), k_ * u1.df.real(), 0.0, 0.0;
        return m;
    }

    const int N = resonance_;
    std::vector<cplx> b;
    b.reserve(a.size() + 4);
    double C = 0.0;
    if (N == 0) {
        C = 1.0;
        b.push_back(0.0);
    } else {
        b.push_back(1.0);
    }
    auto at = [](const std::vector<cplx>& v, int i) { return i < 0 ? cplx(0.0) : v[static_cast<std::size_t>(i)]; };
    const int nb = static_cast<int>(a.size()) + std::max(N, 0) + 2;
    const double rp = rp_.real();
    const double gap = 2.0 * rp - 1.0;
    for (int m_ = 1; m_ < nb; ++m_) {
        cplx bm;
        if (m_ == N) {
            C = ((g_ * at(b, N - 1) - Ek * at(b, N - 2)) / (2.0 * rp - 1.0)).real();
            bm = (regular_sign_ && g_ != 0.0) ? cplx(g_ * std::log(std::abs(g_))) : cplx(0.0);
        } else {
            const int j = N >= 0 ? m_ - N : -1;
            const cplx am = (j >= 0 && j < static_cast<int>(a.size())) ? a[static_cast<std::size_t>(j)] : cplx(0.0);
            const double D = double(m_) * (double(m_) - gap);
            bm = (g_ * at(b, m_ - 1) - Ek * at(b, m_ - 2) - C * am * (2.0 * (j + rp) - 1.0)) / D;
        }
        b.push_back(bm);
    }
    const SeriesValue v = sum_series(b, rm_, s);
    const double ls = std::log(s);
    const double u2 = v.f.real() + C * u1.f.real() * ls;
    const double du2 = v.df.real() + C * (u1.df.real() * ls + u1.f.real() / s);
    if (regular_sign_) {
        m << -u1.f.real(), -k_ * u1.df.real(), u2 / k_, du2;
    } else {
        m << u1.f.real(), k_ * u1.df.real(), u2 / w0_, k_ * du2 / w0_;
    }
    return m;
}

std::optional<Heads> heads_for(const Problem& p, const EndpointGeometry& g,
                               const EndpointClassification& cls) {
    if (!g.finite) return std::nullopt;
    std::optional<Heads> h;
    const auto& fam = p.potential.family();
    const KineticWeight& w = p.weight;
    if (const auto* t = std::get_if<potential::Tabulated>(&fam)) {
        if (g.x >= t->x.front() || !t->lower_exponents) {
            h = Heads::regular(w(g.x));
        } else if (w.power == 0.0) {
            const double r = (*t->lower_exponents)[0];
            h = Heads::frobenius(r * (r - 1.0), 0.0, w.coefficient);
        }
    } else if (g.x != 0.0) {
        h = Heads::regular(w(g.x));
    } else if (w.power == 0.0) {
        const auto* pl = std::get_if<potential::PowerLaw>(&fam);
        if (pl && (pl->s >= 0.0 || pl->a == 0.0)) {
            h = Heads::regular(w.coefficient);
        } else if (auto sing = p.potential.origin_singularity()) {
            h = Heads::frobenius(sing->c, sing->g, w.coefficient);
        }
    } else {
        if (std::holds_alternative<potential::Free>(fam)) {
            h = Heads::euler(w.power, w.coefficient, 0.0);
        } else if (const auto* pl = std::get_if<potential::PowerLaw>(&fam)) {
            if (pl->s == w.power - 2.0) h = Heads::euler(w.power, w.coefficient, pl->a);
        }
    }
    if (h) h->set_has_second(cls.verdict != Verdict::limit_point);
    return h;
}

}  // namespace sax::detail
