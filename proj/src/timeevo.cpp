#include "sax/timeevo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "sax/classify.hpp"
#include "sax/errors.hpp"
#include "sax/refmodes.hpp"

namespace sax {

namespace {

using cd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cd>;

struct SideLayout {
    Side side;
    int o = 1;
    double xe = 0.0;
    Verdict verdict = Verdict::regular;
    double s_first = 0.0;   // distance of the first node from the endpoint
    Eigen::Index count = 0;
    Eigen::Index begin = 0;  // first node (in ascending mesh order)
};

std::vector<Side> evolution_sides(const Problem& p) {
    switch (p.domain.kind) {
        case Domain1D::Kind::half_line: return {Side::lower};
        case Domain1D::Kind::line: return {Side::origin_minus, Side::origin_plus};
        case Domain1D::Kind::interval: break;
    }
    throw ConfigError("time evolution supports the half line and the line");
}

std::vector<SideLayout> layout(const Problem& p, const Discretization& d, Mesh* mesh) {
    if (!(d.h > 0.0) || !(d.extent > 4.0 * d.h)) throw ConfigError("discretization needs h > 0 and extent > 4 h");
    std::vector<SideLayout> sides;
    Eigen::Index total = 0;
    for (Side s : evolution_sides(p)) {
        SideLayout sl;
        sl.side = s;
        const EndpointGeometry g = endpoint_geometry(p.domain, s);
        sl.o = g.orientation;
        sl.xe = g.x;
        sl.verdict = classify_endpoint(p, s, p.E0).verdict;
        sl.s_first = sl.verdict == Verdict::regular ? 0.0 : d.h;
        sl.count = static_cast<Eigen::Index>(std::llround((d.extent - sl.s_first) / d.h));
        sl.begin = total;
        total += sl.count;
        sides.push_back(sl);
    }
    if (mesh) {
        mesh->x.resize(total);
        mesh->weight.resize(total);
        for (const SideLayout& sl : sides) {
            for (Eigen::Index i = 0; i < sl.count; ++i) {
                // i counts away from the endpoint; ascending order flips it on the minus side.
                const Eigen::Index k = sl.o > 0 ? sl.begin + i : sl.begin + sl.count - 1 - i;
                mesh->x[k] = sl.xe + sl.o * (sl.s_first + static_cast<double>(i) * d.h);
                const bool boundary = i == 0 && sl.verdict != Verdict::limit_point;
                mesh->weight[k] = boundary ? 0.5 * d.h : d.h;
            }
        }
        mesh->plus_begin = sides.back().begin;
    }
    return sides;
}

// A mesh value as a combination of reduced unknowns.
using Row = std::vector<std::pair<Eigen::Index, cd>>;

}  // namespace

Mesh make_mesh(const Problem& problem, const Discretization& d) {
    validate(problem);
    Mesh m;
    layout(problem, d, &m);
    return m;
}

struct Evolver::Impl {
    Mesh mesh;
    std::vector<Row> rows;      // mesh node -> reduced unknowns
    Eigen::Index n_reduced = 0;
    SpMat K, M;
    Eigen::SparseLU<SpMat> lu;
    SpMat rhs;
    double dt = 0.0;
    Eigen::VectorXcd z;

    Eigen::VectorXcd full() const {
        Eigen::VectorXcd u = Eigen::VectorXcd::Zero(mesh.x.size());
        for (Eigen::Index i = 0; i < u.size(); ++i)
            for (const auto& [m, c] : rows[static_cast<std::size_t>(i)]) u[i] += c * z[m];
        return u;
    }
    double norm_range(Eigen::Index a, Eigen::Index b) const {
        const Eigen::VectorXcd u = full();
        double s = 0.0;
        for (Eigen::Index i = a; i < b; ++i) s += mesh.weight[i] * std::norm(u[i]);
        return s;
    }
};

Evolver::Evolver(const Problem& problem, const Discretization& d) : impl_(std::make_unique<Impl>()) {
    validate(problem);
    Impl& im = *impl_;
    const std::vector<SideLayout> sides = layout(problem, d, &im.mesh);
    const Eigen::Index n = im.mesh.x.size();
    const double h = d.h;
    const double L0 = problem.bc.L0;

    // Boundary nodes of sides that carry a condition.
    std::vector<const SideLayout*> bsides;
    for (const SideLayout& sl : sides)
        if (sl.verdict != Verdict::limit_point) bsides.push_back(&sl);
    auto node_at = [](const SideLayout& sl, Eigen::Index i) {
        return sl.o > 0 ? sl.begin + i : sl.begin + sl.count - 1 - i;
    };
    std::vector<Eigen::Index> bnodes;
    for (const SideLayout* sl : bsides) bnodes.push_back(node_at(*sl, 0));

    // Condition (U - 1) G1 + i (U + 1) G2 = 0 with G linear in (psi, p psi') at the boundary nodes.
    const auto nb = static_cast<Eigen::Index>(bsides.size());
    Eigen::MatrixXcd Ur, Bq;
    if (nb > 0) {
        Eigen::MatrixXcd U(nb, nb);
        if (problem.domain.kind == Domain1D::Kind::half_line)
            U(0, 0) = std::polar(1.0, problem.bc.robin().theta);
        else
            U = problem.bc.unitary();
        Eigen::VectorXcd a(nb), b(nb), g(nb), dd(nb);
        for (Eigen::Index j = 0; j < nb; ++j) {
            const SideLayout& sl = *bsides[static_cast<std::size_t>(j)];
            const ReferenceModes modes = asymptotic_modes(problem, sl.side);
            const Eigen::Matrix2d phi = modes.evaluate(im.mesh.x[bnodes[static_cast<std::size_t>(j)]]);
            a[j] = -phi(0, 1);
            b[j] = phi(0, 0);
            g[j] = -sl.o * L0 * phi(1, 1);
            dd[j] = sl.o * L0 * phi(1, 0);
        }
        const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(nb, nb);
        const cd I(0.0, 1.0);
        Eigen::MatrixXcd C(nb, 2 * nb);
        C.leftCols(nb) = (U - Id) * a.asDiagonal() + I * (U + Id) * g.asDiagonal();
        C.rightCols(nb) = (U - Id) * b.asDiagonal() + I * (U + Id) * dd.asDiagonal();
        Eigen::JacobiSVD<Eigen::MatrixXcd> csvd(C, Eigen::ComputeFullV);
        const Eigen::MatrixXcd N = csvd.matrixV().rightCols(nb);
        const Eigen::MatrixXcd Npsi = N.topRows(nb), Nd = N.bottomRows(nb);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Npsi, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::VectorXd sv = svd.singularValues();
        Eigen::Index r = 0;
        while (r < nb && sv[r] > 1e-12 * std::max(1.0, sv[0])) ++r;
        Ur = svd.matrixU().leftCols(r);
        Eigen::VectorXcd o(nb);
        for (Eigen::Index j = 0; j < nb; ++j) o[j] = static_cast<double>(bsides[static_cast<std::size_t>(j)]->o);
        // boundary term sum_j o_j conj(psi_j) (p psi')_j on psi = Ur q
        Bq = Ur.adjoint() * o.asDiagonal() * Nd * svd.matrixV().leftCols(r) *
             sv.head(r).cwiseInverse().cast<cd>().asDiagonal();
        const double skew = (Bq - Bq.adjoint()).norm();
        if (skew > 1e-8 * (1.0 + Bq.norm())) throw NumericalError("boundary condition is not symmetric on the mesh");
        Bq = 0.5 * (Bq + Bq.adjoint());
    }

    // Reduced unknowns: interior nodes first, then the r boundary amplitudes.
    im.rows.assign(static_cast<std::size_t>(n), {});
    Eigen::Index next = 0;
    std::vector<bool> is_boundary(static_cast<std::size_t>(n), false);
    for (Eigen::Index bn : bnodes) is_boundary[static_cast<std::size_t>(bn)] = true;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!is_boundary[static_cast<std::size_t>(i)]) im.rows[static_cast<std::size_t>(i)].push_back({next++, 1.0});
    const Eigen::Index q0 = next;
    for (std::size_t j = 0; j < bnodes.size(); ++j)
        for (Eigen::Index m = 0; m < Ur.cols(); ++m)
            if (Ur(static_cast<Eigen::Index>(j), m) != 0.0)
                im.rows[static_cast<std::size_t>(bnodes[j])].push_back({q0 + m, Ur(static_cast<Eigen::Index>(j), m)});
    im.n_reduced = q0 + Ur.cols();

    std::map<std::pair<Eigen::Index, Eigen::Index>, cd> k, mm;
    auto add_form = [](std::map<std::pair<Eigen::Index, Eigen::Index>, cd>& target, const Row& row, double w) {
        for (const auto& [a, ca] : row)
            for (const auto& [b, cb] : row) target[{a, b}] += w * std::conj(ca) * cb;
    };
    auto diff = [](Row a, const Row& b) {
        for (const auto& [m, c] : b) a.push_back({m, -c});
        return a;
    };
    for (const SideLayout& sl : sides) {
        for (Eigen::Index i = 0; i < sl.count; ++i) {
            const Eigen::Index node = node_at(sl, i);
            const Row& row = im.rows[static_cast<std::size_t>(node)];
            const double x = im.mesh.x[node];
            add_form(mm, row, im.mesh.weight[node]);
            add_form(k, row, im.mesh.weight[node] * problem.potential(x));
            if (i + 1 < sl.count) {
                const Eigen::Index nxt = node_at(sl, i + 1);
                const double xm = 0.5 * (x + im.mesh.x[nxt]);
                add_form(k, diff(row, im.rows[static_cast<std::size_t>(nxt)]), problem.weight(xm) / h);
            } else {
                add_form(k, row, problem.weight(x + sl.o * 0.5 * h) / h);  // psi = 0 one step further out
            }
            if (i == 0 && sl.verdict == Verdict::limit_point)
                add_form(k, row, problem.weight(x - sl.o * 0.5 * h) / h);  // psi = 0 at the endpoint
        }
    }
    for (Eigen::Index a = 0; a < Bq.rows(); ++a)
        for (Eigen::Index b = 0; b < Bq.cols(); ++b) k[{q0 + a, q0 + b}] += Bq(a, b);

    auto to_sparse = [&](const std::map<std::pair<Eigen::Index, Eigen::Index>, cd>& entries) {
        std::vector<Eigen::Triplet<cd>> t;
        t.reserve(entries.size());
        for (const auto& [ij, v] : entries) t.emplace_back(ij.first, ij.second, v);
        SpMat s(im.n_reduced, im.n_reduced);
        s.setFromTriplets(t.begin(), t.end());
        return s;
    };
    im.K = to_sparse(k);
    im.M = to_sparse(mm);
    im.z = Eigen::VectorXcd::Zero(im.n_reduced);
}

Evolver::~Evolver() = default;
Evolver::Evolver(Evolver&&) noexcept = default;
Evolver& Evolver::operator=(Evolver&&) noexcept = default;

const Mesh& Evolver::mesh() const { return impl_->mesh; }

void Evolver::set_dt(double dt) {
    if (!(dt != 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be finite and nonzero");
    Impl& im = *impl_;
    const cd half(0.0, 0.5 * dt);
    SpMat A = im.M + half * im.K;
    im.rhs = im.M - half * im.K;
    A.makeCompressed();
    im.lu.compute(A);
    if (im.lu.info() != Eigen::Success) throw NumericalError("Crank-Nicolson factorization failed");
    im.dt = dt;
}

double Evolver::dt() const { return impl_->dt; }

void Evolver::load(const Eigen::VectorXcd& psi) {
    Impl& im = *impl_;
    if (psi.size() != im.mesh.x.size()) throw ConfigError("state does not match the mesh");
    // Least-squares coefficients in the M inner product (exact for interior nodes).
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(im.n_reduced);
    for (Eigen::Index i = 0; i < psi.size(); ++i)
        for (const auto& [m, c] : im.rows[static_cast<std::size_t>(i)]) b[m] += im.mesh.weight[i] * std::conj(c) * psi[i];
    Eigen::SimplicialLDLT<SpMat> ldlt(im.M);
    im.z = ldlt.solve(b);
}

void Evolver::step(long n) {
    Impl& im = *impl_;
    if (im.dt == 0.0) throw ConfigError("set_dt before stepping");
    for (long i = 0; i < n; ++i) {
        const Eigen::VectorXcd b = im.rhs * im.z;
        im.z = im.lu.solve(b);
    }
}

Eigen::VectorXcd Evolver::state() const { return impl_->full(); }

double Evolver::norm() const { return impl_->z.dot(impl_->M * impl_->z).real(); }

double Evolver::norm_minus() const { return impl_->norm_range(0, impl_->mesh.plus_begin); }

double Evolver::norm_plus() const { return impl_->norm_range(impl_->mesh.plus_begin, impl_->mesh.x.size()); }

double Evolver::energy() const {
    const Impl& im = *impl_;
    return im.z.dot(im.K * im.z).real() / norm();
}

WavePacket gaussian_packet(const Problem& problem, const Discretization& d, double x0, double sigma, double k0) {
    if (!(sigma > 0.0)) throw ConfigError("packet width must be positive");
    WavePacket p;
    p.x0 = x0;
    p.sigma = sigma;
    p.k0 = k0;
    p.mesh = make_mesh(problem, d);
    const Eigen::Index n = p.mesh.x.size();
    p.psi.resize(n);
    const double c = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = p.mesh.x[i];
        p.psi[i] = c * std::exp(cd(-(x - x0) * (x - x0) / (4.0 * sigma * sigma), k0 * x));
    }
    const double nrm = std::sqrt((p.mesh.weight.array() * p.psi.array().abs2()).sum());
    if (!(nrm > 0.0)) throw ConfigError("packet lies outside the mesh");
    p.psi /= nrm;
    return p;
}

namespace {

void check_resolution(double dt, double k0, double sigma, double h) {
    if (std::abs(dt) * k0 * k0 > 0.1) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "time step too large: dt k0^2 = %.3g > 0.1 (use dt <= %.6g)",
                      std::abs(dt) * k0 * k0, 0.1 / (k0 * k0));
        throw ConfigError(buf);
    }
    if (h * std::abs(k0) > 0.5 || h > 0.25 * sigma) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "mesh too coarse for the packet (use h <= %.6g)",
                      std::min(0.25 * sigma, k0 != 0.0 ? 0.5 / std::abs(k0) : INFINITY));
        throw ConfigError(buf);
    }
}

Snapshot capture(const Evolver& ev, double t) {
    Snapshot s;
    s.t = t;
    s.psi = ev.state();
    s.norm = ev.norm();
    s.norm_minus = ev.norm_minus();
    s.norm_plus = ev.norm_plus();
    s.energy = ev.energy();
    return s;
}

}  // namespace

Trajectory evolve(const WavePacket& packet, const Problem& problem, const Discretization& d, double dt, double T,
                  const EvolveOptions& opt) {
    if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("evolution time must be finite and non-negative");
    check_resolution(dt, packet.k0, packet.sigma, d.h);
    Evolver ev(problem, d);
    if (ev.mesh().x.size() != packet.mesh.x.size()) throw ConfigError("packet was built on a different mesh");
    ev.set_dt(dt);
    ev.load(packet.psi);

    const long steps = std::lround(T / std::abs(dt));
    std::vector<long> marks;
    for (double t : opt.snapshot_times) marks.push_back(std::lround(t / std::abs(dt)));
    std::sort(marks.begin(), marks.end());

    Trajectory tr;
    tr.mesh = ev.mesh();
    tr.steps = steps;
    tr.frames.push_back(capture(ev, 0.0));
    double last = ev.norm();
    auto mi = marks.begin();
    for (long s = 1; s <= steps; ++s) {
        ev.step();
        const double nrm = ev.norm();
        tr.max_step_drift = std::max(tr.max_step_drift, std::abs(nrm - last));
        last = nrm;
        bool want = s == steps || (opt.snapshot_every > 0 && s % opt.snapshot_every == 0);
        while (mi != marks.end() && *mi <= s) {
            want = want || *mi == s;
            ++mi;
        }
        if (want) tr.frames.push_back(capture(ev, static_cast<double>(s) * dt));
    }
    return tr;
}

namespace {

// Peak of |psi|^2 by a parabola through the largest node and its neighbours.
double peak_position(const Mesh& mesh, const Eigen::VectorXcd& psi, double sigma) {
    const Eigen::VectorXd f = psi.array().abs2();
    Eigen::Index i = 0;
    f.maxCoeff(&i);
    if (i == 0 || i + 1 >= f.size()) throw NumericalError("packet peak reached the edge of the mesh");
    const double fmax = f[i];
    for (Eigen::Index j = 1; j + 1 < f.size(); ++j) {
        if (f[j] >= f[j - 1] && f[j] >= f[j + 1] && f[j] > 0.5 * fmax && std::abs(mesh.x[j] - mesh.x[i]) > 2.0 * sigma)
            throw NumericalError("packet peak is ambiguous (several comparable maxima)");
    }
    const double h = mesh.x[i + 1] - mesh.x[i];
    const double den = f[i - 1] - 2.0 * f[i] + f[i + 1];
    const double shift = den != 0.0 ? 0.5 * (f[i - 1] - f[i + 1]) / den : 0.0;
    return mesh.x[i] + shift * h;
}

std::pair<double, double> fit_line(const std::vector<std::pair<double, double>>& pts) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), 2);
    Eigen::VectorXd y(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = pts[static_cast<std::size_t>(i)].first;
        y[i] = pts[static_cast<std::size_t>(i)].second;
    }
    const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
    return {c[0], c[1]};
}

}  // namespace

DelayMeasurement measure_time_delay(const Problem& problem, ExtendedReal L, const DelayOptions& opt) {
    if (problem.domain.kind != Domain1D::Kind::half_line) throw ConfigError("time delay needs a half line");
    if (!(opt.k0 < 0.0)) throw ConfigError("the packet must move toward the wall (k0 < 0)");
    const double k = -opt.k0, sigma = opt.sigma;
    if (sigma * k < 5.0) throw ConfigError("broad packet required: sigma |k0| >= 5");
    const double x0 = opt.x0 > 0.0 ? opt.x0 : 8.0 * sigma;
    if (x0 < 6.0 * sigma) throw ConfigError("the packet must start at least 6 sigma from the wall");

    Problem p = problem;
    p.bc = BoundaryCondition::robin(L, problem.bc.L0);
    validate(p);
    Discretization d;
    d.h = opt.h > 0.0 ? opt.h : std::min(0.05 / k, sigma / 20.0);
    d.extent = x0 + 10.0 * sigma;
    const double dt = opt.dt > 0.0 ? opt.dt : 0.02 / (k * k);
    check_resolution(dt, opt.k0, sigma, d.h);

    const double v = 2.0 * k;
    const double T = 2.0 * x0 / v;
    const double t_in = (x0 - 4.0 * sigma) / v, t_out = (x0 + 4.0 * sigma) / v;
    const long steps = std::lround(T / dt);
    const long every = std::max<long>(1, steps / 200);

    Evolver ev(p, d);
    ev.set_dt(dt);
    ev.load(gaussian_packet(p, d, x0, sigma, opt.k0).psi);
    DelayMeasurement out;
    for (long s = 0; s <= steps; s += every) {
        const double t = static_cast<double>(s) * dt;
        if (t <= t_in) out.incoming.emplace_back(t, peak_position(ev.mesh(), ev.state(), sigma));
        if (t >= t_out) out.outgoing.emplace_back(t, peak_position(ev.mesh(), ev.state(), sigma));
        ev.step(every);
    }
    if (out.incoming.size() < 5 || out.outgoing.size() < 5) throw NumericalError("too few peak samples for a delay fit");
    const auto [a_in, b_in] = fit_line(out.incoming);
    const auto [a_out, b_out] = fit_line(out.outgoing);
    out.v_in = -b_in;
    out.v_out = b_out;
    const double vbar = 0.5 * (out.v_in + out.v_out);
    // outbound x = -(inbound x)(t - tau)
    out.tau = -(a_out + a_in) / vbar;
    return out;
}

}  // namespace sax
