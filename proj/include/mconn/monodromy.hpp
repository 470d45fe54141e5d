#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bundle.hpp"
#include "connection.hpp"
#include "wronskian.hpp"

namespace mconn {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Double-precision evaluator for the connection matrix.
class NumericMatrix {
public:
    explicit NumericMatrix(const Connection& conn) : n_(conn.rank())
    {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                entries_.push_back({conn.entry(i, j).num().to_complex(), conn.entry(i, j).den().to_complex()});
            }
        for (const auto& c : conn.singular_points()) poles_.push_back(c.to_complex());
    }

    std::size_t rank() const { return n_; }
    const std::vector<cplx>& poles() const { return poles_; }

    CMat eval(cplx t) const
    {
        CMat m(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                const auto& e = entries_[i * n_ + j];
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = horner(e.num, t) / horner(e.den, t);
            }
        return m;
    }

    double distance_to_poles(cplx t) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& p : poles_) d = std::min(d, std::abs(t - p));
        return d;
    }

private:
    struct Entry {
        std::vector<cplx> num, den;
    };
    static cplx horner(const std::vector<cplx>& c, cplx t)
    {
        if (c.empty()) return 0.0;
        cplx acc = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
        return acc;
    }

    std::size_t n_;
    std::vector<Entry> entries_;
    std::vector<cplx> poles_;
};

/// Straight segment or circular arc, parametrised by arc length.
struct PathPiece {
    enum class Kind { Line, Arc } kind = Kind::Line;
    cplx from, to;           // line endpoints
    cplx centre;             // arc data
    double radius = 0, theta0 = 0, sweep = 0;  // sweep > 0 is counterclockwise

    static PathPiece line(cplx a, cplx b) { return {Kind::Line, a, b, 0, 0, 0, 0}; }
    static PathPiece arc(cplx centre, double radius, double theta0, double sweep)
    {
        return {Kind::Arc, 0, 0, centre, radius, theta0, sweep};
    }

    double length() const { return kind == Kind::Line ? std::abs(to - from) : radius * std::abs(sweep); }

    cplx point(double u) const
    {
        if (kind == Kind::Line) {
            double l = length();
            return l == 0 ? from : from + (to - from) * (u / l);
        }
        double th = theta0 + std::copysign(u / radius, sweep);
        return centre + std::polar(radius, th);
    }

    cplx tangent(double u) const
    {
        if (kind == Kind::Line) {
            double l = length();
            return l == 0 ? cplx(0) : (to - from) / l;
        }
        double th = theta0 + std::copysign(u / radius, sweep);
        return cplx(0, std::copysign(1.0, sweep)) * std::polar(1.0, th);
    }

    double min_distance(cplx p) const
    {
        if (kind == Kind::Line) {
            cplx d = to - from;
            double l2 = std::norm(d);
            double s = l2 == 0 ? 0 : std::clamp(((p - from) * std::conj(d)).real() / l2, 0.0, 1.0);
            return std::abs(from + s * d - p);
        }
        // full circles only are used for loops; treat arcs conservatively as circles
        return std::abs(std::abs(p - centre) - radius);
    }
};

struct PathSpec {
    cplx base;
    std::vector<PathPiece> pieces;

    double min_distance(const std::vector<cplx>& pts) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& pc : pieces)
            for (const auto& p : pts) d = std::min(d, pc.min_distance(p));
        return d;
    }
};

struct TransportOptions {
    double tol = 1e-12;
    double rho_min = 1e-9;
    bool dual = false;  // solve u' = M^T u instead of v' = -M v
};

struct TransportResult {
    CMat value;
    double error_estimate = 0;
    long steps = 0;
};

/// Integrates the flat-section equation along a path with an adaptive
/// Dormand-Prince 5(4) pair. Accepts a step when the local error per unit
/// length is at most tol; steps never exceed a quarter of the distance to C.
inline TransportResult transport(const NumericMatrix& nm, const PathSpec& path, const CMat& v0, const TransportOptions& opt = {})
{
    if (!(opt.tol > 0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
    if (path.min_distance(nm.poles()) < opt.rho_min)
        throw Error(ErrorKind::SingularityTooClose, "path passes within " + std::to_string(opt.rho_min) + " of a singular point");
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    TransportResult res;
    CMat v = v0;
    for (const auto& pc : path.pieces) {
        const double len = pc.length();
        if (len == 0) continue;
        auto rhs = [&](double u, const CMat& y) -> CMat {
            cplx t = pc.point(u);
            CMat m = nm.eval(t);
            cplx dt = pc.tangent(u);
            if (opt.dual) return (m.transpose() * y) * dt;
            return -(m * y) * dt;
        };
        double u = 0;
        double h = std::min(len, 0.25 * nm.distance_to_poles(pc.point(0)));
        double prev_ratio = 1.0;
        CMat k1 = rhs(u, v);
        while (len - u > 1e-13 * len) {
            double cap = 0.25 * nm.distance_to_poles(pc.point(u));
            h = std::min({h, cap, len - u});
            if (h < 1e-14 * (1.0 + len)) throw Error(ErrorKind::StepUnderflow, "step size underflow; tolerance unreachable");
            CMat k2 = rhs(u + c2 * h, v + h * a21 * k1);
            CMat k3 = rhs(u + c3 * h, v + h * (a31 * k1 + a32 * k2));
            CMat k4 = rhs(u + c4 * h, v + h * (a41 * k1 + a42 * k2 + a43 * k3));
            CMat k5 = rhs(u + c5 * h, v + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            CMat k6 = rhs(u + h, v + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            CMat vn = v + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            CMat k7 = rhs(u + h, vn);
            CMat err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double scale = std::max(1.0, vn.cwiseAbs().maxCoeff());
            const double en = err.cwiseAbs().maxCoeff() / scale;
            const double ratio = en / (opt.tol * h);  // error per unit length over tol
            if (ratio <= 1.0 || h <= 1e-13 * (1.0 + len)) {
                if (ratio > 1.0) throw Error(ErrorKind::StepUnderflow, "tolerance unreachable at minimal step");
                u += h;
                v = std::move(vn);
                k1 = std::move(k7);
                res.error_estimate += en * scale;
                ++res.steps;
                // PI controller
                double fac = 0.9 * std::pow(std::max(ratio, 1e-10), -0.7 / 4) * std::pow(std::max(prev_ratio, 1e-10), 0.4 / 4);
                h *= std::clamp(fac, 0.2, 5.0);
                prev_ratio = ratio;
            } else {
                h *= std::clamp(0.9 * std::pow(ratio, -1.0 / 4), 0.1, 0.9);
            }
        }
    }
    res.value = std::move(v);
    return res;
}

/// 1 + R (1 + i/2) with R = max |c|: outside the hull of C.
inline cplx default_base_point(const Connection& conn)
{
    double r = 0;
    for (const auto& c : conn.singular_points()) r = std::max(r, std::abs(c.to_complex()));
    return cplx(1.0, 0.0) + r * cplx(1.0, 0.5);
}

struct LoopSpec {
    GaussRat point;
    double radius = 0;
    PathSpec path;
};

/// Loops around each finite singularity, ordered by angle as seen from the
/// base point (ties by modulus). Composing them in this order, first loop
/// first, encircles all of C counterclockwise.
inline std::vector<LoopSpec> standard_loops(const Connection& conn, cplx base)
{
    const auto& pts = conn.singular_points();
    std::vector<cplx> z;
    for (const auto& p : pts) z.push_back(p.to_complex());
    cplx centroid = 0;
    for (auto c : z) centroid += c;
    if (!z.empty()) centroid /= static_cast<double>(z.size());
    cplx ref = centroid - base;
    if (std::abs(ref) == 0) ref = 1.0;
    std::vector<std::size_t> order(z.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto angle = [&](std::size_t i) { return std::arg((z[i] - base) / ref); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double da = angle(a), db = angle(b);
        if (std::abs(da - db) > 1e-12) return da < db;
        return std::abs(z[a] - base) < std::abs(z[b] - base);
    });
    std::vector<LoopSpec> loops;
    for (std::size_t idx : order) {
        double rho = std::abs(base - z[idx]);
        for (std::size_t j = 0; j < z.size(); ++j)
            if (j != idx) rho = std::min(rho, std::abs(z[j] - z[idx]));
        rho *= 0.5;
        cplx dir = (base - z[idx]) / std::abs(base - z[idx]);
        cplx p = z[idx] + rho * dir;
        LoopSpec l;
        l.point = pts[idx];
        l.radius = rho;
        l.path.base = base;
        l.path.pieces = {PathPiece::line(base, p), PathPiece::arc(z[idx], rho, std::arg(dir), 2 * std::numbers::pi),
                         PathPiece::line(p, base)};
        loops.push_back(std::move(l));
    }
    return loops;
}

enum class Irreducibility { Irreducible, Reducible, Inconclusive };

inline const char* irreducibility_name(Irreducibility v)
{
    switch (v) {
    case Irreducibility::Irreducible: return "irreducible";
    case Irreducibility::Reducible: return "reducible";
    case Irreducibility::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct IrreducibilityVerdict {
    Irreducibility verdict = Irreducibility::Inconclusive;
    CMat witness;            // orthonormal basis of an invariant subspace when reducible
    double margin = 0;       // smallest invariance defect found over candidates
    double witness_residual = 0;
    double threshold = 0;
};

struct MonodromyReport {
    cplx base;
    std::vector<GaussRat> points;         // loop order
    std::vector<CMat> generators;         // T_c
    std::vector<CMat> dual_generators;    // transported dual frames
    double product_defect = 0;            // |T_r ... T_1 - I|_inf
    double dual_consistency = 0;          // max |T*_c - T_c^{-T}|
    double error_estimate = 0;
    IrreducibilityVerdict irreducibility;
};

namespace detail {

inline double inf_norm(const CMat& m)
{
    double best = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, m.row(i).cwiseAbs().sum());
    return best;
}

/// Eigenvalues with near-coincident values replaced by their cluster mean.
inline std::vector<cplx> clustered_eigenvalues(const CMat& t)
{
    Eigen::ComplexEigenSolver<CMat> es(t, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    const double tol = 1e-4 * std::max(1.0, inf_norm(t));
    std::vector<cplx> out;
    std::vector<bool> used(ev.size(), false);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (used[i]) continue;
        cplx sum = ev[i];
        int cnt = 1;
        used[i] = true;
        for (std::size_t j = i + 1; j < ev.size(); ++j)
            if (!used[j] && std::abs(ev[j] - ev[i]) < tol) {
                used[j] = true;
                sum += ev[j];
                ++cnt;
            }
        out.push_back(sum / static_cast<double>(cnt));
    }
    return out;
}

/// Orthonormal basis of the orthogonal complement of span(u).
inline CMat complement_of(const CVec& u)
{
    const Eigen::Index n = u.size();
    Eigen::HouseholderQR<CMat> qr(u);
    CMat q = qr.householderQ() * CMat::Identity(n, n);
    return q.rightCols(n - 1);
}

inline double invariance_residual(const std::vector<CMat>& gens, const CMat& q)
{
    double r = 0;
    CMat proj = CMat::Identity(q.rows(), q.rows()) - q * q.adjoint();
    for (const auto& t : gens) r = std::max(r, (proj * t * q).cwiseAbs().maxCoeff() / std::max(1.0, inf_norm(t)));
    return r;
}

/// Best common eigenvector of all generators (smallest stacked singular value).
inline std::pair<double, CVec> common_eigenvector(const std::vector<CMat>& gens)
{
    const Eigen::Index n = gens.front().rows();
    std::vector<std::vector<cplx>> eig;
    for (const auto& t : gens) eig.push_back(clustered_eigenvalues(t));
    std::vector<std::size_t> idx(gens.size(), 0);
    double best = std::numeric_limits<double>::infinity();
    CVec best_v = CVec::Zero(n);
    for (;;) {
        CMat s(static_cast<Eigen::Index>(gens.size()) * n, n);
        for (std::size_t k = 0; k < gens.size(); ++k) {
            double sc = std::max(1.0, inf_norm(gens[k]));
            s.block(static_cast<Eigen::Index>(k) * n, 0, n, n) = (gens[k] - eig[k][idx[k]] * CMat::Identity(n, n)) / sc;
        }
        Eigen::JacobiSVD<CMat> svd(s, Eigen::ComputeFullV);
        double sm = svd.singularValues()(n - 1);
        if (sm < best) {
            best = sm;
            best_v = svd.matrixV().col(n - 1);
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == eig[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    return {best, best_v};
}

/// Orthonormal basis of the span of the orbit of v under the algebra.
inline CMat orbit_span(const std::vector<CMat>& gens, const CVec& v, double tol)
{
    const Eigen::Index n = v.size();
    CMat basis(n, 0);
    std::vector<CVec> queue{v};
    auto add = [&](const CVec& w) {
        CVec r = w - basis * (basis.adjoint() * w);
        r = r - basis * (basis.adjoint() * r);
        double nr = r.norm();
        if (nr > tol * std::max(1.0, w.norm())) {
            basis.conservativeResize(n, basis.cols() + 1);
            basis.col(basis.cols() - 1) = r / nr;
            return true;
        }
        return false;
    };
    if (!add(v)) return basis;
    for (Eigen::Index c = 0; c < basis.cols() && basis.cols() < n; ++c) {
        CVec b = basis.col(c);
        for (const auto& t : gens) {
            if (basis.cols() == n) break;
            add(t * b);
        }
    }
    return basis;
}

} // namespace detail

/// Searches for a common invariant subspace of the generators. Rank <= 3 uses
/// an exhaustive common-eigenvector search on T and T^T (dimension 1 and
/// codimension 1 cover every proper subspace). Higher rank uses the dimension
/// of the generated algebra (full iff irreducible) and randomized orbit
/// spanning from eigenvectors of random algebra elements for a witness.
inline IrreducibilityVerdict irreducibility_from_generators(const std::vector<CMat>& gens, double tol, double error_estimate,
                                                           int trials = 8, std::uint64_t seed = 1)
{
    IrreducibilityVerdict v;
    if (gens.empty()) return v;
    const Eigen::Index n = gens.front().rows();
    if (n == 1) {
        v.verdict = Irreducibility::Irreducible;
        return v;
    }
    const double thr = std::max(tol, 10.0 * error_estimate);
    v.threshold = thr;
    if (n <= 3) {
        auto [s1, u1] = detail::common_eigenvector(gens);
        std::vector<CMat> tr;
        for (const auto& t : gens) tr.push_back(t.transpose());
        auto [s2, u2] = detail::common_eigenvector(tr);
        v.margin = std::min(s1, s2);
        if (v.margin <= thr) {
            CMat q = s1 <= s2 ? CMat(u1.normalized()) : detail::complement_of(u2);
            v.witness_residual = detail::invariance_residual(gens, q);
            if (v.witness_residual <= 10 * thr) {
                v.verdict = Irreducibility::Reducible;
                v.witness = q;
                return v;
            }
            v.verdict = Irreducibility::Inconclusive;
            return v;
        }
        v.verdict = v.margin >= 10 * thr ? Irreducibility::Irreducible : Irreducibility::Inconclusive;
        return v;
    }
    // Burnside: the algebra generated by the T_c is all of M_n iff irreducible.
    std::vector<CMat> words{CMat::Identity(n, n)};
    CMat basis(n * n, 0);
    auto add = [&](const CMat& w) {
        CVec x = Eigen::Map<const CVec>(w.data(), n * n);
        CVec r = x - basis * (basis.adjoint() * x);
        r = r - basis * (basis.adjoint() * r);
        if (r.norm() > std::sqrt(thr) * std::max(1.0, x.norm())) {
            basis.conservativeResize(n * n, basis.cols() + 1);
            basis.col(basis.cols() - 1) = r.normalized();
            return true;
        }
        return false;
    };
    add(words[0]);
    for (std::size_t k = 0; k < words.size() && basis.cols() < n * n; ++k)
        for (const auto& t : gens) {
            CMat w = t * words[k];
            if (add(w)) words.push_back(w);
        }
    if (basis.cols() == n * n) {
        v.verdict = Irreducibility::Irreducible;
        return v;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < trials; ++trial) {
        CMat x = CMat::Zero(n, n);
        for (const auto& w : words) x += cplx(nd(rng), nd(rng)) * w;
        Eigen::ComplexEigenSolver<CMat> es(x);
        for (Eigen::Index e = 0; e < n; ++e) {
            CMat q = detail::orbit_span(gens, es.eigenvectors().col(e), std::sqrt(thr));
            if (q.cols() < n) {
                double res = detail::invariance_residual(gens, q);
                if (res <= 10 * thr) {
                    v.verdict = Irreducibility::Reducible;
                    v.witness = q;
                    v.witness_residual = res;
                    return v;
                }
            }
        }
    }
    v.verdict = Irreducibility::Inconclusive;
    return v;
}

struct MonodromyOptions {
    double tol = 1e-12;
    std::optional<cplx> base;
    bool parallel = false;
    double irreducibility_tol = 1e-6;
    int trials = 8;
};

/// Transports the identity frame (and the dual frame) around each standard loop.
inline MonodromyReport monodromy_generators(const Connection& conn, const MonodromyOptions& opt = {})
{
    NumericMatrix nm(conn);
    MonodromyReport rep;
    rep.base = opt.base.value_or(default_base_point(conn));
    if (nm.distance_to_poles(rep.base) == 0)
        throw Error(ErrorKind::SingularityTooClose, "base point is a singular point");
    std::vector<LoopSpec> loops = standard_loops(conn, rep.base);
    const Eigen::Index n = static_cast<Eigen::Index>(conn.rank());
    const CMat id = CMat::Identity(n, n);
    struct Pair {
        TransportResult primal, dual;
    };
    auto run = [&](const LoopSpec& l) {
        TransportOptions o{opt.tol, 1e-9, false};
        TransportOptions od{opt.tol, 1e-9, true};
        return Pair{transport(nm, l.path, id, o), transport(nm, l.path, id, od)};
    };
    std::vector<Pair> results;
    if (opt.parallel) {
        std::vector<std::future<Pair>> fs;
        for (const auto& l : loops) fs.push_back(std::async(std::launch::async, run, std::cref(l)));
        for (auto& f : fs) results.push_back(f.get());
    } else {
        for (const auto& l : loops) results.push_back(run(l));
    }
    CMat prod = id;
    for (std::size_t k = 0; k < loops.size(); ++k) {
        rep.points.push_back(loops[k].point);
        rep.generators.push_back(results[k].primal.value);
        rep.dual_generators.push_back(results[k].dual.value);
        rep.error_estimate = std::max({rep.error_estimate, results[k].primal.error_estimate, results[k].dual.error_estimate});
        prod = results[k].primal.value * prod;
        CMat expect = results[k].primal.value.inverse().transpose();
        rep.dual_consistency = std::max(rep.dual_consistency, (results[k].dual.value - expect).cwiseAbs().maxCoeff());
    }
    rep.product_defect = detail::inf_norm(prod - id);
    rep.irreducibility = irreducibility_from_generators(rep.generators, opt.irreducibility_tol,
                                                        std::max(rep.error_estimate, rep.product_defect), opt.trials);
    return rep;
}

inline IrreducibilityVerdict irreducibility_check(const Connection& conn, double tol = 1e-6, int trials = 8)
{
    MonodromyOptions o;
    o.irreducibility_tol = tol;
    o.trials = trials;
    return monodromy_generators(conn, o).irreducibility;
}

/// Path from a to b avoiding C: straight if clear, otherwise through a detour waypoint.
inline PathSpec plan_path(const NumericMatrix& nm, cplx a, cplx b, double clearance)
{
    PathSpec p;
    p.base = a;
    p.pieces = {PathPiece::line(a, b)};
    if (p.min_distance(nm.poles()) >= clearance) return p;
    cplx mid = 0.5 * (a + b);
    cplx perp = cplx(0, 1) * (b - a);
    if (std::abs(perp) == 0) perp = 1.0;
    for (int k = 1; k <= 40; ++k) {
        for (int sgn : {1, -1}) {
            cplx w = mid + perp * (0.13 * k * sgn);
            PathSpec q;
            q.base = a;
            q.pieces = {PathPiece::line(a, w), PathPiece::line(w, b)};
            if (q.min_distance(nm.poles()) >= clearance) return q;
        }
    }
    throw Error(ErrorKind::SingularityTooClose, "no path found that clears the singular points");
}

struct PeriodJet {
    cplx base;
    cplx t0;
    int depth = 0;
    CMat jet;  // jet(i, j) = <delta_j(t0), D^i w(t0)>, i < depth
    double error_estimate = 0;
};

inline CVec eval_section(const Section& w, cplx t)
{
    CVec v(static_cast<Eigen::Index>(w.rank()));
    for (std::size_t i = 0; i < w.rank(); ++i) v(static_cast<Eigen::Index>(i)) = w.comps[i].is_zero() ? cplx(0) : w.comps[i].eval(t);
    return v;
}

/// Dual flat frame (identity at the base point) transported to t0.
inline TransportResult dual_frame_at(const Connection& conn, cplx base, cplx t0, double tol)
{
    NumericMatrix nm(conn);
    double clearance = 0.05 * std::max(1e-3, std::min(nm.distance_to_poles(t0), nm.distance_to_poles(base)));
    if (nm.distance_to_poles(t0) < 1e-9) throw Error(ErrorKind::SingularityTooClose, "evaluation point is a singular point");
    PathSpec p = plan_path(nm, base, t0, clearance);
    const Eigen::Index n = static_cast<Eigen::Index>(conn.rank());
    return transport(nm, p, CMat::Identity(n, n), TransportOptions{tol, 1e-12, true});
}

inline PeriodJet period_jet(const Connection& conn, const Section& w, cplx t0, int depth, double tol = 1e-12,
                            std::optional<cplx> base = std::nullopt)
{
    if (depth < 1) throw Error(ErrorKind::InvalidArgument, "depth must be >= 1");
    PeriodJet j;
    j.base = base.value_or(default_base_point(conn));
    j.t0 = t0;
    j.depth = depth;
    TransportResult fr = dual_frame_at(conn, j.base, t0, tol);
    j.error_estimate = fr.error_estimate;
    std::vector<Section> its = iterated(conn, w, depth - 1);
    const Eigen::Index n = static_cast<Eigen::Index>(conn.rank());
    j.jet = CMat(depth, n);
    for (int i = 0; i < depth; ++i) j.jet.row(i) = eval_section(its[static_cast<std::size_t>(i)], t0).transpose() * fr.value;
    return j;
}

/// max_j |J[a][j] - sum_k c_k(t0) J[k][j]| / (1 + max |J|).
inline double ode_residual(const Connection& conn, const Section& w, const ScalarODE& ode, cplx t0, double tol = 1e-12,
                           std::optional<cplx> base = std::nullopt)
{
    PeriodJet j = period_jet(conn, w, t0, ode.order + 1, tol, base);
    std::vector<cplx> c = ode.eval(t0);
    double worst = 0;
    for (Eigen::Index col = 0; col < j.jet.cols(); ++col) {
        cplx r = j.jet(ode.order, col);
        for (int k = 0; k < ode.order; ++k) r -= c[static_cast<std::size_t>(k)] * j.jet(k, col);
        worst = std::max(worst, std::abs(r));
    }
    return worst / (1.0 + j.jet.cwiseAbs().maxCoeff());
}

struct AchieveOptions {
    double transport_tol = 1e-12;
    double vanish_tol = 1e-7;
    double rank_tol = 1e-9;
    std::optional<cplx> base;
};

struct AchievedSection {
    std::vector<Section> basis;
    std::vector<cplx> coeffs;   // w = sum coeffs[k] basis[k], unit norm
    std::vector<double> jets;   // |d^i/dt^i <delta_j, w>| at t0, i < d
    double scale = 0;           // sum_k |coeffs[k]| max_i |<delta_j, D^i basis[k]>|
    bool vanishing_ok = false;  // jets 0..d-2 below vanish_tol * scale
    bool generic_equality = false;  // jet d-1 above 10 * vanish_tol * scale
};

/// Kernel of the (d-1) x d period-jet system at t0 for the dual flat section
/// delta_j: a section of S(n, E) whose period vanishes to order >= d-1 there.
inline AchievedSection achieve_multiplicity(const Connection& conn, int n, const Divisor& e, cplx t0, int j,
                                            const AchieveOptions& opt = {})
{
    if (e.degree() > n) throw Error(ErrorKind::InvalidArgument, "deg E must not exceed n");
    if (j < 0 || j >= static_cast<int>(conn.rank())) throw Error(ErrorKind::InvalidArgument, "dual frame index out of range");
    AchievedSection out;
    out.basis = section_space_basis(conn.splitting(), e);
    const int d = static_cast<int>(out.basis.size());
    if (d < 2) throw Error(ErrorKind::InvalidArgument, "dim S(n, E) must be at least 2");
    cplx base = opt.base.value_or(default_base_point(conn));
    TransportResult fr = dual_frame_at(conn, base, t0, opt.transport_tol);
    CVec delta = fr.value.col(j);
    CMat k(d, d);
    for (int b = 0; b < d; ++b) {
        std::vector<Section> its = iterated(conn, out.basis[static_cast<std::size_t>(b)], d - 1);
        for (int i = 0; i < d; ++i) k(i, b) = eval_section(its[static_cast<std::size_t>(i)], t0).cwiseProduct(delta).sum();
    }
    // rows of the system, each normalised so that derivative orders are comparable
    CMat sys = k.topRows(d - 1);
    for (Eigen::Index i = 0; i < sys.rows(); ++i) {
        double m = sys.row(i).cwiseAbs().maxCoeff();
        if (m > 0) sys.row(i) /= m;
    }
    Eigen::JacobiSVD<CMat> svd(sys, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv.size() < d - 1 || sv(0) == 0 || sv(d - 2) < opt.rank_tol * sv(0))
        throw Error(ErrorKind::DegenerateJet, "jet system has corank > 1 at this point");
    CVec c = svd.matrixV().col(d - 1);
    out.coeffs.assign(c.data(), c.data() + c.size());
    CVec y = k * c;
    for (int i = 0; i < d; ++i) out.jets.push_back(std::abs(y(i)));
    for (int b = 0; b < d; ++b) out.scale += std::abs(c(b)) * k.col(b).cwiseAbs().maxCoeff();
    const double thr = opt.vanish_tol * out.scale;
    out.vanishing_ok = true;
    for (int i = 0; i + 1 < d; ++i) out.vanishing_ok = out.vanishing_ok && out.jets[static_cast<std::size_t>(i)] < thr;
    out.generic_equality = out.jets.back() > 10 * thr;
    return out;
}

} // namespace mconn
