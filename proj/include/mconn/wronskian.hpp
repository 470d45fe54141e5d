#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <random>
#include <span>
#include <thread>
#include <variant>
#include <vector>

#include "connection.hpp"

namespace mconn {

/// [w, Dw, ..., D^k w] by repeated covariant differentiation.
inline std::vector<Section> iterated(const Connection& conn, const Section& w, int k)
{
    if (k < 0) throw Error(ErrorKind::InvalidArgument, "iteration count must be >= 0");
    detail::check_section(conn, w);
    std::vector<Section> out{w};
    out.reserve(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i < k; ++i) out.push_back(detail::covariant_derivative_unchecked(conn, out.back()));
    return out;
}

/// Matrix whose columns are the given sections.
inline RatMat column_matrix(std::span<const Section> cols, std::size_t rank)
{
    RatMat m(rank, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < rank; ++i) m(i, j) = cols[j].comps[i];
    return m;
}

/// A = det[w, Dw, ..., D^(a-1) w]: coordinate of w ^ Dw ^ ... in the top exterior power.
inline RatFun wronskian_determinant(const Connection& conn, const Section& w)
{
    if (w.is_zero()) throw Error(ErrorKind::ZeroSection, "Wronskian of the zero section");
    const int a = static_cast<int>(conn.rank());
    std::vector<Section> it = iterated(conn, w, a - 1);
    return determinant(column_matrix(it, conn.rank()));
}

/// (a-1) sum m_i + a(n+1) - a(a-1)/2 + c(V).
inline long h_bound(const Connection& conn, int n)
{
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 0");
    const long a = static_cast<long>(conn.rank());
    return (a - 1) * conn.pole_order_sum() + a * (n + 1) - a * (a - 1) / 2 + chern(conn.splitting());
}

struct GenerationBound {
    int bound = 0;       // mu + rank
    int mu = 0;          // max zero multiplicity of A off C and infinity
    RatFun wronskian;
    ZeroProfile profile;
};

inline GenerationBound generation_bound_detail(const Connection& conn, const Section& w)
{
    GenerationBound g;
    g.wronskian = wronskian_determinant(conn, w);
    if (g.wronskian.is_zero()) throw Error(ErrorKind::DegenerateSection, "Wronskian vanishes identically");
    g.profile = max_zero_multiplicity(g.wronskian, conn.singular_points());
    g.mu = g.profile.max_multiplicity;
    g.bound = g.mu + static_cast<int>(conn.rank());
    return g;
}

/// Number of iterates certified to span every fiber off C and infinity.
inline int generation_bound(const Connection& conn, const Section& w) { return generation_bound_detail(conn, w).bound; }

namespace detail {

/// Smallest h such that iterates 0..h-1 span the fiber at b; extends `its` as needed.
inline int generation_index_from(const Connection& conn, std::vector<Section>& its, const GaussRat& b, int cap)
{
    const std::size_t n = conn.rank();
    for (int h = 1;; ++h) {
        while (static_cast<int>(its.size()) < h) its.push_back(covariant_derivative_unchecked(conn, its.back()));
        if (h >= static_cast<int>(n)) {
            GaussMat m(n, static_cast<std::size_t>(h));
            for (int j = 0; j < h; ++j)
                for (std::size_t i = 0; i < n; ++i) m(i, static_cast<std::size_t>(j)) = its[static_cast<std::size_t>(j)].comps[i].eval(b);
            if (rank(std::move(m)) == n) return h;
        }
        if (h > cap) throw std::logic_error("iterates fail to span at " + b.str() + " within the Wronskian zero bound");
    }
}

inline void check_regular_point(const Connection& conn, const GaussRat& b)
{
    for (const auto& c : conn.singular_points())
        if (c == b) throw Error(ErrorKind::SingularEvaluationPoint, b.str() + " is a singular point");
}

} // namespace detail

/// Exact generation index at a Gaussian-rational point b outside C.
inline int generation_index_at(const Connection& conn, const Section& w, const GaussRat& b)
{
    detail::check_regular_point(conn, b);
    RatFun a = wronskian_determinant(conn, w);
    if (a.is_zero()) throw Error(ErrorKind::DegenerateSection, "Wronskian vanishes identically");
    std::vector<Section> its = iterated(conn, w, 0);
    return detail::generation_index_from(conn, its, b, valuation(a, b) + static_cast<int>(conn.rank()));
}

struct ZeroSet {
    std::vector<std::pair<GaussRat, int>> exact;  // location, multiplicity
    std::vector<std::pair<cplx, int>> numeric;
};

/// Zeros of a rational function off `excluded`, exact where Gaussian rational.
inline ZeroSet zeros_off(const RatFun& r, std::span<const GaussRat> excluded, std::span<const GaussRat> hints = {})
{
    ZeroSet z;
    for (const auto& f : max_zero_multiplicity(r, excluded).factors) {
        RootSplit rs = split_roots(f.factor, hints);
        for (const auto& g : rs.exact) z.exact.emplace_back(g, f.multiplicity);
        for (const auto& c : rs.numeric) z.numeric.emplace_back(c, f.multiplicity);
    }
    return z;
}

struct HBoundReport {
    int n = 0;
    long bound = 0;
    int samples = 0;
    int max_observed_generation = 0;  // exact lower estimate of H(n)
    int max_certified_bound = 0;      // max per-sample generation_bound
    int degenerate_samples = 0;       // samples with identically vanishing Wronskian
    Section witness;
    bool violated = false;            // max_observed_generation > bound
};

struct SampleOutcome {
    Section section;
    bool degenerate = false;
    int observed = 0;
    int certified = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline GaussRat draw_gauss_int(std::mt19937_64& rng, bool nonzero)
{
    std::uniform_int_distribution<int> d(-9, 9);
    for (;;) {
        GaussRat g(d(rng), d(rng));
        if (!nonzero || !g.is_zero()) return g;
    }
}

} // namespace detail

/// The deterministic sample number `index` of S(n, E) for stream `seed`.
/// Samples are built on a basis F^-1 (t-b)^j e_i centred at a random Gaussian
/// integer b outside C. The first dim S samples are the basis elements; later
/// ones are combinations with Gaussian-integer coefficients in [-9,9]^2 whose
/// terms with j below a random vanishing order r are dropped.
inline Section draw_section(const Connection& conn, const Divisor& e, std::uint64_t seed, int index, GaussRat* centre = nullptr)
{
    std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(index))));
    GaussRat b;
    for (;;) {
        b = detail::draw_gauss_int(rng, false);
        const auto& c = conn.singular_points();
        if (std::find(c.begin(), c.end(), b) == c.end()) break;
    }
    if (centre) *centre = b;
    Poly f(1);
    for (const auto& entry : e.entries())
        if (!entry.point.is_infinity()) f = f * Poly::linear(entry.point.value()).pow(entry.order);
    const std::size_t n = conn.rank();
    std::vector<int> dims(n);
    int total = 0, maxd = 0;
    for (std::size_t i = 0; i < n; ++i) {
        dims[i] = std::max(0, conn.splitting().twists[i] + e.degree() + 1);
        total += dims[i];
        maxd = std::max(maxd, dims[i]);
    }
    if (total == 0) throw Error(ErrorKind::InvalidArgument, "S(n, E) is the zero space");
    const Poly lin = Poly::linear(b);
    Section w{std::vector<RatFun>(n), conn.splitting()};
    if (index < total) {
        int k = index;
        for (std::size_t i = 0; i < n; ++i) {
            if (k < dims[i]) {
                w.comps[i] = RatFun(lin.pow(k), f);
                return w;
            }
            k -= dims[i];
        }
    }
    std::uniform_int_distribution<int> rd(0, maxd - 1);
    const int r = rd(rng);
    for (std::size_t i = 0; i < n; ++i) {
        Poly p;
        for (int j = 0; j < dims[i]; ++j) {
            GaussRat c = detail::draw_gauss_int(rng, true);
            if (j >= r) p += lin.pow(j) * c;
        }
        w.comps[i] = RatFun(p, f);
    }
    return w;
}

inline SampleOutcome evaluate_sample(const Connection& conn, Section w, const GaussRat& centre)
{
    SampleOutcome o;
    o.section = std::move(w);
    const int n = static_cast<int>(conn.rank());
    RatFun a = wronskian_determinant(conn, o.section);
    if (a.is_zero()) {
        o.degenerate = true;
        return o;
    }
    ZeroProfile prof = max_zero_multiplicity(a, conn.singular_points());
    o.certified = prof.max_multiplicity + n;
    o.observed = n;
    std::vector<GaussRat> hints{centre};
    ZeroSet zs = zeros_off(a, conn.singular_points(), hints);
    std::vector<Section> its{o.section};
    for (const auto& [b, mult] : zs.exact)
        o.observed = std::max(o.observed, detail::generation_index_from(conn, its, b, mult + n));
    return o;
}

/// Samples S(n, E) and reports the largest exact generation index found at
/// Gaussian-rational points, next to the bound h_bound(conn, n).
inline HBoundReport estimate_H(const Connection& conn, int n, const Divisor& e, int samples, std::uint64_t seed,
                               bool parallel = false)
{
    if (e.degree() > n) throw Error(ErrorKind::InvalidArgument, "deg E must not exceed n");
    if (samples < 0) throw Error(ErrorKind::InvalidArgument, "sample count must be >= 0");
    HBoundReport rep;
    rep.n = n;
    rep.bound = h_bound(conn, n);
    rep.samples = samples;
    rep.max_observed_generation = static_cast<int>(conn.rank());
    rep.max_certified_bound = static_cast<int>(conn.rank());
    if (samples == 0) {
        rep.violated = rep.max_observed_generation > rep.bound;
        return rep;
    }
    std::vector<SampleOutcome> outs(static_cast<std::size_t>(samples));
    auto run = [&](int lo, int hi) {
        for (int s = lo; s < hi; ++s) {
            GaussRat centre;
            Section w = draw_section(conn, e, seed, s, &centre);
            outs[static_cast<std::size_t>(s)] = evaluate_sample(conn, std::move(w), centre);
        }
    };
    unsigned workers = parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
    if (workers <= 1) {
        run(0, samples);
    } else {
        std::vector<std::future<void>> fs;
        const int chunk = (samples + static_cast<int>(workers) - 1) / static_cast<int>(workers);
        for (int lo = 0; lo < samples; lo += chunk) fs.push_back(std::async(std::launch::async, run, lo, std::min(samples, lo + chunk)));
        for (auto& f : fs) f.get();
    }
    bool have_witness = false;
    for (const auto& o : outs) {
        if (o.degenerate) {
            ++rep.degenerate_samples;
            continue;
        }
        rep.max_certified_bound = std::max(rep.max_certified_bound, o.certified);
        if (!have_witness || o.observed > rep.max_observed_generation) {
            rep.max_observed_generation = std::max(rep.max_observed_generation, o.observed);
            rep.witness = o.section;
            have_witness = true;
        }
    }
    rep.violated = rep.max_observed_generation > rep.bound;
    return rep;
}

/// y^(order) = sum_k coeffs[k] y^(k).
struct ScalarODE {
    int order = 0;
    std::vector<RatFun> coeffs;

    std::vector<cplx> eval(cplx t) const
    {
        std::vector<cplx> v;
        for (const auto& c : coeffs) v.push_back(c.eval(t));
        return v;
    }
};

/// Scalar equation satisfied by every period <delta, w> with delta flat.
inline ScalarODE cyclic_reduce(const Connection& conn, const Section& w)
{
    const int a = static_cast<int>(conn.rank());
    std::vector<Section> it = iterated(conn, w, a);
    RatMat phi = column_matrix(std::span<const Section>(it.data(), static_cast<std::size_t>(a)), conn.rank());
    ScalarODE ode;
    ode.order = a;
    try {
        ode.coeffs = solve_linear(std::move(phi), it.back().comps);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::SingularMatrix) throw Error(ErrorKind::NotCyclic, "Wronskian vanishes identically");
        throw;
    }
    return ode;
}

struct FuchsVerdict {
    Point point;
    bool pass = true;
    std::vector<int> pole_orders;  // pole order of coeffs[k] at the point (0 if regular or zero)
};

/// Fuchs condition: pole order of c_k at each point is at most order - k.
/// At infinity this reads infinity_degree(c_k) <= -(order - k).
inline std::vector<FuchsVerdict> fuchs_check(const ScalarODE& ode, std::span<const Point> points)
{
    std::vector<FuchsVerdict> out;
    for (const auto& p : points) {
        FuchsVerdict v{p, true, {}};
        for (int k = 0; k < ode.order; ++k) {
            const RatFun& c = ode.coeffs[static_cast<std::size_t>(k)];
            int pole = 0;
            if (!c.is_zero()) pole = p.is_infinity() ? infinity_degree(c) : -valuation(c, p.value());
            const int allowed = ode.order - k;
            if (p.is_infinity()) {
                if (!c.is_zero() && pole > -allowed) v.pass = false;
            } else if (pole > allowed) {
                v.pass = false;
            }
            v.pole_orders.push_back(p.is_infinity() ? pole : std::max(pole, 0));
        }
        out.push_back(std::move(v));
    }
    return out;
}

struct ResidueRecord {
    GaussRat point;
    bool in_divisor = false;
    GaussRat residue_log;     // residue of c_{order-1}
    int valuation_a = 0;      // valuation of A
    GaussRat residue_trace;   // residue of tr M (zero off C)
    bool equal = false;       // residue_log == valuation_a + residue_trace
};

/// Checks Res(c_{a-1}) = val(A) (+ Res tr M on C) at every Gaussian-rational
/// zero or pole of A and at every point of C.
inline std::vector<ResidueRecord> residue_identity_check(const Connection& conn, const Section& w)
{
    ScalarODE ode = cyclic_reduce(conn, w);
    RatFun a = wronskian_determinant(conn, w);
    const RatFun& top = ode.coeffs.back();
    RatFun tr = trace(conn.matrix());
    std::vector<std::pair<GaussRat, bool>> pts;
    for (const auto& c : conn.singular_points()) pts.emplace_back(c, true);
    for (const auto& [b, m] : zeros_off(a, conn.singular_points()).exact) pts.emplace_back(b, false);
    // poles of A lie in C; any others would be recognised here
    {
        Poly d = detail::residual_denominator(a, conn.singular_points());
        if (d.degree() > 0)
            for (const auto& g : split_roots(d).exact) pts.emplace_back(g, false);
    }
    std::vector<ResidueRecord> out;
    for (const auto& [b, in_c] : pts) {
        ResidueRecord r;
        r.point = b;
        r.in_divisor = in_c;
        r.residue_log = residue(top, b);
        r.valuation_a = valuation(a, b);
        r.residue_trace = residue(tr, b);
        r.equal = r.residue_log == GaussRat(r.valuation_a) + r.residue_trace;
        out.push_back(std::move(r));
    }
    return out;
}

struct ApparentRecord {
    std::variant<GaussRat, cplx> location;
    int valuation_a = 0;
    double residue_log = 0;  // exact records hold an integer value
    int phi_bound = 0;       // residue + rank - 1
    bool exact = false;
    GaussRat exact_residue;  // meaningful only when exact
};

struct ApparentReport {
    std::vector<ApparentRecord> records;
};

/// Zeros of A away from C: the apparent singularities of the scalar equation.
inline ApparentReport apparent_singularities(const Connection& conn, const Section& w)
{
    ScalarODE ode = cyclic_reduce(conn, w);
    RatFun a = wronskian_determinant(conn, w);
    const int n = static_cast<int>(conn.rank());
    ApparentReport rep;
    ZeroSet zs = zeros_off(a, conn.singular_points());
    for (const auto& [b, m] : zs.exact) {
        ApparentRecord r;
        r.location = b;
        r.valuation_a = valuation(a, b);
        r.exact_residue = residue(ode.coeffs.back(), b);
        r.residue_log = r.exact_residue.re().get_d();
        r.phi_bound = static_cast<int>(r.residue_log) + n - 1;
        r.exact = true;
        rep.records.push_back(std::move(r));
    }
    for (const auto& [z, m] : zs.numeric) {
        ApparentRecord r;
        r.location = z;
        r.valuation_a = m;
        r.residue_log = m;
        r.phi_bound = m + n - 1;
        rep.records.push_back(std::move(r));
    }
    return rep;
}

} // namespace mconn
