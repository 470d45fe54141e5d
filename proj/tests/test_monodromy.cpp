#include <catch_amalgamated.hpp>

#include "mconn/expr.hpp"
#include "mconn/monodromy.hpp"
#include "oracles.hpp"

using namespace mconn;
using std::numbers::pi;

namespace {

Section sec(std::vector<std::string> c, const Connection& conn)
{
    Section w{{}, conn.splitting()};
    for (const auto& s : c) w.comps.push_back(parse_ratfun(s));
    return w;
}

Connection zero_conn(std::size_t r)
{
    ConnectionSpec s;
    s.splitting.twists.assign(r, 0);
    s.divisor = fixtures::simple_poles({0});
    s.matrix = RatMat(r, r);
    return Connection(s);
}

PathSpec circle(cplx centre, double radius, cplx start)
{
    PathSpec p;
    p.base = start;
    cplx on = centre + radius * (start - centre) / std::abs(start - centre);
    p.pieces = {PathPiece::line(start, on), PathPiece::arc(centre, radius, std::arg(start - centre), 2 * pi),
                PathPiece::line(on, start)};
    return p;
}

PathSpec random_path(std::mt19937_64& rng, const NumericMatrix& nm, cplx start)
{
    std::uniform_real_distribution<double> u(-3.0, 4.0);
    for (;;) {
        PathSpec p;
        p.base = start;
        cplx at = start;
        for (int k = 0; k < 4; ++k) {
            cplx next(u(rng), u(rng));
            p.pieces.push_back(PathPiece::line(at, next));
            at = next;
        }
        if (p.min_distance(nm.poles()) > 0.1) return p;
    }
}

CMat one(cplx z)
{
    CMat m(1, 1);
    m(0, 0) = z;
    return m;
}

} // namespace

TEST_CASE("transport", "[monodromy]")
{
    Connection z = zero_conn(2);
    NumericMatrix nz(z);
    PathSpec p = circle(0, 1, cplx(3, 1));
    CMat v0(2, 1);
    v0 << cplx(1, 2), cplx(-3, 0.5);
    CHECK((transport(nz, p, v0).value - v0).norm() < 1e-15);

    Connection euler(fixtures::euler_half());
    NumericMatrix ne(euler);
    cplx base(2, 1);
    TransportResult around0 = transport(ne, circle(0, 0.5, base), one(1));
    CHECK(std::abs(around0.value(0, 0) - cplx(-1, 0)) < 1e-9);
    TransportResult both = transport(ne, circle(0.5, 2.5, base + cplx(2, 0)), one(1));
    CHECK(std::abs(both.value(0, 0) - cplx(1, 0)) < 1e-9);

    // closed form along an open path
    PathSpec line;
    line.base = cplx(2, 0.5);
    line.pieces = {PathPiece::line(cplx(2, 0.5), cplx(3, -1))};
    cplx got = transport(ne, line, one(oracle::euler_flat(cplx(2, 0.5)))).value(0, 0);
    CHECK(std::abs(got - oracle::euler_flat(cplx(3, -1))) < 1e-10);

    PathSpec through;
    through.base = cplx(-1, 0);
    through.pieces = {PathPiece::line(cplx(-1, 0), cplx(0.5, 0))};
    try {
        transport(ne, through, one(1));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingularityTooClose);
    }
    try {
        transport(ne, circle(0, 0.5, base), one(1), TransportOptions{1e-300, 1e-9, false});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StepUnderflow);
    }
}

TEST_CASE("transport error tracks the tolerance", "[monodromy]")
{
    Connection euler(fixtures::euler_half());
    NumericMatrix ne(euler);
    PathSpec p = circle(0, 0.5, cplx(2, 1));
    std::vector<double> errs;
    for (double tol : {1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
        cplx v = transport(ne, p, one(1), TransportOptions{tol, 1e-9, false}).value(0, 0);
        errs.push_back(std::abs(v + 1.0));
        INFO("tol " << tol << " error " << errs.back());
        CHECK(errs.back() <= 10 * tol * 2 * std::numbers::pi * 0.5);
    }
    CHECK(errs.back() < errs.front());
}

TEST_CASE("flat pairing is constant along paths", "[monodromy]")
{
    std::mt19937_64 rng(97);
    const double tol = 1e-12;
    for (const auto& name : fixtures::names()) {
        Connection c(fixtures::by_name(name));
        NumericMatrix nm(c);
        const Eigen::Index n = static_cast<Eigen::Index>(c.rank());
        cplx start = default_base_point(c);
        for (int k = 0; k < 20; ++k) {
            PathSpec p = random_path(rng, nm, start);
            CMat v = transport(nm, p, CMat::Identity(n, n), TransportOptions{tol, 1e-9, false}).value;
            CMat u = transport(nm, p, CMat::Identity(n, n), TransportOptions{tol, 1e-9, true}).value;
            double dev = (u.transpose() * v - CMat::Identity(n, n)).cwiseAbs().maxCoeff();
            INFO(name << " path " << k << " deviation " << dev);
            CHECK(dev < 10 * tol);
        }
    }
}

TEST_CASE("loop ordering and base point", "[monodromy]")
{
    Connection tri(fixtures::triangle_diag());
    cplx base = default_base_point(tri);
    CHECK(std::abs(base - cplx(3, 1)) < 1e-15);
    auto loops = standard_loops(tri, base);
    REQUIRE(loops.size() == 3);
    for (const auto& l : loops) {
        double d = l.path.min_distance({0, 1, 2});
        CHECK(d > 0.2);
        double rho = std::abs(base - l.point.to_complex());
        for (const auto& o : loops)
            if (!(o.point == l.point)) rho = std::min(rho, std::abs(o.point.to_complex() - l.point.to_complex()));
        CHECK(l.radius == Catch::Approx(rho / 2));
    }
}

TEST_CASE("monodromy generators", "[monodromy]")
{
    SECTION("euler")
    {
        MonodromyReport r = monodromy_generators(Connection(fixtures::euler_half()));
        REQUIRE(r.generators.size() == 2);
        for (const auto& t : r.generators) CHECK(std::abs(t(0, 0) + 1.0) < 1e-9);
        CHECK(r.product_defect < 1e-8);
        CHECK(r.dual_consistency < 1e-8);
        CHECK(r.irreducibility.verdict == Irreducibility::Irreducible);
    }
    SECTION("triangle-nilpotent")
    {
        MonodromyReport r = monodromy_generators(Connection(fixtures::triangle_nilpotent()));
        REQUIRE(r.points.size() == 3);
        for (std::size_t k = 0; k < 3; ++k) {
            const CMat& t = r.generators[k];
            CMat id = CMat::Identity(2, 2);
            if (r.points[k] == GaussRat(2)) {
                // residue eigenvalues +-1/2: both local eigenvalues are -1
                CHECK(std::abs(t.trace() + 2.0) < 1e-6);
                CHECK(((t + id) * (t + id)).cwiseAbs().maxCoeff() < 1e-6);
            } else {
                CHECK(std::abs(t.trace() - 2.0) < 1e-6);
                CHECK(((t - id) * (t - id)).cwiseAbs().maxCoeff() < 1e-6);
            }
        }
        CHECK(r.product_defect < 1e-8);
    }
    SECTION("triangle-diag")
    {
        MonodromyReport r = monodromy_generators(Connection(fixtures::triangle_diag()));
        CHECK(r.product_defect < 1e-8);
        for (std::size_t k = 0; k < 3; ++k) {
            if (!(r.points[k] == GaussRat(0))) continue;
            Eigen::ComplexEigenSolver<CMat> es(r.generators[k]);
            std::vector<cplx> ev{es.eigenvalues()(0), es.eigenvalues()(1)};
            for (cplx want : {cplx(0, -1), cplx(0, 1)}) {
                double best = std::min(std::abs(ev[0] - want), std::abs(ev[1] - want));
                CHECK(best < 1e-6);
            }
        }
    }
    SECTION("parallel matches sequential")
    {
        Connection c(fixtures::triangle_diag());
        MonodromyOptions par;
        par.parallel = true;
        MonodromyReport a = monodromy_generators(c), b = monodromy_generators(c, par);
        for (std::size_t k = 0; k < a.generators.size(); ++k) CHECK(a.generators[k] == b.generators[k]);
    }
}

TEST_CASE("local exponents match local monodromy", "[monodromy]")
{
    std::mt19937_64 rng(101);
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 8; ++trial) {
        Connection c(oracle::random_fuchsian2(rng));
        bool resonant = false;
        std::vector<std::vector<cplx>> ex;
        for (const auto& p : c.singular_points()) {
            LocalData l = local_data(c, p);
            ex.push_back(l.exponents);
            cplx d = l.exponents[0] - l.exponents[1];
            if (std::abs(d) > 1e-9 && std::abs(d.imag()) < 1e-9 && std::abs(d.real() - std::round(d.real())) < 1e-9) resonant = true;
            if (std::abs(d) < 1e-6) resonant = true;  // repeated exponent: skip Jordan blocks
        }
        if (resonant) continue;
        ++checked;
        MonodromyReport r = monodromy_generators(c);
        CHECK(r.product_defect < 1e-8);
        for (std::size_t k = 0; k < r.points.size(); ++k) {
            std::size_t idx = 0;
            while (!(c.singular_points()[idx] == r.points[k])) ++idx;
            Eigen::ComplexEigenSolver<CMat> es(r.generators[k]);
            for (cplx e : ex[idx]) {
                cplx want = std::exp(cplx(0, -2 * pi) * e);
                double best = std::min(std::abs(es.eigenvalues()(0) - want), std::abs(es.eigenvalues()(1) - want));
                CHECK(best < 1e-6);
            }
        }
    }
    CHECK(checked >= 4);
}

TEST_CASE("irreducibility", "[monodromy]")
{
    CHECK(irreducibility_check(Connection(fixtures::euler_half())).verdict == Irreducibility::Irreducible);
    CHECK(irreducibility_check(Connection(fixtures::triangle_diag())).verdict == Irreducibility::Irreducible);
    CHECK(irreducibility_check(Connection(fixtures::triangle_nilpotent())).verdict == Irreducibility::Irreducible);

    MonodromyReport r = monodromy_generators(Connection(fixtures::two_point_reducible()));
    REQUIRE(r.irreducibility.verdict == Irreducibility::Reducible);
    const CMat& q = r.irreducibility.witness;
    REQUIRE(q.cols() == 1);
    for (const auto& t : r.generators) {
        CVec tq = t * q.col(0);
        CVec perp = tq - q.col(0) * (q.col(0).adjoint() * tq);
        CHECK(perp.norm() < 1e-8);
    }
}

TEST_CASE("irreducibility in rank four", "[monodromy]")
{
    std::mt19937_64 rng(103);
    std::normal_distribution<double> nd;
    auto rnd = [&](Eigen::Index n) {
        CMat m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(nd(rng), nd(rng));
        return m;
    };
    std::vector<CMat> generic{rnd(4), rnd(4)};
    CHECK(irreducibility_from_generators(generic, 1e-6, 0).verdict == Irreducibility::Irreducible);

    CMat p = rnd(4);
    CMat a = CMat::Zero(4, 4), b = CMat::Zero(4, 4);
    a.topLeftCorner(2, 2) = rnd(2);
    a.bottomRightCorner(2, 2) = rnd(2);
    a.topRightCorner(2, 2) = rnd(2);
    b.topLeftCorner(2, 2) = rnd(2);
    b.bottomRightCorner(2, 2) = rnd(2);
    b.topRightCorner(2, 2) = rnd(2);
    std::vector<CMat> block{p * a * p.inverse(), p * b * p.inverse()};
    IrreducibilityVerdict v = irreducibility_from_generators(block, 1e-6, 0);
    REQUIRE(v.verdict == Irreducibility::Reducible);
    CHECK(v.witness.cols() > 0);
    CHECK(v.witness.cols() < 4);
    CHECK(detail::invariance_residual(block, v.witness) < 1e-6);
}

TEST_CASE("period jets", "[monodromy]")
{
    SECTION("trivial connection: plain derivatives")
    {
        Connection z = zero_conn(2);
        Section w = sec({"t^3", "t^2+1"}, z);
        PeriodJet j = period_jet(z, w, cplx(2, 1), 3);
        cplx t(2, 1);
        CHECK(std::abs(j.jet(0, 0) - t * t * t) < 1e-12);
        CHECK(std::abs(j.jet(1, 0) - 3.0 * t * t) < 1e-12);
        CHECK(std::abs(j.jet(2, 0) - 6.0 * t) < 1e-12);
        CHECK(std::abs(j.jet(0, 1) - (t * t + 1.0)) < 1e-12);
        CHECK(std::abs(j.jet(2, 1) - 2.0) < 1e-12);
    }
    SECTION("euler closed form")
    {
        Connection e(fixtures::euler_half());
        cplx t0(3, 0.5);
        PeriodJet j = period_jet(e, sec({"1"}, e), t0, 2);
        cplx base = j.base;
        // delta = delta(base) r(base) / r(t)
        cplx y = oracle::euler_flat(base) / oracle::euler_flat(t0);
        CHECK(std::abs(j.jet(0, 0) - y) < 1e-10);
        cplx c0 = 1.0 / (2.0 * t0 * (t0 - 1.0));
        CHECK(std::abs(j.jet(1, 0) / j.jet(0, 0) - c0) < 1e-10);
    }
    SECTION("rows are derivatives of row zero")
    {
        const double h = 1e-5;
        for (const auto& name : fixtures::names()) {
            Connection c(fixtures::by_name(name));
            Section w = sec(std::vector<std::string>(c.rank(), "t+1/2"), c);
            cplx t0(2.5, 0.7);
            PeriodJet j = period_jet(c, w, t0, 2);
            PeriodJet jp = period_jet(c, w, t0 + h, 1, 1e-13, j.base);
            PeriodJet jm = period_jet(c, w, t0 - h, 1, 1e-13, j.base);
            const double scale = 1 + j.jet.cwiseAbs().maxCoeff();
            for (Eigen::Index col = 0; col < j.jet.cols(); ++col) {
                cplx fd = (jp.jet(0, col) - jm.jet(0, col)) / (2 * h);
                CHECK(std::abs(fd - j.jet(1, col)) < 1e-5 * scale);
            }
        }
    }
}

TEST_CASE("scalar equation residual", "[monodromy]")
{
    Connection z = zero_conn(2);
    Section w = sec({"1", "t"}, z);
    CHECK(ode_residual(z, w, cyclic_reduce(z, w), cplx(2, 1)) < 1e-12);

    Connection e(fixtures::euler_half());
    Section we = sec({"1"}, e);
    CHECK(ode_residual(e, we, cyclic_reduce(e, we), cplx(3, 0)) < 1e-9);

    for (auto spec : {fixtures::triangle_nilpotent(), fixtures::triangle_diag()}) {
        Connection c(spec);
        Section wc = sec({"1", "0"}, c);
        CHECK(ode_residual(c, wc, cyclic_reduce(c, wc), cplx(3, 0)) < 1e-7);
    }
}

TEST_CASE("maximal multiplicity sections", "[monodromy]")
{
    Connection e(fixtures::euler_half());
    AchievedSection s = achieve_multiplicity(e, 1, Divisor::at_infinity(1), 3, 0);
    REQUIRE(s.coeffs.size() == 2);
    CHECK(std::abs(s.coeffs[0] / s.coeffs[1] + 3.0) < 1e-9);
    CHECK(s.vanishing_ok);
    CHECK(s.generic_equality);

    Connection tri(fixtures::triangle_diag());
    AchievedSection t = achieve_multiplicity(tri, 0, Divisor(), cplx(3, 1), 1);
    CHECK(t.basis.size() == 2);
    CHECK(t.vanishing_ok);

    Connection z = zero_conn(2);
    try {
        achieve_multiplicity(z, 1, Divisor::at_infinity(1), 3, 0);
        FAIL("expected an error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::DegenerateJet);
    }
    CHECK_THROWS_AS(achieve_multiplicity(e, 1, Divisor::at_infinity(1), 3, 1), Error);
    CHECK_THROWS_AS(achieve_multiplicity(e, 0, Divisor(), 3, 0), Error);
}
