#include <catch_amalgamated.hpp>

#include "mconn/expr.hpp"
#include "oracles.hpp"

using namespace mconn;

namespace {

Section sec(std::vector<std::string> comps, std::vector<int> twists)
{
    Section w;
    for (const auto& c : comps) w.comps.push_back(parse_ratfun(c));
    w.splitting.twists = std::move(twists);
    return w;
}

} // namespace

TEST_CASE("chern class", "[bundle]")
{
    CHECK(chern({{0, 0}}) == 0);
    CHECK(chern({{2, -1}}) == 1);
    CHECK(chern({{3}}) == 3);
    CHECK(chern({{-1, 2}}) == chern({{2, -1}}));
    CHECK(chern({{4, -2, 1}}) == chern({{1, 4, -2}}));
}

TEST_CASE("divisor grammar", "[bundle]")
{
    Divisor d = parse_divisor("0^1,1^1,inf^2");
    CHECK(d.degree() == 4);
    CHECK(d.infinity_order() == 2);
    CHECK(d.order_at(1) == 1);
    CHECK(d.str() == "0^1,1^1,inf^2");
    CHECK(parse_divisor(d.str()) == d);
    CHECK(parse_divisor(" 1/2+i ^ 3 , inf").str() == "1/2+i^3,inf^1");
    CHECK(parse_divisor("").empty());
    CHECK(Divisor::at_infinity(3).str() == "inf^3");
    CHECK(Divisor::at_infinity(0).empty());
    for (const char* bad : {"0^0", "0^-1", "0,0", "inf^1,inf^2", "0^", "^2", "t^1", "0^1,"}) {
        INFO(bad);
        CHECK_THROWS_AS(parse_divisor(bad), ParseError);
    }
}

TEST_CASE("pole profiles", "[bundle]")
{
    std::vector<GaussRat> c0{0};
    PoleProfile a = pole_profile(sec({"1/t", "1"}, {0, 0}), c0);
    REQUIRE(a.finite.size() == 1);
    CHECK(a.finite[0].first == GaussRat(0));
    CHECK(a.finite[0].second == 1);
    CHECK(a.infinity_order == 0);
    CHECK(a.degree == 1);

    PoleProfile b = pole_profile(sec({"t^2"}, {0}), {});
    CHECK(b.finite.empty());
    CHECK(b.infinity_order == 2);
    CHECK(b.degree == 2);

    PoleProfile c = pole_profile(sec({"1"}, {3}), {});
    CHECK(c.infinity_order == -3);
    CHECK(c.degree == 0);

    try {
        pole_profile(sec({"1/(t-2)", "1/(t^2+1)"}, {0, 0}), c0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::PoleOutsideAllowedSet);
        std::string msg = e.what();
        CHECK(msg.find('2') != std::string::npos);
    }
    try {
        pole_profile(sec({"0", "0"}, {0, 0}), c0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroSection);
    }
}

TEST_CASE("section space bases", "[bundle]")
{
    auto b1 = section_space_basis({{0, 0}}, Divisor::at_infinity(1));
    REQUIRE(b1.size() == 4);
    CHECK(b1[0] == sec({"1", "0"}, {0, 0}));
    CHECK(b1[1] == sec({"t", "0"}, {0, 0}));
    CHECK(b1[2] == sec({"0", "1"}, {0, 0}));
    CHECK(b1[3] == sec({"0", "t"}, {0, 0}));

    auto b2 = section_space_basis({{0}}, parse_divisor("0^1"));
    REQUIRE(b2.size() == 2);
    CHECK(b2[0] == sec({"1/t"}, {0}));
    CHECK(b2[1] == sec({"1"}, {0}));

    CHECK(section_space_basis({{-2, 0}}, Divisor::at_infinity(1)).size() == 2);
    CHECK(section_space_basis({{-3}}, Divisor::at_infinity(1)).empty());
}

TEST_CASE("basis elements are in S(n, E) and independent", "[bundle]")
{
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> tw(-2, 2), ord(1, 2);
    for (int trial = 0; trial < 20; ++trial) {
        SplittingType s{{tw(rng), tw(rng)}};
        std::vector<Divisor::Entry> entries{{Point(0), ord(rng)}, {Point(GaussRat(1, 1)), ord(rng)}, {Point::infinity(), ord(rng)}};
        Divisor e(entries);
        std::vector<GaussRat> allowed = e.finite_support();
        auto basis = section_space_basis(s, e);
        int expected = 0;
        for (int a : s.twists) expected += std::max(0, a + e.degree() + 1);
        REQUIRE(static_cast<int>(basis.size()) == expected);
        // coefficient matrix: multiply by F and read off polynomial coefficients
        Poly f(1);
        for (const auto& en : entries)
            if (!en.point.is_infinity()) f = f * Poly::linear(en.point.value()).pow(en.order);
        std::size_t width = 0;
        for (const auto& w : basis) {
            PoleProfile p = pole_profile(w, allowed);
            CHECK(p.degree <= e.degree());
            for (const auto& [pt, o] : p.finite) CHECK(o <= e.order_at(pt));
            for (const auto& c : w.comps) width = std::max(width, static_cast<std::size_t>((c * RatFun(f)).num().degree() + 1));
        }
        if (basis.empty()) continue;
        GaussMat m(basis.size(), width * 2);
        for (std::size_t k = 0; k < basis.size(); ++k)
            for (std::size_t i = 0; i < 2; ++i) {
                RatFun g = basis[k].comps[i] * RatFun(f);
                REQUIRE(g.is_polynomial());
                for (std::size_t j = 0; j < width; ++j) m(k, i * width + j) = g.num().coeff(static_cast<int>(j));
            }
        CHECK(rank(m) == basis.size());
    }
}

TEST_CASE("pole order of a product is subadditive", "[bundle]")
{
    std::mt19937_64 rng(43);
    std::vector<GaussRat> pts{0, 2};
    for (int trial = 0; trial < 40; ++trial) {
        RatFun f = oracle::random_ratfun(rng, pts, 3, 2);
        Section w{{oracle::random_ratfun(rng, pts, 3, 2), oracle::random_ratfun(rng, pts, 3, 2)}, {{1, -1}}};
        if (f.is_zero() || w.is_zero()) continue;
        Section fw = f * w;
        if (fw.is_zero()) continue;
        Section fs{{f}, {{0}}};
        PoleProfile pf = pole_profile(fs, pts), pw = pole_profile(w, pts), pfw = pole_profile(fw, pts);
        auto at = [](const PoleProfile& p, const GaussRat& c) {
            for (const auto& [q, o] : p.finite)
                if (q == c) return o;
            return 0;
        };
        for (const auto& c : pts) CHECK(at(pfw, c) <= at(pf, c) + at(pw, c));
        CHECK(pfw.infinity_order <= pf.infinity_order + pw.infinity_order);
    }
}
