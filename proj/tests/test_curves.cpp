#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "isoq/curves.hpp"
#include "oracles.hpp"

using namespace isoq;

TEST(Curve, Preconditions)
{
    EXPECT_THROW(Curve(3, 1, 1), std::invalid_argument);
    EXPECT_THROW(Curve(9, 1, 1), std::invalid_argument);
    EXPECT_THROW(Curve(5, 0, 0), std::invalid_argument);
}

TEST(PointCount, Example)
{
    CurveContext c = point_count(Curve(5, 1, 1));
    EXPECT_EQ(c.n, 9u);
    EXPECT_EQ(c.t, -3);
    EXPECT_EQ(c.delta.value(), -11);
    EXPECT_EQ(c.conductor_v, 1u);
    EXPECT_EQ(c.j, 2u);
    EXPECT_THROW(point_count(Curve(5, 0, 1)), std::domain_error);
    EXPECT_EQ(oracle::count_points(5, 0, 1), 6u);
}

TEST(PointCount, MatchesOracleAndDiscriminant)
{
    for (std::uint64_t p : {7u, 11u, 13u, 101u, 197u})
        for (std::uint64_t a = 0; a < 8; ++a)
            for (std::uint64_t b = 1; b < 8; ++b) {
                if ((4 * a * a * a + 27 * b * b) % p == 0)
                    continue;
                Curve c(p, a, b);
                EXPECT_EQ(count_points(c), oracle::count_points(p, a, b));
                std::int64_t t = static_cast<std::int64_t>(p) + 1 - static_cast<std::int64_t>(oracle::count_points(p, a, b));
                if (t % static_cast<std::int64_t>(p) == 0)
                    continue;
                CurveContext ctx = point_count(c);
                std::int64_t v = static_cast<std::int64_t>(ctx.conductor_v);
                EXPECT_EQ(t * t - 4 * static_cast<std::int64_t>(p), static_cast<std::int64_t>(ctx.delta.value()) * v * v);
                EXPECT_TRUE(is_fundamental(ctx.delta));
            }
}

TEST(DivisionPolynomial, Examples)
{
    Curve c(5, 1, 1);
    FieldPoly psi3 = division_polynomial(c, 3);
    EXPECT_EQ(psi3, FieldPoly(5, {4, 2, 1, 0, 3}));
    EXPECT_EQ(psi3.to_string(), "3x^4 + x^2 + 2x + 4");
    for (std::uint64_t a = 1; a < 5; ++a)
        EXPECT_EQ(division_polynomial(Curve(101, a, 3), 3).degree(), 4);
    EXPECT_EQ(division_polynomial(Curve(7, 1, 1), 5).degree(), 12);
    EXPECT_EQ(division_polynomial(Curve(101, 2, 3), 7).degree(), 24);
}

TEST(Eigenvalue, Examples)
{
    CurveContext ctx = point_count(Curve(5, 1, 1));
    auto pf = prime_form(3, ctx.delta);
    ASSERT_TRUE(pf);
    EXPECT_EQ(pf->form.b(), 1);
    std::uint64_t lam = eigenvalue_of(*pf, ctx);
    EXPECT_EQ(lam, 2u);
    EXPECT_EQ((lam * lam + 3 * lam + 5) % 3, 0u);
    std::uint64_t lam2 = eigenvalue_of(pf->conjugate(), ctx);
    EXPECT_EQ(lam2, 1u);
    EXPECT_EQ(lam * lam2 % 3, 5u % 3);
}

TEST(Eigenvalue, EllDividingConductorRejected)
{
    Curve c = fixtures::delta47_curve();
    CurveContext ctx = point_count(c);
    ASSERT_EQ(ctx.conductor_v % 2, 0u);
    auto two = prime_form(3, ctx.delta);
    ASSERT_TRUE(two);
    EXPECT_NO_THROW(eigenvalue_of(*two, ctx));
    // same curve data with 3 | v
    CurveContext fake = ctx;
    fake.conductor_v = 3;
    auto pf = prime_form(3, ctx.delta);
    ASSERT_TRUE(pf);
    EXPECT_THROW(eigenvalue_of(*pf, fake), std::invalid_argument);
}

TEST(KernelPolynomial, Example)
{
    CurveContext ctx = point_count(Curve(5, 1, 1));
    FieldPoly h2 = kernel_polynomial(ctx, 3, 2);
    FieldPoly h1 = kernel_polynomial(ctx, 3, 1);
    EXPECT_EQ(h2, FieldPoly(5, {4, 1}));
    EXPECT_EQ(h2.evaluate(1), 0u);
    EXPECT_EQ(h1, FieldPoly(5, {3, 1}));
    // complementary factors of psi_3 with disjoint roots
    FieldPoly psi = division_polynomial(ctx.curve, 3);
    EXPECT_TRUE((psi % h1).is_zero());
    EXPECT_TRUE((psi % h2).is_zero());
    EXPECT_EQ(gcd(h1, h2).degree(), 0);
}

TEST(KernelPolynomial, MatchesTorsionOracle)
{
    std::mt19937_64 orng(123);
    int checked = 0;
    for (std::uint64_t p : {13u, 47u, 101u, 151u, 199u})
        for (std::uint64_t a = 1; a < 5; ++a)
            for (std::uint64_t b = 1; b < 4; ++b) {
                if ((4 * a * a * a + 27 * b * b) % p == 0)
                    continue;
                Curve c(p, a, b);
                std::optional<CurveContext> ctx;
                try {
                    ctx = point_count(c);
                } catch (const std::domain_error&) {
                    continue;
                }
                for (std::uint64_t ell : {3u, 5u, 7u}) {
                    if (ctx->conductor_v % ell == 0 || p == ell)
                        continue;
                    auto pf = prime_form(ell, ctx->delta);
                    if (!pf)
                        continue;
                    for (const PrimeForm& f : {*pf, pf->conjugate()}) {
                        std::uint64_t lam = eigenvalue_of(f, *ctx);
                        FieldPoly h = kernel_polynomial(*ctx, ell, lam);
                        ASSERT_EQ(h.degree(), static_cast<long>((ell - 1) / 2));
                        ASSERT_EQ(h.leading(), 1u);
                        auto es = oracle::frobenius_eigenspace(p, a, b, ell, lam, orng);
                        std::set<std::vector<std::uint64_t>> roots(es.xs.begin(), es.xs.end());
                        ASSERT_EQ(roots.size(), (ell - 1) / 2);
                        for (const auto& x : es.xs)
                            EXPECT_TRUE(es.field->is_zero(es.field->eval(h.coeffs(), x)))
                                << "p=" << p << " A=" << a << " B=" << b << " ell=" << ell;
                        ++checked;
                    }
                }
            }
    EXPECT_GT(checked, 20);
}

TEST(Velu, TrivialClassGroup)
{
    CurveContext ctx = point_count(Curve(5, 1, 1));
    auto pf = prime_form(3, ctx.delta);
    IsogenyStep s = isogeny_step(ctx, *pf, +1);
    EXPECT_EQ(s.codomain.j_invariant(), 2u);
    EXPECT_EQ(count_points(s.codomain), 9u);
}

TEST(Velu, ConjugateStepCancels)
{
    Curve c = fixtures::delta47_curve();
    CurveContext ctx = point_count(c);
    for (std::uint64_t ell : {3u, 7u, 17u}) {
        auto pf = prime_form(ell, ctx.delta);
        if (!pf || ctx.conductor_v % ell == 0)
            continue;
        IsogenyStep fwd = isogeny_step(ctx, *pf, +1);
        CurveContext mid = point_count(fwd.codomain);
        EXPECT_EQ(mid.n, ctx.n);
        IsogenyStep back = isogeny_step(mid, *pf, -1);
        EXPECT_EQ(back.codomain.j_invariant(), ctx.j);
    }
}

TEST(Velu, RejectsNonKernel)
{
    Curve c(101, 2, 3);
    FieldPoly psi = division_polynomial(c, 3);
    std::uint64_t r = 0;
    while (psi.evaluate(r) == 0)
        ++r;
    EXPECT_THROW(velu_codomain(c, FieldPoly(101, {101 - r, 1})), std::invalid_argument);
    EXPECT_THROW(velu_codomain(c, FieldPoly(101, {1, 2})), std::invalid_argument);
}

TEST(MaximalOrder, TwoTorsionCriterion)
{
    // v = 2 curves over F_83 with delta = -47: maximal iff the cubic splits
    int seen = 0;
    for (std::uint64_t a = 0; a < 83; ++a)
        for (std::uint64_t b = 0; b < 83; ++b) {
            if ((4 * a * a * a + 27 * b * b) % 83 == 0)
                continue;
            Curve c(83, a, b);
            std::optional<CurveContext> ctx;
            try {
                ctx = point_count(c);
            } catch (const std::domain_error&) {
                continue;
            }
            if (ctx->delta.value() != -47)
                continue;
            int roots = 0;
            for (std::uint64_t x = 0; x < 83; ++x)
                roots += (x * x % 83 * x + a * x + b) % 83 == 0;
            EXPECT_EQ(is_maximal_order(*ctx), roots == 3);
            ++seen;
        }
    EXPECT_GT(seen, 0);
}

TEST(Star, SmoothExamples)
{
    Curve c = fixtures::delta47_curve();
    CurveContext ctx = point_count(c);
    EXPECT_EQ(star_smooth(ctx, {}).j, ctx.j);
    auto pf = prime_form(3, ctx.delta);
    ASSERT_TRUE(pf);
    EXPECT_EQ(star_smooth(ctx, {{*pf, 1}, {*pf, -1}}).j, ctx.j);
    // [3] generates Z_5: five steps return, fewer do not
    std::set<std::uint64_t> orbit;
    for (int k = 0; k < 5; ++k)
        orbit.insert(star_smooth(ctx, {{*pf, k}}).j);
    EXPECT_EQ(orbit.size(), 5u);
    EXPECT_EQ(star_smooth(ctx, {{*pf, 5}}).j, ctx.j);
}

TEST(Star, ClassFunction)
{
    Curve c = fixtures::delta47_curve();
    Instance in = make_instance(c, c);
    AttackContext a1(in, AttackConfig{}), a2(in, AttackConfig{});
    Rng r1(1), r2(999);
    const auto& g = a1.group();
    EXPECT_EQ(a1.evaluator()(in.ctx0, g.identity(), r1).j, in.ctx0.j);
    for (const auto& f : g.elements()) {
        StarResult x = a1.evaluator()(in.ctx0, f, r1);
        EXPECT_EQ(x.j, a2.evaluator()(in.ctx0, f, r2).j);
        CurveContext mid = point_count(x.curve);
        EXPECT_EQ(a1.evaluator()(mid, inverse(f), r1).j, in.ctx0.j);
    }
}
