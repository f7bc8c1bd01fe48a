#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "isoq/sieve.hpp"
#include "oracles.hpp"
#include "sieve_support.hpp"

using namespace isoq;

namespace {

std::vector<std::int64_t> views(const std::vector<Label>& ls, std::size_t c = 0)
{
    std::vector<std::int64_t> u;
    for (const auto& l : ls)
        u.push_back(l[c]);
    return u;
}

}  // namespace

TEST(Phase, ExactArithmetic)
{
    EXPECT_EQ(Phase(3, 4) + Phase(3, 4), Phase(1, 2));
    EXPECT_EQ(Phase(1, 4) - Phase(3, 4), Phase(1, 2));
    EXPECT_EQ(3 * Phase(1, 4), Phase(3, 4));
    EXPECT_EQ(Phase(6, 8).to_string(), "3/4");
    EXPECT_THROW(Phase(1, 0), std::invalid_argument);
    EXPECT_THROW(Phase(1, 4) + Phase(1, 8), std::invalid_argument);
}

TEST(AbelianGroup, Basics)
{
    AbelianGroup g({3, 4, 5});
    EXPECT_EQ(g.order(), 60u);
    EXPECT_EQ(g.exponent(), 60u);
    EXPECT_EQ(g.to_string(), "Z_3 x Z_4 x Z_5");
    for (std::uint64_t i = 0; i < g.order(); ++i)
        EXPECT_EQ(g.index(g.element(i)), i);
    EXPECT_EQ(g.character({1, 1, 1}, {1, 1, 1}), Phase(20 + 15 + 12, 60));
    EXPECT_EQ(AbelianGroup(std::vector<std::uint64_t>{}).to_string(), "trivial");
}

TEST(MixedRadix, Examples)
{
    EXPECT_EQ(mixed_radix(AbelianGroup({3, 5}), {1, 4}), 1u);
    EXPECT_EQ(mixed_radix(AbelianGroup({3, 4, 5}), {2, 3, 0}), 11u);
    EXPECT_EQ(mixed_radix(AbelianGroup({3, 4, 5}), {0, 0, 4}), 0u);
    EXPECT_THROW(mixed_radix(AbelianGroup({7}), {3}), std::invalid_argument);
}

TEST(FourierSample, CheatPhases)
{
    AbelianGroup g({8});
    CheatOracle o(g, {3});
    Rng rng(1);
    bool saw2 = false, saw0 = false;
    for (int i = 0; i < 400; ++i) {
        PsiState s = fourier_sample(o, rng);
        EXPECT_EQ(s.theta, Phase(3 * s.label[0], 8));
        if (s.label[0] == 2) {
            saw2 = true;
            EXPECT_EQ(s.theta, Phase(3, 4));
        }
        if (s.label[0] == 0) {
            saw0 = true;
            EXPECT_EQ(s.theta.num, 0);
        }
    }
    EXPECT_TRUE(saw2 && saw0);
}

TEST(FourierSample, HonestMatchesCheat)
{
    AbelianGroup g({5});
    const std::uint64_t perm[5] = {17, 4, 99, 23, 8};
    auto f0 = [&](const Label& x) { return perm[x[0]]; };
    auto f1 = [&](const Label& x) { return perm[(x[0] + 2) % 5]; };
    ASSERT_EQ(oracle::all_shifts({5}, f0, f1), (std::vector<std::vector<std::int64_t>>{{2}}));
    HonestOracle honest(g, f0, f1);
    CheatOracle cheat(g, {2});
    EXPECT_EQ(honest.evaluations(), 10u);
    Rng r1(5), r2(6);
    const int n = 20000;
    std::map<std::pair<std::int64_t, std::int64_t>, int> hc, cc;
    for (int i = 0; i < n; ++i) {
        auto a = honest.sample(r1);
        auto b = cheat.sample(r2);
        ++hc[{a.label[0], a.theta.num * 5 / a.theta.den}];
        ++cc[{b.label[0], b.theta.num * 5 / b.theta.den}];
        ASSERT_EQ(a.theta, Phase(2 * a.label[0], 5));
    }
    // same support: (x, 2x/5) for every x, uniform
    ASSERT_EQ(hc.size(), 5u);
    for (std::int64_t x = 0; x < 5; ++x) {
        std::pair<std::int64_t, std::int64_t> key{x, 2 * x % 5};
        ASSERT_TRUE(hc.count(key) && cc.count(key));
        EXPECT_NEAR(hc[key] / double(n), 0.2, 3 * std::sqrt(0.16 / n));
        EXPECT_NEAR(cc[key] / double(n), 0.2, 3 * std::sqrt(0.16 / n));
    }
    EXPECT_TRUE(honest.verify({2}, r1));
    EXPECT_FALSE(honest.verify({1}, r1));
}

TEST(FourierSample, HonestErrors)
{
    AbelianGroup g({4});
    auto constant = [](const Label&) { return std::uint64_t{7}; };
    auto ident = [](const Label& x) { return static_cast<std::uint64_t>(x[0]); };
    EXPECT_THROW(HonestOracle(g, constant, ident), std::domain_error);
    auto flip = [](const Label& x) { return static_cast<std::uint64_t>((4 - x[0]) % 4); };
    EXPECT_THROW(HonestOracle(g, ident, flip), std::domain_error);
    auto outside = [](const Label& x) { return static_cast<std::uint64_t>(x[0] + 10); };
    EXPECT_THROW(HonestOracle(g, ident, outside), std::domain_error);
}

TEST(CombineD, InputBound)
{
    AbelianGroup g({16});
    CheatOracle o(g, {1});
    Rng rng(1);
    std::vector<PsiState> in{{{9}, Phase(9, 16)}, {{1}, Phase(1, 16)}};
    EXPECT_EQ(combine_d(g, in, 10, 2, rng).reason, AbortReason::input_bound);
    in[0] = {{7}, Phase(7, 16)};
    EXPECT_NE(combine_d(g, in, 10, 2, rng).reason, AbortReason::input_bound);
}

TEST(CombineD, EqualLabelsGivePsiZero)
{
    AbelianGroup g({16});
    Label s{5};
    Rng rng(2);
    std::vector<Label> labels{{3}, {3}};
    auto comb = [&](const std::vector<PsiState>& st, Rng& r) { return combine_d(g, st, 8, 4, r); };
    auto e = support::run_combiner(g, labels, s, comb, 20000, rng);
    auto exact = oracle::exact_combine_d(views(labels), 8, 4);
    // q = 0 for all four strings; {01,10} is the only pair
    EXPECT_EQ(exact.size(), 2u);
    EXPECT_NEAR(exact.at("ok:1,2"), 0.5, 1e-12);
    EXPECT_EQ(support::compare(exact, e.freq, 20000), "");
    EXPECT_EQ(e.audit_violations, 0u);
    for (int i = 0; i < 50; ++i) {
        std::vector<PsiState> st{{{3}, g.character(s, {3})}, {{3}, g.character(s, {3})}};
        auto o = combine_d(g, st, 8, 4, rng);
        if (o.ok()) {
            EXPECT_EQ(o.state->label[0], 0);
            EXPECT_EQ(o.state->theta.num, 0);
        }
    }
}

TEST(CombineD, DistributionMatchesEnumeration)
{
    AbelianGroup g({64});
    Label s{37};
    Rng rng(3);
    for (const auto& labels : std::vector<std::vector<Label>>{{{5}, {17}, {30}}, {{1}, {2}, {4}, {8}}, {{31}, {0}, {12}, {29}}}) {
        auto comb = [&](const std::vector<PsiState>& st, Rng& r) { return combine_d(g, st, 32, 4, r); };
        auto e = support::run_combiner(g, labels, s, comb, 30000, rng);
        EXPECT_EQ(support::compare(oracle::exact_combine_d(views(labels), 32, 4), e.freq, 30000), "");
        EXPECT_EQ(e.audit_violations, 0u);
    }
}

TEST(CombineD, OutputsBelowBoundAndUniform)
{
    AbelianGroup g({1024});
    CheatOracle o(g, {77});
    Rng rng(4);
    std::vector<int> hist(8, 0);
    int ok = 0;
    for (int t = 0; t < 20000; ++t) {
        std::vector<PsiState> st;
        for (int i = 0; i < 8; ++i) {
            PsiState x = o.sample(rng);
            x.label[0] %= 512;
            x.theta = g.character({77}, x.label);
            st.push_back(x);
        }
        auto out = combine_d(g, st, 512, 8, rng);
        if (!out.ok())
            continue;
        ASSERT_LT(out.state->label[0], 8);
        ASSERT_EQ(out.state->theta, g.character({77}, out.state->label));
        ++hist[out.state->label[0]];
        ++ok;
    }
    ASSERT_GT(ok, 1000);
    double chi = 0;
    for (int h : hist)
        chi += (h - ok / 8.0) * (h - ok / 8.0) / (ok / 8.0);
    EXPECT_LT(chi, 24.3);  // chi^2_7 at 0.001
}

TEST(CombineLsb, Example)
{
    AbelianGroup g({8});
    Label s{3};
    Rng rng(5);
    std::vector<Label> labels{{1}, {3}};
    auto comb = [&](const std::vector<PsiState>& st, Rng& r) { return combine_lsb(g, st, 0, 1, r); };
    auto exact = oracle::exact_combine_lsb(views(labels), 1);
    EXPECT_NEAR(exact.at("ok:1,2"), 0.5, 1e-12);
    EXPECT_NEAR(exact.at("abort:single-solution"), 0.5, 1e-12);
    auto e = support::run_combiner(g, labels, s, comb, 20000, rng);
    EXPECT_EQ(support::compare(exact, e.freq, 20000), "");
    for (int i = 0; i < 50; ++i) {
        std::vector<PsiState> st{{{1}, g.character(s, {1})}, {{3}, g.character(s, {3})}};
        auto o = combine_lsb(g, st, 0, 1, rng);
        if (o.ok()) {
            EXPECT_TRUE(o.state->label[0] == 2 || o.state->label[0] == 6);
            EXPECT_EQ(o.state->theta, g.character(s, o.state->label));
        }
    }
}

TEST(CombineLsb, AlreadyDivisibleAndSingleState)
{
    AbelianGroup g({32});
    Label s{9};
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
        std::vector<PsiState> st;
        for (std::int64_t x : {4, 12, 20, 28})
            st.push_back({{x}, g.character(s, {x})});
        auto o = combine_lsb(g, st, 2, 2, rng);
        if (o.ok()) {
            EXPECT_EQ(o.state->label[0] % 4, 0);
        }
    }
    std::vector<PsiState> one{{{3}, g.character(s, {3})}};
    for (int i = 0; i < 20; ++i)
        EXPECT_EQ(combine_lsb(g, one, 0, 1, rng).reason, AbortReason::single_solution);
    std::vector<PsiState> odd{{{3}, g.character(s, {3})}};
    EXPECT_THROW(combine_lsb(g, odd, 1, 2, rng), std::invalid_argument);
    EXPECT_THROW(combine_lsb(AbelianGroup({12}), odd, 0, 1, rng), std::invalid_argument);
}

TEST(CombineLsb, DistributionMatchesEnumeration)
{
    AbelianGroup g({64});
    Label s{21};
    Rng rng(7);
    for (const auto& labels : std::vector<std::vector<Label>>{{{5}, {17}, {30}}, {{8}, {24}, {40}, {12}}}) {
        unsigned l = labels[0][0] % 2 == 0 ? 2 : 0;
        auto comb = [&](const std::vector<PsiState>& st, Rng& r) { return combine_lsb(g, st, l, l + 2, r); };
        auto e = support::run_combiner(g, labels, s, comb, 30000, rng);
        EXPECT_EQ(support::compare(oracle::exact_combine_lsb(views(labels), l + 2), e.freq, 30000), "");
        EXPECT_EQ(e.audit_violations, 0u);
    }
}

TEST(CombineZ, Example)
{
    AbelianGroup g({3, 5});
    Label s{2, 3};
    Rng rng(8);
    std::vector<Label> labels{{1, 2}, {2, 4}};
    auto comb = [&](const std::vector<PsiState>& st, Rng& r) { return combine_z(g, st, 3, 3, r); };
    auto exact = oracle::exact_combine_z(views(labels), 3);
    EXPECT_GT(exact.at("ok:1,2"), 0.0);
    auto e = support::run_combiner(g, labels, s, comb, 20000, rng);
    EXPECT_EQ(support::compare(exact, e.freq, 20000), "");
    EXPECT_EQ(e.audit_violations, 0u);
    int seen = 0;
    for (int i = 0; i < 100; ++i) {
        std::vector<PsiState> st{{{1, 2}, g.character(s, {1, 2})}, {{2, 4}, g.character(s, {2, 4})}};
        auto o = combine_z(g, st, 3, 3, rng);
        if (!o.ok())
            continue;
        ++seen;
        // the larger-mu input minus the smaller one
        EXPECT_EQ(o.state->label, (Label{1, 2}));
        EXPECT_LT(mixed_radix(g, o.state->label), 3u);
    }
    EXPECT_GT(seen, 0);
}

TEST(CombineZ, ZeroPersistenceAndPreconditions)
{
    AbelianGroup g({7, 9, 5});
    Label s{3, 4, 2};
    Rng rng(9);
    for (int i = 0; i < 300; ++i) {
        std::vector<PsiState> st;
        for (int j = 0; j < 4; ++j) {
            Label x{0, 0, static_cast<std::int64_t>(rng() % 5)};
            st.push_back({x, g.character(s, x)});
        }
        auto o = combine_z(g, st, 1, 1, rng);
        if (o.ok()) {
            EXPECT_EQ(mixed_radix(g, o.state->label), 0u);
            EXPECT_EQ(o.state->theta, g.character(s, o.state->label));
        }
    }
    std::vector<PsiState> big{{{5, 0, 0}, g.character(s, {5, 0, 0})}};
    EXPECT_THROW(combine_z(g, big, 5, 1, rng), std::invalid_argument);
    EXPECT_THROW(combine_z(AbelianGroup({7}), big, 5, 1, rng), std::invalid_argument);
}

TEST(CombineZ, SingleComponentDistribution)
{
    AbelianGroup g({11, 3});
    Label s{4, 1};
    Rng rng(10);
    std::vector<Label> labels{{9, 0}, {3, 2}, {7, 1}, {10, 1}};
    auto comb = [&](const std::vector<PsiState>& st, Rng& r) { return combine_z(g, st, 11, 3, r, {0}); };
    auto e = support::run_combiner(g, labels, s, comb, 30000, rng);
    EXPECT_EQ(support::compare(oracle::exact_combine_z(views(labels), 3), e.freq, 30000), "");
    EXPECT_EQ(e.audit_violations, 0u);
}

TEST(Schedule, SmallerLabels65536)
{
    SieveSchedule s = schedule_smaller_labels(65536);
    EXPECT_EQ(s.k, 5u);
    EXPECT_EQ(s.m(), 9u);
    ASSERT_EQ(s.bounds.size(), 10u);
    EXPECT_EQ(s.bounds.front(), 65536u);
    EXPECT_EQ(s.bounds.back(), 2u);
    for (const auto& st : s.stages) {
        EXPECT_TRUE(st.degraded);
        EXPECT_EQ(st.kind, CombinerKind::d);
    }
    auto d = oracle::direct_smaller_labels(65536);
    EXPECT_EQ(s.bounds, d.bounds);
}

TEST(Schedule, SmallerLabelsOverride)
{
    SieveSchedule s = schedule_smaller_labels(65536, {10u, 2u});
    EXPECT_EQ(s.k, 10u);
    ASSERT_EQ(s.bounds.size(), 3u);
    // 65536 / sqrt(32768)
    EXPECT_EQ(s.bounds[1], 362u);
    EXPECT_EQ(s.bounds[2], 2u);
}

TEST(Schedule, ZeroComponents65536)
{
    SieveSchedule s = schedule_zero_components(65536);
    EXPECT_EQ(s.k, 5u);
    EXPECT_EQ(s.m(), 24u);
    EXPECT_EQ(s.bounds.back(), 1u);
    EXPECT_EQ(s.bounds, oracle::direct_zero_components(65536).bounds);
    SieveSchedule one = schedule_zero_components(1000, {std::nullopt, 1u});
    ASSERT_EQ(one.m(), 1u);
    EXPECT_EQ(one.bounds, (std::vector<std::uint64_t>{1000, 1}));
    EXPECT_TRUE(one.stages[0].degraded);
}

TEST(Schedule, MatchesDirectEvaluation)
{
    for (std::uint64_t n : {1024ull, 4096ull, 100000ull, 1ull << 20, 999983ull, 1ull << 24}) {
        auto a = schedule_smaller_labels(n);
        auto d = oracle::direct_smaller_labels(n);
        EXPECT_EQ(a.k, d.k) << n;
        EXPECT_EQ(a.bounds, d.bounds) << n;
        for (std::size_t i = 0; i < a.stages.size() && i < d.degraded.size(); ++i)
            EXPECT_EQ(a.stages[i].degraded, d.degraded[i]) << n << " stage " << i;
        auto z = schedule_zero_components(n);
        auto dz = oracle::direct_zero_components(n);
        EXPECT_EQ(z.bounds, dz.bounds) << n;
        for (std::size_t i = 0; i < z.stages.size() && i < dz.degraded.size(); ++i)
            EXPECT_EQ(z.stages[i].degraded, dz.degraded[i]) << n << " stage " << i;
    }
}

TEST(StagePlan, OddSingleComponent)
{
    SieveSchedule p = build_stage_plan(AbelianGroup({9}), 0, 0);
    ASSERT_GT(p.m(), 0u);
    for (const auto& st : p.stages)
        EXPECT_EQ(st.kind, CombinerKind::d);
    // x -> 2^{-j} x view for odd moduli
    SieveSchedule p2 = build_stage_plan(AbelianGroup({9}), 0, 2);
    EXPECT_EQ(p2.stages[0].view.multiplier, 7);
}

TEST(StagePlan, PowerOfTwoLowBits)
{
    SieveSchedule p = build_stage_plan(AbelianGroup({16}), 0, 3, PlanOptions{3u});
    ASSERT_GE(p.m(), 2u);
    EXPECT_EQ(p.stages[0].kind, CombinerKind::lsb);
    EXPECT_EQ(p.stages[0].low_in, 0u);
    EXPECT_EQ(p.stages[0].low_out, 2u);
    EXPECT_EQ(p.stages[1].kind, CombinerKind::lsb);
    EXPECT_EQ(p.stages[1].low_out, 3u);
    // 16 >> 3 = 2 leaves a single high bit: labels already in {0, 1}
    EXPECT_EQ(p.m(), 2u);
    SieveSchedule q = build_stage_plan(AbelianGroup({64}), 0, 1, PlanOptions{3u});
    EXPECT_EQ(q.stages.back().kind, CombinerKind::d);
    EXPECT_EQ(q.stages.back().view.shift, 1u);
    for (const auto& st : q.stages)
        if (st.kind == CombinerKind::d) {
            EXPECT_GE(st.bound_in, 2 * st.bound_out);
        }
}

TEST(StagePlan, ZeroStagesFirst)
{
    SieveSchedule p = build_stage_plan(AbelianGroup({3, 16}), 1, 0);
    ASSERT_GT(p.m(), 0u);
    EXPECT_EQ(p.stages[0].kind, CombinerKind::z);
    EXPECT_EQ(p.stages[0].view.component, 0u);
    bool after = false;
    for (const auto& st : p.stages) {
        if (st.kind != CombinerKind::z)
            after = true;
        else
            EXPECT_FALSE(after);
    }
    EXPECT_THROW(build_stage_plan(AbelianGroup({12}), 0, 0), std::invalid_argument);
    EXPECT_THROW(build_stage_plan(AbelianGroup({3, 16}), 2, 0), std::invalid_argument);
}

TEST(RunSieve, EmptyScheduleAndBudget)
{
    AbelianGroup g({8});
    CheatOracle o(g, {5});
    Rng rng(11);
    Sieve::Source src = [&](Rng& r) { return o.sample(r); };
    SieveSchedule empty;
    empty.k = 2;
    SieveStats st;
    auto out = run_sieve(g, empty, src, rng, 10, &st);
    ASSERT_TRUE(out);
    EXPECT_EQ(st.preparations, 1u);
    EXPECT_FALSE(run_sieve(g, empty, src, rng, 0));
    EXPECT_FALSE(run_sieve(g, build_stage_plan(g, 0, 0), src, rng, 0));
}

TEST(RunSieve, PsiOneOnZ8)
{
    AbelianGroup g({8});
    CheatOracle o(g, {5});
    Rng rng(12);
    Sieve sieve(g, build_stage_plan(g, 0, 0), [&](Rng& r) { return o.sample(r); }, 1'000'000);
    std::optional<PsiState> got;
    for (int i = 0; i < 1000 && !got; ++i) {
        auto s = sieve.next(rng);
        ASSERT_TRUE(s);
        ASSERT_LT(s->label[0], 2);
        EXPECT_EQ(s->theta, g.character({5}, s->label));
        if (s->label[0] == 1)
            got = s;
    }
    ASSERT_TRUE(got);
    EXPECT_EQ(got->theta, Phase(5, 8));
    // space stays O(mk)
    EXPECT_LE(sieve.stats().max_pool, build_stage_plan(g, 0, 0).m() * build_stage_plan(g, 0, 0).k);
}

TEST(Reconstruct, Examples)
{
    auto r = reconstruct({Phase(3, 4), Phase(1, 2)}, 4);
    EXPECT_EQ(r.value, 3u);
    EXPECT_NEAR(r.best, 16.0, 1e-9);
    EXPECT_NEAR(r.runner_up, 0.0, 1e-9);
    EXPECT_FALSE(r.tie);
    EXPECT_EQ(reconstruct({Phase(0, 2)}, 2).value, 0u);
    EXPECT_EQ(reconstruct({Phase(1, 2)}, 2).value, 1u);
    EXPECT_EQ(reconstruct({Phase(0, 8), Phase(0, 8), Phase(0, 8)}, 8).value, 0u);
    EXPECT_THROW(reconstruct({}, 1), std::invalid_argument);
}

TEST(Reconstruct, ExactForAllSmallModuli)
{
    for (std::uint64_t n = 2; n <= 64; ++n) {
        const unsigned w = reconstruct_width(n);
        for (std::uint64_t s = 0; s < n; ++s) {
            std::vector<Phase> th;
            for (unsigned j = 0; j < w; ++j)
                th.push_back(Phase(static_cast<std::int64_t>(s * (1ull << j) % n), static_cast<std::int64_t>(n)));
            auto r = reconstruct(th, n);
            ASSERT_EQ(r.value, s) << "N=" << n;
            ASSERT_FALSE(r.tie) << "N=" << n;
            if ((n & (n - 1)) == 0) {
                ASSERT_NEAR(r.best, std::pow(4.0, w), 1e-6);
            }
        }
    }
    EXPECT_EQ(reconstruct_width(16), 4u);
    EXPECT_EQ(reconstruct_width(15), 4u);
    EXPECT_EQ(reconstruct_width(17), 5u);
}

TEST(CrtSplit, RoundTripAndCharacters)
{
    AbelianGroup g({12, 5, 8});
    CrtSplit c(g);
    EXPECT_EQ(c.split.to_string(), "Z_4 x Z_3 x Z_5 x Z_8");
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        Label s = g.random(rng), x = g.random(rng);
        EXPECT_EQ(c.secret_from_split(c.secret_to_split(s)), s);
        EXPECT_EQ(g.character(s, x), c.split.character(c.secret_to_split(s), c.to_split(x)));
    }
}

namespace {

Label solve_cheat(const std::vector<std::uint64_t>& mods, const Label& s, std::uint64_t seed)
{
    AbelianGroup g(mods);
    CheatOracle o(g, s);
    Rng rng(seed);
    SolveOptions opt;
    opt.audit_secret = s;
    SolveResult r = solve_hidden_shift(o, rng, opt);
    EXPECT_EQ(r.stats.audit_violations, 0u);
    EXPECT_GT(r.stats.audit_checks, 0u);
    return r.shift;
}

}  // namespace

TEST(Solve, CheatExamples)
{
    EXPECT_EQ(solve_cheat({15}, {11}, 1), (Label{11}));
    EXPECT_EQ(solve_cheat({8}, {0}, 2), (Label{0}));
    EXPECT_EQ(solve_cheat({3, 4}, {2, 3}, 3), (Label{2, 3}));
    EXPECT_EQ(solve_cheat({2, 2}, {1, 0}, 4), (Label{1, 0}));
    EXPECT_EQ(solve_cheat({9}, {7}, 5), (Label{7}));
}

TEST(Solve, AgreesWithBruteForceShift)
{
    AbelianGroup g({15});
    CheatOracle o(g, {11});
    auto shifts = oracle::all_shifts({15}, [&](const Label& x) { return o.f0(x); }, [&](const Label& x) { return o.f1(x); });
    ASSERT_EQ(shifts.size(), 1u);
    EXPECT_EQ(shifts[0], (std::vector<std::int64_t>{11}));
    // s mod 3 = 2 and s mod 5 = 1
    EXPECT_EQ(solve_cheat({15}, {11}, 7)[0] % 3, 2);
    EXPECT_EQ(solve_cheat({15}, {11}, 8)[0] % 5, 1);
}

TEST(Solve, HonestOracle)
{
    AbelianGroup g({5, 8});
    std::vector<std::uint64_t> perm(g.order());
    std::iota(perm.begin(), perm.end(), 1000);
    Rng shuf(14);
    std::shuffle(perm.begin(), perm.end(), shuf);
    Label s{3, 6};
    auto f0 = [&](const Label& x) { return perm[g.index(x)]; };
    auto f1 = [&](const Label& x) { return perm[g.index(g.add(x, s))]; };
    auto brute = oracle::all_shifts({5, 8}, f0, f1);
    ASSERT_EQ(brute.size(), 1u);
    HonestOracle o(g, f0, f1);
    Rng rng(15);
    SolveResult r = solve_hidden_shift(o, rng);
    EXPECT_EQ(r.shift, brute[0]);
}

TEST(Solve, SmallArity)
{
    AbelianGroup g({64, 5});
    CheatOracle o(g, {45, 2});
    Rng rng(17);
    SolveOptions opt;
    opt.plan.k = 3;
    opt.audit_secret = Label{45, 2};
    SolveResult r = solve_hidden_shift(o, rng, opt);
    EXPECT_EQ(r.shift, (Label{45, 2}));
    EXPECT_EQ(r.stats.audit_violations, 0u);
}

TEST(Solve, TinyBudgetExhaustsRetries)
{
    AbelianGroup g({64});
    CheatOracle o(g, {9});
    Rng rng(16);
    SolveOptions opt;
    opt.budget = 3;
    opt.retry_cap = 2;
    EXPECT_THROW(solve_hidden_shift(o, rng, opt), std::runtime_error);
}
