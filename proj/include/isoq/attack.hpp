#ifndef ISOQ_ATTACK_HPP
#define ISOQ_ATTACK_HPP

// End to end: the quotient [s] with [s] * j(E0) = j(E1), found by turning the
// star action into a pair of hiding functions on the class group and handing
// them to the hidden shift solver.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "isoq/arith.hpp"
#include "isoq/classgroup.hpp"
#include "isoq/curves.hpp"
#include "isoq/relations.hpp"
#include "isoq/sieve.hpp"

namespace isoq {

struct Instance {
    std::uint64_t p = 0;
    Curve e0, e1;
    CurveContext ctx0, ctx1;
    Discriminant delta;
};

struct Quotient {
    QuadForm cls;
};

/// Validates a pair of curves as an attack instance: same field, same point
/// count, ordinary, maximal order, j not 0 or 1728. A given delta must agree
/// with the one recovered from the trace.
inline Instance make_instance(const Curve& e0, const Curve& e1, const std::optional<Discriminant>& delta = std::nullopt,
                              const CountOptions& count = {})
{
    if (e0.p() != e1.p())
        throw std::invalid_argument("instance: curves over different fields");
    Instance in{e0.p(), e0, e1, point_count(e0, count), point_count(e1, count), Discriminant(-3)};
    if (in.ctx0.n != in.ctx1.n)
        throw std::invalid_argument("instance: curves are not isogenous (point counts differ)");
    if (!(in.ctx0.delta == in.ctx1.delta) || in.ctx0.conductor_v != in.ctx1.conductor_v)
        throw std::invalid_argument("instance: curves have different discriminants");
    in.delta = in.ctx0.delta;
    if (delta && !(*delta == in.delta))
        throw std::invalid_argument("instance: given discriminant does not match the point count");
    for (const auto* c : {&in.ctx0, &in.ctx1}) {
        if (c->j == 0 || c->j == 1728 % c->curve.p())
            throw std::invalid_argument("instance: j = 0 and j = 1728 are not supported");
        if (!is_maximal_order(*c))
            throw std::invalid_argument("instance: endomorphism ring is not the maximal order");
    }
    return in;
}

struct AttackConfig {
    std::optional<std::uint64_t> walk_t;    // default max(2, ceil ln|delta|)
    std::optional<std::uint64_t> fb_bound;  // starting factor-base bound
    std::uint64_t relation_iters = 400;
    std::uint64_t relation_attempts = 8;
    bool verify_steps = true;
    SolveOptions solve;
    EnumerateOptions enumerate;
};

/// Class group, factor base and memoised star evaluation for one instance.
class AttackContext {
public:
    AttackContext(const Instance& in, const AttackConfig& cfg)
        : group_(enumerate_class_group(in.delta, cfg.enumerate)),
          evaluator_(make_factor_base(in, group_, cfg), walk_length(in, cfg), search_options(cfg))
    {
    }

    const ClassGroup& group() const { return group_; }
    StarEvaluator& evaluator() { return evaluator_; }
    const FactorBase& factor_base() const { return evaluator_.factor_base(); }

    /// Moduli for the hidden shift group; empty when h = 1.
    AbelianGroup shift_group() const { return AbelianGroup(group_.orders()); }

private:
    static std::uint64_t walk_length(const Instance& in, const AttackConfig& cfg)
    {
        if (cfg.walk_t)
            return *cfg.walk_t;
        return std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::ceil(std::log(static_cast<double>(in.delta.abs())))));
    }

    static StarSearchOptions search_options(const AttackConfig& cfg)
    {
        StarSearchOptions o;
        o.relation.max_iters = cfg.relation_iters;
        o.relation_attempts = cfg.relation_attempts;
        o.star.verify_steps = cfg.verify_steps;
        return o;
    }

    // Raise the bound until the prime forms generate the whole class group;
    // otherwise some classes would have no relation at all.
    static FactorBase make_factor_base(const Instance& in, const ClassGroup& g, const AttackConfig& cfg)
    {
        FactorBaseOptions fo;
        // at desk scale L(z) is below the largest reduced norm sqrt(|delta|/3),
        // so start from the latter
        std::uint64_t bound = cfg.fb_bound ? *cfg.fb_bound : 3;
        if (!cfg.fb_bound) {
            double l = subexp_l(relation_scale(in.delta, Integer(in.p)), default_smoothness_z);
            double reduced = std::sqrt(static_cast<double>(in.delta.abs()) / 3.0);
            bound = std::max<std::uint64_t>(bound, static_cast<std::uint64_t>(std::ceil(std::max(l, reduced))));
        }
        const std::uint64_t cap = std::max<std::uint64_t>(1000, 64 * static_cast<std::uint64_t>(g.class_number()));
        for (; bound <= cap; bound = bound * 3 / 2 + 1) {
            fo.forced_bound = bound;
            std::optional<FactorBase> fb;
            try {
                fb = build_factor_base(in.delta, Integer(in.p), Integer(in.ctx0.n), in.ctx0.conductor_v,
                                       default_smoothness_z, fo);
            } catch (const std::runtime_error&) {
                continue;
            }
            if (generates(g, *fb))
                return std::move(*fb);
        }
        throw std::runtime_error("attack: no factor base up to the cap generates the class group");
    }

    static bool generates(const ClassGroup& g, const FactorBase& fb)
    {
        std::set<std::size_t> seen{*g.index_of(g.identity())};
        std::vector<QuadForm> frontier{g.identity()};
        while (!frontier.empty()) {
            QuadForm f = frontier.back();
            frontier.pop_back();
            for (const auto& pf : fb.primes) {
                QuadForm n = compose(f, pf.form);
                if (seen.insert(*g.index_of(n)).second)
                    frontier.push_back(n);
            }
        }
        return seen.size() == g.class_number();
    }

    ClassGroup group_;
    StarEvaluator evaluator_;
};

/// f_c(x) = (g_1^{x_1} ... g_k^{x_k}) * j(E_c).
inline std::uint64_t hiding_value(int c, const Label& exponents, const Instance& in, AttackContext& actx, Rng& rng)
{
    if (c != 0 && c != 1)
        throw std::invalid_argument("hiding_value: c must be 0 or 1");
    const auto& orders = actx.group().orders();
    if (exponents.size() != orders.size())
        throw std::invalid_argument("hiding_value: wrong number of exponents");
    for (std::size_t i = 0; i < orders.size(); ++i)
        if (exponents[i] < 0 || static_cast<std::uint64_t>(exponents[i]) >= orders[i])
            throw std::out_of_range("hiding_value: exponent outside its component");
    const QuadForm cls = actx.group().from_exponents(exponents);
    return actx.evaluator()(c == 0 ? in.ctx0 : in.ctx1, cls, rng).j;
}

inline bool verify_quotient(const Instance& in, const Quotient& q, StarEvaluator& ev, Rng& rng)
{
    if (!(q.cls.discriminant() == in.delta))
        return false;
    return ev(in.ctx0, q.cls, rng).j == in.ctx1.j;
}

inline bool verify_quotient(const Instance& in, const Quotient& q, AttackContext& actx, Rng& rng)
{
    return verify_quotient(in, q, actx.evaluator(), rng);
}

struct AttackResult {
    Quotient quotient;
    Label shift;
    std::string structure;
    SolveStats stats;
    std::uint64_t oracle_evaluations = 0;
};

inline AttackResult run_attack(const Instance& in, AttackContext& actx, Rng& rng, const SolveOptions& solve = {})
{
    const ClassGroup& g = actx.group();
    AttackResult res{Quotient{g.identity()}, {}, g.structure(), {}, 0};
    auto f0 = [&](const Label& x) { return hiding_value(0, x, in, actx, rng); };
    auto f1 = [&](const Label& x) { return hiding_value(1, x, in, actx, rng); };
    if (g.orders().empty()) {
        res.oracle_evaluations = 2;
        if (f0({}) != f1({}))
            throw std::runtime_error("run_attack: trivial class group but j(E0) != j(E1)");
    } else {
        HonestOracle oracle(actx.shift_group(), f0, f1);
        res.oracle_evaluations = oracle.evaluations();
        SolveResult sr = solve_hidden_shift(oracle, rng, solve);
        res.shift = sr.shift;
        res.stats = sr.stats;
        res.quotient = {g.from_exponents(sr.shift)};
    }
    if (!verify_quotient(in, res.quotient, actx, rng))
        throw std::runtime_error("run_attack: recovered class does not map E0 to E1");
    return res;
}

inline AttackResult run_attack(const Instance& in, const AttackConfig& cfg, Rng& rng)
{
    AttackContext actx(in, cfg);
    return run_attack(in, actx, rng, cfg.solve);
}

struct GenerateOptions {
    std::optional<std::uint64_t> h_max;
    std::uint64_t max_tries = 200'000;
    AttackConfig attack;
};

struct GeneratedInstance {
    Instance instance;
    Quotient planted;
};

/// Random ordinary maximal-order curve over a random prime in [p_min, p_max]
/// with h_min <= h(delta) (<= h_max), a uniform planted class [s], and E1
/// taken as [s] * E0.
inline GeneratedInstance generate_instance(std::uint64_t p_min, std::uint64_t p_max, std::uint64_t h_min, Rng& rng,
                                           const GenerateOptions& opts = {})
{
    p_min = std::max<std::uint64_t>(p_min, 5);
    if (p_max < p_min || p_max >= (std::uint64_t{1} << 32))
        throw std::invalid_argument("generate_instance: bad prime range");
    std::vector<std::uint64_t> primes;
    for (auto p : primes_up_to(p_max))
        if (p >= p_min)
            primes.push_back(p);
    if (primes.empty())
        throw std::invalid_argument("generate_instance: no primes in range");
    std::uniform_int_distribution<std::size_t> pick_p(0, primes.size() - 1);
    for (std::uint64_t tries = 0; tries < opts.max_tries; ++tries) {
        const std::uint64_t p = primes[pick_p(rng)];
        std::uniform_int_distribution<std::uint64_t> coef(0, p - 1);
        const std::uint64_t a = coef(rng), b = coef(rng);
        if (add_mod(mul_mod(4, mul_mod(a, mul_mod(a, a, p), p), p), mul_mod(27, mul_mod(b, b, p), p), p) == 0)
            continue;
        Curve e0(p, a, b);
        std::optional<CurveContext> found;
        try {
            found = point_count(e0);
        } catch (const std::domain_error&) {
            continue;  // supersingular
        }
        const CurveContext& ctx = *found;
        if (ctx.j == 0 || ctx.j == 1728 % p || !is_fundamental(ctx.delta))
            continue;
        const auto h = static_cast<std::uint64_t>(reduced_forms(ctx.delta).size());
        if (h < h_min || (opts.h_max && h > *opts.h_max))
            continue;
        if (!is_maximal_order(ctx))
            continue;
        AttackContext actx(make_instance(e0, e0), opts.attack);
        const auto& els = actx.group().elements();
        const QuadForm s = els[std::uniform_int_distribution<std::size_t>(0, els.size() - 1)(rng)];
        StarResult e1 = actx.evaluator()(ctx, s, rng);
        return {make_instance(e0, e1.curve), Quotient{s}};
    }
    throw std::runtime_error("generate_instance: scan exhausted without a suitable curve");
}

}  // namespace isoq

#endif
