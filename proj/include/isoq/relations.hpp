#ifndef ISOQ_RELATIONS_HPP
#define ISOQ_RELATIONS_HPP

// Short relations over a factor base of small split prime forms: random
// walks in the class group, smoothness testing of reduced forms, and the
// relation search built from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "isoq/arith.hpp"
#include "isoq/classgroup.hpp"

namespace isoq {

struct FactorBase {
    Discriminant delta;
    Integer q;
    Integer n;
    std::uint64_t conductor_v = 1;
    std::uint64_t bound_x = 0;
    std::vector<PrimeForm> primes;

    std::size_t size() const { return primes.size(); }
};

struct FactorBaseOptions {
    std::uint64_t min_bound = 3;
    std::optional<std::uint64_t> forced_bound;  // bypasses the L-function entirely
};

/// Smoothness parameter that balances the two L-exponents of the search
/// (1/(4z) for the loop count against 3z for the walk-plus-factor cost).
inline const double default_smoothness_z = 1.0 / std::sqrt(12.0);

inline double relation_scale(const Discriminant& delta, const Integer& q)
{
    Integer m = delta.abs() > q ? delta.abs() : q;
    return static_cast<double>(m);
}

/// Primes ell <= bound_x that split in O_delta and do not divide q * n * v.
/// q = n = 1 disables the coprimality filter (pure class-group use).
inline FactorBase build_factor_base(const Discriminant& delta, const Integer& q, const Integer& n,
                                    std::uint64_t conductor_v, double smoothness_z,
                                    const FactorBaseOptions& opts = {})
{
    if (!(smoothness_z > 0))
        throw std::invalid_argument("build_factor_base: smoothness parameter must be positive");
    FactorBase fb{delta, q, n, conductor_v, 0, {}};
    if (opts.forced_bound) {
        fb.bound_x = *opts.forced_bound;
    } else {
        double l = subexp_l(relation_scale(delta, q), smoothness_z);
        fb.bound_x = std::max<std::uint64_t>(opts.min_bound, static_cast<std::uint64_t>(std::ceil(l)));
    }
    const Integer excluded = q * n * conductor_v;
    for (std::uint64_t ell : primes_up_to(fb.bound_x)) {
        if (ell == 2 || excluded % ell == 0)
            continue;
        if (auto pf = prime_form(ell, delta))
            fb.primes.push_back(*pf);
    }
    if (fb.primes.empty())
        throw std::runtime_error("build_factor_base: empty factor base, raise the bound");
    return fb;
}

/// prod p_i^{z_i}, reduced.
inline QuadForm recompose(const FactorBase& fb, const std::vector<std::int64_t>& z)
{
    if (z.size() != fb.size())
        throw std::invalid_argument("recompose: exponent vector has the wrong length");
    QuadForm acc = identity_form(fb.delta);
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i] != 0)
            acc = compose(acc, power(fb.primes[i].form, z[i]));
    return acc;
}

enum class WalkKind { signed_steps, nonnegative };

struct WalkOptions {
    WalkKind kind = WalkKind::signed_steps;
    double walk_C = 2.0;
    bool strict = false;  // enforce the t-range of the relation search
};

struct WalkVector {
    std::vector<std::int64_t> entries;
    std::uint64_t t = 0;

    std::uint64_t l1() const
    {
        std::uint64_t s = 0;
        for (auto e : entries)
            s += static_cast<std::uint64_t>(e < 0 ? -e : e);
        return s;
    }
};

/// Admissible walk lengths [C ln h / ln ln|delta|, C ln|delta|]. Without h
/// only the upper end is checked.
inline bool walk_length_ok(const Discriminant& delta, std::uint64_t t, double walk_C,
                           std::optional<std::uint64_t> class_number = std::nullopt)
{
    double ld = std::log(static_cast<double>(delta.abs()));
    if (static_cast<double>(t) > walk_C * ld)
        return false;
    if (class_number && ld > 1.0) {
        double lo = walk_C * std::log(static_cast<double>(*class_number)) / std::log(ld);
        if (static_cast<double>(t) < lo)
            return false;
    }
    return true;
}

/// Signed walk: t uniform steps over p_1^{+-1} .. p_f^{+-1}; steps on the
/// same prime may cancel, so |v|_1 <= t with |v|_1 = t (mod 2).
/// Nonnegative walk: a uniform composition of t into f parts.
inline WalkVector sample_walk(const FactorBase& fb, std::uint64_t t, Rng& rng, const WalkOptions& opts = {})
{
    if (opts.strict && !walk_length_ok(fb.delta, t, opts.walk_C))
        throw std::out_of_range("sample_walk: walk length outside the admissible range");
    const std::size_t f = fb.size();
    WalkVector w{std::vector<std::int64_t>(f, 0), t};
    if (opts.kind == WalkKind::signed_steps) {
        std::uniform_int_distribution<std::size_t> pick(0, 2 * f - 1);
        for (std::uint64_t s = 0; s < t; ++s) {
            std::size_t c = pick(rng);
            w.entries[c / 2] += (c % 2 == 0) ? 1 : -1;
        }
    } else {
        // stars and bars: choose f-1 bar positions among t+f-1 slots
        std::vector<std::uint64_t> slots(t + f - 1);
        for (std::size_t i = 0; i < slots.size(); ++i)
            slots[i] = i;
        std::shuffle(slots.begin(), slots.end(), rng);
        std::vector<std::uint64_t> bars(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(f - 1));
        std::sort(bars.begin(), bars.end());
        std::uint64_t prev = 0;
        for (std::size_t i = 0; i < f; ++i) {
            std::uint64_t end = i + 1 < f ? bars[i] : t + f - 1;
            w.entries[i] = static_cast<std::int64_t>(end - prev);
            prev = end + 1;
        }
    }
    return w;
}

/// Signed exponents of a reduced form over the factor base, or nullopt if
/// its norm is not smooth. +e when b matches the canonical prime form mod
/// 2 ell, -e for the conjugate.
inline std::optional<std::vector<std::int64_t>> factor_over_base(const QuadForm& a_v, const FactorBase& fb)
{
    if (!a_v.is_reduced())
        throw std::invalid_argument("factor_over_base: form must be reduced");
    std::vector<std::int64_t> e(fb.size(), 0);
    Integer norm = a_v.a();
    for (std::size_t i = 0; i < fb.size() && norm > 1; ++i) {
        const std::uint64_t ell = fb.primes[i].ell;
        int k = 0;
        while (norm % ell == 0) {
            norm /= ell;
            ++k;
        }
        if (k == 0)
            continue;
        const Integer two_ell = 2 * ell;
        bool plus = floor_mod(a_v.b() - fb.primes[i].form.b(), two_ell) == 0;
        e[i] = plus ? k : -k;
    }
    if (norm != 1)
        return std::nullopt;
    if (!(recompose(fb, e) == a_v))
        throw std::logic_error("factor_over_base: recomposition mismatch");
    return e;
}

struct Relation {
    std::vector<std::int64_t> z;

    std::uint64_t l1() const
    {
        std::uint64_t s = 0;
        for (auto e : z)
            s += static_cast<std::uint64_t>(e < 0 ? -e : e);
        return s;
    }
};

struct RelationOptions {
    WalkOptions walk;
    double smoothness_z = default_smoothness_z;
    std::optional<std::uint64_t> max_iters;  // default ceil(L(1/(4z)))
};

inline std::uint64_t default_relation_iters(const FactorBase& fb, double smoothness_z)
{
    return static_cast<std::uint64_t>(std::ceil(subexp_l(relation_scale(fb.delta, fb.q), 1.0 / (4.0 * smoothness_z))));
}

/// Random walk from the target until the reduced form factors over the base;
/// the returned z satisfies [F^z] = [target] (checked before returning).
inline std::optional<Relation> find_relation(const FactorBase& fb, const QuadForm& target, std::uint64_t t, Rng& rng,
                                             const RelationOptions& opts = {})
{
    if (!(target.discriminant() == fb.delta))
        throw std::invalid_argument("find_relation: target has a different discriminant");
    const QuadForm b = reduce(target);
    const std::uint64_t iters = opts.max_iters ? *opts.max_iters : default_relation_iters(fb, opts.smoothness_z);
    for (std::uint64_t it = 0; it < iters; ++it) {
        WalkVector v = sample_walk(fb, t, rng, opts.walk);
        QuadForm a_v = compose(b, recompose(fb, v.entries));
        auto a = factor_over_base(a_v, fb);
        if (!a)
            continue;
        Relation rel{std::vector<std::int64_t>(fb.size())};
        for (std::size_t i = 0; i < fb.size(); ++i)
            rel.z[i] = (*a)[i] - v.entries[i];
        if (!(recompose(fb, rel.z) == b))
            throw std::logic_error("find_relation: relation does not recompose to the target");
        return rel;
    }
    return std::nullopt;
}

/// Fraction of t-step walks from the identity that land in target_set.
inline double mixing_probability(const FactorBase& fb, std::uint64_t t, const std::set<QuadForm>& target_set,
                                 std::uint64_t trials, Rng& rng, const WalkOptions& opts = {})
{
    if (trials == 0)
        return 0.0;
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        WalkVector v = sample_walk(fb, t, rng, opts);
        if (target_set.count(recompose(fb, v.entries)))
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace isoq

#endif
