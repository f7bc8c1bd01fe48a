#ifndef ISOQ_CURVES_HPP
#define ISOQ_CURVES_HPP

// Ordinary elliptic curves y^2 = x^3 + Ax + B over F_p (p >= 5) and the
// action of Cl(O_delta) on their j-invariants through chains of
// Frobenius-eigenvalue-directed ell-isogenies.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "isoq/arith.hpp"
#include "isoq/classgroup.hpp"
#include "isoq/field_poly.hpp"
#include "isoq/relations.hpp"

namespace isoq {

class Curve {
public:
    Curve(std::uint64_t p, std::uint64_t a, std::uint64_t b) : p_(p), a_(a % p), b_(b % p)
    {
        if (p < 5 || !is_prime(p))
            throw std::invalid_argument("curve: p must be a prime >= 5");
        if (p >= (std::uint64_t{1} << 32))
            throw std::invalid_argument("curve: p too large");
        if (discriminant_part() == 0)
            throw std::invalid_argument("curve: singular (4A^3 + 27B^2 = 0)");
    }

    std::uint64_t p() const { return p_; }
    std::uint64_t a() const { return a_; }
    std::uint64_t b() const { return b_; }

    /// x^3 + A x + B at x.
    std::uint64_t rhs(std::uint64_t x) const
    {
        x %= p_;
        return add_mod(mul_mod(add_mod(mul_mod(x, x, p_), a_, p_), x, p_), b_, p_);
    }

    FieldPoly rhs_poly() const { return FieldPoly(p_, {b_, a_, 0, 1}); }

    /// j = 1728 * 4A^3 / (4A^3 + 27B^2).
    std::uint64_t j_invariant() const
    {
        std::uint64_t a3 = mul_mod(4, mul_mod(a_, mul_mod(a_, a_, p_), p_), p_);
        return mul_mod(mul_mod(1728 % p_, a3, p_), inv_mod(discriminant_part(), p_), p_);
    }

    std::string to_string() const
    {
        return "y^2 = x^3 + " + std::to_string(a_) + "x + " + std::to_string(b_) + " over F_" + std::to_string(p_);
    }

    friend bool operator==(const Curve& l, const Curve& r) { return l.p_ == r.p_ && l.a_ == r.a_ && l.b_ == r.b_; }
    friend bool operator<(const Curve& l, const Curve& r)
    {
        return std::tie(l.p_, l.a_, l.b_) < std::tie(r.p_, r.a_, r.b_);
    }

private:
    std::uint64_t discriminant_part() const
    {
        std::uint64_t a3 = mul_mod(4, mul_mod(a_, mul_mod(a_, a_, p_), p_), p_);
        std::uint64_t b2 = mul_mod(27, mul_mod(b_, b_, p_), p_);
        return add_mod(a3, b2, p_);
    }

    std::uint64_t p_, a_, b_;
};

inline std::ostream& operator<<(std::ostream& os, const Curve& c) { return os << c.to_string(); }

/// #E(F_p) including the point at infinity, by summing Legendre symbols.
inline std::uint64_t count_points(const Curve& c)
{
    const std::uint64_t p = c.p();
    std::int64_t n = static_cast<std::int64_t>(p) + 1;
    for (std::uint64_t x = 0; x < p; ++x)
        n += legendre(c.rhs(x), p);
    return static_cast<std::uint64_t>(n);
}

/// Fundamental discriminant and conductor of a negative D: D = v^2 delta.
inline std::pair<Discriminant, std::uint64_t> fundamental_part(std::int64_t d)
{
    if (d >= 0)
        throw std::invalid_argument("fundamental_part: D must be negative");
    std::uint64_t m = 1, v = 1;
    for (auto [q, e] : factor_trial(static_cast<std::uint64_t>(-d))) {
        for (int i = 0; i < e / 2; ++i)
            v *= q;
        if (e % 2)
            m *= q;
    }
    // -m is 1 mod 4 or else the 2-part goes back into the discriminant
    std::int64_t delta = -static_cast<std::int64_t>(m);
    if (floor_mod(delta, std::int64_t{4}) != 1) {
        delta *= 4;
        if (v % 2 != 0)
            throw std::logic_error("fundamental_part: inconsistent 2-adic part");
        v /= 2;
    }
    return {Discriminant(delta), v};
}

struct CurveContext {
    Curve curve;
    std::uint64_t n;
    std::int64_t t;
    std::uint64_t conductor_v;
    Discriminant delta;
    std::uint64_t j;
};

struct CountOptions {
    std::uint64_t max_p = 1'000'000;
};

/// Point count plus trace and endomorphism discriminant data. Rejects
/// supersingular curves.
inline CurveContext point_count(const Curve& c, const CountOptions& opts = {})
{
    if (c.p() > opts.max_p)
        throw std::out_of_range("point_count: p exceeds the counting cap");
    const std::uint64_t n = count_points(c);
    const std::int64_t t = static_cast<std::int64_t>(c.p()) + 1 - static_cast<std::int64_t>(n);
    if (t % static_cast<std::int64_t>(c.p()) == 0)
        throw std::domain_error("point_count: ordinary curve required (p divides the trace)");
    auto [delta, v] = fundamental_part(t * t - 4 * static_cast<std::int64_t>(c.p()));
    return CurveContext{c, n, t, v, delta, c.j_invariant()};
}

namespace detail {

// Univariate parts g_n of the division polynomials: psi_n = g_n for odd n and
// psi_n = y g_n for even n, with y^2 = x^3 + Ax + B.
class DivisionPolys {
public:
    explicit DivisionPolys(const Curve& c) : p_(c.p()), f2_(c.rhs_poly() * c.rhs_poly())
    {
        const std::uint64_t p = p_, a = c.a(), b = c.b();
        auto md = [p](std::int64_t v) { return to_residue(v, p); };
        std::uint64_t a2 = mul_mod(a, a, p);
        memo_.insert_or_assign(0, FieldPoly(p));
        memo_.insert_or_assign(1, FieldPoly::constant(p, 1));
        memo_.insert_or_assign(2, FieldPoly::constant(p, 2));
        memo_.insert_or_assign(3, FieldPoly(p, {sub_mod(0, a2, p), mul_mod(12, b, p), mul_mod(6, a, p), 0, 3}));
        // 4 (x^6 + 5A x^4 + 20B x^3 - 5A^2 x^2 - 4AB x - 8B^2 - A^3)
        std::uint64_t c0 = sub_mod(sub_mod(0, mul_mod(8, mul_mod(b, b, p), p), p), mul_mod(a2, a, p), p);
        std::uint64_t c1 = sub_mod(0, mul_mod(4, mul_mod(a, b, p), p), p);
        std::uint64_t c2 = sub_mod(0, mul_mod(5, a2, p), p);
        memo_.insert_or_assign(4, FieldPoly(p, {c0, c1, c2, mul_mod(20, b, p), mul_mod(5, a, p), 0, 1}).scaled(md(4)));
    }

    const FieldPoly& get(std::uint64_t n)
    {
        auto it = memo_.find(n);
        if (it != memo_.end())
            return it->second;
        FieldPoly out(p_);
        const std::uint64_t m = n / 2;
        if (n % 2 == 1) {
            FieldPoly l = get(m + 2) * cube(get(m));
            FieldPoly r = get(m - 1) * cube(get(m + 1));
            out = (m % 2 == 0) ? f2_ * l - r : l - f2_ * r;
        } else {
            FieldPoly inner = get(m + 2) * get(m - 1) * get(m - 1) - get(m - 2) * get(m + 1) * get(m + 1);
            out = (get(m) * inner).scaled(inv_mod(2, p_));
        }
        return memo_.emplace(n, std::move(out)).first->second;
    }

private:
    static FieldPoly cube(const FieldPoly& f) { return f * f * f; }

    std::uint64_t p_;
    FieldPoly f2_;
    std::map<std::uint64_t, FieldPoly> memo_;
};

// x-coordinate of [c]P as a residue modulo m (m coprime to g_c, and to F when
// c is even): x - psi_{c-1} psi_{c+1} / psi_c^2.
inline FieldPoly multiple_x(DivisionPolys& dp, const Curve& curve, std::uint64_t c, const FieldPoly& m)
{
    const FieldPoly x = FieldPoly::x(curve.p()) % m;
    if (c == 1)
        return x;
    const FieldPoly f = curve.rhs_poly();
    FieldPoly num = dp.get(c - 1) * dp.get(c + 1) % m;
    FieldPoly den = dp.get(c) * dp.get(c) % m;
    if (c % 2 == 0)
        den = den * f % m;
    else
        num = num * f % m;
    return (x - num * inverse_mod(den, m)) % m;
}

// Points of E over K = F_p[x]/(g) whose y-coordinate is a K-multiple of the
// generic y, y^2 = F(x).
struct ScaledPoint {
    FieldPoly x, s;  // point (x, s * y)
    bool infinity = false;
};

class ScaledArithmetic {
public:
    ScaledArithmetic(const Curve& c, FieldPoly g) : curve_(c), g_(std::move(g)), f_(c.rhs_poly() % g_) {}

    ScaledPoint generic() const { return {FieldPoly::x(curve_.p()) % g_, FieldPoly::constant(curve_.p(), 1), false}; }

    ScaledPoint negate(ScaledPoint q) const
    {
        q.s = (FieldPoly(curve_.p()) - q.s) % g_;
        return q;
    }

    ScaledPoint add(const ScaledPoint& l, const ScaledPoint& r) const
    {
        const std::uint64_t p = curve_.p();
        if (l.infinity)
            return r;
        if (r.infinity)
            return l;
        FieldPoly m(p);
        if (l.x == r.x) {
            if (!(l.s == r.s) || l.s.is_zero())
                return {FieldPoly(p), FieldPoly(p), true};
            // (3x^2 + A) / (2 s F)
            FieldPoly num = (l.x * l.x).scaled(3) + FieldPoly::constant(p, curve_.a());
            FieldPoly den = (l.s * f_).scaled(2) % g_;
            m = num * inverse_mod(den, g_) % g_;
            FieldPoly x3 = (m * m % g_ * f_ - l.x.scaled(2)) % g_;
            FieldPoly s3 = (m * (l.x - x3) - l.s) % g_;
            return {x3, s3, false};
        }
        m = (r.s - l.s) * inverse_mod(r.x - l.x, g_) % g_;
        FieldPoly x3 = (m * m % g_ * f_ - l.x - r.x) % g_;
        FieldPoly s3 = (m * (l.x - x3) - l.s) % g_;
        return {x3, s3, false};
    }

    ScaledPoint multiply(const ScaledPoint& q, std::uint64_t k) const
    {
        ScaledPoint acc{FieldPoly(curve_.p()), FieldPoly(curve_.p()), true};
        ScaledPoint base = q;
        while (k) {
            if (k & 1)
                acc = add(acc, base);
            base = add(base, base);
            k >>= 1;
        }
        return acc;
    }

    /// Frobenius of the generic point: (x^p, F^{(p-1)/2} y).
    ScaledPoint frobenius() const
    {
        const std::uint64_t p = curve_.p();
        FieldPoly xp = pow_mod(FieldPoly::x(p), p, g_);
        FieldPoly sp = pow_mod(f_, (p - 1) / 2, g_);
        return {xp, sp, false};
    }

private:
    Curve curve_;
    FieldPoly g_;
    FieldPoly f_;
};

inline std::uint64_t order_mod_sign(std::uint64_t lambda, std::uint64_t ell)
{
    std::uint64_t r = 1, acc = lambda % ell;
    while (acc != 1 && acc != ell - 1) {
        acc = mul_mod(acc, lambda, ell);
        ++r;
    }
    return r;
}

}  // namespace detail

/// psi_ell for odd ell, degree (ell^2 - 1)/2, leading coefficient ell.
inline FieldPoly division_polynomial(const Curve& c, std::uint64_t ell)
{
    if (ell % 2 == 0 || ell < 3)
        throw std::invalid_argument("division_polynomial: ell must be odd and >= 3");
    if (ell == c.p())
        throw std::invalid_argument("division_polynomial: ell equals the characteristic");
    detail::DivisionPolys dp(c);
    return dp.get(ell);
}

/// End(E) = O_delta exactly: v squarefree and, for each ell | v, Frobenius
/// acting as a scalar on E[ell].
inline bool is_maximal_order(const CurveContext& ctx)
{
    const Curve& c = ctx.curve;
    const std::uint64_t p = c.p();
    for (auto [ell, e] : factor_trial(ctx.conductor_v)) {
        if (e > 1)
            return false;  // conservative: deeper levels are not examined
        if (ell == 2) {
            FieldPoly f = c.rhs_poly();
            FieldPoly xp = pow_mod(FieldPoly::x(p), p, f);
            if (gcd(f, xp - FieldPoly::x(p)).degree() != 3)
                return false;
            continue;
        }
        // t = 2c mod ell; check x(pi P) = x([c] P) on all of E[ell]
        std::uint64_t scalar = mul_mod(to_residue(ctx.t, ell), inv_mod(2, ell), ell);
        if (scalar > ell / 2)
            scalar = ell - scalar;
        detail::DivisionPolys dp(c);
        FieldPoly psi = dp.get(ell).monic();
        FieldPoly xp = pow_mod(FieldPoly::x(p), p, psi);
        if (!(xp == detail::multiple_x(dp, c, scalar, psi)))
            return false;
    }
    return true;
}

/// lambda = (t + v b) / 2 mod ell for the prime form (ell, b, .).
inline std::uint64_t eigenvalue_of(const PrimeForm& pf, const CurveContext& ctx)
{
    const std::uint64_t ell = pf.ell;
    if (ell == 2 || ctx.conductor_v % ell == 0 || ctx.curve.p() % ell == 0)
        throw std::invalid_argument("eigenvalue_of: ell must be odd and prime to v p");
    if (!(pf.form.discriminant() == ctx.delta))
        throw std::invalid_argument("eigenvalue_of: prime form has the wrong discriminant");
    std::uint64_t num = add_mod(to_residue(ctx.t, ell), mul_mod(ctx.conductor_v % ell, to_residue(pf.form.b(), ell), ell), ell);
    std::uint64_t lambda = mul_mod(num, inv_mod(2, ell), ell);
    std::uint64_t chk = add_mod(sub_mod(mul_mod(lambda, lambda, ell), mul_mod(to_residue(ctx.t, ell), lambda, ell), ell),
                                ctx.curve.p() % ell, ell);
    if (chk != 0)
        throw std::logic_error("eigenvalue_of: lambda is not a root of the Frobenius polynomial");
    return lambda;
}

/// Monic degree-(ell-1)/2 factor of psi_ell cutting out the lambda-eigenspace
/// of Frobenius on E[ell].
inline FieldPoly kernel_polynomial(const CurveContext& ctx, std::uint64_t ell, std::uint64_t lambda)
{
    const Curve& c = ctx.curve;
    const std::uint64_t p = c.p();
    lambda %= ell;
    if (lambda == 0)
        throw std::invalid_argument("kernel_polynomial: eigenvalue must be nonzero");
    detail::DivisionPolys dp(c);
    const FieldPoly psi = dp.get(ell).monic();
    const std::uint64_t small = lambda > ell / 2 ? ell - lambda : lambda;

    // x(pi P) = x([lambda] P) isolates the eigenspaces of +-lambda
    FieldPoly xp = pow_mod(FieldPoly::x(p), p, psi);
    FieldPoly cand = gcd(psi, xp - detail::multiple_x(dp, c, small, psi));

    // the y-coordinate separates lambda from -lambda when both are eigenvalues
    const std::uint64_t r = detail::order_mod_sign(lambda, ell);
    Rng rng(p * 1000003ULL + ell);
    auto parts = distinct_degree_factor(cand, static_cast<long>(r));
    FieldPoly h = FieldPoly::constant(p, 1);
    if (parts.size() >= r) {
        for (const auto& g : equal_degree_factor(parts[r - 1], static_cast<long>(r), rng)) {
            detail::ScaledArithmetic k(c, g);
            auto pt = k.multiply(k.generic(), small);
            if (small != lambda)
                pt = k.negate(pt);
            auto fr = k.frobenius();
            if (!pt.infinity && pt.x == fr.x && pt.s == fr.s)
                h = h * g;
        }
    }
    if (h.degree() != static_cast<long>((ell - 1) / 2))
        throw std::runtime_error("kernel_polynomial: no eigenspace factor of the expected degree");
    return h;
}

/// Codomain of the separable isogeny with kernel polynomial h (odd degree
/// 2 deg(h) + 1), via power sums of the roots of h.
inline Curve velu_codomain(const Curve& c, const FieldPoly& h)
{
    const std::uint64_t p = c.p();
    if (h.degree() < 1 || h.leading() != 1)
        throw std::invalid_argument("velu_codomain: kernel polynomial must be monic of positive degree");
    const std::uint64_t d = static_cast<std::uint64_t>(h.degree());
    if (!(division_polynomial(c, 2 * d + 1) % h).is_zero())
        throw std::invalid_argument("velu_codomain: h does not divide the division polynomial");
    // elementary symmetric functions from the coefficients, then Newton
    auto e = [&](std::uint64_t i) -> std::uint64_t {
        if (i > d)
            return 0;
        std::uint64_t v = h.coeff(d - i);
        return i % 2 ? sub_mod(0, v, p) : v;
    };
    std::uint64_t s1 = e(1), s2 = e(2), s3 = e(3);
    std::uint64_t p1 = s1;
    std::uint64_t p2 = sub_mod(mul_mod(s1, s1, p), mul_mod(2, s2, p), p);
    std::uint64_t p3 = add_mod(sub_mod(mul_mod(s1, mul_mod(s1, s1, p), p), mul_mod(3, mul_mod(s1, s2, p), p), p),
                               mul_mod(3, s3, p), p);
    const std::uint64_t a = c.a(), b = c.b(), dm = d % p;
    std::uint64_t t = add_mod(mul_mod(6, p2, p), mul_mod(2, mul_mod(dm, a, p), p), p);
    std::uint64_t w = add_mod(add_mod(mul_mod(10, p3, p), mul_mod(6, mul_mod(a, p1, p), p), p),
                              mul_mod(4, mul_mod(dm, b, p), p), p);
    return Curve(p, sub_mod(a, mul_mod(5, t, p), p), sub_mod(b, mul_mod(7, w, p), p));
}

struct IsogenyStep {
    std::uint64_t ell;
    std::uint64_t lambda;
    FieldPoly kernel_poly;
    Curve codomain;
};

/// One step in the direction of pf (sign +1) or its conjugate (sign -1).
inline IsogenyStep isogeny_step(const CurveContext& ctx, const PrimeForm& pf, int sign)
{
    std::uint64_t lambda = eigenvalue_of(pf, ctx);
    if (sign < 0)
        lambda = sub_mod(to_residue(ctx.t, pf.ell), lambda, pf.ell);
    FieldPoly h = kernel_polynomial(ctx, pf.ell, lambda);
    Curve cod = velu_codomain(ctx.curve, h);
    return {pf.ell, lambda, std::move(h), cod};
}

struct StarOptions {
    bool verify_steps = true;  // recount points after every step
    CountOptions count;
};

struct StarResult {
    Curve curve;
    std::uint64_t j;
};

/// Memo of single isogeny steps keyed by (curve, ell, lambda); safe to share
/// between threads.
class StepCache {
public:
    std::optional<Curve> find(const Curve& c, std::uint64_t ell, std::uint64_t lambda) const
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find({c, ell, lambda});
        if (it == map_.end())
            return std::nullopt;
        return it->second;
    }

    void store(const Curve& c, std::uint64_t ell, std::uint64_t lambda, const Curve& out)
    {
        std::lock_guard<std::mutex> lock(mu_);
        map_.emplace(std::make_tuple(c, ell, lambda), out);
    }

    std::size_t size() const
    {
        std::lock_guard<std::mutex> lock(mu_);
        return map_.size();
    }

private:
    mutable std::mutex mu_;
    std::map<std::tuple<Curve, std::uint64_t, std::uint64_t>, Curve> map_;
};

/// Apply prod p_i^{e_i} to the curve of ctx by |e_i| successive steps each.
inline StarResult star_smooth(const CurveContext& ctx, const std::vector<std::pair<PrimeForm, std::int64_t>>& steps,
                              const StarOptions& opts = {}, StepCache* cache = nullptr)
{
    CurveContext cur = ctx;
    for (const auto& [pf, e] : steps) {
        const int sign = e < 0 ? -1 : 1;
        const std::int64_t reps = e < 0 ? -e : e;
        for (std::int64_t r = 0; r < reps; ++r) {
            std::uint64_t lambda = eigenvalue_of(pf, cur);
            if (sign < 0)
                lambda = sub_mod(to_residue(cur.t, pf.ell), lambda, pf.ell);
            std::optional<Curve> next = cache ? cache->find(cur.curve, pf.ell, lambda) : std::nullopt;
            if (!next) {
                FieldPoly h = kernel_polynomial(cur, pf.ell, lambda);
                next = velu_codomain(cur.curve, h);
                if (cache)
                    cache->store(cur.curve, pf.ell, lambda, *next);
            }
            if (opts.verify_steps) {
                CurveContext nc = point_count(*next, opts.count);
                if (nc.n != ctx.n || nc.t != ctx.t || !(nc.delta == ctx.delta))
                    throw std::logic_error("star_smooth: isogeny step changed the curve invariants");
                cur = nc;
            } else {
                cur = CurveContext{*next, ctx.n, ctx.t, ctx.conductor_v, ctx.delta, next->j_invariant()};
            }
        }
    }
    return {cur.curve, cur.curve.j_invariant()};
}

/// Exponent vector over a factor base as (prime form, exponent) steps.
inline std::vector<std::pair<PrimeForm, std::int64_t>> steps_from(const FactorBase& fb, const std::vector<std::int64_t>& z)
{
    std::vector<std::pair<PrimeForm, std::int64_t>> out;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i] != 0)
            out.emplace_back(fb.primes[i], z[i]);
    return out;
}

struct StarSearchOptions {
    RelationOptions relation;
    StarOptions star;
    std::uint64_t relation_attempts = 8;  // fresh find_relation runs before giving up
};

/// [target] * E: find a relation over the factor base, then walk it.
inline StarResult star(const CurveContext& ctx, const QuadForm& target, const FactorBase& fb, std::uint64_t t, Rng& rng,
                       const StarSearchOptions& opts = {}, StepCache* cache = nullptr)
{
    // alternate the walk parity: with few primes a signed walk of fixed
    // length only reaches classes of one parity
    for (std::uint64_t a = 0; a < opts.relation_attempts; ++a) {
        if (auto rel = find_relation(fb, target, t + a % 2, rng, opts.relation))
            return star_smooth(ctx, steps_from(fb, rel->z), opts.star, cache);
    }
    throw std::runtime_error("star: relation search exhausted");
}

/// Memoised star evaluation keyed by (curve, class). The result is a class
/// function, so a cached value is as good as a fresh one.
class StarEvaluator {
public:
    StarEvaluator(FactorBase fb, std::uint64_t t, StarSearchOptions opts = {})
        : fb_(std::move(fb)), t_(t), opts_(std::move(opts))
    {
    }

    const FactorBase& factor_base() const { return fb_; }
    std::uint64_t walk_length() const { return t_; }
    StepCache& steps() { return steps_; }

    StarResult operator()(const CurveContext& ctx, const QuadForm& cls, Rng& rng)
    {
        const QuadForm r = reduce(cls);
        auto key = std::make_tuple(ctx.curve, r.a(), r.b());
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = memo_.find(key);
            if (it != memo_.end())
                return it->second;
        }
        StarResult out = star(ctx, r, fb_, t_, rng, opts_, &steps_);
        std::lock_guard<std::mutex> lock(mu_);
        memo_.emplace(key, out);
        return out;
    }

private:
    FactorBase fb_;
    std::uint64_t t_;
    StarSearchOptions opts_;
    StepCache steps_;
    std::mutex mu_;
    std::map<std::tuple<Curve, Integer, Integer>, StarResult> memo_;
};

}  // namespace isoq

#endif
