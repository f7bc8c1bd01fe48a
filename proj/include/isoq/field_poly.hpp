#ifndef ISOQ_FIELD_POLY_HPP
#define ISOQ_FIELD_POLY_HPP

// Dense univariate polynomials over a prime field F_p (p < 2^32), with the
// pieces of Cantor-Zassenhaus factoring that the isogeny code needs.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isoq/arith.hpp"

namespace isoq {

class FieldPoly {
public:
    explicit FieldPoly(std::uint64_t p) : p_(p) {}

    /// Coefficients low degree first; reduced mod p and trimmed.
    FieldPoly(std::uint64_t p, std::vector<std::uint64_t> coeffs) : p_(p), c_(std::move(coeffs))
    {
        for (auto& x : c_)
            x %= p_;
        trim();
    }

    static FieldPoly constant(std::uint64_t p, std::uint64_t c) { return FieldPoly(p, {c}); }
    static FieldPoly x(std::uint64_t p) { return FieldPoly(p, {0, 1}); }

    std::uint64_t modulus() const { return p_; }
    long degree() const { return static_cast<long>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    std::uint64_t coeff(std::size_t i) const { return i < c_.size() ? c_[i] : 0; }
    std::uint64_t leading() const { return c_.empty() ? 0 : c_.back(); }
    const std::vector<std::uint64_t>& coeffs() const { return c_; }

    FieldPoly monic() const
    {
        if (is_zero())
            return *this;
        std::uint64_t inv = inv_mod(leading(), p_);
        FieldPoly out = *this;
        for (auto& x : out.c_)
            x = mul_mod(x, inv, p_);
        return out;
    }

    std::uint64_t evaluate(std::uint64_t x) const
    {
        std::uint64_t r = 0;
        for (std::size_t i = c_.size(); i-- > 0;)
            r = add_mod(mul_mod(r, x, p_), c_[i], p_);
        return r;
    }

    FieldPoly scaled(std::uint64_t s) const
    {
        FieldPoly out = *this;
        for (auto& x : out.c_)
            x = mul_mod(x, s % p_, p_);
        out.trim();
        return out;
    }

    FieldPoly derivative() const
    {
        std::vector<std::uint64_t> d;
        for (std::size_t i = 1; i < c_.size(); ++i)
            d.push_back(mul_mod(c_[i], i % p_, p_));
        return FieldPoly(p_, std::move(d));
    }

    friend bool operator==(const FieldPoly& l, const FieldPoly& r) { return l.p_ == r.p_ && l.c_ == r.c_; }

    friend FieldPoly operator+(const FieldPoly& l, const FieldPoly& r)
    {
        check_same(l, r);
        std::vector<std::uint64_t> out(std::max(l.c_.size(), r.c_.size()), 0);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = add_mod(l.coeff(i), r.coeff(i), l.p_);
        return FieldPoly(l.p_, std::move(out));
    }

    friend FieldPoly operator-(const FieldPoly& l, const FieldPoly& r)
    {
        check_same(l, r);
        std::vector<std::uint64_t> out(std::max(l.c_.size(), r.c_.size()), 0);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = sub_mod(l.coeff(i), r.coeff(i), l.p_);
        return FieldPoly(l.p_, std::move(out));
    }

    friend FieldPoly operator*(const FieldPoly& l, const FieldPoly& r)
    {
        check_same(l, r);
        if (l.is_zero() || r.is_zero())
            return FieldPoly(l.p_);
        const std::size_t n = l.c_.size() + r.c_.size() - 1;
        std::vector<unsigned __int128> acc(n, 0);
        for (std::size_t i = 0; i < l.c_.size(); ++i) {
            if (l.c_[i] == 0)
                continue;
            for (std::size_t j = 0; j < r.c_.size(); ++j)
                acc[i + j] += static_cast<unsigned __int128>(l.c_[i]) * r.c_[j];
        }
        std::vector<std::uint64_t> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = static_cast<std::uint64_t>(acc[i] % l.p_);
        return FieldPoly(l.p_, std::move(out));
    }

    std::string to_string() const
    {
        if (is_zero())
            return "0";
        std::string s;
        for (std::size_t i = c_.size(); i-- > 0;) {
            if (c_[i] == 0)
                continue;
            if (!s.empty())
                s += " + ";
            if (c_[i] != 1 || i == 0)
                s += std::to_string(c_[i]);
            if (i >= 1)
                s += "x";
            if (i >= 2)
                s += "^" + std::to_string(i);
        }
        return s;
    }
    friend std::ostream& operator<<(std::ostream& os, const FieldPoly& f) { return os << f.to_string(); }

private:
    static void check_same(const FieldPoly& l, const FieldPoly& r)
    {
        if (l.p_ != r.p_)
            throw std::invalid_argument("FieldPoly: mismatched fields");
    }

    void trim()
    {
        while (!c_.empty() && c_.back() == 0)
            c_.pop_back();
    }

    std::uint64_t p_;
    std::vector<std::uint64_t> c_;
};

/// Quotient and remainder of a by a nonzero b.
inline std::pair<FieldPoly, FieldPoly> divmod(const FieldPoly& a, const FieldPoly& b)
{
    if (b.is_zero())
        throw std::domain_error("divmod: division by zero polynomial");
    const std::uint64_t p = a.modulus();
    if (a.degree() < b.degree())
        return {FieldPoly(p), a};
    std::vector<std::uint64_t> r = a.coeffs();
    const auto& d = b.coeffs();
    const std::size_t db = d.size() - 1;
    const std::uint64_t inv = inv_mod(d.back(), p);
    std::vector<std::uint64_t> q(r.size() - db, 0);
    for (std::size_t i = r.size(); i-- > db;) {
        std::uint64_t f = mul_mod(r[i], inv, p);
        q[i - db] = f;
        if (f == 0)
            continue;
        for (std::size_t j = 0; j <= db; ++j)
            r[i - db + j] = sub_mod(r[i - db + j], mul_mod(f, d[j], p), p);
    }
    r.resize(db);
    return {FieldPoly(p, std::move(q)), FieldPoly(p, std::move(r))};
}

inline FieldPoly operator%(const FieldPoly& a, const FieldPoly& b) { return divmod(a, b).second; }
inline FieldPoly operator/(const FieldPoly& a, const FieldPoly& b) { return divmod(a, b).first; }

/// Monic gcd (zero if both inputs are zero).
inline FieldPoly gcd(FieldPoly a, FieldPoly b)
{
    while (!b.is_zero()) {
        FieldPoly r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

/// Inverse of a modulo m; throws if gcd(a, m) != 1.
inline FieldPoly inverse_mod(const FieldPoly& a, const FieldPoly& m)
{
    const std::uint64_t p = m.modulus();
    FieldPoly r0 = m, r1 = a % m;
    FieldPoly s0(p), s1 = FieldPoly::constant(p, 1);
    while (!r1.is_zero()) {
        auto [q, r] = divmod(r0, r1);
        r0 = std::move(r1);
        r1 = std::move(r);
        FieldPoly s = s0 - q * s1;
        s0 = std::move(s1);
        s1 = std::move(s);
    }
    if (r0.degree() != 0)
        throw std::domain_error("inverse_mod: not invertible");
    return (s0.scaled(inv_mod(r0.leading(), p))) % m;
}

inline FieldPoly mul_mod(const FieldPoly& a, const FieldPoly& b, const FieldPoly& m) { return (a * b) % m; }

inline FieldPoly pow_mod(FieldPoly base, Integer e, const FieldPoly& m)
{
    if (e < 0)
        throw std::invalid_argument("pow_mod: negative exponent");
    FieldPoly r = FieldPoly::constant(m.modulus(), 1) % m;
    base = base % m;
    const unsigned bits = e == 0 ? 0 : static_cast<unsigned>(msb(e)) + 1;
    for (unsigned i = bits; i-- > 0;) {
        r = mul_mod(r, r, m);
        if (bit_test(e, i))
            r = mul_mod(r, base, m);
    }
    return r;
}

inline FieldPoly pow_mod(const FieldPoly& base, std::uint64_t e, const FieldPoly& m)
{
    return pow_mod(base, Integer(e), m);
}

/// Distinct-degree split of a squarefree monic f: entry d-1 is the product of
/// the irreducible factors of degree d, for d = 1..max_degree. Stops early
/// once nothing of higher degree can remain.
inline std::vector<FieldPoly> distinct_degree_factor(FieldPoly f, long max_degree)
{
    const std::uint64_t p = f.modulus();
    std::vector<FieldPoly> out;
    const FieldPoly x = FieldPoly::x(p);
    FieldPoly h = x % f;
    for (long d = 1; d <= max_degree; ++d) {
        if (f.degree() < 2 * d) {
            // whatever is left is irreducible (or 1)
            for (long e = d; e <= max_degree; ++e)
                out.push_back(e == f.degree() ? f.monic() : FieldPoly::constant(p, 1));
            break;
        }
        h = pow_mod(h, p, f);
        FieldPoly g = gcd(f, h - x);
        out.push_back(g);
        if (g.degree() > 0) {
            f = f / g;
            h = h % f;
        }
    }
    return out;
}

/// Cantor-Zassenhaus equal-degree factorisation (odd p): f is a monic product
/// of distinct irreducibles of degree d. Factors come back sorted.
inline std::vector<FieldPoly> equal_degree_factor(const FieldPoly& f, long d, Rng& rng)
{
    const std::uint64_t p = f.modulus();
    std::vector<FieldPoly> done, todo;
    if (f.degree() <= 0)
        return done;
    todo.push_back(f.monic());
    Integer e = 1;
    for (long i = 0; i < d; ++i)
        e *= p;
    e = (e - 1) / 2;
    std::uniform_int_distribution<std::uint64_t> coef(0, p - 1);
    while (!todo.empty()) {
        FieldPoly g = todo.back();
        todo.pop_back();
        if (g.degree() == d) {
            done.push_back(g);
            continue;
        }
        for (;;) {
            std::vector<std::uint64_t> a(static_cast<std::size_t>(g.degree()));
            for (auto& c : a)
                c = coef(rng);
            FieldPoly r = pow_mod(FieldPoly(p, a), e, g) - FieldPoly::constant(p, 1);
            FieldPoly h = gcd(g, r);
            if (h.degree() > 0 && h.degree() < g.degree()) {
                todo.push_back(h);
                todo.push_back((g / h).monic());
                break;
            }
        }
    }
    std::sort(done.begin(), done.end(), [](const FieldPoly& l, const FieldPoly& r) { return l.coeffs() < r.coeffs(); });
    return done;
}

/// All monic irreducible factors of a squarefree f, grouped by degree.
inline std::vector<FieldPoly> factor_squarefree(const FieldPoly& f, Rng& rng)
{
    std::vector<FieldPoly> out;
    auto parts = distinct_degree_factor(f.monic(), f.degree());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        auto fs = equal_degree_factor(parts[i], static_cast<long>(i) + 1, rng);
        out.insert(out.end(), fs.begin(), fs.end());
    }
    return out;
}

}  // namespace isoq

#endif
