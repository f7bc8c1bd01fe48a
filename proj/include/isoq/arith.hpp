#ifndef ISOQ_ARITH_HPP
#define ISOQ_ARITH_HPP

// Small-integer number theory shared by every module: modular arithmetic on
// 64-bit words, primality, square roots modulo primes, trial factoring and
// the subexponential L-function.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace isoq {

using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rng = std::mt19937_64;

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m)
{
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m)
{
    std::uint64_t s = a + b;
    return (s >= m || s < a) ? s - m : s;
}

inline std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m)
{
    return a >= b ? a - b : a + (m - b);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t e, std::uint64_t m)
{
    std::uint64_t r = 1 % m;
    base %= m;
    while (e) {
        if (e & 1)
            r = mul_mod(r, base, m);
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    return r;
}

/// Reduce a signed value into [0, m).
inline std::uint64_t to_residue(std::int64_t a, std::uint64_t m)
{
    std::int64_t r = a % static_cast<std::int64_t>(m);
    return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(m) : r);
}

inline std::uint64_t to_residue(const Integer& a, std::uint64_t m)
{
    Integer r = a % m;
    if (r < 0)
        r += m;
    return static_cast<std::uint64_t>(r);
}

/// Inverse modulo a prime (or any m coprime to a) via extended Euclid.
inline std::uint64_t inv_mod(std::uint64_t a, std::uint64_t m)
{
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(m), new_r = static_cast<std::int64_t>(a % m);
    while (new_r != 0) {
        std::int64_t q = r / new_r;
        t = std::exchange(new_t, t - q * new_t);
        r = std::exchange(new_r, r - q * new_r);
    }
    if (r != 1)
        throw std::domain_error("inv_mod: element not invertible");
    return to_residue(t, m);
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t b)
{
    return a - floor_div(a, b) * b;
}

inline std::int64_t gcd64(std::int64_t a, std::int64_t b)
{
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b) {
        a = std::exchange(b, a % b);
    }
    return a;
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g >= 0.
struct Xgcd {
    Integer g, x, y;
};

inline Xgcd xgcd(const Integer& a, const Integer& b)
{
    Integer old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        Integer q = old_r / r;
        old_r = std::exchange(r, Integer(old_r - q * r));
        old_s = std::exchange(s, Integer(old_s - q * s));
        old_t = std::exchange(t, Integer(old_t - q * t));
    }
    if (old_r < 0) {
        old_r = -old_r;
        old_s = -old_s;
        old_t = -old_t;
    }
    return {old_r, old_s, old_t};
}

/// Floor division for arbitrary-precision integers (cpp_int truncates).
inline Integer floor_div(const Integer& a, const Integer& b)
{
    Integer q = a / b;
    if (q * b != a && ((a < 0) != (b < 0)))
        --q;
    return q;
}

inline Integer floor_mod(const Integer& a, const Integer& b)
{
    return a - floor_div(a, b) * b;
}

inline bool is_prime(std::uint64_t n)
{
    if (n < 2)
        return false;
    for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0)
            return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // Deterministic witness set for 64-bit inputs.
    for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        std::uint64_t x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1)
            continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite)
            return false;
    }
    return true;
}

inline std::vector<std::uint64_t> primes_up_to(std::uint64_t bound)
{
    std::vector<std::uint64_t> out;
    if (bound < 2)
        return out;
    std::vector<bool> composite(bound + 1, false);
    for (std::uint64_t i = 2; i <= bound; ++i) {
        if (composite[i])
            continue;
        out.push_back(i);
        for (std::uint64_t j = i * i; j <= bound; j += i)
            composite[j] = true;
    }
    return out;
}

/// Prime factorisation by trial division, as (prime, exponent) pairs.
inline std::vector<std::pair<std::uint64_t, int>> factor_trial(std::uint64_t n)
{
    std::vector<std::pair<std::uint64_t, int>> out;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e)
            out.emplace_back(p, e);
    }
    if (n > 1)
        out.emplace_back(n, 1);
    return out;
}

/// Legendre symbol (a | p) for an odd prime p, in {-1, 0, 1}.
inline int legendre(std::uint64_t a, std::uint64_t p)
{
    a %= p;
    if (a == 0)
        return 0;
    return pow_mod(a, (p - 1) / 2, p) == 1 ? 1 : -1;
}

inline int legendre(const Integer& a, std::uint64_t p)
{
    return legendre(to_residue(a, p), p);
}

/// Tonelli-Shanks square root of a quadratic residue modulo an odd prime.
/// The non-residue is the least one, so the root returned is deterministic.
inline std::uint64_t sqrt_mod(std::uint64_t a, std::uint64_t p)
{
    a %= p;
    if (a == 0)
        return 0;
    if (legendre(a, p) != 1)
        throw std::domain_error("sqrt_mod: not a quadratic residue");
    std::uint64_t q = p - 1;
    int s = 0;
    while ((q & 1) == 0) {
        q >>= 1;
        ++s;
    }
    std::uint64_t z = 2;
    while (legendre(z, p) != -1)
        ++z;
    std::uint64_t m = static_cast<std::uint64_t>(s);
    std::uint64_t c = pow_mod(z, q, p);
    std::uint64_t t = pow_mod(a, q, p);
    std::uint64_t r = pow_mod(a, (q + 1) / 2, p);
    while (t != 1) {
        std::uint64_t i = 0, tt = t;
        while (tt != 1) {
            tt = mul_mod(tt, tt, p);
            ++i;
        }
        std::uint64_t b = c;
        for (std::uint64_t j = 0; j + i + 1 < m; ++j)
            b = mul_mod(b, b, p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    return r;
}

/// L_N(1/2, c) = exp(c sqrt(ln N ln ln N)), with the o(1) term taken as 0.
inline double subexp_l(double n, double c)
{
    if (n <= std::exp(1.0))
        return 1.0;
    double ln = std::log(n);
    return std::exp(c * std::sqrt(ln * std::log(ln)));
}

inline std::uint64_t ceil_log2(std::uint64_t n)
{
    std::uint64_t k = 0;
    while ((std::uint64_t{1} << k) < n)
        ++k;
    return k;
}

inline std::uint64_t floor_log2(std::uint64_t n)
{
    std::uint64_t k = 0;
    while (n >>= 1)
        ++k;
    return k;
}

inline bool is_power_of_two(std::uint64_t n) { return n && (n & (n - 1)) == 0; }

}  // namespace isoq

#endif
