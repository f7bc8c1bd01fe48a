#ifndef ISOQ_CLASSGROUP_HPP
#define ISOQ_CLASSGROUP_HPP

// Ideal class groups of imaginary quadratic orders, represented by primitive
// positive-definite binary quadratic forms (a, b, c) with b^2 - 4ac = delta.

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isoq/arith.hpp"
#include "isoq/smith.hpp"

namespace isoq {

class Discriminant {
public:
    explicit Discriminant(Integer value) : value_(std::move(value))
    {
        if (value_ >= 0)
            throw std::invalid_argument("discriminant must be negative");
        Integer r = floor_mod(value_, Integer(4));
        if (r != 0 && r != 1)
            throw std::invalid_argument("discriminant must be 0 or 1 mod 4");
    }
    explicit Discriminant(std::int64_t value) : Discriminant(Integer(value)) {}

    const Integer& value() const { return value_; }
    Integer abs() const { return -value_; }
    bool is_odd() const { return floor_mod(value_, Integer(2)) == 1; }

    friend bool operator==(const Discriminant& l, const Discriminant& r) { return l.value_ == r.value_; }

private:
    Integer value_;
};

/// Fundamental discriminants: squarefree away from 2 with the usual 2-adic
/// conditions.
inline bool is_fundamental(const Discriminant& d)
{
    Integer n = d.abs();
    Integer r4 = floor_mod(d.value(), Integer(4));
    if (r4 == 0) {
        Integer m = d.value() / 4;
        Integer m4 = floor_mod(m, Integer(4));
        if (m4 != 2 && m4 != 3)
            return false;
        n /= 4;
    }
    if (n > std::numeric_limits<std::uint64_t>::max())
        throw std::out_of_range("is_fundamental: discriminant too large");
    for (auto [p, e] : factor_trial(static_cast<std::uint64_t>(n)))
        if (e > 1)
            return false;
    return true;
}

class QuadForm {
public:
    QuadForm(Integer a, Integer b, Integer c) : a_(std::move(a)), b_(std::move(b)), c_(std::move(c))
    {
        if (a_ <= 0)
            throw std::invalid_argument("form must have a > 0");
        if (discriminant_value() >= 0)
            throw std::invalid_argument("form must be positive definite");
    }

    /// Form with the given a, b whose c is fixed by the discriminant.
    static QuadForm from_ab(const Integer& a, const Integer& b, const Discriminant& d)
    {
        Integer num = b * b - d.value();
        Integer den = 4 * a;
        if (a <= 0 || num % den != 0)
            throw std::invalid_argument("b^2 - delta not divisible by 4a");
        return QuadForm(a, b, num / den);
    }

    const Integer& a() const { return a_; }
    const Integer& b() const { return b_; }
    const Integer& c() const { return c_; }

    Integer discriminant_value() const { return b_ * b_ - 4 * a_ * c_; }
    Discriminant discriminant() const { return Discriminant(discriminant_value()); }

    bool is_primitive() const { return gcd(gcd(a_, b_), c_) == 1; }

    bool is_reduced() const
    {
        Integer ab = abs(b_);
        if (ab > a_ || a_ > c_)
            return false;
        if ((ab == a_ || a_ == c_) && b_ < 0)
            return false;
        return true;
    }

    Integer evaluate(const Integer& x, const Integer& y) const { return a_ * x * x + b_ * x * y + c_ * y * y; }

    friend bool operator==(const QuadForm& l, const QuadForm& r)
    {
        return l.a_ == r.a_ && l.b_ == r.b_ && l.c_ == r.c_;
    }
    friend bool operator<(const QuadForm& l, const QuadForm& r)
    {
        if (l.a_ != r.a_)
            return l.a_ < r.a_;
        if (l.b_ != r.b_)
            return l.b_ < r.b_;
        return l.c_ < r.c_;
    }

    std::string to_string() const { return "(" + a_.str() + "," + b_.str() + "," + c_.str() + ")"; }
    friend std::ostream& operator<<(std::ostream& os, const QuadForm& f) { return os << f.to_string(); }

private:
    Integer a_, b_, c_;
};

/// Principal form (1, delta mod 2, .).
inline QuadForm identity_form(const Discriminant& d)
{
    return QuadForm::from_ab(1, d.is_odd() ? 1 : 0, d);
}

namespace detail {

// x -> x + q y, choosing q so that b lands in (-a, a].
inline void normalize(Integer& a, Integer& b, Integer& c)
{
    Integer q = floor_div(a - b, 2 * a);
    if (q == 0)
        return;
    c += q * (b + q * a);
    b += 2 * a * q;
}

}  // namespace detail

/// Unique reduced representative of the class of f.
inline QuadForm reduce(const QuadForm& f)
{
    if (!f.is_primitive())
        throw std::invalid_argument("reduce: form is not primitive");
    Integer a = f.a(), b = f.b(), c = f.c();
    detail::normalize(a, b, c);
    while (a > c) {
        std::swap(a, c);
        b = -b;
        detail::normalize(a, b, c);
    }
    if (a == c && b < 0)
        b = -b;
    return QuadForm(std::move(a), std::move(b), std::move(c));
}

/// Gauss composition followed by reduction.
inline QuadForm compose(const QuadForm& f, const QuadForm& g)
{
    Integer delta = f.discriminant_value();
    if (delta != g.discriminant_value())
        throw std::invalid_argument("compose: discriminants differ");
    const Integer& a1 = f.a();
    const Integer& a2 = g.a();
    Integer beta = (f.b() + g.b()) / 2;

    // d = gcd(a1, a2, beta) = u a1 + v a2 + w beta
    Xgcd e1 = xgcd(a1, a2);
    Xgcd e2 = xgcd(e1.g, beta);
    const Integer& d = e2.g;
    Integer v = e2.x * e1.y;
    const Integer& w = e2.y;

    Integer a3 = (a1 / d) * (a2 / d);
    Integer b3 = g.b() + 2 * (a2 / d) * (v * (beta - g.b()) - w * g.c());
    b3 = floor_mod(b3, 2 * a3);
    return reduce(QuadForm::from_ab(a3, b3, Discriminant(delta)));
}

inline QuadForm inverse(const QuadForm& f)
{
    return reduce(QuadForm(f.a(), -f.b(), f.c()));
}

inline QuadForm power(const QuadForm& f, Integer e)
{
    QuadForm base = e < 0 ? inverse(f) : reduce(f);
    if (e < 0)
        e = -e;
    QuadForm acc = identity_form(f.discriminant());
    while (e > 0) {
        if ((e & 1) != 0)
            acc = compose(acc, base);
        e >>= 1;
        if (e > 0)
            base = compose(base, base);
    }
    return acc;
}

inline QuadForm power(const QuadForm& f, std::int64_t e) { return power(f, Integer(e)); }

/// Prime form of norm ell: (ell, b, c) with the least b in (0, 2 ell)
/// satisfying b^2 = delta (mod 4 ell). Not necessarily reduced.
struct PrimeForm {
    std::uint64_t ell;
    QuadForm form;

    PrimeForm conjugate() const { return {ell, QuadForm(form.a(), -form.b(), form.c())}; }
};

/// Split primes only: returns nullopt for inert or ramified ell.
inline std::optional<PrimeForm> prime_form(std::uint64_t ell, const Discriminant& d)
{
    if (ell == 2)
        throw std::invalid_argument("prime_form: ell = 2 is not supported");
    if (!is_prime(ell))
        throw std::invalid_argument("prime_form: ell must be an odd prime");
    if (legendre(d.value(), ell) != 1)
        return std::nullopt;
    std::uint64_t r = sqrt_mod(to_residue(d.value(), ell), ell);
    const std::uint64_t parity = d.is_odd() ? 1 : 0;
    std::uint64_t best = 0;
    for (std::uint64_t cand : {r, ell - r, r + ell, 2 * ell - r}) {
        if (cand == 0 || cand >= 2 * ell || cand % 2 != parity)
            continue;
        if (best == 0 || cand < best)
            best = cand;
    }
    return PrimeForm{ell, QuadForm::from_ab(Integer(ell), Integer(best), d)};
}

/// All reduced forms of discriminant d, ordered by (a, b).
inline std::vector<QuadForm> reduced_forms(const Discriminant& d)
{
    std::vector<QuadForm> out;
    const Integer n = d.abs();
    const Integer bound = sqrt(Integer(n / 3));
    for (Integer a = 1; a <= bound; ++a) {
        for (Integer b = -a + 1; b <= a; ++b) {
            Integer num = b * b - d.value();
            if (num % (4 * a) != 0)
                continue;
            Integer c = num / (4 * a);
            if (c < a || (c == a && b < 0))
                continue;
            if (gcd(gcd(a, b), c) != 1)
                continue;
            out.emplace_back(a, b, c);
        }
    }
    return out;
}

struct EnumerateOptions {
    Integer max_abs_discriminant = 1'000'000;
};

/// Class group with a cyclic decomposition <g_1> x ... x <g_k>, orders
/// N_1 | N_2 | ... | N_k, and a discrete-log table for every element.
class ClassGroup {
public:
    const Discriminant& discriminant() const { return delta_; }
    const std::vector<QuadForm>& elements() const { return elements_; }
    std::size_t class_number() const { return elements_.size(); }
    const std::vector<QuadForm>& generators() const { return generators_; }
    const std::vector<std::uint64_t>& orders() const { return orders_; }
    QuadForm identity() const { return identity_form(delta_); }

    std::optional<std::size_t> index_of(const QuadForm& f) const
    {
        auto it = index_.find({f.a(), f.b()});
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    const std::vector<std::int64_t>& dlog(const QuadForm& f) const
    {
        auto i = index_of(f);
        if (!i)
            throw std::invalid_argument("dlog: form is not a reduced element of this group");
        return dlog_[*i];
    }

    /// g_1^{e_1} ... g_k^{e_k}, reduced.
    QuadForm from_exponents(std::span<const std::int64_t> e) const
    {
        if (e.size() != generators_.size())
            throw std::invalid_argument("from_exponents: wrong number of exponents");
        QuadForm acc = identity();
        for (std::size_t i = 0; i < e.size(); ++i)
            acc = compose(acc, power(generators_[i], e[i]));
        return acc;
    }

    std::string structure() const
    {
        if (orders_.empty())
            return "trivial";
        std::string s;
        for (std::size_t i = 0; i < orders_.size(); ++i)
            s += (i ? " x Z_" : "Z_") + std::to_string(orders_[i]);
        return s;
    }

    friend ClassGroup enumerate_class_group(const Discriminant& d, const EnumerateOptions& opts);

private:
    explicit ClassGroup(Discriminant d) : delta_(std::move(d)) {}

    Discriminant delta_;
    std::vector<QuadForm> elements_;
    std::vector<QuadForm> generators_;
    std::vector<std::uint64_t> orders_;
    std::vector<std::vector<std::int64_t>> dlog_;
    std::map<std::pair<Integer, Integer>, std::size_t> index_;
};

/// Default bound for the prime-form scan used to find generators.
inline std::uint64_t generator_scan_bound(const Discriminant& d)
{
    double ln = std::log(static_cast<double>(d.abs()));
    return static_cast<std::uint64_t>(std::ceil(6.0 * ln * ln));
}

inline ClassGroup enumerate_class_group(const Discriminant& d, const EnumerateOptions& opts = {})
{
    if (d.abs() > opts.max_abs_discriminant)
        throw std::out_of_range("enumerate_class_group: |delta| exceeds the enumeration cap");

    ClassGroup g(d);
    g.elements_ = reduced_forms(d);
    const std::size_t h = g.elements_.size();
    for (std::size_t i = 0; i < h; ++i)
        g.index_[{g.elements_[i].a(), g.elements_[i].b()}] = i;
    auto idx = [&](const QuadForm& f) { return g.index_.at({f.a(), f.b()}); };

    // Pick generators greedily: prime forms first, then any element outside
    // the current subgroup. BFS over the Cayley graph records one exponent
    // vector per element.
    std::vector<std::size_t> gens;
    std::vector<std::vector<std::int64_t>> word;
    auto closure = [&]() {
        word.assign(h, {});
        std::vector<bool> seen(h, false);
        std::deque<std::size_t> queue{idx(g.identity())};
        seen[queue.front()] = true;
        word[queue.front()] = std::vector<std::int64_t>(gens.size(), 0);
        std::size_t count = 1;
        while (!queue.empty()) {
            std::size_t e = queue.front();
            queue.pop_front();
            for (std::size_t i = 0; i < gens.size(); ++i) {
                std::size_t n = idx(compose(g.elements_[e], g.elements_[gens[i]]));
                if (!seen[n]) {
                    seen[n] = true;
                    word[n] = word[e];
                    ++word[n][i];
                    queue.push_back(n);
                    ++count;
                }
            }
        }
        return count;
    };
    auto try_add = [&](std::size_t e) {
        if (!word[e].empty())
            return;
        gens.push_back(e);
        closure();
    };

    std::size_t covered = closure();
    const std::uint64_t bound = generator_scan_bound(d);
    for (std::uint64_t ell = 3; covered < h && ell <= bound; ell += 2) {
        if (!is_prime(ell))
            continue;
        if (auto pf = prime_form(ell, d)) {
            try_add(idx(reduce(pf->form)));
            covered = 0;
            for (const auto& w : word)
                covered += !w.empty();
        }
    }
    for (std::size_t e = 0; e < h && covered < h; ++e) {
        if (word[e].empty()) {
            try_add(e);
            covered = 0;
            for (const auto& w : word)
                covered += !w.empty();
        }
    }

    const std::size_t r = gens.size();
    if (r > 0) {
        RelationLattice lattice(r);
        for (std::size_t i = 0; i < r; ++i) {
            std::int64_t ord = 1;
            QuadForm x = g.elements_[gens[i]];
            while (x != g.identity()) {
                x = compose(x, g.elements_[gens[i]]);
                ++ord;
            }
            std::vector<std::int64_t> rel(r, 0);
            rel[i] = ord;
            lattice.insert(std::move(rel));
        }
        for (std::size_t e = 0; e < h; ++e) {
            for (std::size_t i = 0; i < r; ++i) {
                std::size_t n = idx(compose(g.elements_[e], g.elements_[gens[i]]));
                std::vector<std::int64_t> rel(r);
                for (std::size_t j = 0; j < r; ++j)
                    rel[j] = word[e][j] + (i == j ? 1 : 0) - word[n][j];
                lattice.insert(std::move(rel));
            }
        }
        SmithForm snf = smith_normal_form(lattice.basis());
        for (std::size_t i = 0; i < r; ++i) {
            if (snf.diagonal[i] == 1)
                continue;
            QuadForm gen = g.identity();
            for (std::size_t j = 0; j < r; ++j)
                gen = compose(gen, power(g.elements_[gens[j]], snf.column_inverse[i][j]));
            g.generators_.push_back(gen);
            g.orders_.push_back(static_cast<std::uint64_t>(snf.diagonal[i]));
        }
    }

    // Discrete-log table by walking the exponent box in mixed radix.
    g.dlog_.assign(h, {});
    const std::size_t k = g.generators_.size();
    std::vector<std::int64_t> e(k, 0);
    for (std::size_t filled = 0; filled < h; ++filled) {
        QuadForm x = g.identity();
        for (std::size_t i = 0; i < k; ++i)
            x = compose(x, power(g.generators_[i], e[i]));
        std::size_t n = idx(x);
        if (!g.dlog_[n].empty())
            throw std::logic_error("enumerate_class_group: decomposition is not injective");
        g.dlog_[n] = e;
        for (std::size_t i = 0; i < k; ++i) {
            if (++e[i] < static_cast<std::int64_t>(g.orders_[i]))
                break;
            e[i] = 0;
        }
    }
    return g;
}

}  // namespace isoq

#endif
