#ifndef ISOQ_SIEVE_HPP
#define ISOQ_SIEVE_HPP

// Classical simulation of the polynomial-space abelian hidden shift sieve.
// A phase state (|0> + e^{2 pi i theta}|1>)/sqrt2 is stored as its label and
// the exact rational theta; combiners are simulated by enumerating all 2^k
// basis strings and sampling the measurement outcomes with their exact
// probabilities.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "isoq/arith.hpp"

namespace isoq {

/// num / den mod 1, kept with 0 <= num < den.
struct Phase {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Phase() = default;
    Phase(std::int64_t n, std::int64_t d) : num(floor_mod(n, d)), den(d)
    {
        if (d <= 0)
            throw std::invalid_argument("phase: denominator must be positive");
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend Phase operator+(const Phase& l, const Phase& r)
    {
        check(l, r);
        return Phase(l.num + r.num, l.den);
    }
    friend Phase operator-(const Phase& l, const Phase& r)
    {
        check(l, r);
        return Phase(l.num - r.num, l.den);
    }
    friend Phase operator*(std::int64_t c, const Phase& r)
    {
        return Phase(static_cast<std::int64_t>(static_cast<__int128>(floor_mod(c, r.den)) * r.num % r.den), r.den);
    }
    friend bool operator==(const Phase& l, const Phase& r)
    {
        return static_cast<__int128>(l.num) * r.den == static_cast<__int128>(r.num) * l.den;
    }

    std::string to_string() const
    {
        std::int64_t g = std::gcd(num, den);
        return std::to_string(num / g) + "/" + std::to_string(den / g);
    }

private:
    static void check(const Phase& l, const Phase& r)
    {
        if (l.den != r.den)
            throw std::invalid_argument("phase: mismatched denominators");
    }
};

using Label = std::vector<std::int64_t>;

/// Z_{N_1} x ... x Z_{N_t}.
class AbelianGroup {
public:
    AbelianGroup() = default;
    explicit AbelianGroup(std::vector<std::uint64_t> moduli) : moduli_(std::move(moduli))
    {
        lcm_ = 1;
        order_ = 1;
        for (auto n : moduli_) {
            if (n < 2)
                throw std::invalid_argument("abelian group: every modulus must be >= 2");
            lcm_ = std::lcm(lcm_, n);
            order_ *= n;
        }
    }

    const std::vector<std::uint64_t>& moduli() const { return moduli_; }
    std::size_t rank() const { return moduli_.size(); }
    std::uint64_t modulus(std::size_t i) const { return moduli_.at(i); }
    std::uint64_t order() const { return order_; }
    std::uint64_t exponent() const { return lcm_; }
    bool is_pow2(std::size_t i) const { return is_power_of_two(moduli_.at(i)); }
    bool is_odd(std::size_t i) const { return moduli_.at(i) % 2 == 1; }
    bool split_form() const
    {
        for (std::size_t i = 0; i < rank(); ++i)
            if (!is_pow2(i) && !is_odd(i))
                return false;
        return true;
    }

    Label zero() const { return Label(rank(), 0); }

    Label random(Rng& rng) const
    {
        Label x(rank());
        for (std::size_t i = 0; i < rank(); ++i)
            x[i] = static_cast<std::int64_t>(std::uniform_int_distribution<std::uint64_t>(0, moduli_[i] - 1)(rng));
        return x;
    }

    Label add(const Label& a, const Label& b) const
    {
        Label r(rank());
        for (std::size_t i = 0; i < rank(); ++i)
            r[i] = floor_mod(a[i] + b[i], static_cast<std::int64_t>(moduli_[i]));
        return r;
    }

    Label sub(const Label& a, const Label& b) const
    {
        Label r(rank());
        for (std::size_t i = 0; i < rank(); ++i)
            r[i] = floor_mod(a[i] - b[i], static_cast<std::int64_t>(moduli_[i]));
        return r;
    }

    /// Element number idx in mixed radix order (component 0 fastest).
    Label element(std::uint64_t idx) const
    {
        Label x(rank());
        for (std::size_t i = 0; i < rank(); ++i) {
            x[i] = static_cast<std::int64_t>(idx % moduli_[i]);
            idx /= moduli_[i];
        }
        return x;
    }

    std::uint64_t index(const Label& x) const
    {
        std::uint64_t idx = 0;
        for (std::size_t i = rank(); i-- > 0;)
            idx = idx * moduli_[i] + static_cast<std::uint64_t>(floor_mod(x[i], static_cast<std::int64_t>(moduli_[i])));
        return idx;
    }

    /// theta = sum_j s_j x_j / N_j mod 1, over the common denominator lcm(N_j).
    Phase character(const Label& s, const Label& x) const
    {
        const auto l = static_cast<std::int64_t>(lcm_);
        __int128 acc = 0;
        for (std::size_t i = 0; i < rank(); ++i) {
            const auto n = static_cast<std::int64_t>(moduli_[i]);
            acc += static_cast<__int128>(floor_mod(s[i] * x[i], n)) * (l / n);
            acc %= l;
        }
        return Phase(static_cast<std::int64_t>(acc), l);
    }

    std::string to_string() const
    {
        if (moduli_.empty())
            return "trivial";
        std::string s;
        for (std::size_t i = 0; i < rank(); ++i)
            s += (i ? " x Z_" : "Z_") + std::to_string(moduli_[i]);
        return s;
    }

private:
    std::vector<std::uint64_t> moduli_;
    std::uint64_t lcm_ = 1;
    std::uint64_t order_ = 1;
};

struct PsiState {
    Label label;
    Phase theta;
};

/// mu(x) = sum_{j < t-1} x_j prod_{j' < j} N_{j'} over the leading components.
inline std::uint64_t mixed_radix(const AbelianGroup& g, const Label& x)
{
    if (g.rank() < 2)
        throw std::invalid_argument("mixed_radix: needs at least two components");
    std::uint64_t mu = 0, radix = 1;
    for (std::size_t j = 0; j + 1 < g.rank(); ++j) {
        mu += static_cast<std::uint64_t>(x[j]) * radix;
        radix *= g.modulus(j);
    }
    return mu;
}

// ---------------------------------------------------------------------------
// Oracles

class ShiftOracle {
public:
    virtual ~ShiftOracle() = default;
    virtual const AbelianGroup& group() const = 0;
    /// One Fourier-sampled state: uniform label x, theta = <s, x>.
    virtual PsiState sample(Rng& rng) = 0;
    /// f_1(x) == f_0(x + s) on every x (or a sample of them on large groups).
    virtual bool verify(const Label& s, Rng& rng) = 0;
};

inline PsiState fourier_sample(ShiftOracle& o, Rng& rng) { return o.sample(rng); }

/// Knows s; f_0 is the index encoding and f_1(x) = f_0(x + s).
class CheatOracle : public ShiftOracle {
public:
    CheatOracle(AbelianGroup g, Label secret) : g_(std::move(g)), s_(std::move(secret))
    {
        if (s_.size() != g_.rank())
            throw std::invalid_argument("cheat oracle: secret has the wrong rank");
        s_ = g_.sub(s_, g_.zero());
    }

    const AbelianGroup& group() const override { return g_; }
    const Label& secret() const { return s_; }

    PsiState sample(Rng& rng) override
    {
        Label x = g_.random(rng);
        Phase th = g_.character(s_, x);
        return {std::move(x), th};
    }

    std::uint64_t f0(const Label& x) const { return g_.index(x); }
    std::uint64_t f1(const Label& x) const { return g_.index(g_.add(x, s_)); }

    bool verify(const Label& s, Rng& rng) override
    {
        if (s.size() != g_.rank())
            return false;
        auto check = [&](const Label& x) { return f1(x) == f0(g_.add(x, s)); };
        if (g_.order() <= 4096) {
            for (std::uint64_t i = 0; i < g_.order(); ++i)
                if (!check(g_.element(i)))
                    return false;
            return true;
        }
        for (int i = 0; i < 64; ++i)
            if (!check(g_.random(rng)))
                return false;
        return true;
    }

private:
    AbelianGroup g_;
    Label s_;
};

/// Built from two hiding functions, tabulated over the whole group. The
/// shift is never stored: each sample locates the matched preimage pair of a
/// uniformly drawn image and uses their difference for the forced phase.
class HonestOracle : public ShiftOracle {
public:
    using Function = std::function<std::uint64_t(const Label&)>;

    HonestOracle(AbelianGroup g, const Function& f0, const Function& f1) : g_(std::move(g))
    {
        const std::uint64_t n = g_.order();
        t0_.resize(n);
        t1_.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            Label x = g_.element(i);
            t0_[i] = f0(x);
            t1_[i] = f1(x);
            if (!inv0_.emplace(t0_[i], i).second)
                throw std::domain_error("honest oracle: f_0 is not injective");
        }
        // some s with f_1(x) = f_0(x + s) for every x
        std::optional<Label> shift;
        for (std::uint64_t i = 0; i < n; ++i) {
            auto it = inv0_.find(t1_[i]);
            if (it == inv0_.end())
                throw std::domain_error("honest oracle: f_1 takes a value outside the image of f_0");
            Label d = g_.sub(g_.element(it->second), g_.element(i));
            if (!shift)
                shift = d;
            else if (*shift != d)
                throw std::domain_error("honest oracle: no shift relates f_0 and f_1");
        }
        evaluations_ = 2 * n;
    }

    const AbelianGroup& group() const override { return g_; }
    std::uint64_t evaluations() const { return evaluations_; }

    PsiState sample(Rng& rng) override
    {
        // uniform image <-> uniform x1; its partner x0 with f_0(x0) = f_1(x1)
        std::uint64_t i1 = std::uniform_int_distribution<std::uint64_t>(0, g_.order() - 1)(rng);
        std::uint64_t i0 = inv0_.at(t1_[i1]);
        Label diff = g_.sub(g_.element(i0), g_.element(i1));
        Label chi = g_.random(rng);
        Phase th = g_.character(diff, chi);
        return {std::move(chi), th};
    }

    bool verify(const Label& s, Rng&) override
    {
        if (s.size() != g_.rank())
            return false;
        for (std::uint64_t i = 0; i < g_.order(); ++i)
            if (t1_[i] != t0_[g_.index(g_.add(g_.element(i), s))])
                return false;
        return true;
    }

private:
    AbelianGroup g_;
    std::vector<std::uint64_t> t0_, t1_;
    std::unordered_map<std::uint64_t, std::uint64_t> inv0_;
    std::uint64_t evaluations_ = 0;
};

// ---------------------------------------------------------------------------
// Combiners

enum class AbortReason { none, input_bound, single_solution, projection, post_selection, carry, budget };

inline const char* to_string(AbortReason r)
{
    switch (r) {
    case AbortReason::none: return "none";
    case AbortReason::input_bound: return "input-bound";
    case AbortReason::single_solution: return "single-solution";
    case AbortReason::projection: return "projection";
    case AbortReason::post_selection: return "post-selection";
    case AbortReason::carry: return "carry";
    case AbortReason::budget: return "budget";
    }
    return "?";
}

/// Integer seen by a combiner: ((x_c * multiplier) mod N_c) >> shift.
struct LabelView {
    std::size_t component = 0;
    std::int64_t multiplier = 1;
    unsigned shift = 0;

    std::int64_t operator()(const AbelianGroup& g, const Label& x) const
    {
        const auto n = static_cast<std::int64_t>(g.modulus(component));
        const auto v = static_cast<std::int64_t>(static_cast<__int128>(x[component]) * multiplier % n);
        return floor_mod(v, n) >> shift;
    }
};

struct CombineOutcome {
    AbortReason reason = AbortReason::none;
    std::optional<PsiState> state;
    std::uint32_t y_star = 0, y_star2 = 0;  // y* -> |0>, y** -> |1>
    std::int64_t view_out = 0;              // combiner-space label of the output

    bool ok() const { return reason == AbortReason::none; }
};

namespace detail {

inline std::int64_t dot(const std::vector<std::int64_t>& u, std::uint32_t y)
{
    std::int64_t s = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (y >> i & 1u)
            s += u[i];
    return s;
}

// Ancilla measurement and pair projection shared by all three combiners.
// Strings y with equal key form the post-measurement superposition; nonzero
// ones are paired in increasing order and the projection lands on each
// basis string with equal probability.
template <class Key>
inline CombineOutcome measure_and_pair(std::size_t k, const Key& key, Rng& rng)
{
    if (k >= 31)
        throw std::invalid_argument("combiner arity too large to enumerate");
    const std::uint32_t total = 1u << k;
    const std::uint32_t y0 = std::uniform_int_distribution<std::uint32_t>(0, total - 1)(rng);
    const auto q = key(y0);
    std::vector<std::uint32_t> bucket;
    for (std::uint32_t y = 0; y < total; ++y)
        if (key(y) == q)
            bucket.push_back(y);
    const std::size_t nonzero = bucket.size() - (bucket.front() == 0 ? 1 : 0);
    CombineOutcome out;
    if (nonzero <= 1) {
        out.reason = AbortReason::single_solution;
        return out;
    }
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, bucket.size() - 1)(rng);
    const std::size_t offset = bucket.front() == 0 ? 1 : 0;
    if (pick < offset || pick - offset >= 2 * (nonzero / 2)) {
        out.reason = AbortReason::projection;
        return out;
    }
    const std::size_t pair = (pick - offset) / 2;
    out.y_star = bucket[offset + 2 * pair];
    out.y_star2 = bucket[offset + 2 * pair + 1];
    return out;
}

inline PsiState apply_pair(const AbelianGroup& g, const std::vector<PsiState>& states, std::uint32_t ys, std::uint32_t yss)
{
    PsiState out{g.zero(), Phase(0, static_cast<std::int64_t>(g.exponent()))};
    for (std::size_t i = 0; i < states.size(); ++i) {
        int c = static_cast<int>(yss >> i & 1u) - static_cast<int>(ys >> i & 1u);
        if (c == 0)
            continue;
        if (c > 0) {
            out.label = g.add(out.label, states[i].label);
            out.theta = out.theta + states[i].theta;
        } else {
            out.label = g.sub(out.label, states[i].label);
            out.theta = out.theta - states[i].theta;
        }
    }
    return out;
}

}  // namespace detail

/// Smaller labels: inputs with view < B, output view < B'. Surviving pairs
/// are post-selected to keep x' with probability B'/(2B' - x'), which is
/// what makes the output uniform on {0, ..., B'-1}.
inline CombineOutcome combine_d(const AbelianGroup& g, const std::vector<PsiState>& states, std::uint64_t b,
                                std::uint64_t b_out, Rng& rng, const LabelView& view = {})
{
    if (b_out == 0 || b_out > b)
        throw std::invalid_argument("combine_d: need 0 < B' <= B");
    std::vector<std::int64_t> u;
    const auto limit = static_cast<std::int64_t>(2 * b_out * (b / (2 * b_out)));
    for (const auto& s : states) {
        u.push_back(view(g, s.label));
        if (u.back() >= limit)
            return {AbortReason::input_bound, std::nullopt, 0, 0, 0};
    }
    const auto width = static_cast<std::int64_t>(2 * b_out);
    auto out = detail::measure_and_pair(u.size(), [&](std::uint32_t y) { return detail::dot(u, y) / width; }, rng);
    if (!out.ok())
        return out;
    if (detail::dot(u, out.y_star) > detail::dot(u, out.y_star2))
        std::swap(out.y_star, out.y_star2);
    const std::int64_t x = detail::dot(u, out.y_star2) - detail::dot(u, out.y_star);
    const auto bo = static_cast<std::int64_t>(b_out);
    if (x >= bo) {
        out.reason = AbortReason::post_selection;
        return out;
    }
    if (x >= 1) {
        std::int64_t r = std::uniform_int_distribution<std::int64_t>(0, 2 * bo - x - 1)(rng);
        if (r >= bo) {
            out.reason = AbortReason::post_selection;
            return out;
        }
    }
    out.view_out = x;
    out.state = detail::apply_pair(g, states, out.y_star, out.y_star2);
    return out;
}

/// Low-order bits: inputs with 2^l | view, output with 2^{l'} | view.
/// The view here is the full residue x_c in [0, N_c), N_c a power of two.
inline CombineOutcome combine_lsb(const AbelianGroup& g, const std::vector<PsiState>& states, unsigned l, unsigned l_out,
                                  Rng& rng, const LabelView& view = {})
{
    const std::uint64_t n = g.modulus(view.component);
    if (!is_power_of_two(n) || l_out < l || (std::uint64_t{1} << l_out) > n)
        throw std::invalid_argument("combine_lsb: need a power-of-two component and l <= l' <= log2 N");
    std::vector<std::int64_t> u;
    for (const auto& s : states) {
        u.push_back(view(g, s.label));
        if (u.back() % (std::int64_t{1} << l) != 0)
            throw std::invalid_argument("combine_lsb: input label not divisible by 2^l");
    }
    const std::int64_t mask = (std::int64_t{1} << l_out) - 1;
    auto out = detail::measure_and_pair(u.size(), [&](std::uint32_t y) { return detail::dot(u, y) & mask; }, rng);
    if (!out.ok())
        return out;
    out.view_out = floor_mod(detail::dot(u, out.y_star2) - detail::dot(u, out.y_star), static_cast<std::int64_t>(n));
    out.state = detail::apply_pair(g, states, out.y_star, out.y_star2);
    return out;
}

/// Zeroing components: mu is the mixed radix integer over `components`
/// (default: all but the last). Output mu(x') < B'. When the componentwise
/// differences wrap or borrow, mu(x') is no longer the integer difference of
/// the pair; that case is reported as a carry abort.
inline CombineOutcome combine_z(const AbelianGroup& g, const std::vector<PsiState>& states, std::uint64_t b,
                                std::uint64_t b_out, Rng& rng, std::vector<std::size_t> components = {})
{
    if (components.empty()) {
        if (g.rank() < 2)
            throw std::invalid_argument("combine_z: needs at least two components");
        for (std::size_t j = 0; j + 1 < g.rank(); ++j)
            components.push_back(j);
    }
    if (b_out == 0)
        throw std::invalid_argument("combine_z: B' must be positive");
    auto mu = [&](const Label& x) {
        std::int64_t m = 0, radix = 1;
        for (auto j : components) {
            m += x[j] * radix;
            radix *= static_cast<std::int64_t>(g.modulus(j));
        }
        return m;
    };
    std::vector<std::int64_t> u;
    for (const auto& s : states) {
        u.push_back(mu(s.label));
        if (u.back() >= static_cast<std::int64_t>(b))
            throw std::invalid_argument("combine_z: input mu exceeds B");
    }
    const auto width = static_cast<std::int64_t>(b_out);
    auto out = detail::measure_and_pair(u.size(), [&](std::uint32_t y) { return detail::dot(u, y) / width; }, rng);
    if (!out.ok())
        return out;
    if (detail::dot(u, out.y_star) > detail::dot(u, out.y_star2))
        std::swap(out.y_star, out.y_star2);
    const std::int64_t diff = detail::dot(u, out.y_star2) - detail::dot(u, out.y_star);
    PsiState st = detail::apply_pair(g, states, out.y_star, out.y_star2);
    if (mu(st.label) != diff) {
        out.reason = AbortReason::carry;
        return out;
    }
    out.view_out = diff;
    out.state = std::move(st);
    return out;
}

// ---------------------------------------------------------------------------
// Schedules

enum class CombinerKind { d, lsb, z };

inline const char* to_string(CombinerKind k)
{
    switch (k) {
    case CombinerKind::d: return "D";
    case CombinerKind::lsb: return "LSB";
    case CombinerKind::z: return "Z";
    }
    return "?";
}

struct Stage {
    CombinerKind kind = CombinerKind::d;
    LabelView view;
    std::uint64_t bound_in = 0, bound_out = 0;  // D and Z
    unsigned low_in = 0, low_out = 0;           // LSB: 2^low | view
    bool degraded = false;

    bool accepts_output(const AbelianGroup& g, const Label& x) const
    {
        std::int64_t v = view(g, x);
        if (kind == CombinerKind::lsb)
            return v % (std::int64_t{1} << low_out) == 0;
        return v < static_cast<std::int64_t>(bound_out);
    }
};

struct SieveSchedule {
    unsigned k = 0;
    std::vector<std::uint64_t> bounds;  // B_0..B_m for the single-kind schedules
    std::vector<Stage> stages;

    std::size_t m() const { return stages.size(); }
    bool any_degraded() const
    {
        return std::any_of(stages.begin(), stages.end(), [](const Stage& s) { return s.degraded; });
    }
};

struct ScheduleOverrides {
    std::optional<unsigned> k;
    std::optional<unsigned> m;
};

/// floor(sqrt(log2 N log2 log2 N / 2)), zero when N is too small for it.
inline unsigned sieve_arity(double n)
{
    double l = std::log2(n);
    if (l <= 1.0)
        return 0;
    return static_cast<unsigned>(std::floor(std::sqrt(0.5 * l * std::log2(l)) + 1e-12));
}

namespace detail {

inline std::uint64_t ceil_tol(double x) { return static_cast<std::uint64_t>(std::max(0.0, std::ceil(x - 1e-9))); }

// max b >= 0 with b^m * den <= num
inline std::uint64_t floor_root_ratio(const Integer& num, const Integer& den, unsigned m)
{
    auto fits = [&](std::uint64_t b) {
        Integer v = 1;
        for (unsigned i = 0; i < m; ++i)
            v *= b;
        return v * den <= num;
    };
    double est = std::pow(static_cast<double>(num) / static_cast<double>(den), 1.0 / m);
    std::uint64_t b = static_cast<std::uint64_t>(std::max(0.0, std::floor(est)));
    while (b > 0 && !fits(b))
        --b;
    while (fits(b + 1))
        ++b;
    return b;
}

inline Integer ipow(std::uint64_t base, unsigned e)
{
    Integer v = 1;
    for (unsigned i = 0; i < e; ++i)
        v *= base;
    return v;
}

}  // namespace detail

/// Bounds B_i = floor(N / rho^i), rho = (N/2)^{1/m}: B_0 = N down to B_m = 2.
/// Stages outside 4k <= B_{i-1}/B_i <= 2^k/k are flagged degraded.
inline SieveSchedule schedule_smaller_labels(std::uint64_t n, const ScheduleOverrides& ov = {})
{
    if (n < 2)
        throw std::invalid_argument("schedule_smaller_labels: N must be >= 2");
    SieveSchedule s;
    s.k = ov.k ? *ov.k : sieve_arity(static_cast<double>(n));
    auto denom = [](unsigned k) { return k - std::log2(2.0 * k); };
    if (!ov.m) {
        if (!ov.k)
            while (s.k < 1 || denom(s.k) <= 1e-9)
                ++s.k;
        if (denom(s.k) <= 1e-9)
            throw std::invalid_argument("schedule_smaller_labels: k too small for the stage-count formula");
    }
    const unsigned m = ov.m ? *ov.m : static_cast<unsigned>(detail::ceil_tol(std::log2(n / 2.0) / denom(s.k)));
    if (m == 0 && n != 2)
        throw std::invalid_argument("schedule_smaller_labels: m = 0 needs N = 2");
    for (unsigned i = 0; i <= m; ++i) {
        // B_i^m <= N^m (2/N)^i
        std::uint64_t b = m == 0 ? n : detail::floor_root_ratio(detail::ipow(n, m) * detail::ipow(2, i), detail::ipow(n, i), m);
        s.bounds.push_back(b);
    }
    for (unsigned i = 1; i <= m; ++i) {
        Stage st;
        st.kind = CombinerKind::d;
        st.bound_in = s.bounds[i - 1];
        st.bound_out = s.bounds[i];
        const Integer ratio_lo = Integer(4 * s.k) * st.bound_out;       // 4k B_i <= B_{i-1}
        const Integer ratio_hi = detail::ipow(2, s.k) * st.bound_out;  // k B_{i-1} <= 2^k B_i
        st.degraded = !(ratio_lo <= st.bound_in && Integer(s.k) * st.bound_in <= ratio_hi);
        s.stages.push_back(st);
    }
    return s;
}

/// Bounds B_i = floor(N / rho^i), rho = N^{1/m}: B_0 = N down to B_m = 1.
/// Stages with B_{i-1}/B_i > 2^k/2k are flagged degraded.
inline SieveSchedule schedule_zero_components(std::uint64_t n, const ScheduleOverrides& ov = {})
{
    if (n < 2)
        throw std::invalid_argument("schedule_zero_components: N must be >= 2");
    SieveSchedule s;
    s.k = ov.k ? *ov.k : sieve_arity(static_cast<double>(n));
    auto denom = [](unsigned k) { return k - std::log2(4.0 * k); };
    if (!ov.m) {
        if (!ov.k)
            while (s.k < 1 || denom(s.k) <= 1e-9)
                ++s.k;
        if (denom(s.k) <= 1e-9)
            throw std::invalid_argument("schedule_zero_components: k too small for the stage-count formula");
    }
    const unsigned m = ov.m ? *ov.m : static_cast<unsigned>(detail::ceil_tol(std::log2(static_cast<double>(n)) / denom(s.k)));
    if (m == 0)
        throw std::invalid_argument("schedule_zero_components: m must be positive");
    for (unsigned i = 0; i <= m; ++i)
        s.bounds.push_back(detail::floor_root_ratio(detail::ipow(n, m - i), 1, m));
    for (unsigned i = 1; i <= m; ++i) {
        Stage st;
        st.kind = CombinerKind::z;
        st.bound_in = s.bounds[i - 1];
        st.bound_out = s.bounds[i];
        // B_{i-1} 2k <= 2^k B_i
        st.degraded = !(Integer(st.bound_in) * (2 * s.k) <= detail::ipow(2, s.k) * st.bound_out);
        s.stages.push_back(st);
    }
    return s;
}

struct PlanOptions {
    std::optional<unsigned> k;  // arity for every stage; default max(formula(|A|), k_floor)
    unsigned k_floor = 8;
};

inline unsigned plan_arity(const AbelianGroup& g, const PlanOptions& opts)
{
    if (opts.k)
        return *opts.k;
    return std::max(sieve_arity(static_cast<double>(g.order())), opts.k_floor);
}

/// Stages producing psi with label 2^j on component i and zero elsewhere:
/// Z stages for every other component, then LSB stages (power-of-two N_i),
/// then D stages on the view 2^{-j} x (odd N_i) or x / 2^j (power of two).
/// Stages whose bound does not shrink are dropped. D stages with B < 2B' are
/// merged into the next one; a last such stage (N = 3) is dropped and the
/// caller filters outputs by view.
inline SieveSchedule build_stage_plan(const AbelianGroup& g, std::size_t i, unsigned j, const PlanOptions& opts = {})
{
    if (i >= g.rank())
        throw std::invalid_argument("build_stage_plan: component out of range");
    const std::uint64_t n = g.modulus(i);
    SieveSchedule plan;
    plan.k = plan_arity(g, opts);
    const unsigned k = plan.k;
    if (k < 2)
        throw std::invalid_argument("build_stage_plan: arity must be at least 2");

    // a D stage needs B >= 2B' (else the input bound is 0); shallower ones
    // are folded into the next stage
    auto append = [&](const SieveSchedule& s, const LabelView& view) {
        std::uint64_t pending = s.stages.empty() ? 0 : s.stages.front().bound_in;
        for (const Stage& orig : s.stages) {
            Stage st = orig;
            if (st.bound_in == st.bound_out)
                continue;
            if (st.kind == CombinerKind::d) {
                st.bound_in = pending;
                if (st.bound_in < 2 * st.bound_out)
                    continue;
                if (st.bound_in != orig.bound_in)
                    st.degraded = !(4 * Integer(k) * st.bound_out <= st.bound_in &&
                                    Integer(k) * st.bound_in <= detail::ipow(2, k) * st.bound_out);
                pending = st.bound_out;
            }
            st.view = view;
            plan.stages.push_back(st);
        }
    };

    for (std::size_t c = 0; c < g.rank(); ++c) {
        if (c == i)
            continue;
        // one component at a time keeps mu free of carries
        ScheduleOverrides ov{k, std::nullopt};
        const double dz = k - std::log2(4.0 * k);
        if (dz <= 1e-9)
            ov.m = static_cast<unsigned>(std::max<std::uint64_t>(1, ceil_log2(g.modulus(c))));
        append(schedule_zero_components(g.modulus(c), ov), LabelView{c, 1, 0});
    }

    const double dd = k - std::log2(2.0 * k);
    auto d_overrides = [&](std::uint64_t size) {
        ScheduleOverrides ov{k, std::nullopt};
        if (dd <= 1e-9)
            ov.m = static_cast<unsigned>(ceil_log2(size) > 0 ? ceil_log2(size) - 1 : 0);
        return ov;
    };

    if (g.is_odd(i)) {
        if ((std::uint64_t{1} << j) > 2 * n)
            throw std::invalid_argument("build_stage_plan: j exceeds floor(log2 N)");
        const std::uint64_t inv2j = inv_mod(pow_mod(2, j, n), n);
        append(schedule_smaller_labels(n, d_overrides(n)), LabelView{i, static_cast<std::int64_t>(inv2j), 0});
    } else if (g.is_pow2(i)) {
        const unsigned bits = static_cast<unsigned>(floor_log2(n));
        if (j >= bits)
            throw std::invalid_argument("build_stage_plan: j must be below log2 N");
        unsigned low = 0;
        while (low < j) {
            unsigned next = std::min(j, low + (k - 1));
            Stage st;
            st.kind = CombinerKind::lsb;
            st.view = LabelView{i, 1, 0};
            st.low_in = low;
            st.low_out = next;
            plan.stages.push_back(st);
            low = next;
        }
        const std::uint64_t rest = n >> j;
        if (rest > 2)
            append(schedule_smaller_labels(rest, d_overrides(rest)), LabelView{i, 1, j});
    } else {
        throw std::invalid_argument("build_stage_plan: component must be odd or a power of two");
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Sieve

struct SieveStats {
    std::uint64_t preparations = 0;
    std::uint64_t combinations = 0;
    std::uint64_t successes = 0;
    std::map<AbortReason, std::uint64_t> aborts;
    std::size_t max_pool = 0;
};

inline CombineOutcome run_stage(const AbelianGroup& g, const Stage& st, const std::vector<PsiState>& in, Rng& rng)
{
    switch (st.kind) {
    case CombinerKind::d: return combine_d(g, in, st.bound_in, st.bound_out, rng, st.view);
    case CombinerKind::lsb: return combine_lsb(g, in, st.low_in, st.low_out, rng, st.view);
    case CombinerKind::z: return combine_z(g, in, st.bound_in, st.bound_out, rng, {st.view.component});
    }
    throw std::logic_error("run_stage: unknown combiner");
}

/// Pools of states per stage, combined lowest stage first. Pools survive
/// between calls to next(), so repeated outputs reuse earlier work.
class Sieve {
public:
    using Source = std::function<PsiState(Rng&)>;

    Sieve(AbelianGroup g, SieveSchedule plan, Source source, std::uint64_t budget)
        : g_(std::move(g)), plan_(std::move(plan)), source_(std::move(source)), budget_(budget),
          pools_(plan_.stages.size())
    {
    }

    const SieveStats& stats() const { return stats_; }

    /// Next state from S_m, or nullopt once the preparation budget is spent.
    std::optional<PsiState> next(Rng& rng)
    {
        const std::size_t m = plan_.stages.size();
        const std::size_t k = plan_.k;
        if (m == 0) {
            if (stats_.preparations >= budget_)
                return std::nullopt;
            ++stats_.preparations;
            return source_(rng);
        }
        for (;;) {
            std::size_t ready = m;
            for (std::size_t s = 0; s < m; ++s)
                if (pools_[s].size() >= k) {
                    ready = s;
                    break;
                }
            if (ready == m) {
                if (stats_.preparations >= budget_) {
                    ++stats_.aborts[AbortReason::budget];
                    return std::nullopt;
                }
                ++stats_.preparations;
                pools_[0].push_back(source_(rng));
                track();
                continue;
            }
            std::vector<PsiState> batch(pools_[ready].end() - static_cast<std::ptrdiff_t>(k), pools_[ready].end());
            pools_[ready].resize(pools_[ready].size() - k);
            ++stats_.combinations;
            CombineOutcome out = run_stage(g_, plan_.stages[ready], batch, rng);
            if (!out.ok()) {
                ++stats_.aborts[out.reason];
                continue;
            }
            ++stats_.successes;
            if (!plan_.stages[ready].accepts_output(g_, out.state->label))
                throw std::logic_error("sieve: combiner output outside its target set");
            if (ready + 1 == m)
                return std::move(*out.state);
            pools_[ready + 1].push_back(std::move(*out.state));
            track();
        }
    }

private:
    void track()
    {
        std::size_t total = 0;
        for (const auto& p : pools_)
            total += p.size();
        stats_.max_pool = std::max(stats_.max_pool, total);
    }

    AbelianGroup g_;
    SieveSchedule plan_;
    Source source_;
    std::uint64_t budget_;
    std::vector<std::vector<PsiState>> pools_;
    SieveStats stats_;
};

inline std::optional<PsiState> run_sieve(const AbelianGroup& g, const SieveSchedule& plan, const Sieve::Source& source,
                                         Rng& rng, std::uint64_t budget, SieveStats* stats = nullptr)
{
    Sieve s(g, plan, source, budget);
    auto out = s.next(rng);
    if (stats)
        *stats = s.stats();
    return out;
}

// ---------------------------------------------------------------------------
// Reconstruction and the solver

struct ReconstructResult {
    std::uint64_t value = 0;
    bool tie = false;
    double best = 0, runner_up = 0;
};

/// Given theta_j for labels 2^j (j = 0..k-1) on Z_N, score every candidate
/// by |sum_{y < 2^k} e^{2 pi i (theta(y) - s y / N)}|^2 and take the argmax.
/// The sum factors as prod_j (1 + e^{i phi_j}), so each score is a product
/// of 4 cos^2(phi_j / 2).
inline ReconstructResult reconstruct(const std::vector<Phase>& thetas, std::uint64_t n)
{
    if (n < 2)
        throw std::invalid_argument("reconstruct: N must be >= 2");
    ReconstructResult r;
    r.best = -1;
    r.runner_up = -1;
    const double tau = 2.0 * std::acos(-1.0);
    for (std::uint64_t s = 0; s < n; ++s) {
        double score = 1.0;
        for (std::size_t j = 0; j < thetas.size(); ++j) {
            // theta_j - s 2^j / N, reduced mod 1 before taking the cosine
            std::uint64_t sj = mul_mod(s, pow_mod(2, j, n), n);
            double phi = thetas[j].value() - static_cast<double>(sj) / static_cast<double>(n);
            phi -= std::floor(phi);
            double c = std::cos(tau * phi / 2.0);
            score *= 4.0 * c * c;
        }
        if (score > r.best) {
            r.runner_up = r.best;
            r.best = score;
            r.value = s;
        } else if (score > r.runner_up) {
            r.runner_up = score;
        }
    }
    r.tie = r.runner_up >= r.best * (1.0 - 1e-9);
    return r;
}

/// Number of labels 2^j needed on Z_N: log2 N for powers of two, else
/// floor(log2 N) + 1.
inline unsigned reconstruct_width(std::uint64_t n)
{
    return is_power_of_two(n) ? static_cast<unsigned>(floor_log2(n)) : static_cast<unsigned>(floor_log2(n)) + 1;
}

/// Split of Z_N into Z_{2^a} x Z_m, with the phase coefficients that keep
/// theta unchanged: s_2 = m^{-1} s mod 2^a and s_m = 2^{-a} s mod m.
struct CrtSplit {
    AbelianGroup original;
    AbelianGroup split;
    struct Part {
        std::size_t source;
        std::uint64_t modulus;
        std::uint64_t coefficient;  // s' = coefficient * s mod modulus
    };
    std::vector<Part> parts;

    explicit CrtSplit(AbelianGroup g) : original(std::move(g))
    {
        std::vector<std::uint64_t> mods;
        for (std::size_t i = 0; i < original.rank(); ++i) {
            std::uint64_t n = original.modulus(i), two = 1;
            while (n % 2 == 0) {
                n /= 2;
                two *= 2;
            }
            if (two > 1)
                parts.push_back({i, two, n == 1 ? 1 : inv_mod(n % two, two)});
            if (n > 1)
                parts.push_back({i, n, two == 1 ? 1 : inv_mod(two % n, n)});
        }
        for (const auto& p : parts)
            mods.push_back(p.modulus);
        split = AbelianGroup(mods);
    }

    Label to_split(const Label& x) const
    {
        Label y;
        for (const auto& p : parts)
            y.push_back(floor_mod(x[p.source], static_cast<std::int64_t>(p.modulus)));
        return y;
    }

    Label secret_to_split(const Label& s) const
    {
        Label y;
        for (const auto& p : parts)
            y.push_back(static_cast<std::int64_t>(mul_mod(to_residue(s[p.source], p.modulus), p.coefficient, p.modulus)));
        return y;
    }

    Label secret_from_split(const Label& sp) const
    {
        // undo the coefficient, then CRT the two residues of each component
        Label s(original.rank(), 0);
        std::vector<std::uint64_t> modsofar(original.rank(), 1);
        for (std::size_t c = 0; c < parts.size(); ++c) {
            const auto& p = parts[c];
            std::uint64_t r = mul_mod(static_cast<std::uint64_t>(sp[c]), inv_mod(p.coefficient, p.modulus), p.modulus);
            std::uint64_t m0 = modsofar[p.source];
            std::uint64_t cur = static_cast<std::uint64_t>(s[p.source]);
            // x = cur (mod m0), x = r (mod p.modulus)
            std::uint64_t tcoef = mul_mod(sub_mod(r, cur % p.modulus, p.modulus), inv_mod(m0 % p.modulus, p.modulus), p.modulus);
            s[p.source] = static_cast<std::int64_t>(cur + m0 * tcoef);
            modsofar[p.source] = m0 * p.modulus;
        }
        return s;
    }
};

struct SolveOptions {
    std::uint64_t budget = 2'000'000;  // state preparations per attempt
    unsigned retry_cap = 16;
    PlanOptions plan;
    std::optional<Label> audit_secret;  // check every sieve state against it
};

struct SolveStats {
    unsigned attempts = 0;
    std::uint64_t preparations = 0;
    std::uint64_t combinations = 0;
    std::uint64_t discarded_outputs = 0;  // sieve outputs whose view is not 1
    std::uint64_t ties = 0;
    std::uint64_t audit_checks = 0;
    std::uint64_t audit_violations = 0;
    std::map<AbortReason, std::uint64_t> aborts;
};

struct SolveResult {
    Label shift;
    SolveStats stats;
};

/// Hidden shift s with f_1(x) = f_0(x + s), Las Vegas: every returned s has
/// passed oracle.verify. Throws once the retry cap is exhausted.
inline SolveResult solve_hidden_shift(ShiftOracle& oracle, Rng& rng, const SolveOptions& opts = {})
{
    const CrtSplit crt(oracle.group());
    const AbelianGroup& g = crt.split;
    SolveResult res;
    auto& st = res.stats;
    std::optional<Label> audit;
    if (opts.audit_secret)
        audit = crt.secret_to_split(*opts.audit_secret);

    Sieve::Source source = [&](Rng& r) {
        PsiState s = oracle.sample(r);
        s.label = crt.to_split(s.label);
        if (audit) {
            ++st.audit_checks;
            if (!(g.character(*audit, s.label) == s.theta))
                ++st.audit_violations;
        }
        return s;
    };

    if (g.rank() == 0) {
        res.shift = Label(oracle.group().rank(), 0);
        if (!oracle.verify(res.shift, rng))
            throw std::runtime_error("solve_hidden_shift: trivial group but verification failed");
        return res;
    }

    for (unsigned attempt = 0; attempt <= opts.retry_cap; ++attempt) {
        ++st.attempts;
        std::uint64_t spent = 0;
        Label sp(g.rank(), 0);
        bool failed = false;
        for (std::size_t i = 0; i < g.rank() && !failed; ++i) {
            const std::uint64_t n = g.modulus(i);
            std::vector<Phase> thetas;
            for (unsigned j = 0; j < reconstruct_width(n) && !failed; ++j) {
                SieveSchedule plan = build_stage_plan(g, i, j, opts.plan);
                const LabelView final_view =
                    g.is_odd(i) ? LabelView{i, static_cast<std::int64_t>(inv_mod(pow_mod(2, j, n), n)), 0} : LabelView{i, 1, j};
                Sieve sieve(g, plan, source, opts.budget > spent ? opts.budget - spent : 0);
                for (;;) {
                    auto out = sieve.next(rng);
                    if (!out) {
                        failed = true;
                        break;
                    }
                    bool others_zero = true;
                    for (std::size_t c = 0; c < g.rank(); ++c)
                        if (c != i && out->label[c] != 0)
                            others_zero = false;
                    if (!others_zero)
                        throw std::logic_error("solve_hidden_shift: sieve output has nonzero foreign components");
                    std::int64_t v = final_view(g, out->label);
                    if (v == 1) {
                        if (audit) {
                            ++st.audit_checks;
                            if (!(g.character(*audit, out->label) == out->theta))
                                ++st.audit_violations;
                        }
                        thetas.push_back(out->theta);
                        break;
                    }
                    ++st.discarded_outputs;
                }
                spent += sieve.stats().preparations;
                st.preparations += sieve.stats().preparations;
                st.combinations += sieve.stats().combinations;
                for (auto [reason, cnt] : sieve.stats().aborts)
                    st.aborts[reason] += cnt;
            }
            if (failed)
                break;
            // theta_j is <s', 2^j e_i> = s'_i 2^j / N_i over the common denominator
            auto rec = reconstruct(thetas, n);
            if (rec.tie) {
                ++st.ties;
                failed = true;
                break;
            }
            sp[i] = static_cast<std::int64_t>(rec.value);
        }
        if (failed)
            continue;
        Label s = crt.secret_from_split(sp);
        if (oracle.verify(s, rng)) {
            res.shift = std::move(s);
            return res;
        }
    }
    throw std::runtime_error("solve_hidden_shift: retry cap exhausted");
}

}  // namespace isoq

#endif
