#ifndef ISOQ_TESTS_FIXTURES_HPP
#define ISOQ_TESTS_FIXTURES_HPP

// Deterministic test curves and instances.

#include <optional>
#include <stdexcept>

#include "isoq/attack.hpp"

namespace fixtures {

/// First curve y^2 = x^3 + Ax + B over F_p (A, B ascending) that is
/// ordinary with the given fundamental discriminant, maximal order, and
/// j not in {0, 1728}.
inline std::optional<isoq::Curve> find_curve(std::uint64_t p, std::int64_t delta)
{
    for (std::uint64_t a = 0; a < p; ++a)
        for (std::uint64_t b = 0; b < p; ++b) {
            if ((4 * a % p * a % p * a + 27 * b % p * b) % p == 0)
                continue;
            isoq::Curve c(p, a, b);
            std::optional<isoq::CurveContext> ctx;
            try {
                ctx = isoq::point_count(c);
            } catch (const std::domain_error&) {
                continue;
            }
            if (ctx->delta.value() != delta || ctx->j == 0 || ctx->j == 1728 % p)
                continue;
            if (isoq::is_maximal_order(*ctx))
                return c;
        }
    return std::nullopt;
}

/// Delta = -47 forces t even and v even; 83 = 6^2 + 47 is the smallest prime
/// with v = 2, and 191 = 12^2 + 47 the next.
inline isoq::Curve delta47_curve()
{
    for (std::uint64_t p : {83u, 191u, 311u})
        if (auto c = find_curve(p, -47))
            return *c;
    throw std::runtime_error("fixtures: no maximal-order curve with delta -47");
}

struct Planted {
    isoq::Instance instance;
    isoq::QuadForm planted;
};

/// E1 = [g] * E0 by forward star evaluation.
inline Planted plant(const isoq::Curve& e0, const isoq::QuadForm& g, std::uint64_t seed = 1)
{
    isoq::Rng rng(seed);
    isoq::Instance base = isoq::make_instance(e0, e0);
    isoq::AttackContext actx(base, isoq::AttackConfig{});
    auto e1 = actx.evaluator()(base.ctx0, g, rng);
    return {isoq::make_instance(e0, e1.curve), isoq::reduce(g)};
}

}  // namespace fixtures

#endif
