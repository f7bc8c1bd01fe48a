#ifndef ISOQ_TOOLS_CLI_HPP
#define ISOQ_TOOLS_CLI_HPP

// Subcommand dispatch for the isoq tool, kept apart from main() so tests can
// drive it with an argument vector and capture the report.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isoq/isoq.hpp"

namespace isoq::cli {

struct SeedChoice {
    std::uint64_t seed = 0;
    const char* source = "flag";
};

inline SeedChoice resolve_seed(const std::optional<std::uint64_t>& flag)
{
    if (flag)
        return {*flag, "flag"};
    if (const char* env = std::getenv("ISOQ_SEED")) {
        try {
            std::size_t used = 0;
            std::uint64_t s = std::stoull(env, &used, 10);
            if (used == std::string(env).size())
                return {s, "ISOQ_SEED"};
        } catch (const std::exception&) {
        }
        throw std::invalid_argument("ISOQ_SEED is not a base-10 integer");
    }
    std::random_device rd;
    return {(static_cast<std::uint64_t>(rd()) << 32) ^ rd(), "entropy"};
}

inline std::vector<std::int64_t> parse_list(const std::string& s, const char* what)
{
    std::vector<std::int64_t> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        std::int64_t v = 0;
        try {
            v = std::stoll(part, &used, 10);
        } catch (const std::exception&) {
            used = 0;
        }
        if (part.empty() || used != part.size())
            throw std::invalid_argument(std::string(what) + ": expected comma separated integers");
        out.push_back(v);
    }
    if (out.empty())
        throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

template <class T>
std::string join(const std::vector<T>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ",";
        if constexpr (std::is_same_v<T, std::string>)
            s += v[i];
        else
            s += std::to_string(v[i]);
    }
    return s;
}

inline QuadForm parse_class(const std::string& s, const Discriminant& d)
{
    auto v = parse_list(s, "--class");
    if (v.size() != 2 && v.size() != 3)
        throw std::invalid_argument("--class: expected a,b or a,b,c");
    QuadForm f = QuadForm::from_ab(Integer(v[0]), Integer(v[1]), d);
    if (v.size() == 3 && f.c() != v[2])
        throw std::invalid_argument("--class: c does not match the discriminant");
    return reduce(f);
}

inline void print_seed(std::ostream& out, const SeedChoice& s)
{
    out << "seed=" << s.seed << "\n";
    if (std::string(s.source) != "flag")
        out << "seed_source=" << s.source << "\n";
}

inline std::string fixed(double x, int digits = 6)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << x;
    return os.str();
}

inline void print_stats(std::ostream& out, const SolveStats& st)
{
    out << "attempts=" << st.attempts << "\n"
        << "preparations=" << st.preparations << "\n"
        << "combinations=" << st.combinations << "\n";
    for (auto [r, c] : st.aborts)
        out << "abort." << to_string(r) << "=" << c << "\n";
}

/// Runs one subcommand. Exit codes: 0 success, 1 algorithmic failure,
/// 2 usage error.
inline int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Isogeny quotient toolkit: class groups, relations, the star action, the hidden shift sieve"};
    app.require_subcommand(1);
    std::optional<std::uint64_t> seed_flag;
    app.add_option("--seed", seed_flag, "RNG seed (fallback: ISOQ_SEED, then OS entropy)");

    std::int64_t disc = 0;
    auto* cg = app.add_subcommand("classgroup", "Enumerate Cl(delta)");
    cg->add_option("--disc", disc, "negative discriminant")->required();

    std::string target = "1,1";
    std::uint64_t walk_t = 0, fb_bound = 0;
    std::optional<std::uint64_t> iters;
    auto* rel = app.add_subcommand("relation", "Short relation for a class over small prime forms");
    rel->add_option("--disc", disc)->required();
    rel->add_option("--class", target, "target class a,b");
    rel->add_option("--t", walk_t, "walk length (default ceil ln|delta|)");
    rel->add_option("--fb-bound", fb_bound, "factor base bound (default from the smoothness parameter)");
    rel->add_option("--iters", iters, "walk attempts");

    std::uint64_t p = 0, ca = 0, cb = 0;
    auto* st = app.add_subcommand("star", "Apply a class to a curve");
    st->add_option("--p", p)->required();
    st->add_option("--A", ca)->required();
    st->add_option("--B", cb)->required();
    st->add_option("--class", target, "class a,b")->required();

    std::uint64_t trials = 10000;
    auto* mx = app.add_subcommand("mixing", "Landing frequencies of t-step walks from the identity");
    mx->add_option("--disc", disc)->required();
    mx->add_option("--t", walk_t)->required();
    mx->add_option("--trials", trials);
    mx->add_option("--fb-bound", fb_bound);

    std::uint64_t p_min = 5, p_max = 500, h_min = 2, h_max = 0;
    std::string out_path, in_path;
    auto* gen = app.add_subcommand("gen-instance", "Random instance with a planted quotient");
    gen->add_option("--p-min", p_min);
    gen->add_option("--p-max", p_max);
    gen->add_option("--h-min", h_min);
    gen->add_option("--h-max", h_max, "0 for no upper limit");
    gen->add_option("--out", out_path, "write the instance file here");

    unsigned retry_cap = 16;
    auto* att = app.add_subcommand("attack", "Recover the quotient of an instance file");
    att->add_option("--in", in_path)->required();
    att->add_option("--retry-cap", retry_cap);

    std::string group_s, secret_s, mode = "cheat";
    unsigned arity = 0;
    auto* sd = app.add_subcommand("sieve-demo", "Hidden shift on Z_N1 x ... x Z_Nt");
    sd->add_option("--group", group_s, "moduli N1,N2,...")->required();
    sd->add_option("--secret", secret_s, "shift s1,s2,...")->required();
    sd->add_option("--mode", mode)->check(CLI::IsMember({"cheat", "honest"}));
    sd->add_option("--k", arity, "combiner arity for every stage");
    sd->add_option("--retry-cap", retry_cap);

    std::uint64_t big_n = 0;
    unsigned sk = 0, sm = 0;
    std::string kind = "both";
    auto* sc = app.add_subcommand("schedule", "Stage bounds for the D and Z sieves");
    sc->add_option("--N", big_n)->required();
    sc->add_option("--k", sk);
    sc->add_option("--m", sm);
    sc->add_option("--kind", kind)->check(CLI::IsMember({"d", "z", "both"}));

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        const bool needs_seed = !cg->parsed() && !sc->parsed();
        SeedChoice seed;
        if (needs_seed)
            seed = resolve_seed(seed_flag);
        Rng rng(seed.seed);

        if (cg->parsed()) {
            Discriminant d(disc);
            ClassGroup g = enumerate_class_group(d);
            out << "disc=" << disc << "\n"
                << "fundamental=" << (is_fundamental(d) ? "true" : "false") << "\n"
                << "h=" << g.class_number() << "\n"
                << "structure=" << g.structure() << "\n";
            for (std::size_t i = 0; i < g.generators().size(); ++i)
                out << "generator=" << g.generators()[i] << " order=" << g.orders()[i] << "\n";
            for (const auto& f : g.elements())
                out << "form=" << f << "\n";
            return 0;
        }

        if (rel->parsed()) {
            print_seed(out, seed);
            Discriminant d(disc);
            FactorBaseOptions fo;
            if (fb_bound)
                fo.forced_bound = fb_bound;
            FactorBase fb = build_factor_base(d, 1, 1, 1, default_smoothness_z, fo);
            const std::uint64_t t = walk_t ? walk_t : std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::ceil(std::log(static_cast<double>(d.abs())))));
            QuadForm b = parse_class(target, d);
            RelationOptions ro;
            if (iters)
                ro.max_iters = *iters;
            std::vector<std::uint64_t> ells;
            for (const auto& pf : fb.primes)
                ells.push_back(pf.ell);
            out << "target=" << b << "\n"
                << "factor_base=" << join(ells) << "\n"
                << "t=" << t << "\n";
            auto r = find_relation(fb, b, t, rng, ro);
            if (!r) {
                out << "status=nil\n";
                return 1;
            }
            out << "z=" << join(r->z) << "\n"
                << "l1=" << r->l1() << "\n"
                << "verify=" << (recompose(fb, r->z) == b ? "true" : "false") << "\n";
            return 0;
        }

        if (st->parsed()) {
            print_seed(out, seed);
            Curve e(p, ca, cb);
            Instance in = make_instance(e, e);
            AttackContext actx(in, AttackConfig{});
            QuadForm cls = parse_class(target, in.delta);
            StarResult r = actx.evaluator()(in.ctx0, cls, rng);
            out << "curve=" << e << "\n"
                << "delta=" << in.delta.value() << "\n"
                << "j=" << in.ctx0.j << "\n"
                << "class=" << cls << "\n"
                << "result=" << r.curve << "\n"
                << "result_j=" << r.j << "\n";
            return 0;
        }

        if (mx->parsed()) {
            print_seed(out, seed);
            Discriminant d(disc);
            ClassGroup g = enumerate_class_group(d);
            FactorBaseOptions fo;
            if (fb_bound)
                fo.forced_bound = fb_bound;
            FactorBase fb = build_factor_base(d, 1, 1, 1, default_smoothness_z, fo);
            std::vector<std::uint64_t> hits(g.class_number(), 0);
            for (std::uint64_t i = 0; i < trials; ++i) {
                WalkVector v = sample_walk(fb, walk_t, rng);
                ++hits[*g.index_of(recompose(fb, v.entries))];
            }
            out << "h=" << g.class_number() << "\n"
                << "t=" << walk_t << "\n"
                << "trials=" << trials << "\n";
            double lo = 1.0;
            for (std::size_t i = 0; i < hits.size(); ++i) {
                double f = trials ? static_cast<double>(hits[i]) / static_cast<double>(trials) : 0.0;
                lo = std::min(lo, f);
                out << "class=" << g.elements()[i] << " freq=" << fixed(f) << "\n";
            }
            out << "min_freq=" << fixed(lo) << "\n"
                << "uniform=" << fixed(1.0 / static_cast<double>(g.class_number())) << "\n";
            return 0;
        }

        if (gen->parsed()) {
            print_seed(out, seed);
            GenerateOptions go;
            if (h_max)
                go.h_max = h_max;
            GeneratedInstance gi = generate_instance(p_min, p_max, h_min, rng, go);
            const Instance& in = gi.instance;
            InstanceFile f{in.p, in.e0.a(), in.e0.b(), in.e1.a(), in.e1.b(),
                           static_cast<std::int64_t>(in.delta.value()),
                           std::vector<Integer>{gi.planted.cls.a(), gi.planted.cls.b(), gi.planted.cls.c()}};
            if (!out_path.empty()) {
                std::ofstream os(out_path);
                if (!os)
                    throw std::invalid_argument("cannot write " + out_path);
                write_instance_file(os, f);
                out << "written=" << out_path << "\n";
            }
            out << "h=" << enumerate_class_group(in.delta).class_number() << "\n";
            write_instance_file(out, f);
            return 0;
        }

        if (att->parsed()) {
            print_seed(out, seed);
            std::ifstream is(in_path);
            if (!is)
                throw std::invalid_argument("cannot read " + in_path);
            InstanceFile f = parse_instance_file(is);
            std::optional<Discriminant> d;
            if (f.delta)
                d = Discriminant(*f.delta);
            Instance in = make_instance(Curve(f.p, f.a0, f.b0), Curve(f.p, f.a1, f.b1), d);
            AttackConfig cfg;
            cfg.solve.retry_cap = retry_cap;
            AttackContext actx(in, cfg);
            AttackResult r = run_attack(in, actx, rng, cfg.solve);
            // second opinion from a fresh evaluator with its own stream
            AttackContext check(in, cfg);
            Rng rng2(seed.seed ^ 0x9e3779b97f4a7c15ull);
            const bool ok = verify_quotient(in, r.quotient, check, rng2);
            out << "delta=" << in.delta.value() << "\n"
                << "structure=" << r.structure << "\n"
                << "shift=" << join(r.shift) << "\n"
                << "quotient=" << r.quotient.cls << "\n"
                << "oracle_evaluations=" << r.oracle_evaluations << "\n";
            print_stats(out, r.stats);
            out << "verify=" << (ok ? "true" : "false") << "\n";
            if (f.planted) {
                QuadForm planted = reduce(QuadForm((*f.planted)[0], (*f.planted)[1], (*f.planted)[2]));
                out << "planted_match=" << (planted == r.quotient.cls ? "true" : "false") << "\n";
            }
            return ok ? 0 : 1;
        }

        if (sd->parsed()) {
            print_seed(out, seed);
            std::vector<std::uint64_t> mods;
            for (auto n : parse_list(group_s, "--group")) {
                if (n < 2)
                    throw std::invalid_argument("--group: moduli must be >= 2");
                mods.push_back(static_cast<std::uint64_t>(n));
            }
            AbelianGroup g(mods);
            Label s = parse_list(secret_s, "--secret");
            if (s.size() != g.rank())
                throw std::invalid_argument("--secret: one entry per modulus");
            s = g.sub(s, g.zero());
            SolveOptions so;
            so.retry_cap = retry_cap;
            if (arity)
                so.plan.k = arity;
            SolveResult r;
            if (mode == "cheat") {
                CheatOracle o(g, s);
                so.audit_secret = s;
                r = solve_hidden_shift(o, rng, so);
            } else {
                if (g.order() > 1'000'000)
                    throw std::invalid_argument("--mode honest: group too large to tabulate");
                // f_0: a random injective relabelling, f_1(x) = f_0(x + s)
                std::vector<std::uint64_t> perm(g.order());
                std::iota(perm.begin(), perm.end(), 0);
                std::shuffle(perm.begin(), perm.end(), rng);
                auto f0 = [&](const Label& x) { return perm[g.index(x)]; };
                auto f1 = [&](const Label& x) { return perm[g.index(g.add(x, s))]; };
                HonestOracle o(g, f0, f1);
                r = solve_hidden_shift(o, rng, so);
            }
            out << "group=" << g.to_string() << "\n"
                << "mode=" << mode << "\n"
                << "s=" << join(r.shift) << "\n";
            print_stats(out, r.stats);
            if (mode == "cheat")
                out << "audit_violations=" << r.stats.audit_violations << "\n";
            out << "verify=" << (r.shift == s ? "true" : "false") << "\n";
            return r.shift == s ? 0 : 1;
        }

        if (sc->parsed()) {
            ScheduleOverrides ov;
            if (sk)
                ov.k = sk;
            if (sm)
                ov.m = sm;
            auto show = [&](const char* name, const SieveSchedule& s) {
                out << name << ".k=" << s.k << "\n"
                    << name << ".m=" << s.m() << "\n";
                for (std::size_t i = 0; i < s.bounds.size(); ++i)
                    out << name << ".B" << i << "=" << s.bounds[i] << "\n";
                for (std::size_t i = 0; i < s.stages.size(); ++i)
                    if (s.stages[i].degraded)
                        out << name << ".degraded_stage=" << i + 1 << "\n";
            };
            out << "N=" << big_n << "\n";
            if (kind != "z")
                show("D", schedule_smaller_labels(big_n, ov));
            if (kind != "d")
                show("Z", schedule_zero_components(big_n, ov));
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace isoq::cli

#endif
