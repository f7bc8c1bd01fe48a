#ifndef ISOQ_INSTANCE_FILE_HPP
#define ISOQ_INSTANCE_FILE_HPP

// Plain text key=value instance files:
//
//   p=61
//   A0=6
//   B0=36
//   A1=24
//   B1=16
//   delta=-235        (optional)
//   planted=5,5,13    (optional, a reduced form)
//
// '#' starts a comment. Keys are unique, unknown keys are rejected.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isoq/arith.hpp"

namespace isoq {

struct InstanceFile {
    std::uint64_t p = 0;
    std::uint64_t a0 = 0, b0 = 0, a1 = 0, b1 = 0;
    std::optional<std::int64_t> delta;
    std::optional<std::vector<Integer>> planted;  // a, b, c
};

namespace detail {

inline std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::int64_t parse_int(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    std::int64_t out = 0;
    try {
        out = std::stoll(v, &used, 10);
    } catch (const std::exception&) {
        used = 0;
    }
    if (v.empty() || used != v.size())
        throw std::invalid_argument("instance file: " + key + " is not a base-10 integer: '" + v + "'");
    return out;
}

inline std::uint64_t parse_nonneg(const std::string& key, const std::string& v)
{
    std::int64_t x = parse_int(key, v);
    if (x < 0)
        throw std::invalid_argument("instance file: " + key + " must be nonnegative");
    return static_cast<std::uint64_t>(x);
}

}  // namespace detail

inline InstanceFile parse_instance_file(std::istream& in)
{
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.resize(h);
        line = detail::trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("instance file: line " + std::to_string(lineno) + " is not key=value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        static const char* known[] = {"p", "A0", "B0", "A1", "B1", "delta", "planted"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw std::invalid_argument("instance file: unknown key '" + key + "'");
        if (!kv.emplace(key, val).second)
            throw std::invalid_argument("instance file: duplicate key '" + key + "'");
    }
    for (const char* req : {"p", "A0", "B0", "A1", "B1"})
        if (!kv.count(req))
            throw std::invalid_argument(std::string("instance file: missing key '") + req + "'");
    InstanceFile f;
    f.p = detail::parse_nonneg("p", kv["p"]);
    f.a0 = detail::parse_nonneg("A0", kv["A0"]);
    f.b0 = detail::parse_nonneg("B0", kv["B0"]);
    f.a1 = detail::parse_nonneg("A1", kv["A1"]);
    f.b1 = detail::parse_nonneg("B1", kv["B1"]);
    if (kv.count("delta"))
        f.delta = detail::parse_int("delta", kv["delta"]);
    if (kv.count("planted")) {
        std::vector<Integer> abc;
        std::stringstream ss(kv["planted"]);
        std::string part;
        while (std::getline(ss, part, ','))
            abc.emplace_back(detail::parse_int("planted", detail::trim(part)));
        if (abc.size() != 3)
            throw std::invalid_argument("instance file: planted needs three integers a,b,c");
        f.planted = abc;
    }
    return f;
}

inline void write_instance_file(std::ostream& out, const InstanceFile& f)
{
    out << "p=" << f.p << "\n"
        << "A0=" << f.a0 << "\n"
        << "B0=" << f.b0 << "\n"
        << "A1=" << f.a1 << "\n"
        << "B1=" << f.b1 << "\n";
    if (f.delta)
        out << "delta=" << *f.delta << "\n";
    if (f.planted)
        out << "planted=" << (*f.planted)[0] << "," << (*f.planted)[1] << "," << (*f.planted)[2] << "\n";
}

}  // namespace isoq

#endif
