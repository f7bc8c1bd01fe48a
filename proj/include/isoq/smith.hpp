#ifndef ISOQ_SMITH_HPP
#define ISOQ_SMITH_HPP

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <vector>

#include "isoq/arith.hpp"

namespace isoq {

using IntMatrix = std::vector<std::vector<std::int64_t>>;

/// Lattice in Z^r kept in row-echelon form, one row per pivot column.
/// Off-diagonal entries are reduced once the lattice has full rank.
class RelationLattice {
public:
    explicit RelationLattice(std::size_t rank) : rows_(rank) {}

    void insert(std::vector<std::int64_t> v)
    {
        const std::size_t r = rows_.size();
        for (std::size_t c = 0; c < r; ++c) {
            if (v[c] == 0)
                continue;
            auto& row = rows_[c];
            if (row.empty()) {
                if (v[c] < 0)
                    for (auto& x : v)
                        x = -x;
                row = std::move(v);
                reduce();
                return;
            }
            while (v[c] != 0) {
                std::int64_t q = row[c] / v[c];
                for (std::size_t j = c; j < r; ++j)
                    row[j] -= q * v[j];
                std::swap(row, v);
            }
            if (row[c] < 0)
                for (auto& x : row)
                    x = -x;
        }
        reduce();
    }

    bool full_rank() const
    {
        for (const auto& row : rows_)
            if (row.empty())
                return false;
        return true;
    }

    /// Square basis matrix; only meaningful once full_rank().
    IntMatrix basis() const
    {
        IntMatrix m;
        for (const auto& row : rows_)
            m.push_back(row.empty() ? std::vector<std::int64_t>(rows_.size(), 0) : row);
        return m;
    }

private:
    void reduce()
    {
        if (!full_rank())
            return;
        const std::size_t r = rows_.size();
        for (std::size_t d = r; d-- > 0;) {
            for (std::size_t c = 0; c < d; ++c) {
                std::int64_t q = floor_div(rows_[c][d], rows_[d][d]);
                if (q == 0)
                    continue;
                for (std::size_t j = d; j < r; ++j)
                    rows_[c][j] -= q * rows_[d][j];
            }
        }
    }

    std::vector<std::vector<std::int64_t>> rows_;
};

struct SmithForm {
    std::vector<std::int64_t> diagonal;  // d_1 | d_2 | ... | d_r, all positive
    IntMatrix column_inverse;            // V^{-1}, where U M V = diag(d)
};

/// Smith normal form of a square nonsingular integer matrix. Only the inverse
/// of the column transform is tracked: row i of V^{-1} expresses the i-th
/// invariant-factor generator in terms of the original generators.
inline SmithForm smith_normal_form(IntMatrix m)
{
    const std::size_t r = m.size();
    IntMatrix vinv(r, std::vector<std::int64_t>(r, 0));
    for (std::size_t i = 0; i < r; ++i)
        vinv[i][i] = 1;

    for (std::size_t t = 0; t < r; ++t) {
        for (;;) {
            std::size_t pr = r, pc = r;
            for (std::size_t i = t; i < r; ++i)
                for (std::size_t j = t; j < r; ++j)
                    if (m[i][j] != 0 && (pr == r || std::llabs(m[i][j]) < std::llabs(m[pr][pc]))) {
                        pr = i;
                        pc = j;
                    }
            if (pr == r)
                throw std::domain_error("smith_normal_form: singular matrix");
            std::swap(m[t], m[pr]);
            if (pc != t) {
                for (std::size_t i = 0; i < r; ++i)
                    std::swap(m[i][t], m[i][pc]);
                std::swap(vinv[t], vinv[pc]);
            }

            bool dirty = false;
            for (std::size_t i = t + 1; i < r; ++i) {
                std::int64_t q = m[i][t] / m[t][t];
                if (q != 0)
                    for (std::size_t j = t; j < r; ++j)
                        m[i][j] -= q * m[t][j];
                dirty |= m[i][t] != 0;
            }
            for (std::size_t j = t + 1; j < r; ++j) {
                std::int64_t q = m[t][j] / m[t][t];
                if (q != 0) {
                    for (std::size_t i = t; i < r; ++i)
                        m[i][j] -= q * m[i][t];
                    for (std::size_t k = 0; k < r; ++k)
                        vinv[t][k] += q * vinv[j][k];
                }
                dirty |= m[t][j] != 0;
            }
            if (dirty)
                continue;

            std::size_t bad = r;
            for (std::size_t i = t + 1; i < r && bad == r; ++i)
                for (std::size_t j = t + 1; j < r; ++j)
                    if (m[i][j] % m[t][t] != 0) {
                        bad = i;
                        break;
                    }
            if (bad == r)
                break;
            for (std::size_t j = t; j < r; ++j)
                m[t][j] += m[bad][j];
        }
        if (m[t][t] < 0)
            for (std::size_t j = t; j < r; ++j)
                m[t][j] = -m[t][j];
    }

    SmithForm out;
    out.column_inverse = std::move(vinv);
    for (std::size_t i = 0; i < r; ++i)
        out.diagonal.push_back(m[i][i]);
    return out;
}

}  // namespace isoq

#endif
