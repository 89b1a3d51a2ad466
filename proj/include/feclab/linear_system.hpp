// linear_system.hpp -- dense Gauss-Jordan elimination over GF(2^8).
//
// Batch solver used by the block decoder, the unit-test oracles, and small
// one-shot recoveries.  The streaming decoder in sliding.hpp keeps its own
// incremental RREF; both must agree, which the tests check against each
// other and against a scalar reference implementation.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "feclab/errors.hpp"
#include "feclab/gf256.hpp"

namespace feclab {

// One equation per row: sum_j coeffs[j] * unknown(column_ids[j]) = rhs.
struct LinearSystem {
    std::vector<std::vector<FieldElement>> rows;  // each of size column_ids.size()
    std::vector<SymbolVector> rhs;                // aligned with rows
    std::vector<std::uint32_t> column_ids;        // unknown identifiers (e.g. source seqs)
};

struct SolveResult {
    bool complete = false;                          // true iff every column was resolved
    std::map<std::uint32_t, SymbolVector> solved;   // column id -> recovered symbol
};

// Reduces the system to reduced row echelon form and extracts every column
// whose value is determined (single-nonzero row).  A zero row with nonzero
// right-hand side means the equations contradict each other, which cannot
// happen on a pure erasure channel; it throws IntegrityError.
inline SolveResult solve(LinearSystem system) {
    const std::size_t cols = system.column_ids.size();
    const std::size_t n_rows = system.rows.size();
    if (system.rhs.size() != n_rows)
        throw ConfigError("solve: rows/rhs size mismatch");
    for (const auto& r : system.rows)
        if (r.size() != cols)
            throw ConfigError("solve: row width does not match column_ids");

    // Right-hand sides may have ragged lengths (shorter symbols are
    // implicitly zero-padded); normalize so vector ops line up.
    std::size_t sym_len = 0;
    for (const auto& v : system.rhs) sym_len = std::max(sym_len, v.size());
    for (auto& v : system.rhs) v.resize(sym_len, 0);

    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < n_rows; ++col) {
        // Partial pivot: first row at/below `rank` with a nonzero entry.
        std::size_t pivot = rank;
        while (pivot < n_rows && system.rows[pivot][col] == 0) ++pivot;
        if (pivot == n_rows) continue;  // column not covered yet
        std::swap(system.rows[pivot], system.rows[rank]);
        std::swap(system.rhs[pivot], system.rhs[rank]);

        const FieldElement inv = gf_inv(system.rows[rank][col]);
        for (auto& c : system.rows[rank]) c = gf_mul(c, inv);
        vec_scale_inplace(inv, system.rhs[rank]);

        for (std::size_t r = 0; r < n_rows; ++r) {
            if (r == rank) continue;
            const FieldElement f = system.rows[r][col];
            if (f == 0) continue;
            for (std::size_t j = 0; j < cols; ++j)
                system.rows[r][j] ^= gf_mul(f, system.rows[rank][j]);
            vec_axpy_inplace(f, system.rhs[rank], system.rhs[r]);
        }
        ++rank;
    }

    for (std::size_t r = rank; r < n_rows; ++r) {
        const bool zero_rhs =
            std::all_of(system.rhs[r].begin(), system.rhs[r].end(),
                        [](std::uint8_t b) { return b == 0; });
        if (!zero_rhs)
            throw IntegrityError("solve: contradictory equations (zero row, nonzero rhs)");
    }

    SolveResult result;
    result.complete = (rank == cols);
    // A column is pinned when some row touches it and nothing else.
    for (std::size_t r = 0; r < rank; ++r) {
        std::size_t nonzero = 0, at = 0;
        for (std::size_t j = 0; j < cols; ++j) {
            if (system.rows[r][j] != 0) {
                ++nonzero;
                at = j;
                if (nonzero > 1) break;
            }
        }
        if (nonzero == 1)  // row is normalized, so the entry is already 1
            result.solved.emplace(system.column_ids[at], std::move(system.rhs[r]));
    }
    return result;
}

}  // namespace feclab
