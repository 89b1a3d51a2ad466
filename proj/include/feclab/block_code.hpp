// block_code.hpp -- systematic MDS block code over GF(2^8).
//
// Baseline codec: k sources per block, n-k repairs appended after the
// block fills.  The generator matrix is derived from an n x k Vandermonde
// matrix V (rows [x_i^0 .. x_i^(k-1)] at distinct points x_i = i) as
// G = V * inverse(V_top): the top k rows become the identity (systematic)
// and every k-subset of rows of G stays invertible because every k-subset
// of V is (distinct-node Vandermonde), so ANY k received packets of a
// block decode it -- the MDS property, which the tests enumerate
// exhaustively for all n <= 8.

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "feclab/errors.hpp"
#include "feclab/gf256.hpp"
#include "feclab/linear_system.hpp"

namespace feclab {

struct BlockCodeConfig {
    std::size_t k = 4;  // sources per block
    std::size_t n = 6;  // total packets per block (k sources + n-k repairs)
};

class BlockCode {
public:
    explicit BlockCode(BlockCodeConfig config) : config_(config) {
        if (config.k == 0 || config.k >= config.n || config.n > 255)
            throw ConfigError("block_code: need 0 < k < n <= 255");
        build_generator();
    }

    // All payloads must share one length (callers pad).  Returns the n-k
    // repair payloads for the block.
    std::vector<SymbolVector> encode(const std::vector<SymbolVector>& sources) const {
        if (sources.size() != config_.k)
            throw ConfigError("block_code: encode expects exactly k sources");
        const std::size_t len = sources.empty() ? 0 : sources[0].size();
        for (const auto& s : sources)
            if (s.size() != len)
                throw ConfigError("block_code: encode expects equal-length sources");

        std::vector<SymbolVector> repairs;
        repairs.reserve(config_.n - config_.k);
        for (std::size_t i = config_.k; i < config_.n; ++i) {
            SymbolVector repair(len, 0);
            for (std::size_t j = 0; j < config_.k; ++j)
                vec_axpy_inplace(generator_[i][j], sources[j], repair);
            repairs.push_back(std::move(repair));
        }
        return repairs;
    }

    // `received` pairs each in-block index (0..n-1; < k source, >= k
    // repair) with its payload.  Fewer than k packets -> nullopt
    // (unrecoverable).  Returns the k source payloads in block order.
    std::optional<std::vector<SymbolVector>> decode(
        const std::vector<std::pair<std::size_t, SymbolVector>>& received) const {
        if (received.size() < config_.k) return std::nullopt;

        LinearSystem system;
        system.column_ids.resize(config_.k);
        for (std::size_t j = 0; j < config_.k; ++j)
            system.column_ids[j] = static_cast<std::uint32_t>(j);

        std::vector<bool> seen(config_.n, false);
        for (const auto& [index, payload] : received) {
            if (index >= config_.n)
                throw ConfigError("block_code: packet index out of range");
            if (seen[index])
                throw ConfigError("block_code: duplicate packet index");
            seen[index] = true;
            system.rows.push_back(generator_[index]);
            system.rhs.push_back(payload);
        }

        SolveResult result = solve(std::move(system));
        if (!result.complete) return std::nullopt;  // cannot happen for MDS rows

        std::vector<SymbolVector> sources;
        sources.reserve(config_.k);
        for (std::size_t j = 0; j < config_.k; ++j)
            sources.push_back(std::move(result.solved.at(static_cast<std::uint32_t>(j))));
        return sources;
    }

    const BlockCodeConfig& config() const { return config_; }
    const std::vector<std::vector<FieldElement>>& generator() const { return generator_; }

private:
    void build_generator() {
        const std::size_t k = config_.k, n = config_.n;
        std::vector<std::vector<FieldElement>> vandermonde(n, std::vector<FieldElement>(k));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j)
                vandermonde[i][j] =
                    gf_pow(static_cast<FieldElement>(i), static_cast<unsigned>(j));

        // Invert the top k x k block by solving V_top * M = I column-wise.
        LinearSystem top;
        top.column_ids.resize(k);
        for (std::size_t j = 0; j < k; ++j)
            top.column_ids[j] = static_cast<std::uint32_t>(j);
        for (std::size_t i = 0; i < k; ++i) {
            top.rows.push_back(vandermonde[i]);
            SymbolVector unit(k, 0);
            unit[i] = 1;
            top.rhs.push_back(std::move(unit));
        }
        SolveResult inv = solve(std::move(top));
        if (!inv.complete)
            throw IntegrityError("block_code: Vandermonde top block not invertible");

        // rows of M^T: solved[j] holds row j of inverse(V_top)^T, i.e.
        // solved[j][c] = inverse(V_top)[j][c].
        std::vector<SymbolVector> m(k);
        for (std::size_t j = 0; j < k; ++j)
            m[j] = inv.solved.at(static_cast<std::uint32_t>(j));

        generator_.assign(n, std::vector<FieldElement>(k, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < k; ++c) {
                FieldElement acc = 0;
                for (std::size_t j = 0; j < k; ++j)
                    acc ^= gf_mul(vandermonde[i][j], m[j][c]);
                generator_[i][c] = acc;
            }

        // Systematic sanity: top k rows must be the identity.
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t c = 0; c < k; ++c)
                if (generator_[i][c] != (i == c ? 1 : 0))
                    throw IntegrityError("block_code: generator is not systematic");
    }

    BlockCodeConfig config_;
    std::vector<std::vector<FieldElement>> generator_;  // n rows of width k
};

}  // namespace feclab
