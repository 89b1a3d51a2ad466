// Batch GF(256) solver: randomized systems checked against known planted
// solutions plus an independent rank oracle, and contradiction detection.

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <vector>

#include "feclab/errors.hpp"
#include "feclab/linear_system.hpp"

using namespace feclab;

namespace {

// Independent rank computation via plain row reduction with fresh scalar
// arithmetic (table-free multiply).
std::uint8_t oracle_mul(std::uint8_t a, std::uint8_t b) {
    std::uint32_t acc = 0;
    for (int bit = 0; bit < 8; ++bit)
        if (b & (1u << bit)) acc ^= static_cast<std::uint32_t>(a) << bit;
    for (int bit = 14; bit >= 8; --bit)
        if (acc & (1u << bit)) acc ^= 0x11Bu << (bit - 8);
    return static_cast<std::uint8_t>(acc);
}

std::uint8_t oracle_inv(std::uint8_t a) {
    for (unsigned x = 1; x < 256; ++x)
        if (oracle_mul(a, static_cast<std::uint8_t>(x)) == 1)
            return static_cast<std::uint8_t>(x);
    throw std::logic_error("no inverse");
}

std::size_t oracle_rank(std::vector<std::vector<std::uint8_t>> m) {
    const std::size_t rows = m.size();
    if (rows == 0) return 0;
    const std::size_t cols = m[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows && m[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[rank], m[pivot]);
        const auto inv = oracle_inv(m[rank][col]);
        for (auto& v : m[rank]) v = oracle_mul(v, inv);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || m[r][col] == 0) continue;
            const auto f = m[r][col];
            for (std::size_t c = 0; c < cols; ++c)
                m[r][c] = static_cast<std::uint8_t>(m[r][c] ^ oracle_mul(f, m[rank][c]));
        }
        ++rank;
    }
    return rank;
}

}  // namespace

TEST_CASE("random systems recover planted solutions", "[linear_system]") {
    std::mt19937 rng(0x50C1E7);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> dim(1, 8);

    int complete_count = 0;
    for (int trial = 0; trial < 1500; ++trial) {
        const std::size_t k = static_cast<std::size_t>(dim(rng));     // unknowns
        const std::size_t m = static_cast<std::size_t>(dim(rng));     // equations
        const std::size_t len = 1 + static_cast<std::size_t>(byte(rng)) % 16;

        // Planted solution: k column vectors of `len` bytes.
        std::vector<SymbolVector> truth(k, SymbolVector(len));
        for (auto& col : truth)
            for (auto& v : col) v = static_cast<std::uint8_t>(byte(rng));

        LinearSystem sys;
        sys.column_ids.resize(k);
        for (std::size_t c = 0; c < k; ++c)
            sys.column_ids[c] = 1000 + static_cast<std::uint32_t>(c);

        std::vector<std::vector<std::uint8_t>> coeff_matrix;
        for (std::size_t r = 0; r < m; ++r) {
            std::vector<std::uint8_t> row(k);
            for (auto& v : row) v = static_cast<std::uint8_t>(byte(rng));
            SymbolVector rhs(len, 0);
            for (std::size_t c = 0; c < k; ++c)
                for (std::size_t i = 0; i < len; ++i)
                    rhs[i] = static_cast<std::uint8_t>(
                        rhs[i] ^ oracle_mul(row[c], truth[c][i]));
            coeff_matrix.push_back(row);
            sys.rows.push_back(std::move(row));
            sys.rhs.push_back(std::move(rhs));
        }

        const std::size_t rank = oracle_rank(coeff_matrix);
        const SolveResult result = solve(sys);

        REQUIRE(result.complete == (rank == k));
        if (result.complete) ++complete_count;
        // Whatever columns the solver pinned must equal the planted truth.
        for (const auto& [id, value] : result.solved) {
            REQUIRE(id >= 1000);
            const std::size_t c = id - 1000;
            REQUIRE(c < k);
            SymbolVector expect = truth[c];
            expect.resize(value.size(), 0);  // solver pads to max rhs length
            REQUIRE(value == expect);
        }
        if (result.complete) REQUIRE(result.solved.size() == k);
    }
    // Make sure the trial mix exercised both outcomes.
    CHECK(complete_count > 200);
    CHECK(complete_count < 1300);
}

TEST_CASE("inconsistent systems raise IntegrityError", "[linear_system]") {
    LinearSystem sys;
    sys.column_ids = {1, 2};
    sys.rows = {{1, 2}, {2, 4}};  // second row = 2 * first row
    sys.rhs = {{0x10}, {0x99}};   // but rhs is not 2 * 0x10
    // 2*0x10 = 0x20 != 0x99, so elimination leaves 0 = nonzero.
    CHECK_THROWS_AS(solve(sys), IntegrityError);

    // Consistent scaled duplicate is fine (redundant row).
    LinearSystem ok;
    ok.column_ids = {1, 2};
    ok.rows = {{1, 2}, {2, 4}};
    ok.rhs = {{0x10}, {0x20}};
    const auto result = solve(ok);
    CHECK_FALSE(result.complete);  // rank 1 < 2 unknowns
}

TEST_CASE("ragged right-hand sides are padded with zeros", "[linear_system]") {
    LinearSystem sys;
    sys.column_ids = {7};
    sys.rows = {{1}};
    sys.rhs = {{0xAB}};
    LinearSystem sys2 = sys;
    sys2.column_ids = {7, 8};
    sys2.rows = {{1, 0}, {0, 1}};
    sys2.rhs = {{0xAB}, {0x01, 0x02, 0x03}};
    const auto result = solve(sys2);
    REQUIRE(result.complete);
    CHECK(result.solved.at(7) == SymbolVector{0xAB, 0x00, 0x00});
    CHECK(result.solved.at(8) == SymbolVector{0x01, 0x02, 0x03});
}

TEST_CASE("partial solves pin uniquely determined columns", "[linear_system]") {
    // Three unknowns, two equations; the first equation isolates column 5.
    LinearSystem sys;
    sys.column_ids = {5, 6, 7};
    sys.rows = {{3, 0, 0}, {0, 1, 1}};
    sys.rhs = {{0x30}, {0x11}};
    const auto result = solve(sys);
    REQUIRE_FALSE(result.complete);
    REQUIRE(result.solved.size() == 1);
    // 3 * x = 0x30  =>  x = 0x30 / 3 = 0x10.
    CHECK(result.solved.at(5) == SymbolVector{0x10});
}

TEST_CASE("empty system solves trivially", "[linear_system]") {
    LinearSystem sys;
    const auto result = solve(sys);
    CHECK(result.complete);
    CHECK(result.solved.empty());
}
