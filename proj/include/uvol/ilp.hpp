#pragma once

#include <uvol/core.hpp>

#include <gmpxx.h>

#include <optional>
#include <vector>

namespace uvol {

enum class Sense { kLe, kEq, kGe };

struct LinearRow {
    std::vector<mpq_class> a;
    Sense sense = Sense::kLe;
    mpq_class b;
};

// Integer program over `vars` integer variables with optional integral bounds.
struct IntegerProgram {
    int vars = 0;
    std::vector<LinearRow> rows;
    std::vector<std::optional<mpz_class>> lower;
    std::vector<std::optional<mpz_class>> upper;

    explicit IntegerProgram(int k = 0) : vars(k), lower(k), upper(k) {}
    void add(std::vector<mpq_class> a, Sense s, mpq_class b) {
        // The solver reads denominators directly, so rationals must be in lowest terms.
        for (auto& v : a) v.canonicalize();
        b.canonicalize();
        rows.push_back({std::move(a), s, std::move(b)});
    }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
    LpStatus status = LpStatus::kInfeasible;
    mpq_class value;
    std::vector<mpq_class> x;
};

// Exact two-phase simplex with Bland's rule on the LP relaxation.
LpResult lp_min(const IntegerProgram& p, const std::vector<mpq_class>& cost);

// Minimum integral x[objective] over integer points of p with x[objective] >= at_least.
// Throws ErrorCode::kUnbounded when the relaxation is unbounded below.
std::optional<mpz_class> ilp_min(const IntegerProgram& p, int objective,
                                 const std::optional<mpz_class>& at_least = std::nullopt);

// Every integer point of a bounded p, ordered by the last coordinate first.
std::vector<std::vector<mpz_class>> ilp_list(const IntegerProgram& p);

struct IlpStats {
    std::uint64_t lp_solves = 0;
    std::uint64_t nodes = 0;
    std::uint64_t pivots = 0;
};
IlpStats& ilp_stats();

}  // namespace uvol
