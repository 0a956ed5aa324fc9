#ifndef GMF_BRANCHING_HPP
#define GMF_BRANCHING_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gmf/rng.hpp"

namespace gmf {

struct OffspringAllocation {
    std::vector<std::int64_t> counts;
    std::size_t total = 0;  // always sums to total exactly
};

enum class BranchingMethod { TBBA, Multinomial };

// Decision oracle: returns true with the given probability. Injectable so
// tests can enumerate every decision path of the tree.
using BernoulliFn = std::function<bool(double)>;

// Tree based branching: minimal-variance integer allocation with
// floor/floor+1 marginals (per-index mean n*w_j) and exact total n.
OffspringAllocation tbba_allocate(std::span<const double> weights,
                                  std::size_t n, RngStream& rng);
OffspringAllocation tbba_allocate_with(std::span<const double> weights,
                                       std::size_t n,
                                       const BernoulliFn& bernoulli);

// Multinomial(n, weights) counts via a single pass over sorted uniforms.
OffspringAllocation multinomial_allocate(std::span<const double> weights,
                                         std::size_t n, RngStream& rng);

struct AllocationIndexStats {
    std::size_t index;
    double target;      // n * w_j
    double emp_mean;
    double emp_var;
    double theory_var;
    double z_mean;
    double z_var;
};

struct AllocationStats {
    std::vector<AllocationIndexStats> rows;
};

// Empirical mean/variance per index over repeated draws, with z-scores
// against the TBBA fractional-part variance {nw}(1-{nw}) or the multinomial
// variance nw(1-w).
AllocationStats allocation_variance_check(std::span<const double> weights,
                                          std::size_t n, std::size_t draws,
                                          BranchingMethod method,
                                          RngStream& rng);

// CSV "index,target,emp_mean,emp_var,theory_var,z_mean,z_var".
void write_allocation_stats_csv(std::ostream& out, const AllocationStats& stats);

}  // namespace gmf

#endif
