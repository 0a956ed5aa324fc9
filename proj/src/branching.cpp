#include "gmf/branching.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace gmf {

namespace {

constexpr double kFracSnap = 1e-12;

// Floor and fractional part with a snap-to-integer guard, so targets that
// are integral up to rounding never yield 0/0 probability ratios.
void split_target(double g, std::int64_t& fl, double& fr) {
    fl = static_cast<std::int64_t>(std::floor(g));
    fr = g - static_cast<double>(fl);
    if (fr < kFracSnap) {
        fr = 0.0;
    } else if (fr > 1.0 - kFracSnap) {
        fl += 1;
        fr = 0.0;
    }
}

void check_weights(std::span<const double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0))
            throw std::invalid_argument("branching: negative weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("branching: weights must sum to 1");
}

struct TbbaContext {
    std::span<const double> weights;
    double n;
    const BernoulliFn* bernoulli;
    std::vector<std::int64_t>* counts;
};

// Node over index range [lo, hi) with real target g and integer budget
// N in {floor(g), floor(g)+1}; splits at the midpoint and recurses.
void tbba_node(const TbbaContext& ctx, std::size_t lo, std::size_t hi,
               double g, std::int64_t budget) {
    if (hi - lo == 1) {
        (*ctx.counts)[lo] = budget;
        return;
    }
    std::int64_t fl;
    double fr;
    split_target(g, fl, fr);
    if (budget != fl && budget != fl + 1)
        throw std::logic_error("tbba: budget outside floor/floor+1 bracket");

    const std::size_t mid = lo + (hi - lo) / 2;
    double g_left = 0.0;
    for (std::size_t j = lo; j < mid; ++j) g_left += ctx.n * ctx.weights[j];
    const double g_right = g - g_left;
    std::int64_t fl_left, fl_right;
    double fr_left, fr_right;
    split_target(g_left, fl_left, fr_left);
    split_target(g_right, fl_right, fr_right);

    std::int64_t budget_left;
    if (fl == fl_left + fl_right) {
        // no carry: at most one extra unit in play
        if (budget == fl + 1) {
            double p = fr > 0.0 ? fr_left / fr : 0.0;
            budget_left = (*ctx.bernoulli)(p) ? fl_left + 1 : fl_left;
        } else {
            budget_left = fl_left;
        }
    } else if (fl == fl_left + fl_right + 1) {
        // carry: the children's fractional parts sum past 1
        if (budget == fl + 1) {
            budget_left = fl_left + 1;
        } else {
            double denom = 1.0 - fr;
            double p = denom > 0.0 ? (1.0 - fr_right) / denom : 1.0;
            budget_left = (*ctx.bernoulli)(p) ? fl_left + 1 : fl_left;
        }
    } else {
        throw std::logic_error("tbba: inconsistent child floors");
    }

    tbba_node(ctx, lo, mid, g_left, budget_left);
    tbba_node(ctx, mid, hi, g_right, budget - budget_left);
}

}  // namespace

OffspringAllocation tbba_allocate_with(std::span<const double> weights,
                                       std::size_t n,
                                       const BernoulliFn& bernoulli) {
    check_weights(weights);
    if (weights.empty() || n == 0)
        throw std::invalid_argument("tbba_allocate: empty input");
    OffspringAllocation alloc;
    alloc.total = n;
    alloc.counts.assign(weights.size(), 0);
    TbbaContext ctx{weights, static_cast<double>(n), &bernoulli, &alloc.counts};
    tbba_node(ctx, 0, weights.size(), static_cast<double>(n),
              static_cast<std::int64_t>(n));
    return alloc;
}

OffspringAllocation tbba_allocate(std::span<const double> weights,
                                  std::size_t n, RngStream& rng) {
    BernoulliFn coin = [&rng](double p) { return rng.uniform() <= p; };
    return tbba_allocate_with(weights, n, coin);
}

OffspringAllocation multinomial_allocate(std::span<const double> weights,
                                         std::size_t n, RngStream& rng) {
    check_weights(weights);
    if (weights.empty() || n == 0)
        throw std::invalid_argument("multinomial_allocate: empty input");
    // n sorted uniforms from n+1 exponential spacings, then one CDF walk
    std::vector<double> cumsum(n + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        acc += -std::log(rng.uniform());
        cumsum[k] = acc;
    }
    const double total = cumsum[n];
    OffspringAllocation alloc;
    alloc.total = n;
    alloc.counts.assign(weights.size(), 0);
    std::size_t j = 0;
    double cdf = weights[0];
    for (std::size_t k = 0; k < n; ++k) {
        const double u = cumsum[k] / total;
        while (u > cdf && j + 1 < weights.size()) cdf += weights[++j];
        ++alloc.counts[j];
    }
    return alloc;
}

AllocationStats allocation_variance_check(std::span<const double> weights,
                                          std::size_t n, std::size_t draws,
                                          BranchingMethod method,
                                          RngStream& rng) {
    if (draws < 10000)
        throw std::invalid_argument("allocation_variance_check: draws < 1e4");
    const std::size_t count = weights.size();
    std::vector<double> sum(count, 0.0), sum2(count, 0.0), sum4(count, 0.0);
    std::vector<double> target(count);
    for (std::size_t j = 0; j < count; ++j)
        target[j] = static_cast<double>(n) * weights[j];

    for (std::size_t d = 0; d < draws; ++d) {
        OffspringAllocation alloc = method == BranchingMethod::TBBA
                                        ? tbba_allocate(weights, n, rng)
                                        : multinomial_allocate(weights, n, rng);
        for (std::size_t j = 0; j < count; ++j) {
            double c = static_cast<double>(alloc.counts[j]) - target[j];
            sum[j] += static_cast<double>(alloc.counts[j]);
            sum2[j] += c * c;
            sum4[j] += c * c * c * c;
        }
    }

    AllocationStats stats;
    const double nd = static_cast<double>(draws);
    for (std::size_t j = 0; j < count; ++j) {
        AllocationIndexStats row;
        row.index = j;
        row.target = target[j];
        row.emp_mean = sum[j] / nd;
        row.emp_var = sum2[j] / nd;
        if (method == BranchingMethod::TBBA) {
            std::int64_t fl;
            double fr;
            split_target(target[j], fl, fr);
            row.theory_var = fr * (1.0 - fr);
        } else {
            row.theory_var =
                target[j] * (1.0 - weights[j]);
        }
        const double se_mean = std::sqrt(row.theory_var / nd);
        row.z_mean =
            se_mean > 0.0 ? (row.emp_mean - row.target) / se_mean : 0.0;
        const double m4 = sum4[j] / nd;
        const double var_of_var = (m4 - row.emp_var * row.emp_var) / nd;
        const double se_var = var_of_var > 0.0 ? std::sqrt(var_of_var) : 0.0;
        row.z_var =
            se_var > 0.0 ? (row.emp_var - row.theory_var) / se_var : 0.0;
        stats.rows.push_back(row);
    }
    return stats;
}

void write_allocation_stats_csv(std::ostream& out,
                                const AllocationStats& stats) {
    out << "index,target,emp_mean,emp_var,theory_var,z_mean,z_var\n"
        << std::setprecision(17);
    for (const auto& row : stats.rows)
        out << row.index << ',' << row.target << ',' << row.emp_mean << ','
            << row.emp_var << ',' << row.theory_var << ',' << row.z_mean << ','
            << row.z_var << '\n';
}

}  // namespace gmf
