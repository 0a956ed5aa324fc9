#ifndef GMF_TEST_SUPPORT_HPP
#define GMF_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "gmf/branching.hpp"

namespace gmf_test {

// Exhaustive enumeration of every TBBA decision path with its probability.
// Drives tbba_allocate_with with scripted coin sequences; whenever an
// unscripted decision point is reached the path forks. Returns the exact
// induced distribution over offspring vectors.
inline std::map<std::vector<std::int64_t>, double> enumerate_tbba(
    std::span<const double> weights, std::size_t n) {
    struct NeedBranch {
        double p;
    };
    std::map<std::vector<std::int64_t>, double> dist;
    std::vector<std::vector<bool>> stack{{}};
    while (!stack.empty()) {
        std::vector<bool> prefix = std::move(stack.back());
        stack.pop_back();
        std::size_t pos = 0;
        double prob = 1.0;
        gmf::BernoulliFn coin = [&](double p) -> bool {
            if (pos < prefix.size()) {
                bool b = prefix[pos++];
                prob *= b ? p : (1.0 - p);
                return b;
            }
            throw NeedBranch{p};
        };
        try {
            gmf::OffspringAllocation alloc =
                gmf::tbba_allocate_with(weights, n, coin);
            dist[alloc.counts] += prob;
        } catch (const NeedBranch& nb) {
            if (nb.p > 1e-15) {
                auto next = prefix;
                next.push_back(true);
                stack.push_back(std::move(next));
            }
            if (1.0 - nb.p > 1e-15) {
                auto next = prefix;
                next.push_back(false);
                stack.push_back(std::move(next));
            }
        }
    }
    return dist;
}

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

inline SampleMoments sample_moments(const std::vector<double>& xs) {
    SampleMoments m;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) m.mean += x;
    m.mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.variance = m2;
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    return m;
}

}  // namespace gmf_test

#endif
