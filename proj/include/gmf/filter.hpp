#ifndef GMF_FILTER_HPP
#define GMF_FILTER_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gmf/branching.hpp"
#include "gmf/mixture.hpp"
#include "gmf/model.hpp"

namespace gmf {

enum class WeightUpdate { EulerLinear, StochasticExponential };
enum class OffspringMeanDraw { PerParent, PerOffspring };

struct FilterConfig {
    std::size_t n = 1000;
    double branch_interval = 0.1;          // delta
    std::size_t substeps_per_interval = 1; // Euler steps of size dt per interval
    double alpha = 0.0;                    // in [0,1]; 0 = classic Dirac filter
    double beta = 0.01;                    // smoothing parameter, > 0
    BranchingMethod branching = BranchingMethod::TBBA;
    WeightUpdate weight_update = WeightUpdate::StochasticExponential;
    OffspringMeanDraw mean_draw = OffspringMeanDraw::PerParent;
    int quadrature_order = 20;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Particle {
    double a = 1.0;      // unnormalised weight
    double v = 0.0;      // component mean
    double omega = 0.0;  // component variance
};

// The generalised particle system: n triples (a, v, omega) evolving between
// branching times, with the running unnormalised-mass accumulator xi.
class ParticleSystem {
public:
    ParticleSystem(const FilterConfig& config, const ModelSpec& model);

    // One Euler substep with the given observation increment. Advances all
    // particles and the clock; draws are keyed by (particle, interval,
    // substep) so results are independent of iteration order.
    void evolve_substep(double d_obs, double dt);

    // Correction at an interval end: folds the mean weight into xi, draws
    // offspring counts and means, resets a=1 and omega=alpha*beta.
    void branch();

    std::vector<double> normalised_weights() const;
    GaussianMixture posterior() const;
    GaussianMixture unnormalised_posterior() const;  // xi-scaled, rho^n

    // xi including the current interval's factor (mean unnormalised weight)
    double xi() const;
    double time() const { return t_; }
    std::size_t interval_index() const { return interval_; }
    double ess() const;  // 1 / sum(abar^2)
    const std::vector<Particle>& particles() const { return particles_; }

private:
    FilterConfig config_;
    ModelSpec model_;
    std::vector<Particle> particles_;
    double xi_prefix_ = 1.0;  // product of per-interval mean weights
    double t_ = 0.0;
    std::size_t interval_ = 0;
    std::size_t substep_ = 0;
};

struct FilterRecord {
    double t;
    GaussianMixture mixture;  // normalised posterior approximation
    double xi;
    double ess;
};

// Runs the full recursion against an observation path: substeps within each
// branching interval, a branch at every interior interval end, no branch at
// the terminal time. Records the state at t=0 and at every interval end
// (pre-branch).
std::vector<FilterRecord> run_filter(const FilterConfig& config,
                                     const ModelSpec& model,
                                     const Path& observations);

// Classic particle filter (Dirac masses, no variance state); independent
// code path used as the alpha=0 reference. Records carry zero-variance
// mixtures. Uses the same stream keying as the generalised filter.
std::vector<FilterRecord> run_classic_filter(const FilterConfig& config,
                                             const ModelSpec& model,
                                             const Path& observations);

}  // namespace gmf

#endif
