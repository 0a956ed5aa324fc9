#ifndef GMF_EXPERIMENT_HPP
#define GMF_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gmf/benes.hpp"
#include "gmf/filter.hpp"
#include "gmf/model.hpp"

namespace gmf {

enum class SweepAxis { TimeSteps, ParticleCount };

struct ExperimentConfig {
    BenesParams benes;
    std::size_t fine_steps = 1000000;  // resolution of the fixed reference path

    std::size_t n = 40000;           // particle count (when not the sweep axis)
    std::size_t filter_steps = 100;  // observation steps m (when not the axis)
    std::size_t branch_count = 20;   // branching intervals over [0, T]
    double alpha = -1.0;             // < 0 means automatic 1/sqrt(n)
    double beta = 0.01;
    BranchingMethod branching = BranchingMethod::TBBA;
    WeightUpdate weight_update = WeightUpdate::StochasticExponential;
    OffspringMeanDraw mean_draw = OffspringMeanDraw::PerParent;
    int quadrature_order = 20;

    SweepAxis sweep = SweepAxis::ParticleCount;
    std::vector<std::size_t> sweep_values;
    std::size_t replicates = 50;
    std::vector<int> test_degrees = {2, 3};  // phi = x^degree
    std::string output_dir = ".";
    std::uint64_t master_seed = 1;

    void validate() const;
    double effective_alpha(std::size_t n_particles) const;
};

// Flat "key = value" file; unknown keys are errors.
ExperimentConfig parse_config_file(const std::string& filename);
void apply_config_line(ExperimentConfig& config, const std::string& line);
void echo_config(std::ostream& out, const ExperimentConfig& config);

// One signal and one observation realisation at the fine grid, from the
// master seed. The observation path is fixed for every subsequent run.
std::pair<Path, Path> generate_reference_data(const ExperimentConfig& config);

struct ErrorCell {
    std::size_t sweep_value;
    int degree;                // phi = x^degree
    std::string method;        // "mixture" or "classic"
    double err_mean;           // mean relative error over replicates
    double err_stderr;
    double wall_ms;
    std::size_t failures = 0;  // replicates that threw
};

// Fixed-observation sweep: for each sweep value runs R replicates of both
// the Gaussian-mixture filter and the classic filter, measuring the
// relative error at T against the exact posterior on the fine grid.
std::vector<ErrorCell> run_sweep(const ExperimentConfig& config,
                                 const Path& fine_observations);

void write_error_report_csv(std::ostream& out,
                            const std::vector<ErrorCell>& cells);

struct RateFit {
    double slope;
    double ci_low;   // 95% interval
    double ci_high;
};

// OLS of log(mean error) against log(sweep value); needs >= 4 points.
RateFit fit_convergence_rate(const std::vector<std::size_t>& values,
                             const std::vector<double>& mean_errors);

std::uint64_t fnv1a_hash(const void* data, std::size_t bytes);
std::uint64_t path_hash(const Path& path);

// Worker count: GMFILTER_THREADS, 0 or unset = hardware concurrency.
std::size_t worker_count();

}  // namespace gmf

#endif
