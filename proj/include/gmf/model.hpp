#ifndef GMF_MODEL_HPP
#define GMF_MODEL_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gmf/rng.hpp"

namespace gmf {

struct TimeGrid {
    double horizon = 0.0;   // T
    std::size_t steps = 0;  // m

    TimeGrid() = default;
    TimeGrid(double horizon_, std::size_t steps_);

    double dt() const { return horizon / static_cast<double>(steps); }
    double time(std::size_t i) const {
        return horizon * static_cast<double>(i) / static_cast<double>(steps);
    }
};

struct Path {
    TimeGrid grid;
    std::vector<double> values;  // steps + 1 points

    double at(std::size_t i) const { return values[i]; }
    double increment(std::size_t k) const { return values[k + 1] - values[k]; }
};

// Signal/observation coefficient functions and the initial law sampler.
struct ModelSpec {
    std::function<double(double)> drift;      // f
    std::function<double(double)> diffusion;  // sigma, >= 0
    std::function<double(double)> sensor;     // h
    std::function<double(RngStream&)> initial_law;
};

// Euler-Maruyama signal path; X_0 drawn from the initial law.
// Throws std::runtime_error naming the step index on non-finite state.
Path simulate_signal(const ModelSpec& model, const TimeGrid& grid,
                     RngStream& rng);

// Y_0 = 0; Y_{k+1} = Y_k + h(X_k) dt + sqrt(dt) eta_k.
// with_noise=false drops the Brownian term (test hook).
Path simulate_observation(const Path& signal, const ModelSpec& model,
                          RngStream& rng, bool with_noise = true);

// Pure Brownian observation path (sensor suppressed).
Path reference_measure_observation(const TimeGrid& grid, RngStream& rng);

// Keeps every (fine.steps / coarse_steps)-th point; fine.steps must be a
// multiple of coarse_steps.
Path coarsen_path(const Path& fine, std::size_t coarse_steps);

// CSV with header "t,value", 17 significant digits.
void write_path_csv(std::ostream& out, const Path& path);
void write_path_csv(const std::string& filename, const Path& path);
Path read_path_csv(std::istream& in);
Path read_path_csv(const std::string& filename);

}  // namespace gmf

#endif
