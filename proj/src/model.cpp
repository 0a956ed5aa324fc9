#include "gmf/model.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gmf {

TimeGrid::TimeGrid(double horizon_, std::size_t steps_)
    : horizon(horizon_), steps(steps_) {
    if (!(horizon > 0.0) || steps == 0)
        throw std::invalid_argument("TimeGrid: horizon and steps must be positive");
}

Path simulate_signal(const ModelSpec& model, const TimeGrid& grid,
                     RngStream& rng) {
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    Path path;
    path.grid = grid;
    path.values.resize(grid.steps + 1);
    double x = model.initial_law(rng);
    if (!std::isfinite(x))
        throw std::runtime_error("simulate_signal: non-finite initial state");
    path.values[0] = x;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        x = x + model.drift(x) * dt + model.diffusion(x) * sqrt_dt * rng.normal();
        if (!std::isfinite(x))
            throw std::runtime_error("simulate_signal: diverged at step " +
                                     std::to_string(k + 1));
        path.values[k + 1] = x;
    }
    return path;
}

Path simulate_observation(const Path& signal, const ModelSpec& model,
                          RngStream& rng, bool with_noise) {
    if (signal.values.size() != signal.grid.steps + 1)
        throw std::invalid_argument("simulate_observation: malformed signal path");
    const double dt = signal.grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    Path path;
    path.grid = signal.grid;
    path.values.resize(signal.grid.steps + 1);
    double y = 0.0;
    path.values[0] = y;
    for (std::size_t k = 0; k < signal.grid.steps; ++k) {
        y += model.sensor(signal.values[k]) * dt;
        if (with_noise) y += sqrt_dt * rng.normal();
        if (!std::isfinite(y))
            throw std::runtime_error("simulate_observation: diverged at step " +
                                     std::to_string(k + 1));
        path.values[k + 1] = y;
    }
    return path;
}

Path reference_measure_observation(const TimeGrid& grid, RngStream& rng) {
    const double sqrt_dt = std::sqrt(grid.dt());
    Path path;
    path.grid = grid;
    path.values.resize(grid.steps + 1);
    double y = 0.0;
    path.values[0] = y;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        y += sqrt_dt * rng.normal();
        path.values[k + 1] = y;
    }
    return path;
}

Path coarsen_path(const Path& fine, std::size_t coarse_steps) {
    if (coarse_steps == 0 || fine.grid.steps % coarse_steps != 0)
        throw std::invalid_argument(
            "coarsen_path: fine step count must be a multiple of the coarse one");
    const std::size_t stride = fine.grid.steps / coarse_steps;
    Path out;
    out.grid = TimeGrid(fine.grid.horizon, coarse_steps);
    out.values.resize(coarse_steps + 1);
    for (std::size_t i = 0; i <= coarse_steps; ++i)
        out.values[i] = fine.values[i * stride];
    return out;
}

void write_path_csv(std::ostream& out, const Path& path) {
    out << "t,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < path.values.size(); ++i)
        out << path.grid.time(i) << ',' << path.values[i] << '\n';
}

void write_path_csv(const std::string& filename, const Path& path) {
    std::ofstream out(filename);
    if (!out) throw std::runtime_error("cannot open " + filename);
    write_path_csv(out, path);
}

Path read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,value", 0) != 0)
        throw std::runtime_error("path CSV: missing t,value header");
    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("path CSV: malformed row: " + line);
        times.push_back(std::stod(line.substr(0, comma)));
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (values.size() < 2) throw std::runtime_error("path CSV: too few rows");
    Path path;
    path.grid = TimeGrid(times.back(), values.size() - 1);
    path.values = std::move(values);
    return path;
}

Path read_path_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open " + filename);
    return read_path_csv(in);
}

}  // namespace gmf
