#include "gmf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gmf {

void ExperimentConfig::validate() const {
    if (!(benes.horizon > 0.0))
        throw std::invalid_argument("experiment: horizon must be positive");
    if (fine_steps == 0 || n == 0 || filter_steps == 0 || branch_count == 0)
        throw std::invalid_argument("experiment: counts must be positive");
    if (replicates == 0)
        throw std::invalid_argument("experiment: replicates must be >= 1");
    for (std::size_t i = 1; i < sweep_values.size(); ++i)
        if (sweep_values[i] <= sweep_values[i - 1])
            throw std::invalid_argument(
                "experiment: sweep values must be strictly increasing");
    for (int d : test_degrees)
        if (d < 1 || d > 3)
            throw std::invalid_argument(
                "experiment: test functions limited to x, x^2, x^3");
    if (alpha > 1.0)
        throw std::invalid_argument("experiment: alpha must be <= 1");
}

double ExperimentConfig::effective_alpha(std::size_t n_particles) const {
    if (alpha >= 0.0) return alpha;
    return 1.0 / std::sqrt(static_cast<double>(n_particles));
}

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::size_t> parse_size_list(const std::string& value) {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(static_cast<std::size_t>(std::stoull(trim(item))));
    return out;
}

}  // namespace

void apply_config_line(ExperimentConfig& c, const std::string& raw) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') return;
    auto eq = line.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("config: expected key = value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));

    if (key == "mu") c.benes.mu = std::stod(value);
    else if (key == "sigma") c.benes.sigma = std::stod(value);
    else if (key == "h1") c.benes.h1 = std::stod(value);
    else if (key == "h2") c.benes.h2 = std::stod(value);
    else if (key == "x0") c.benes.x0 = std::stod(value);
    else if (key == "horizon") c.benes.horizon = std::stod(value);
    else if (key == "fine_steps") c.fine_steps = std::stoull(value);
    else if (key == "n") c.n = std::stoull(value);
    else if (key == "filter_steps") c.filter_steps = std::stoull(value);
    else if (key == "branch_count") c.branch_count = std::stoull(value);
    else if (key == "alpha") c.alpha = value == "auto" ? -1.0 : std::stod(value);
    else if (key == "beta") c.beta = std::stod(value);
    else if (key == "branching") {
        if (value == "tbba") c.branching = BranchingMethod::TBBA;
        else if (value == "multinomial") c.branching = BranchingMethod::Multinomial;
        else throw std::invalid_argument("config: unknown branching " + value);
    } else if (key == "weight_update") {
        if (value == "exponential")
            c.weight_update = WeightUpdate::StochasticExponential;
        else if (value == "euler") c.weight_update = WeightUpdate::EulerLinear;
        else throw std::invalid_argument("config: unknown weight_update " + value);
    } else if (key == "mean_draw") {
        if (value == "per_parent") c.mean_draw = OffspringMeanDraw::PerParent;
        else if (value == "per_offspring")
            c.mean_draw = OffspringMeanDraw::PerOffspring;
        else throw std::invalid_argument("config: unknown mean_draw " + value);
    } else if (key == "quadrature_order") c.quadrature_order = std::stoi(value);
    else if (key == "sweep") {
        if (value == "n") c.sweep = SweepAxis::ParticleCount;
        else if (value == "m") c.sweep = SweepAxis::TimeSteps;
        else throw std::invalid_argument("config: unknown sweep axis " + value);
    } else if (key == "sweep_values") c.sweep_values = parse_size_list(value);
    else if (key == "replicates") c.replicates = std::stoull(value);
    else if (key == "test_functions") {
        c.test_degrees.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item == "x") c.test_degrees.push_back(1);
            else if (item == "x2") c.test_degrees.push_back(2);
            else if (item == "x3") c.test_degrees.push_back(3);
            else throw std::invalid_argument("config: unknown test function " + item);
        }
    } else if (key == "output_dir") c.output_dir = value;
    else if (key == "master_seed") c.master_seed = std::stoull(value);
    else throw std::invalid_argument("config: unknown key " + key);
}

ExperimentConfig parse_config_file(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open config " + filename);
    ExperimentConfig config;
    std::string line;
    while (std::getline(in, line)) apply_config_line(config, line);
    config.validate();
    return config;
}

void echo_config(std::ostream& out, const ExperimentConfig& c) {
    out << std::setprecision(17);
    out << "mu = " << c.benes.mu << "\nsigma = " << c.benes.sigma
        << "\nh1 = " << c.benes.h1 << "\nh2 = " << c.benes.h2
        << "\nx0 = " << c.benes.x0 << "\nhorizon = " << c.benes.horizon
        << "\nfine_steps = " << c.fine_steps << "\nn = " << c.n
        << "\nfilter_steps = " << c.filter_steps
        << "\nbranch_count = " << c.branch_count << "\nalpha = ";
    if (c.alpha < 0.0) out << "auto";
    else out << c.alpha;
    out << "\nbeta = " << c.beta << "\nbranching = "
        << (c.branching == BranchingMethod::TBBA ? "tbba" : "multinomial")
        << "\nweight_update = "
        << (c.weight_update == WeightUpdate::StochasticExponential
                ? "exponential" : "euler")
        << "\nmean_draw = "
        << (c.mean_draw == OffspringMeanDraw::PerParent ? "per_parent"
                                                        : "per_offspring")
        << "\nquadrature_order = " << c.quadrature_order << "\nsweep = "
        << (c.sweep == SweepAxis::ParticleCount ? "n" : "m")
        << "\nsweep_values = ";
    for (std::size_t i = 0; i < c.sweep_values.size(); ++i)
        out << (i ? "," : "") << c.sweep_values[i];
    out << "\nreplicates = " << c.replicates << "\ntest_functions = ";
    for (std::size_t i = 0; i < c.test_degrees.size(); ++i)
        out << (i ? "," : "") << "x" << (c.test_degrees[i] == 1
                                             ? std::string()
                                             : std::to_string(c.test_degrees[i]));
    out << "\noutput_dir = " << c.output_dir
        << "\nmaster_seed = " << c.master_seed << '\n';
}

std::pair<Path, Path> generate_reference_data(const ExperimentConfig& config) {
    config.validate();
    TimeGrid grid(config.benes.horizon, config.fine_steps);
    ModelSpec model = benes_model(config.benes);
    RngStream signal_rng(config.master_seed, {stream_tag::signal_noise});
    Path signal = simulate_signal(model, grid, signal_rng);
    RngStream obs_rng(config.master_seed, {stream_tag::observation_noise});
    Path observation = simulate_observation(signal, model, obs_rng);
    return {std::move(signal), std::move(observation)};
}

std::size_t worker_count() {
    if (const char* env = std::getenv("GMFILTER_THREADS")) {
        long v = std::atol(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace {

struct ReplicateErrors {
    // relative error per test degree; NaN marks a failed replicate
    std::vector<double> mixture;
    std::vector<double> classic;
};

FilterConfig make_filter_config(const ExperimentConfig& config,
                                std::size_t n_particles, std::size_t steps,
                                double alpha, std::uint64_t seed) {
    FilterConfig fc;
    fc.n = n_particles;
    fc.branch_interval =
        config.benes.horizon / static_cast<double>(config.branch_count);
    fc.substeps_per_interval = steps / config.branch_count;
    fc.alpha = alpha;
    fc.beta = config.beta;
    fc.branching = config.branching;
    fc.weight_update = config.weight_update;
    fc.mean_draw = config.mean_draw;
    fc.quadrature_order = config.quadrature_order;
    fc.seed = seed;
    return fc;
}

}  // namespace

std::vector<ErrorCell> run_sweep(const ExperimentConfig& config,
                                 const Path& fine_observations) {
    config.validate();
    if (config.sweep_values.empty())
        throw std::invalid_argument("run_sweep: no sweep values");

    // exact reference moments at T from the finest grid
    BenesPosterior exact = benes_exact_posterior(
        fine_observations, fine_observations.grid.steps, config.benes);
    std::vector<double> exact_moments;
    for (int d : config.test_degrees)
        exact_moments.push_back(benes_exact_moment(exact, d));

    ModelSpec model = benes_model(config.benes);
    std::vector<ErrorCell> cells;

    for (std::size_t si = 0; si < config.sweep_values.size(); ++si) {
        const std::size_t value = config.sweep_values[si];
        const std::size_t n_particles =
            config.sweep == SweepAxis::ParticleCount ? value : config.n;
        const std::size_t steps =
            config.sweep == SweepAxis::TimeSteps ? value : config.filter_steps;
        if (steps % config.branch_count != 0)
            throw std::invalid_argument(
                "run_sweep: steps must be a multiple of branch_count");
        Path coarse = coarsen_path(fine_observations, steps);
        const double alpha = config.effective_alpha(n_particles);

        const std::size_t degree_count = config.test_degrees.size();
        std::vector<ReplicateErrors> results(config.replicates);
        auto t0 = std::chrono::steady_clock::now();

        auto run_replicate = [&](std::size_t r) {
            ReplicateErrors& res = results[r];
            res.mixture.assign(degree_count,
                               std::numeric_limits<double>::quiet_NaN());
            res.classic.assign(degree_count,
                               std::numeric_limits<double>::quiet_NaN());
            // common random numbers: both methods share the replicate seed
            const std::uint64_t seed = RngStream::derive_seed(
                config.master_seed, {stream_tag::replicate, si, r});
            try {
                FilterConfig fc =
                    make_filter_config(config, n_particles, steps, alpha,
                                       seed);
                auto records = run_filter(fc, model, coarse);
                const GaussianMixture& mix = records.back().mixture;
                for (std::size_t d = 0; d < degree_count; ++d)
                    res.mixture[d] = std::fabs(expect_monomial(
                                         mix, config.test_degrees[d]) -
                                     exact_moments[d]) /
                                     std::fabs(exact_moments[d]);
            } catch (const std::exception&) {
                // recorded as NaN; the sweep continues
            }
            try {
                FilterConfig fc = make_filter_config(config, n_particles,
                                                     steps, 0.0, seed);
                auto records = run_classic_filter(fc, model, coarse);
                const GaussianMixture& mix = records.back().mixture;
                for (std::size_t d = 0; d < degree_count; ++d)
                    res.classic[d] = std::fabs(expect_monomial(
                                         mix, config.test_degrees[d]) -
                                     exact_moments[d]) /
                                     std::fabs(exact_moments[d]);
            } catch (const std::exception&) {
            }
        };

        const std::size_t workers =
            std::min(worker_count(), config.replicates);
        if (workers <= 1) {
            for (std::size_t r = 0; r < config.replicates; ++r)
                run_replicate(r);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    for (std::size_t r = w; r < config.replicates; r += workers)
                        run_replicate(r);
                });
            for (auto& th : pool) th.join();
        }

        auto t1 = std::chrono::steady_clock::now();
        const double wall_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();

        for (std::size_t d = 0; d < degree_count; ++d) {
            for (const char* method : {"mixture", "classic"}) {
                double sum = 0.0, sum_sq = 0.0;
                std::size_t ok = 0, failures = 0;
                for (const auto& res : results) {
                    double e = method == std::string("mixture")
                                   ? res.mixture[d] : res.classic[d];
                    if (std::isfinite(e)) {
                        sum += e;
                        sum_sq += e * e;
                        ++ok;
                    } else {
                        ++failures;
                    }
                }
                ErrorCell cell;
                cell.sweep_value = value;
                cell.degree = config.test_degrees[d];
                cell.method = method;
                cell.err_mean = ok ? sum / static_cast<double>(ok)
                                   : std::numeric_limits<double>::quiet_NaN();
                cell.err_stderr =
                    ok > 1 ? std::sqrt(std::max(0.0, sum_sq / ok -
                                                cell.err_mean * cell.err_mean) /
                                       static_cast<double>(ok - 1))
                           : 0.0;
                cell.wall_ms = wall_ms;
                cell.failures = failures;
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

void write_error_report_csv(std::ostream& out,
                            const std::vector<ErrorCell>& cells) {
    out << "sweep_value,phi,method,err_mean,err_stderr,wall_ms\n"
        << std::setprecision(17);
    for (const auto& cell : cells)
        out << cell.sweep_value << ",x" << cell.degree << ',' << cell.method
            << ',' << cell.err_mean << ',' << cell.err_stderr << ','
            << cell.wall_ms << '\n';
}

RateFit fit_convergence_rate(const std::vector<std::size_t>& values,
                             const std::vector<double>& mean_errors) {
    if (values.size() != mean_errors.size() || values.size() < 4)
        throw std::invalid_argument(
            "fit_convergence_rate: need at least 4 sweep points");
    const std::size_t k = values.size();
    std::vector<double> x(k), y(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (!(mean_errors[i] > 0.0))
            throw std::invalid_argument(
                "fit_convergence_rate: errors must be positive");
        x[i] = std::log(static_cast<double>(values[i]));
        y[i] = std::log(mean_errors[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double resid = y[i] - intercept - slope * x[i];
        rss += resid * resid;
    }
    const double se =
        k > 2 ? std::sqrt(rss / static_cast<double>(k - 2) / sxx) : 0.0;
    return {slope, slope - 1.96 * se, slope + 1.96 * se};
}

std::uint64_t fnv1a_hash(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

std::uint64_t path_hash(const Path& path) {
    return fnv1a_hash(path.values.data(),
                      path.values.size() * sizeof(double));
}

}  // namespace gmf
