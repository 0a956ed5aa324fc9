#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "gmf/benes.hpp"
#include "gmf/branching.hpp"
#include "gmf/experiment.hpp"
#include "gmf/filter.hpp"
#include "gmf/model.hpp"

namespace {

namespace fs = std::filesystem;

gmf::ExperimentConfig load_config(const std::string& config_file) {
    if (config_file.empty()) return gmf::ExperimentConfig{};
    return gmf::parse_config_file(config_file);
}

void write_manifest(const std::string& filename,
                    const gmf::ExperimentConfig& config,
                    std::uint64_t obs_hash) {
    std::ofstream out(filename);
    if (!out) throw std::runtime_error("cannot open " + filename);
    out << "# gmfilter run manifest\n";
    gmf::echo_config(out, config);
    out << "observation_hash = " << std::hex << obs_hash << std::dec << '\n';
}

gmf::Path load_observations(const gmf::ExperimentConfig& config,
                            const std::string& obs_file) {
    std::string file = obs_file.empty()
                           ? config.output_dir + "/observation.csv"
                           : obs_file;
    if (fs::exists(file)) return gmf::read_path_csv(file);
    // no persisted path: regenerate from the master seed
    return gmf::generate_reference_data(config).second;
}

std::vector<double> parse_weights(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

int cmd_simulate(const std::string& config_file) {
    gmf::ExperimentConfig config = load_config(config_file);
    auto [signal, observation] = gmf::generate_reference_data(config);
    fs::create_directories(config.output_dir);
    gmf::write_path_csv(config.output_dir + "/signal.csv", signal);
    gmf::write_path_csv(config.output_dir + "/observation.csv", observation);
    write_manifest(config.output_dir + "/simulate.manifest", config,
                   gmf::path_hash(observation));
    std::cout << "wrote " << config.output_dir << "/signal.csv and "
              << config.output_dir << "/observation.csv ("
              << observation.values.size() << " rows each)\n";
    return 0;
}

int cmd_oracle(const std::string& config_file, const std::string& obs_file,
               std::vector<double> times, const std::string& out_file) {
    gmf::ExperimentConfig config = load_config(config_file);
    gmf::Path obs = load_observations(config, obs_file);
    if (times.empty()) times.push_back(obs.grid.horizon);

    std::ostringstream body;
    body << "t,w_plus,mean_plus,mean_minus,variance,m1,m2,m3\n"
         << std::setprecision(17);
    for (double t : times) {
        auto index = static_cast<std::size_t>(
            std::llround(t / obs.grid.horizon *
                         static_cast<double>(obs.grid.steps)));
        gmf::BenesPosterior post =
            gmf::benes_exact_posterior(obs, index, config.benes);
        body << obs.grid.time(index) << ',' << post.w_plus << ','
             << post.mean_plus() << ',' << post.mean_minus() << ','
             << post.variance() << ',' << gmf::benes_exact_moment(post, 1)
             << ',' << gmf::benes_exact_moment(post, 2) << ','
             << gmf::benes_exact_moment(post, 3) << '\n';
    }
    if (out_file.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(out_file);
        out << body.str();
    }
    return 0;
}

int cmd_filter(const std::string& config_file, const std::string& obs_file,
               std::size_t n_override, double alpha_override,
               std::size_t steps_override, bool classic,
               const std::string& out_file, const std::string& mixture_dir) {
    gmf::ExperimentConfig config = load_config(config_file);
    if (n_override) config.n = n_override;
    if (steps_override) config.filter_steps = steps_override;
    if (alpha_override >= 0.0) config.alpha = alpha_override;

    gmf::Path fine = load_observations(config, obs_file);
    gmf::Path obs = gmf::coarsen_path(fine, config.filter_steps);

    gmf::FilterConfig fc;
    fc.n = config.n;
    fc.branch_interval =
        config.benes.horizon / static_cast<double>(config.branch_count);
    fc.substeps_per_interval = config.filter_steps / config.branch_count;
    fc.alpha = classic ? 0.0 : config.effective_alpha(config.n);
    fc.beta = config.beta;
    fc.branching = config.branching;
    fc.weight_update = config.weight_update;
    fc.mean_draw = config.mean_draw;
    fc.quadrature_order = config.quadrature_order;
    fc.seed = config.master_seed;

    gmf::ModelSpec model = gmf::benes_model(config.benes);
    auto records = classic ? gmf::run_classic_filter(fc, model, obs)
                           : gmf::run_filter(fc, model, obs);

    std::ostringstream body;
    body << "t,estimate_phi1,estimate_phi2,estimate_phi3,xi,ess\n"
         << std::setprecision(17);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        body << rec.t << ',' << gmf::expect_monomial(rec.mixture, 1) << ','
             << gmf::expect_monomial(rec.mixture, 2) << ','
             << gmf::expect_monomial(rec.mixture, 3) << ',' << rec.xi << ','
             << rec.ess << '\n';
        if (!mixture_dir.empty()) {
            fs::create_directories(mixture_dir);
            gmf::write_mixture_csv(
                mixture_dir + "/mixture_" + std::to_string(i) + ".csv",
                rec.mixture);
        }
    }
    if (out_file.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(out_file);
        out << body.str();
        write_manifest(out_file + ".manifest", config, gmf::path_hash(fine));
    }
    return 0;
}

int cmd_sweep(const std::string& config_file, const std::string& obs_file,
              const std::string& axis, const std::string& values,
              const std::string& out_file) {
    gmf::ExperimentConfig config = load_config(config_file);
    if (!axis.empty())
        gmf::apply_config_line(config, "sweep = " + axis);
    if (!values.empty())
        gmf::apply_config_line(config, "sweep_values = " + values);
    config.validate();

    gmf::Path fine = load_observations(config, obs_file);
    auto cells = gmf::run_sweep(config, fine);

    std::string report = out_file.empty()
                             ? config.output_dir + "/report.csv"
                             : out_file;
    fs::create_directories(fs::path(report).parent_path().empty()
                               ? "."
                               : fs::path(report).parent_path().string());
    std::ofstream out(report);
    gmf::write_error_report_csv(out, cells);
    write_manifest(report + ".manifest", config, gmf::path_hash(fine));
    std::cout << "wrote " << report << " (" << cells.size() << " cells)\n";
    return 0;
}

int cmd_rate(const std::string& report_file, const std::string& phi,
             const std::string& method) {
    std::ifstream in(report_file);
    if (!in) throw std::runtime_error("cannot open " + report_file);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::size_t> values;
    std::vector<double> errors;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string sv, sphi, smethod, serr;
        std::getline(ss, sv, ',');
        std::getline(ss, sphi, ',');
        std::getline(ss, smethod, ',');
        std::getline(ss, serr, ',');
        if (sphi == phi && smethod == method) {
            values.push_back(std::stoull(sv));
            errors.push_back(std::stod(serr));
        }
    }
    gmf::RateFit fit = gmf::fit_convergence_rate(values, errors);
    std::cout << std::setprecision(6) << "slope = " << fit.slope
              << "  ci95 = [" << fit.ci_low << ", " << fit.ci_high << "]\n";
    return 0;
}

int cmd_branch_test(const std::string& weights_csv, std::size_t n,
                    std::size_t draws, const std::string& method,
                    std::uint64_t seed) {
    std::vector<double> weights = parse_weights(weights_csv);
    gmf::BranchingMethod bm = method == "multinomial"
                                  ? gmf::BranchingMethod::Multinomial
                                  : gmf::BranchingMethod::TBBA;
    gmf::RngStream rng(seed, {gmf::stream_tag::generic});
    auto stats = gmf::allocation_variance_check(weights, n, draws, bm, rng);
    gmf::write_allocation_stats_csv(std::cout, stats);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-mixture particle filtering experiments"};
    app.require_subcommand(1);

    std::string config_file, obs_file, out_file, mixture_dir;
    std::string axis, values, report_file, phi = "x2", method = "mixture";
    std::string weights_csv = "0.5,0.3,0.2", branch_method = "tbba";
    std::vector<double> times;
    std::size_t n_override = 0, steps_override = 0;
    std::size_t branch_n = 3, draws = 100000;
    std::uint64_t seed = 1;
    double alpha_override = -1.0;
    bool classic = false;

    auto* sim = app.add_subcommand("simulate",
                                   "generate the fixed reference signal and "
                                   "observation paths");
    sim->add_option("--config", config_file, "key = value config file");

    auto* oracle = app.add_subcommand("oracle", "exact posterior moments");
    oracle->add_option("--config", config_file);
    oracle->add_option("--observations", obs_file, "observation CSV");
    oracle->add_option("--t", times, "evaluation times");
    oracle->add_option("--out", out_file);

    auto* filter = app.add_subcommand("filter", "single filter run");
    filter->add_option("--config", config_file);
    filter->add_option("--observations", obs_file);
    filter->add_option("--n", n_override, "particle count");
    filter->add_option("--alpha", alpha_override, "alpha (default from config)");
    filter->add_option("--steps", steps_override, "observation steps m");
    filter->add_flag("--classic", classic, "classic Dirac particle filter");
    filter->add_option("--out", out_file);
    filter->add_option("--dump-mixtures", mixture_dir,
                       "directory for per-time mixture snapshots");

    auto* sweep = app.add_subcommand("sweep", "error sweep over n or m");
    sweep->add_option("--config", config_file);
    sweep->add_option("--observations", obs_file);
    sweep->add_option("--axis", axis, "n or m");
    sweep->add_option("--values", values, "comma-separated sweep values");
    sweep->add_option("--out", out_file);

    auto* rate = app.add_subcommand("rate", "log-log slope of a sweep report");
    rate->add_option("--report", report_file)->required();
    rate->add_option("--phi", phi, "x, x2 or x3");
    rate->add_option("--method", method, "mixture or classic");

    auto* btest = app.add_subcommand("branch-test", "allocation statistics");
    btest->add_option("--weights", weights_csv, "normalised weights");
    btest->add_option("--n", branch_n, "offspring total");
    btest->add_option("--draws", draws);
    btest->add_option("--method", branch_method, "tbba or multinomial");
    btest->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_file);
        if (oracle->parsed())
            return cmd_oracle(config_file, obs_file, times, out_file);
        if (filter->parsed())
            return cmd_filter(config_file, obs_file, n_override,
                              alpha_override, steps_override, classic,
                              out_file, mixture_dir);
        if (sweep->parsed())
            return cmd_sweep(config_file, obs_file, axis, values, out_file);
        if (rate->parsed()) return cmd_rate(report_file, phi, method);
        if (btest->parsed())
            return cmd_branch_test(weights_csv, branch_n, draws, branch_method,
                                   seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
