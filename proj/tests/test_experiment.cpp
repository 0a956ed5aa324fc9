#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <sstream>

#include "gmf/experiment.hpp"

using namespace gmf;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.benes.horizon = 1.0;
    c.fine_steps = 4000;
    c.filter_steps = 100;
    c.branch_count = 10;
    c.n = 100;
    c.replicates = 4;
    c.sweep = SweepAxis::ParticleCount;
    c.sweep_values = {50, 100};
    c.test_degrees = {1, 2};
    c.master_seed = 2024;
    return c;
}

}  // namespace

TEST_CASE("config line parsing") {
    ExperimentConfig c;
    apply_config_line(c, "mu = 0.5");
    apply_config_line(c, "branching = multinomial");
    apply_config_line(c, "alpha = auto");
    apply_config_line(c, "sweep_values = 100, 400, 1600");
    apply_config_line(c, "test_functions = x2, x3");
    apply_config_line(c, "# a comment");
    apply_config_line(c, "");
    CHECK(c.benes.mu == 0.5);
    CHECK(c.branching == BranchingMethod::Multinomial);
    CHECK(c.alpha < 0.0);
    CHECK(c.sweep_values == std::vector<std::size_t>{100, 400, 1600});
    CHECK(c.test_degrees == std::vector<int>{2, 3});

    CHECK_THROWS_AS(apply_config_line(c, "bogus_key = 3"),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_config_line(c, "no equals sign"),
                    std::invalid_argument);
}

TEST_CASE("effective alpha defaults to 1/sqrt(n)") {
    ExperimentConfig c;
    c.alpha = -1.0;
    CHECK(c.effective_alpha(400) == doctest::Approx(0.05));
    c.alpha = 0.25;
    CHECK(c.effective_alpha(400) == 0.25);
}

TEST_CASE("config echo reparses to the same values") {
    ExperimentConfig c = tiny_config();
    c.branching = BranchingMethod::Multinomial;
    std::stringstream ss;
    echo_config(ss, c);
    ExperimentConfig back;
    std::string line;
    while (std::getline(ss, line)) apply_config_line(back, line);
    CHECK(back.benes.horizon == c.benes.horizon);
    CHECK(back.fine_steps == c.fine_steps);
    CHECK(back.sweep_values == c.sweep_values);
    CHECK(back.branching == c.branching);
    CHECK(back.test_degrees == c.test_degrees);
    CHECK(back.master_seed == c.master_seed);
}

TEST_CASE("reference data generation is deterministic") {
    ExperimentConfig c = tiny_config();
    auto [sig1, obs1] = generate_reference_data(c);
    auto [sig2, obs2] = generate_reference_data(c);
    CHECK(path_hash(sig1) == path_hash(sig2));
    CHECK(path_hash(obs1) == path_hash(obs2));
    CHECK(obs1.values.size() == c.fine_steps + 1);

    c.master_seed += 1;
    auto [sig3, obs3] = generate_reference_data(c);
    CHECK(path_hash(obs1) != path_hash(obs3));
}

TEST_CASE("rate fit recovers exact power laws") {
    std::vector<std::size_t> ns{100, 400, 1600, 6400};
    std::vector<double> half, linear;
    for (auto n : ns) {
        half.push_back(3.0 / std::sqrt(static_cast<double>(n)));
        linear.push_back(3.0 / static_cast<double>(n));
    }
    RateFit f1 = fit_convergence_rate(ns, half);
    CHECK(f1.slope == doctest::Approx(-0.5).epsilon(1e-12));
    RateFit f2 = fit_convergence_rate(ns, linear);
    CHECK(f2.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f1.ci_low <= f1.slope);
    CHECK(f1.ci_high >= f1.slope);

    std::vector<std::size_t> too_few{100, 200, 400};
    std::vector<double> errs{1.0, 0.5, 0.25};
    CHECK_THROWS_AS(fit_convergence_rate(too_few, errs),
                    std::invalid_argument);
}

TEST_CASE("small sweep produces finite errors for both methods") {
    ExperimentConfig c = tiny_config();
    auto [signal, obs] = generate_reference_data(c);
    auto cells = run_sweep(c, obs);
    // 2 sweep values x 2 degrees x 2 methods
    REQUIRE(cells.size() == 8);
    for (const auto& cell : cells) {
        CHECK(std::isfinite(cell.err_mean));
        CHECK(cell.err_mean >= 0.0);
        CHECK(cell.failures == 0);
    }
}

TEST_CASE("alpha = 0 sweep gives identical columns for both methods") {
    ExperimentConfig c = tiny_config();
    c.alpha = 0.0;
    c.sweep_values = {50};
    auto [signal, obs] = generate_reference_data(c);
    auto cells = run_sweep(c, obs);
    REQUIRE(cells.size() == 4);
    for (std::size_t d = 0; d < 2; ++d) {
        const auto& mixture = cells[2 * d];
        const auto& classic = cells[2 * d + 1];
        CHECK(mixture.method == "mixture");
        CHECK(classic.method == "classic");
        CHECK(mixture.err_mean == classic.err_mean);
    }
}

TEST_CASE("error report CSV layout") {
    std::vector<ErrorCell> cells{{100, 2, "mixture", 0.1, 0.01, 5.0, 0}};
    std::stringstream ss;
    write_error_report_csv(ss, cells);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "sweep_value,phi,method,err_mean,err_stderr,wall_ms");
    std::string row;
    std::getline(ss, row);
    CHECK(row.rfind("100,x2,mixture,", 0) == 0);
}
