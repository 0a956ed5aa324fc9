#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "gmf/benes.hpp"
#include "test_support.hpp"

using namespace gmf;

namespace {

Path zero_path(double horizon, std::size_t steps) {
    Path p;
    p.grid = TimeGrid(horizon, steps);
    p.values.assign(steps + 1, 0.0);
    return p;
}

Path brownian_observation(const BenesParams& params, std::size_t steps,
                          std::uint64_t seed) {
    ModelSpec model = benes_model(params);
    TimeGrid grid(params.horizon, steps);
    RngStream sig_rng(seed, {stream_tag::signal_noise});
    Path signal = simulate_signal(model, grid, sig_rng);
    RngStream obs_rng(seed, {stream_tag::observation_noise});
    return simulate_observation(signal, model, obs_rng);
}

}  // namespace

TEST_CASE("psi on a constant path is zero") {
    BenesParams params;
    Path obs = zero_path(1.0, 100);
    CHECK(benes_psi(obs, 100, params) == 0.0);
}

TEST_CASE("psi with a single increment telescopes to dY_0") {
    BenesParams params;
    Path obs = zero_path(1.0, 10);
    obs.values[1] = 0.37;
    CHECK(benes_psi(obs, 1, params) == doctest::Approx(0.37).epsilon(1e-14));
}

TEST_CASE("psi matches a term-by-term direct summation") {
    BenesParams params;
    params.horizon = 2.0;
    Path obs = brownian_observation(params, 400, 31);
    const double hs = params.h1 * params.sigma;
    const std::size_t i = 100;
    double direct = 0.0;
    for (std::size_t k = 0; k < i; ++k)
        direct += std::sinh(hs * obs.grid.time(k + 1)) /
                  std::sinh(hs * obs.grid.time(i)) * obs.increment(k);
    CHECK(benes_psi(obs, i, params) ==
          doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("psi rejects index zero") {
    BenesParams params;
    Path obs = zero_path(1.0, 10);
    CHECK_THROWS_AS(benes_psi(obs, 0, params), std::domain_error);
}

TEST_CASE("symmetric configuration gives equal weights and zero mean") {
    BenesParams params;  // h2 = 0, x0 = 0
    Path obs = zero_path(1.0, 50);
    BenesPosterior post = benes_exact_posterior(obs, 50, params);
    CHECK(post.w_plus == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(post.w_minus == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(post.a_plus == doctest::Approx(-post.a_minus).epsilon(1e-12));
    CHECK(benes_exact_moment(post, 1) == doctest::Approx(0.0));
}

TEST_CASE("B approaches h1/(2 sigma) for large t") {
    BenesParams params;
    params.horizon = 40.0;
    Path obs = zero_path(params.horizon, 100);
    BenesPosterior post = benes_exact_posterior(obs, 100, params);
    CHECK(post.b == doctest::Approx(0.4).epsilon(1e-10));
}

TEST_CASE("guards") {
    BenesParams params;
    Path obs = zero_path(1.0, 10);
    CHECK_THROWS_AS(benes_exact_posterior(obs, 0, params), std::domain_error);
    BenesParams h1_zero = params;
    h1_zero.h1 = 0.0;
    CHECK_THROWS_AS(benes_exact_posterior(obs, 10, h1_zero),
                    std::domain_error);
    BenesParams huge = params;
    huge.h1 = 1000.0;
    CHECK_THROWS_AS(benes_exact_posterior(obs, 10, huge), std::range_error);
}

TEST_CASE("moments: symmetric closed forms and quadrature cross-check") {
    BenesParams params;
    params.horizon = 1.0;
    Path short_obs = brownian_observation(params, 200, 5);
    BenesPosterior post = benes_exact_posterior(short_obs, 200, params);

    SUBCASE("degree bounds") {
        CHECK_THROWS_AS(benes_exact_moment(post, 0), std::domain_error);
        CHECK_THROWS_AS(benes_exact_moment(post, 4), std::domain_error);
    }
    SUBCASE("symmetric two-component identities") {
        BenesPosterior sym;
        sym.w_plus = sym.w_minus = 0.5;
        sym.b = 0.5;  // variance 1
        sym.a_plus = 2.0;  // means +-2
        sym.a_minus = -2.0;
        CHECK(benes_exact_moment(sym, 1) == doctest::Approx(0.0));
        CHECK(benes_exact_moment(sym, 2) == doctest::Approx(5.0));  // m^2 + v
    }
    SUBCASE("third moment matches order-20 Gauss-Hermite") {
        double quad = expect_function(
            post.mixture(), [](double x) { return x * x * x; }, 20);
        CHECK(benes_exact_moment(post, 3) ==
              doctest::Approx(quad).epsilon(1e-10));
    }
    SUBCASE("weights always sum to one") {
        CHECK(post.w_plus + post.w_minus == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("flipping mu swaps the branch roles when psi = 0") {
    BenesParams params;
    Path obs = zero_path(1.0, 50);
    BenesPosterior plus = benes_exact_posterior(obs, 50, params);
    BenesParams flipped = params;
    flipped.mu = -params.mu;
    BenesPosterior minus = benes_exact_posterior(obs, 50, flipped);
    CHECK(plus.a_plus == doctest::Approx(minus.a_minus).epsilon(1e-12));
    CHECK(plus.a_minus == doctest::Approx(minus.a_plus).epsilon(1e-12));
    CHECK(plus.w_plus == doctest::Approx(minus.w_minus).epsilon(1e-12));
}

TEST_CASE("psi refinement error scales like dt") {
    BenesParams params;
    params.horizon = 1.0;
    Path fine = brownian_observation(params, 64000, 77);
    std::vector<double> dts, errs;
    double psi_fine = benes_psi(fine, 64000, params);
    for (std::size_t m : {500, 1000, 2000, 4000, 8000}) {
        Path coarse = coarsen_path(fine, m);
        dts.push_back(coarse.grid.dt());
        errs.push_back(std::fabs(benes_psi(coarse, m, params) - psi_fine));
    }
    // log-log slope across the resolutions
    double n = static_cast<double>(dts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        double x = std::log(dts[i]);
        double y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("posterior moments are continuous along the grid") {
    BenesParams params;
    params.horizon = 2.0;
    const std::size_t m = 4000;
    Path obs = brownian_observation(params, m, 13);
    double max_jump = 0.0;
    double prev = 0.0;
    bool have_prev = false;
    for (std::size_t i = m / 10; i <= m; i += 4) {
        double mean = benes_exact_moment(
            benes_exact_posterior(obs, i, params), 1);
        if (have_prev) max_jump = std::max(max_jump, std::fabs(mean - prev));
        prev = mean;
        have_prev = true;
    }
    // calibrated bound: a few sqrt(step) at this resolution
    CHECK(max_jump < 10.0 * std::sqrt(4.0 * obs.grid.dt()));
}
