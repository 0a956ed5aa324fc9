#include "gmf/benes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gmf {

GaussianMixture BenesPosterior::mixture() const {
    GaussianMixture mix;
    mix.components.push_back({w_plus, mean_plus(), variance()});
    mix.components.push_back({w_minus, mean_minus(), variance()});
    return mix;
}

ModelSpec benes_model(const BenesParams& params) {
    if (!(params.sigma > 0.0))
        throw std::invalid_argument("benes_model: sigma must be positive");
    const double mu = params.mu;
    const double sigma = params.sigma;
    const double h1 = params.h1;
    const double h2 = params.h2;
    const double x0 = params.x0;
    ModelSpec model;
    model.drift = [mu, sigma](double x) {
        return mu * sigma * std::tanh(mu * x / sigma);
    };
    model.diffusion = [sigma](double) { return sigma; };
    model.sensor = [h1, h2](double x) { return h1 * x + h2; };
    model.initial_law = [x0](RngStream&) { return x0; };
    return model;
}

double benes_psi(const Path& observations, std::size_t t_index,
                 const BenesParams& params) {
    if (t_index == 0)
        throw std::domain_error("benes_psi: undefined at t=0 (sinh division)");
    if (t_index >= observations.values.size())
        throw std::domain_error("benes_psi: index beyond path");
    const double hs = params.h1 * params.sigma;
    const double t_i = observations.grid.time(t_index);
    if (std::fabs(hs * t_i) >= 700.0)
        throw std::range_error("benes_psi: sinh overflow guard");
    double sum = 0.0;
    for (std::size_t k = 0; k < t_index; ++k)
        sum += std::sinh(hs * observations.grid.time(k + 1)) *
               observations.increment(k);
    return sum / std::sinh(hs * t_i);
}

BenesPosterior benes_exact_posterior(const Path& observations,
                                     std::size_t t_index,
                                     const BenesParams& params) {
    if (params.h1 == 0.0)
        throw std::domain_error("benes_exact_posterior: h1 = 0 unsupported");
    if (t_index == 0)
        throw std::domain_error("benes_exact_posterior: t must be positive");
    const double t = observations.grid.time(t_index);
    const double hs = params.h1 * params.sigma;
    if (std::fabs(hs * t) >= 700.0)
        throw std::range_error("benes_exact_posterior: sinh overflow guard");

    const double psi = benes_psi(observations, t_index, params);
    const double sinh_hst = std::sinh(hs * t);
    const double coth_hst = std::cosh(hs * t) / sinh_hst;
    const double common = params.h1 * psi +
                          (params.h1 * params.x0 + params.h2) /
                              (params.sigma * sinh_hst) -
                          (params.h2 / params.sigma) * coth_hst;
    BenesPosterior post;
    post.a_plus = params.mu / params.sigma + common;
    post.a_minus = -params.mu / params.sigma + common;
    post.b = params.h1 / (2.0 * params.sigma) * coth_hst;
    if (!(post.b > 0.0))
        throw std::range_error("benes_exact_posterior: nonpositive B");

    // exp((A_pm)^2 / 4B) overflows at long horizons such as T=10;
    // normalise in log space with a max shift
    const double ep = post.a_plus * post.a_plus / (4.0 * post.b);
    const double em = post.a_minus * post.a_minus / (4.0 * post.b);
    const double shift = std::max(ep, em);
    const double wp = std::exp(ep - shift);
    const double wm = std::exp(em - shift);
    post.w_plus = wp / (wp + wm);
    post.w_minus = wm / (wp + wm);
    return post;
}

double benes_exact_moment(const BenesPosterior& posterior, int degree) {
    if (degree < 1 || degree > 3)
        throw std::domain_error("benes_exact_moment: degree must be in {1,2,3}");
    return expect_monomial(posterior.mixture(), degree);
}

}  // namespace gmf
