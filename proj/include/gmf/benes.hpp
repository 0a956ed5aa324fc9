#ifndef GMF_BENES_HPP
#define GMF_BENES_HPP

#include <cstddef>

#include "gmf/mixture.hpp"
#include "gmf/model.hpp"

namespace gmf {

// Nonlinear model with an exact two-Gaussian posterior:
// drift f(x) = mu*sigma*tanh(mu*x/sigma), constant diffusion sigma,
// affine sensor h(x) = h1*x + h2.
struct BenesParams {
    double mu = 0.3;
    double sigma = 1.0;
    double h1 = 0.8;
    double h2 = 0.0;
    double x0 = 0.0;
    double horizon = 10.0;
};

// Exact posterior parameters at a fixed time. Component means are
// A_pm / (2B), the common variance 1 / (2B).
struct BenesPosterior {
    double w_plus = 0.5;
    double w_minus = 0.5;
    double a_plus = 0.0;
    double a_minus = 0.0;
    double b = 0.0;

    double mean_plus() const { return a_plus / (2.0 * b); }
    double mean_minus() const { return a_minus / (2.0 * b); }
    double variance() const { return 1.0 / (2.0 * b); }
    GaussianMixture mixture() const;
};

// ModelSpec with the Benes coefficients and a Dirac initial law at x0.
ModelSpec benes_model(const BenesParams& params);

// Discretised stochastic integral
//   Psi_{t_i} = sum_{k<i} sinh(h1 sigma t_{k+1}) / sinh(h1 sigma t_i) * dY_k.
// t_index must be >= 1 (the weight divides by sinh at t_i).
double benes_psi(const Path& observations, std::size_t t_index,
                 const BenesParams& params);

// A_pm, B and the log-sum-exp-normalised component weights at grid index
// t_index. Requires h1 != 0, t > 0 and |h1 sigma t| < 700.
BenesPosterior benes_exact_posterior(const Path& observations,
                                     std::size_t t_index,
                                     const BenesParams& params);

double benes_exact_moment(const BenesPosterior& posterior, int degree);

}  // namespace gmf

#endif
