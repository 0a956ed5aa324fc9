#ifndef GMF_MIXTURE_HPP
#define GMF_MIXTURE_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace gmf {

struct GaussianComponent {
    double weight = 0.0;
    double mean = 0.0;
    double variance = 0.0;  // 0 denotes a Dirac mass
};

struct GaussianMixture {
    std::vector<GaussianComponent> components;
};

// Probabilists' Gaussian moments through degree 3:
// M0=1, M1=v, M2=v^2+w, M3=v^3+3vw, mixed by component weights.
double expect_monomial(const GaussianMixture& mix, int degree);

// Gauss-Hermite quadrature: sum_j w_j sum_q lambda_q phi(v_j + sqrt(2 w_j) x_q),
// exact for polynomials of degree <= 2*order - 1. Dirac components reduce to
// a single evaluation at the mean.
double expect_function(const GaussianMixture& mix,
                       const std::function<double(double)>& phi,
                       int quadrature_order);

// Mixture density; every component needs strictly positive variance.
double density_at(const GaussianMixture& mix, double x);

double total_weight(const GaussianMixture& mix);

// Nodes x_q of the physicists' Hermite rule and weights normalised by
// 1/sqrt(pi), so the lambda_q sum to 1. Computed by Golub-Welsch and cached
// per order (initialise-once, read-many).
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const HermiteRule& hermite_rule(int order);

// CSV with header "weight,mean,variance".
void write_mixture_csv(std::ostream& out, const GaussianMixture& mix);
void write_mixture_csv(const std::string& filename, const GaussianMixture& mix);
GaussianMixture read_mixture_csv(std::istream& in);

}  // namespace gmf

#endif
