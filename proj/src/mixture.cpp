#include "gmf/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace gmf {

namespace {

// Implicit QL for a symmetric tridiagonal matrix, tracking the first row of
// the eigenvector matrix (Golub-Welsch). d: diagonal, e: subdiagonal,
// z: first components; on return d holds eigenvalues in ascending order.
void imtqlx(std::vector<double>& d, std::vector<double>& e,
            std::vector<double>& z) {
    const int n = static_cast<int>(d.size());
    const double eps = 2.220446049250313e-16;
    if (n == 1) return;
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        while (true) {
            int m = l;
            while (m < n - 1) {
                double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) break;
                ++m;
            }
            if (m == l) break;
            if (++iter > 40)
                throw std::runtime_error("hermite_rule: QL iteration failed");
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            for (int i = m - 1; i >= l; --i) {
                double f = s * e[i];
                double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    p = 0.0;
                    g = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return d[a] < d[b]; });
    std::vector<double> ds(n), zs(n);
    for (int i = 0; i < n; ++i) {
        ds[i] = d[order[i]];
        zs[i] = z[order[i]];
    }
    d = std::move(ds);
    z = std::move(zs);
}

HermiteRule build_hermite_rule(int order) {
    std::vector<double> d(order, 0.0);
    std::vector<double> e(order, 0.0);
    std::vector<double> z(order, 0.0);
    for (int i = 0; i + 1 < order; ++i)
        e[i] = std::sqrt(0.5 * static_cast<double>(i + 1));
    z[0] = 1.0;
    imtqlx(d, e, z);
    HermiteRule rule;
    rule.nodes = std::move(d);
    rule.weights.resize(order);
    // mu0 = sqrt(pi); normalising by 1/sqrt(pi) makes the weights sum to 1
    for (int i = 0; i < order; ++i) rule.weights[i] = z[i] * z[i];
    return rule;
}

}  // namespace

const HermiteRule& hermite_rule(int order) {
    if (order < 1) throw std::domain_error("hermite_rule: order must be >= 1");
    static std::map<int, HermiteRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, build_hermite_rule(order)).first;
    return it->second;
}

double total_weight(const GaussianMixture& mix) {
    double sum = 0.0;
    for (const auto& c : mix.components) sum += c.weight;
    return sum;
}

double expect_monomial(const GaussianMixture& mix, int degree) {
    if (degree < 0 || degree > 3)
        throw std::domain_error("expect_monomial: degree must be in {0,1,2,3}");
    double sum = 0.0;
    for (const auto& c : mix.components) {
        double m;
        switch (degree) {
            case 0: m = 1.0; break;
            case 1: m = c.mean; break;
            case 2: m = c.mean * c.mean + c.variance; break;
            default:
                m = c.mean * c.mean * c.mean + 3.0 * c.mean * c.variance;
                break;
        }
        sum += c.weight * m;
    }
    return sum;
}

double expect_function(const GaussianMixture& mix,
                       const std::function<double(double)>& phi,
                       int quadrature_order) {
    if (quadrature_order < 1)
        throw std::domain_error("expect_function: quadrature order must be >= 1");
    const HermiteRule& rule = hermite_rule(quadrature_order);
    double sum = 0.0;
    for (const auto& c : mix.components) {
        if (c.variance == 0.0) {
            double value = phi(c.mean);
            if (!std::isfinite(value))
                throw std::runtime_error(
                    "expect_function: non-finite phi at x=" +
                    std::to_string(c.mean));
            sum += c.weight * value;
            continue;
        }
        const double scale = std::sqrt(2.0 * c.variance);
        double inner = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            double x = c.mean + scale * rule.nodes[q];
            double value = phi(x);
            if (!std::isfinite(value))
                throw std::runtime_error(
                    "expect_function: non-finite phi at x=" + std::to_string(x));
            inner += rule.weights[q] * value;
        }
        sum += c.weight * inner;
    }
    return sum;
}

double density_at(const GaussianMixture& mix, double x) {
    double sum = 0.0;
    for (const auto& c : mix.components) {
        if (!(c.variance > 0.0))
            throw std::runtime_error(
                "density_at: degenerate component (zero variance)");
        double d = x - c.mean;
        sum += c.weight / std::sqrt(2.0 * M_PI * c.variance) *
               std::exp(-d * d / (2.0 * c.variance));
    }
    return sum;
}

void write_mixture_csv(std::ostream& out, const GaussianMixture& mix) {
    out << "weight,mean,variance\n" << std::setprecision(17);
    for (const auto& c : mix.components)
        out << c.weight << ',' << c.mean << ',' << c.variance << '\n';
}

void write_mixture_csv(const std::string& filename, const GaussianMixture& mix) {
    std::ofstream out(filename);
    if (!out) throw std::runtime_error("cannot open " + filename);
    write_mixture_csv(out, mix);
}

GaussianMixture read_mixture_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("weight,mean,variance", 0) != 0)
        throw std::runtime_error("mixture CSV: missing header");
    GaussianMixture mix;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto c1 = line.find(',');
        auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::runtime_error("mixture CSV: malformed row: " + line);
        mix.components.push_back({std::stod(line.substr(0, c1)),
                                  std::stod(line.substr(c1 + 1, c2 - c1 - 1)),
                                  std::stod(line.substr(c2 + 1))});
    }
    return mix;
}

}  // namespace gmf
