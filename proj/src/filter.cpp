#include "gmf/filter.hpp"

#include <cmath>
#include <stdexcept>

namespace gmf {

namespace {

void check_schedule(const FilterConfig& config, const Path& observations) {
    const double dt = observations.grid.dt();
    const double implied =
        dt * static_cast<double>(config.substeps_per_interval);
    if (std::fabs(implied - config.branch_interval) >
        1e-9 * std::max(1.0, config.branch_interval))
        throw std::invalid_argument(
            "run_filter: observation grid does not divide the branching "
            "interval into the configured substeps");
}

double update_weight(double a, double h, double d_obs, double dt,
                     WeightUpdate mode) {
    if (mode == WeightUpdate::StochasticExponential)
        return a * std::exp(h * d_obs - 0.5 * h * h * dt);
    double next = a * (1.0 + h * d_obs);
    if (!(next > 0.0))
        throw std::runtime_error(
            "evolve_substep: weight collapse under EulerLinear "
            "(retry with StochasticExponential)");
    return next;
}

}  // namespace

void FilterConfig::validate() const {
    if (n == 0) throw std::invalid_argument("FilterConfig: n must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("FilterConfig: alpha must be in [0,1]");
    if (!(beta > 0.0))
        throw std::invalid_argument("FilterConfig: beta must be positive");
    if (!(branch_interval > 0.0))
        throw std::invalid_argument("FilterConfig: delta must be positive");
    if (substeps_per_interval == 0)
        throw std::invalid_argument("FilterConfig: substeps must be >= 1");
    if (quadrature_order < 1)
        throw std::invalid_argument("FilterConfig: quadrature order >= 1");
}

ParticleSystem::ParticleSystem(const FilterConfig& config,
                               const ModelSpec& model)
    : config_(config), model_(model) {
    config_.validate();
    particles_.resize(config_.n);
    for (std::size_t j = 0; j < config_.n; ++j) {
        RngStream rng(config_.seed, {stream_tag::initial_draw, j});
        particles_[j].a = 1.0;
        particles_[j].v = model_.initial_law(rng);
        particles_[j].omega = config_.alpha * config_.beta;
    }
}

void ParticleSystem::evolve_substep(double d_obs, double dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("evolve_substep: dt must be positive");
    const double sqrt_dt = std::sqrt(dt);
    const double mean_noise_scale = std::sqrt(1.0 - config_.alpha);
    for (std::size_t j = 0; j < particles_.size(); ++j) {
        Particle& p = particles_[j];
        const double v_pre = p.v;
        const double drift = model_.drift(v_pre);
        const double sig = model_.diffusion(v_pre);
        const double h = model_.sensor(v_pre);
        RngStream rng(config_.seed,
                      {stream_tag::particle_step, interval_, substep_, j});
        p.v = v_pre + drift * dt + mean_noise_scale * sig * sqrt_dt * rng.normal();
        p.omega += config_.alpha * sig * sig * dt;
        p.a = update_weight(p.a, h, d_obs, dt, config_.weight_update);
        if (!std::isfinite(p.v) || !std::isfinite(p.a) ||
            !std::isfinite(p.omega))
            throw std::runtime_error("evolve_substep: particle " +
                                     std::to_string(j) + " diverged");
    }
    t_ += dt;
    ++substep_;
}

std::vector<double> ParticleSystem::normalised_weights() const {
    double sum = 0.0;
    for (const auto& p : particles_) sum += p.a;
    if (!(sum > 0.0))
        throw std::runtime_error("normalised_weights: all weights are zero");
    std::vector<double> weights(particles_.size());
    for (std::size_t j = 0; j < particles_.size(); ++j)
        weights[j] = particles_[j].a / sum;
    return weights;
}

void ParticleSystem::branch() {
    const std::size_t n = particles_.size();
    std::vector<double> weights = normalised_weights();

    double mean_weight = 0.0;
    for (const auto& p : particles_) mean_weight += p.a;
    mean_weight /= static_cast<double>(n);
    xi_prefix_ *= mean_weight;

    RngStream branch_rng(config_.seed,
                         {stream_tag::branch_decision, interval_});
    OffspringAllocation alloc =
        config_.branching == BranchingMethod::TBBA
            ? tbba_allocate(weights, n, branch_rng)
            : multinomial_allocate(weights, n, branch_rng);

    std::vector<Particle> next;
    next.reserve(n);
    const double omega0 = config_.alpha * config_.beta;
    for (std::size_t j = 0; j < n; ++j) {
        if (alloc.counts[j] == 0) continue;
        const Particle& parent = particles_[j];
        if (!(parent.omega >= 0.0))
            throw std::logic_error("branch: negative parent variance");
        const double spread = std::sqrt(parent.omega);
        if (config_.mean_draw == OffspringMeanDraw::PerParent) {
            RngStream rng(config_.seed,
                          {stream_tag::offspring_mean, interval_, j});
            const double mean = parent.v + spread * rng.normal();
            for (std::int64_t c = 0; c < alloc.counts[j]; ++c)
                next.push_back({1.0, mean, omega0});
        } else {
            for (std::int64_t c = 0; c < alloc.counts[j]; ++c) {
                RngStream rng(config_.seed,
                              {stream_tag::offspring_mean, interval_, j,
                               static_cast<std::uint64_t>(c)});
                next.push_back({1.0, parent.v + spread * rng.normal(), omega0});
            }
        }
    }
    if (next.size() != n)
        throw std::logic_error("branch: offspring total != n");
    particles_ = std::move(next);
    ++interval_;
    substep_ = 0;
}

GaussianMixture ParticleSystem::posterior() const {
    std::vector<double> weights = normalised_weights();
    GaussianMixture mix;
    mix.components.reserve(particles_.size());
    for (std::size_t j = 0; j < particles_.size(); ++j)
        mix.components.push_back(
            {weights[j], particles_[j].v, particles_[j].omega});
    return mix;
}

GaussianMixture ParticleSystem::unnormalised_posterior() const {
    const double scale = xi_prefix_ / static_cast<double>(particles_.size());
    GaussianMixture mix;
    mix.components.reserve(particles_.size());
    for (const auto& p : particles_)
        mix.components.push_back({scale * p.a, p.v, p.omega});
    return mix;
}

double ParticleSystem::xi() const {
    double mean_weight = 0.0;
    for (const auto& p : particles_) mean_weight += p.a;
    mean_weight /= static_cast<double>(particles_.size());
    return xi_prefix_ * mean_weight;
}

double ParticleSystem::ess() const {
    std::vector<double> weights = normalised_weights();
    double sum_sq = 0.0;
    for (double w : weights) sum_sq += w * w;
    return 1.0 / sum_sq;
}

std::vector<FilterRecord> run_filter(const FilterConfig& config,
                                     const ModelSpec& model,
                                     const Path& observations) {
    config.validate();
    check_schedule(config, observations);
    const double dt = observations.grid.dt();
    const std::size_t m = observations.grid.steps;
    const std::size_t s = config.substeps_per_interval;

    ParticleSystem sys(config, model);
    std::vector<FilterRecord> out;
    out.push_back({0.0, sys.posterior(), sys.xi(), sys.ess()});
    for (std::size_t k = 0; k < m; ++k) {
        sys.evolve_substep(observations.increment(k), dt);
        if ((k + 1) % s == 0) {
            out.push_back({observations.grid.time(k + 1), sys.posterior(),
                           sys.xi(), sys.ess()});
            if (k + 1 < m) sys.branch();  // no terminal branch
        }
    }
    if (m % s != 0)
        out.push_back({observations.grid.horizon, sys.posterior(), sys.xi(),
                       sys.ess()});
    return out;
}

std::vector<FilterRecord> run_classic_filter(const FilterConfig& config,
                                             const ModelSpec& model,
                                             const Path& observations) {
    config.validate();
    check_schedule(config, observations);
    const double dt = observations.grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const std::size_t m = observations.grid.steps;
    const std::size_t s = config.substeps_per_interval;
    const std::size_t n = config.n;

    std::vector<double> a(n, 1.0), v(n);
    for (std::size_t j = 0; j < n; ++j) {
        RngStream rng(config.seed, {stream_tag::initial_draw, j});
        v[j] = model.initial_law(rng);
    }
    double xi_prefix = 1.0;
    std::size_t interval = 0;
    std::size_t substep = 0;

    auto normalised = [&] {
        double sum = 0.0;
        for (double w : a) sum += w;
        if (!(sum > 0.0))
            throw std::runtime_error("classic filter: all weights are zero");
        std::vector<double> weights(n);
        for (std::size_t j = 0; j < n; ++j) weights[j] = a[j] / sum;
        return weights;
    };
    auto record = [&](double t) {
        std::vector<double> weights = normalised();
        GaussianMixture mix;
        mix.components.reserve(n);
        double sum_sq = 0.0, mean_weight = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            mix.components.push_back({weights[j], v[j], 0.0});
            sum_sq += weights[j] * weights[j];
            mean_weight += a[j];
        }
        mean_weight /= static_cast<double>(n);
        return FilterRecord{t, std::move(mix), xi_prefix * mean_weight,
                            1.0 / sum_sq};
    };

    std::vector<FilterRecord> out;
    out.push_back(record(0.0));
    for (std::size_t k = 0; k < m; ++k) {
        const double d_obs = observations.increment(k);
        for (std::size_t j = 0; j < n; ++j) {
            const double v_pre = v[j];
            RngStream rng(config.seed,
                          {stream_tag::particle_step, interval, substep, j});
            v[j] = v_pre + model.drift(v_pre) * dt +
                   model.diffusion(v_pre) * sqrt_dt * rng.normal();
            a[j] = update_weight(a[j], model.sensor(v_pre), d_obs, dt,
                                 config.weight_update);
            if (!std::isfinite(v[j]) || !std::isfinite(a[j]))
                throw std::runtime_error("classic filter: particle diverged");
        }
        ++substep;
        if ((k + 1) % s == 0) {
            out.push_back(record(observations.grid.time(k + 1)));
            if (k + 1 < m) {
                std::vector<double> weights = normalised();
                double mean_weight = 0.0;
                for (double w : a) mean_weight += w;
                xi_prefix *= mean_weight / static_cast<double>(n);
                RngStream branch_rng(config.seed,
                                     {stream_tag::branch_decision, interval});
                OffspringAllocation alloc =
                    config.branching == BranchingMethod::TBBA
                        ? tbba_allocate(weights, n, branch_rng)
                        : multinomial_allocate(weights, n, branch_rng);
                std::vector<double> next;
                next.reserve(n);
                for (std::size_t j = 0; j < n; ++j)
                    for (std::int64_t c = 0; c < alloc.counts[j]; ++c)
                        next.push_back(v[j]);
                if (next.size() != n)
                    throw std::logic_error("classic filter: offspring total != n");
                v = std::move(next);
                a.assign(n, 1.0);
                ++interval;
                substep = 0;
            }
        }
    }
    if (m % s != 0) out.push_back(record(observations.grid.horizon));
    return out;
}

}  // namespace gmf
