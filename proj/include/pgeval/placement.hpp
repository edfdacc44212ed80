#pragma once

// Scenario-to-road likelihood and the partially resampling bootstrap filter
// that searches for the best rigid placement of a scenario.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pgeval/dtw.hpp"
#include "pgeval/error.hpp"
#include "pgeval/geo.hpp"
#include "pgeval/parallel.hpp"
#include "pgeval/roadnet.hpp"
#include "pgeval/scenario.hpp"

namespace pgeval {

struct FilterParams {
    int n_particles = 500;
    double sigma_xy = 8.0;                     // meters
    double sigma_theta = std::numbers::pi / 2; // radians
    double rho_r = 0.6;                        // fraction of particles resampled each iteration
    double rho_c = 0.8;                        // mean/best ratio that counts as converged
    double q_tilde = 0.9;                      // best weight that ends the search
    int t_max = 300;
    double q_d = 0.5;                          // best weight that switches on exponential decay
    double lambda0 = 1e-3;
    double alpha_decay = 5e-6;
    std::uint64_t seed = 0;

    void validate() const {
        auto fail = [](const std::string& what) { throw ParameterError("invalid filter parameter: " + what); };
        if (n_particles < 2) fail("n_particles must be >= 2");
        if (!(sigma_xy >= 0.0) || !std::isfinite(sigma_xy)) fail("sigma_xy must be finite and non-negative");
        if (!(sigma_theta >= 0.0) || !std::isfinite(sigma_theta)) fail("sigma_theta must be finite and non-negative");
        if (!(rho_r > 0.0 && rho_r < 1.0)) fail("rho_r must lie in (0, 1)");
        if (!(rho_c > 0.0 && rho_c < 1.0)) fail("rho_c must lie in (0, 1)");
        if (!(q_tilde > 0.0 && q_tilde <= 1.0)) fail("q_tilde must lie in (0, 1]");
        if (t_max < 1) fail("t_max must be >= 1");
        if (!(q_d > 0.0 && q_d < 1.0)) fail("q_d must lie in (0, 1)");
        if (!(lambda0 >= 0.0) || !std::isfinite(lambda0)) fail("lambda0 must be finite and non-negative");
        if (!(alpha_decay > 0.0) || !std::isfinite(alpha_decay)) fail("alpha_decay must be positive");
    }

    /// Number of lowest-weight slots replaced on each resampling step.
    [[nodiscard]] std::size_t resampled_count() const noexcept {
        return static_cast<std::size_t>(std::floor(rho_r * n_particles + 1e-9));
    }
};

// ---------------------------------------------------------------------------
// Likelihood

/// Nearest road cell for every trajectory cell.
[[nodiscard]] inline std::vector<Cell> matching_segment(std::span<const Cell> traj_cells, const NearestRoadIndex& index) {
    std::vector<Cell> out;
    out.reserve(traj_cells.size());
    for (const auto& c : traj_cells) out.push_back(index.nearest(c));
    return out;
}

namespace detail {
[[nodiscard]] inline std::vector<Point2> as_points(std::span<const Cell> cells) {
    std::vector<Point2> out;
    out.reserve(cells.size());
    for (const auto& c : cells) out.push_back({static_cast<double>(c.ix), static_cast<double>(c.iy)});
    return out;
}
} // namespace detail

/// Share of the placed trajectory matched by its nearest road cells: one
/// minus the DTW distance (in cells) over the trajectory length, floored at 0.
[[nodiscard]] inline double dtw_feasibility(std::span<const Point2> trajectory, const Pose& pose, const RoadModel& road) {
    if (trajectory.empty()) throw ValidationError("feasibility of an empty trajectory");
    const auto cells = rasterize(apply_pose(trajectory, pose), road.spec());
    const auto matched = matching_segment(cells, road.index);
    if (cells == matched) return 1.0;
    const auto n = static_cast<double>(cells.size());
    // Anything above n clamps to zero, so the DP may stop early there.
    const double d = dtw_distance(detail::as_points(cells), detail::as_points(matched), n);
    return std::max(0.0, 1.0 - d / n);
}

/// Mean feasibility of all vehicles under one shared pose.
[[nodiscard]] inline double likelihood(const RoadModel& road, const Pose& pose, const Scenario& z) {
    if (z.vehicles.empty()) throw ValidationError("scenario " + z.id + " has no vehicles");
    double sum = 0.0;
    for (const auto& v : z.vehicles) sum += dtw_feasibility(v.points, pose, road);
    return sum / static_cast<double>(z.vehicles.size());
}

// ---------------------------------------------------------------------------
// Filter steps

/// Diffusion shrink at iteration t: polynomial in t, and exponential in the
/// best weight once it reaches q_d.
[[nodiscard]] inline double decay_factor(int t, double q_star, const FilterParams& p) {
    if (t < 0) throw ParameterError("decay_factor: negative iteration");
    const double td = static_cast<double>(t);
    double gamma = 1.0 / (1.0 + p.lambda0 * td * td);
    if (q_star >= p.q_d) gamma *= std::pow(p.alpha_decay, q_star - p.q_d);
    return gamma;
}

/// Gaussian random walk with standard deviations scaled by gamma.
template <class Rng>
[[nodiscard]] std::vector<Pose> diffuse(std::span<const Pose> particles, double gamma, const FilterParams& p, Rng& rng) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("diffusion gamma must lie in [0, 1]");
    const double sxy = gamma * p.sigma_xy;
    const double sth = gamma * p.sigma_theta;
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<Pose> out;
    out.reserve(particles.size());
    for (const auto& x : particles) {
        const double wx = unit(rng), wy = unit(rng), wt = unit(rng);
        out.emplace_back(x.tx() + sxy * wx, x.ty() + sxy * wy, x.theta() + sth * wt);
    }
    return out;
}

struct ParticleSet {
    std::vector<Pose> particles;
    std::vector<double> weights;
    Pose best;
    double best_weight = 0.0;
    double mean_weight = 0.0;
    int iteration = 0;
};

/// Sorts proposals by ascending weight, redraws the lowest floor(rho_r N)
/// slots from all proposals in proportion to weight and keeps the rest.
/// All-zero weights redraw uniformly.
template <class Rng>
[[nodiscard]] ParticleSet partial_resample(std::span<const Pose> proposals, std::span<const double> weights,
                                           const FilterParams& p, Rng& rng) {
    const std::size_t n = proposals.size();
    if (n == 0 || weights.size() != n) throw ParameterError("partial_resample: proposal/weight size mismatch");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("partial_resample: weights must be finite and >= 0");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return weights[a] < weights[b] || (weights[a] == weights[b] && a < b);
    });

    std::vector<double> sorted_w(n);
    for (std::size_t k = 0; k < n; ++k) sorted_w[k] = weights[order[k]];
    const double total = std::accumulate(sorted_w.begin(), sorted_w.end(), 0.0);

    const std::size_t n_res = std::min(n, static_cast<std::size_t>(std::floor(p.rho_r * static_cast<double>(n) + 1e-9)));
    ParticleSet out;
    out.particles.resize(n);
    out.weights.resize(n);
    if (n_res > 0) {
        if (total > 0.0) {
            std::discrete_distribution<std::size_t> pick(sorted_w.begin(), sorted_w.end());
            for (std::size_t i = 0; i < n_res; ++i) {
                const std::size_t k = pick(rng);
                out.particles[i] = proposals[order[k]];
                out.weights[i] = sorted_w[k];
            }
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (std::size_t i = 0; i < n_res; ++i) {
                const std::size_t k = pick(rng);
                out.particles[i] = proposals[order[k]];
                out.weights[i] = sorted_w[k];
            }
        }
    }
    for (std::size_t i = n_res; i < n; ++i) {
        out.particles[i] = proposals[order[i]];
        out.weights[i] = sorted_w[i];
    }
    out.best = proposals[order[n - 1]];
    out.best_weight = sorted_w[n - 1];
    out.mean_weight = std::accumulate(out.weights.begin(), out.weights.end(), 0.0) / static_cast<double>(n);
    return out;
}

// ---------------------------------------------------------------------------
// Single-scenario search

enum class Termination { max_iters, weight_threshold, converged };

[[nodiscard]] inline const char* to_string(Termination t) noexcept {
    switch (t) {
    case Termination::max_iters: return "max_iters";
    case Termination::weight_threshold: return "weight_threshold";
    case Termination::converged: return "converged";
    }
    return "?";
}

struct TraceRow {
    int t = 0;            // iteration index, from 0
    double q_star = 0.0;  // best-ever weight after the iteration
    double q_mean = 0.0;  // mean weight of the resampled set
    double gamma = 1.0;   // decay factor applied during the iteration
};

struct PlacementResult {
    std::string scenario_id;
    Pose best_pose;
    double compatibility = 0.0;
    int iterations = 0;
    Termination termination = Termination::max_iters;
    std::vector<TraceRow> trace;
};

struct PlacementOptions {
    unsigned workers = 1;     // threads for the per-iteration likelihood batch
    bool record_trace = true;
};

/// Random stream for iteration `t` of the run seeded with `seed`; stream 0
/// draws the initial particles.
[[nodiscard]] inline std::mt19937_64 iteration_stream(std::uint64_t seed, std::uint64_t t) {
    return std::mt19937_64(mix_seed(seed, t));
}

/// Searches the pose maximizing the scenario likelihood on the map. Returns
/// the best pose seen over the whole run and its likelihood.
[[nodiscard]] inline PlacementResult compute_single_scenario(const Scenario& z, const RoadModel& road,
                                                             const FilterParams& params,
                                                             const PlacementOptions& opts = {}) {
    params.validate();
    if (z.vehicles.empty()) throw ValidationError("scenario " + z.id + " has no vehicles");
    const auto n = static_cast<std::size_t>(params.n_particles);

    std::vector<Pose> particles;
    particles.reserve(n);
    {
        auto rng = iteration_stream(params.seed, 0);
        std::uniform_real_distribution<double> ux(road.bounds.min.x, road.bounds.max.x);
        std::uniform_real_distribution<double> uy(road.bounds.min.y, road.bounds.max.y);
        std::uniform_real_distribution<double> ut(0.0, kTwoPi);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = ux(rng), y = uy(rng), th = ut(rng);
            particles.emplace_back(x, y, th);
        }
    }

    PlacementResult result;
    result.scenario_id = z.id;
    double q_star = 0.0;
    bool have_best = false;
    std::vector<double> weights(n);
    int t = 0;
    for (;;) {
        const double gamma = decay_factor(t, q_star, params);
        auto rng = iteration_stream(params.seed, static_cast<std::uint64_t>(t) + 1);
        const auto proposals = diffuse(std::span<const Pose>(particles), gamma, params, rng);
        parallel_for(n, opts.workers, [&](std::size_t i) { weights[i] = likelihood(road, proposals[i], z); });
        ParticleSet set = partial_resample(std::span<const Pose>(proposals), std::span<const double>(weights), params, rng);
        set.iteration = t + 1;
        if (!have_best || set.best_weight > q_star) {
            q_star = set.best_weight;
            result.best_pose = set.best;
            have_best = true;
        }
        particles = std::move(set.particles);
        if (opts.record_trace) result.trace.push_back({t, q_star, set.mean_weight, gamma});
        ++t;

        if (q_star >= params.q_tilde) {
            result.termination = Termination::weight_threshold;
            break;
        }
        // A zero best weight would make the ratio test trivially true.
        if (q_star > 0.0 && set.mean_weight >= params.rho_c * q_star) {
            result.termination = Termination::converged;
            break;
        }
        if (t >= params.t_max) {
            result.termination = Termination::max_iters;
            break;
        }
    }
    result.compatibility = q_star;
    result.iterations = t;
    return result;
}

} // namespace pgeval
