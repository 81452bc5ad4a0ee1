#include "mmck/woa.hpp"

#include "mmck/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace mmck {

void WoaParams::validate() const {
    if (pop_size < 2) throw config_error("WoaParams: pop_size must be >= 2");
    if (max_iter < 1) throw config_error("WoaParams: max_iter must be >= 1");
    if (!(spiral_b > 0.0)) throw config_error("WoaParams: spiral_b must be > 0");
    if (bounds.empty()) throw config_error("WoaParams: search space has zero dimensions");
    for (const auto& [lo, hi] : bounds)
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw config_error("WoaParams: bounds must be finite with lo < hi");
    for (const auto& g : init_guesses)
        if (g.size() != bounds.size())
            throw config_error("WoaParams: init guess dimension mismatch");
    if (static_cast<int>(init_guesses.size()) > pop_size)
        throw config_error("WoaParams: more init guesses than population slots");
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

} // namespace

WoaRng::WoaRng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t WoaRng::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double WoaRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double WoaRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int WoaRng::uniform_int(int n) {
    return std::min(n - 1, static_cast<int>(uniform() * static_cast<double>(n)));
}

namespace {

double penalized(const Objective& f, const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

void evaluate_parallel(const Objective& objective,
                       const std::vector<std::vector<double>>& positions,
                       std::vector<double>& fitness, int threads) {
    const std::size_t n = positions.size();
    fitness.assign(n, 0.0);
    unsigned t = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    t = std::min<unsigned>(t, static_cast<unsigned>(n));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fitness[i] = penalized(objective, positions[i]);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += t)
                fitness[i] = penalized(objective, positions[i]);
        });
    }
    for (auto& th : pool) th.join();
}

void clamp_to_bounds(std::vector<double>& x, const WoaParams& params) {
    for (std::size_t d = 0; d < x.size(); ++d)
        x[d] = std::clamp(x[d], params.bounds[d].first, params.bounds[d].second);
}

} // namespace

Swarm init_swarm(const WoaParams& params, const Objective& objective) {
    params.validate();
    WoaRng rng(params.seed);
    Swarm sw;
    sw.positions.resize(params.pop_size);
    for (auto& x : sw.positions) {
        x.resize(params.dim());
        for (std::size_t d = 0; d < params.dim(); ++d)
            x[d] = rng.uniform(params.bounds[d].first, params.bounds[d].second);
    }
    for (std::size_t g = 0; g < params.init_guesses.size(); ++g) {
        sw.positions[g] = params.init_guesses[g];
        clamp_to_bounds(sw.positions[g], params);
    }
    evaluate_parallel(objective, sw.positions, sw.fitness, params.threads);

    const auto best = std::min_element(sw.fitness.begin(), sw.fitness.end());
    if (!std::isfinite(*best))
        throw config_error("init_swarm: objective is non-finite on every initial point");
    sw.leader = sw.positions[static_cast<std::size_t>(best - sw.fitness.begin())];
    sw.leader_fitness = *best;
    return sw;
}

std::vector<double> update_position(const std::vector<double>& whale,
                                    const std::vector<double>& leader,
                                    const std::vector<std::vector<double>>& population,
                                    double a, const WoaParams& params, WoaRng& rng) {
    // fixed draw order keeps runs reproducible regardless of branch taken
    const double p = rng.uniform();
    const double r = rng.uniform();
    const double l = rng.uniform(-1.0, 1.0);
    const int rand_idx = rng.uniform_int(static_cast<int>(population.size()));

    const std::size_t dim = whale.size();
    std::vector<double> next(dim);
    if (p >= 0.5) {
        const double scale = std::exp(params.spiral_b * l) * std::cos(2.0 * std::numbers::pi * l);
        for (std::size_t d = 0; d < dim; ++d)
            next[d] = std::abs(leader[d] - whale[d]) * scale + leader[d];
    } else {
        const double A = 2.0 * a * r - a;
        const double C = 2.0 * r;
        const std::vector<double>& target =
            std::abs(A) < 1.0 ? leader : population[static_cast<std::size_t>(rand_idx)];
        for (std::size_t d = 0; d < dim; ++d)
            next[d] = target[d] - A * std::abs(C * target[d] - whale[d]);
    }
    clamp_to_bounds(next, params);
    return next;
}

WoaResult optimize(const Objective& objective, const WoaParams& params,
                   const std::function<void(const ConvergencePoint&)>& progress) {
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    Swarm sw = init_swarm(params, objective);
    WoaRng rng(params.seed ^ 0x57484c45ull); // separate stream from init draws

    WoaResult res;
    auto record = [&](int iter) {
        double mean = 0.0;
        for (double f : sw.fitness) mean += f;
        mean /= static_cast<double>(sw.fitness.size());
        ConvergencePoint cp{iter, sw.leader_fitness, mean, elapsed()};
        res.convergence.push_back(cp);
        if (progress) progress(cp);
    };
    record(0);

    std::vector<std::vector<double>> next(sw.positions.size());
    for (int t = 0; t < params.max_iter; ++t) {
        const double a = 2.0 * (1.0 - static_cast<double>(t) / params.max_iter);
        for (std::size_t i = 0; i < sw.positions.size(); ++i)
            next[i] = update_position(sw.positions[i], sw.leader, sw.positions, a, params, rng);
        sw.positions.swap(next);
        evaluate_parallel(objective, sw.positions, sw.fitness, params.threads);
        for (std::size_t i = 0; i < sw.fitness.size(); ++i) {
            if (sw.fitness[i] < sw.leader_fitness) {
                sw.leader_fitness = sw.fitness[i];
                sw.leader = sw.positions[i];
            }
        }
        sw.iter = t + 1;
        record(t + 1);
    }

    res.best_x = sw.leader;
    res.best_f = sw.leader_fitness;
    return res;
}

} // namespace mmck
