#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace mmck {

struct WoaParams {
    int pop_size = 30;
    int max_iter = 100;
    double spiral_b = 1.0;
    std::uint64_t seed = 1;
    std::vector<std::pair<double, double>> bounds; // per-dimension (lo, hi)
    int threads = 0;                               // 0 => hardware concurrency
    std::vector<std::vector<double>> init_guesses; // overwrite first rows after random init

    std::size_t dim() const { return bounds.size(); }
    void validate() const;
};

using Objective = std::function<double(const std::vector<double>&)>;

struct Swarm {
    std::vector<std::vector<double>> positions;
    std::vector<double> fitness;
    std::vector<double> leader;
    double leader_fitness = 0.0;
    int iter = 0;
};

struct ConvergencePoint {
    int iter = 0;
    double best_f = 0.0;
    double mean_f = 0.0;
    double elapsed_s = 0.0;
};

struct WoaResult {
    std::vector<double> best_x;
    double best_f = 0.0;
    std::vector<ConvergencePoint> convergence;
};

// Deterministic 53-bit uniform draws from a splitmix-seeded xoshiro-free core;
// identical across platforms and standard libraries.
class WoaRng {
public:
    explicit WoaRng(std::uint64_t seed);
    double uniform();                    // [0, 1)
    double uniform(double lo, double hi);
    int uniform_int(int n);              // [0, n)

private:
    std::uint64_t next_u64();
    std::uint64_t s_[4];
};

Swarm init_swarm(const WoaParams& params, const Objective& objective);

// One whale move around the leader. Per-whale draws (always, in order):
// p, r, l, random-agent index.
std::vector<double> update_position(const std::vector<double>& whale,
                                    const std::vector<double>& leader,
                                    const std::vector<std::vector<double>>& population,
                                    double a, const WoaParams& params, WoaRng& rng);

// Full run: a = 2 (1 - t/max_iter); all random draws for an iteration happen
// serially, fitness evaluations then run in parallel.
WoaResult optimize(const Objective& objective, const WoaParams& params,
                   const std::function<void(const ConvergencePoint&)>& progress = {});

} // namespace mmck
