#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "w2lab/linalg.hpp"
#include "w2lab/schedule.hpp"
#include "w2lab/target.hpp"

namespace w2lab {

/// Exact score, or the exact score shifted by a prescribed-magnitude vector.
/// The constant-vector mode satisfies the L2 error budget with equality and
/// keeps Gaussian pipelines in closed form; random-direction redraws the unit
/// vector per (chain, step).
struct ScoreModel {
    enum class Kind { exact, perturbed, zero };
    enum class Mode { constant_vector, random_direction };

    Kind kind = Kind::exact;
    Mode mode = Mode::constant_vector;
    Profile epsilon = Profile::constant(0.0);
    std::vector<double> direction;  // unit vector; defaults to e1
};

ScoreModel make_perturbed_score(const Profile& epsilon, ScoreModel::Mode mode,
                                std::vector<double> direction = {});

struct SamplerConfig {
    std::vector<double> mu_hat;
    std::size_t n_chains = 1;
    std::uint64_t seed = 0;
    ScoreModel score_model;
};

/// step-indexed score callback used by the low-level chain drivers
using ScoreFn =
    std::function<void(int step, double t, std::span<const double> y, std::span<double> out)>;

/// Terminal points Y_N of the DDPM recursion, one row per chain.
Matrix ddpm_run(const VarianceSchedule& schedule, const Target& target,
                const SamplerConfig& config);

/// Terminal points of the Euler scheme of the bridge SDE, rescaled by
/// 1/sqrt(t_N). Consumes exactly the noise stream of ddpm_run, so under a
/// shared seed the two outputs agree pathwise up to roundoff.
Matrix follmer_run(const VarianceSchedule& schedule, const Target& target,
                   const SamplerConfig& config);

/// All N+1 states of one chain, same stream as ddpm_run; the final row equals
/// the corresponding ddpm_run row bitwise.
Matrix run_trajectory(const VarianceSchedule& schedule, const Target& target,
                      const SamplerConfig& config, std::size_t chain_index);

/// Low-level single-chain drivers with an arbitrary score callback.
void ddpm_chain(const VarianceSchedule& schedule, const ScoreFn& score,
                std::span<const double> mu_hat, std::uint64_t seed, std::uint32_t chain,
                std::span<double> out, Matrix* trajectory = nullptr);
void follmer_chain(const VarianceSchedule& schedule, const ScoreFn& score,
                   std::span<const double> mu_hat, std::uint64_t seed, std::uint32_t chain,
                   std::span<double> out);

/// Binds a score model to a target for one chain.
ScoreFn bind_score(const ScoreModel& model, const Target& target, std::uint64_t seed,
                   std::uint32_t chain);

/// Thread count used for chain-parallel loops: min(hardware, W2LAB_THREADS).
unsigned effective_threads();

}  // namespace w2lab
