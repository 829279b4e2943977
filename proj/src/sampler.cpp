#include "w2lab/sampler.hpp"

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include "w2lab/errors.hpp"
#include "w2lab/rng.hpp"

namespace w2lab {

namespace {

void validate_config(const VarianceSchedule& schedule, const Target& target,
                     const SamplerConfig& config) {
    schedule.validate();
    validate_target(target);
    const int d = target_dim(target);
    if (static_cast<int>(config.mu_hat.size()) != d)
        throw ValidationError("mu_hat dimension must match the target");
    if (config.n_chains < 1) throw ValidationError("n_chains must be >= 1");
    if (config.score_model.kind == ScoreModel::Kind::perturbed) {
        std::vector<double> grid(schedule.times.begin(), schedule.times.end() - 1);
        if (!config.score_model.epsilon.non_decreasing_on(grid))
            throw ValidationError("score error profile must be non-decreasing on the grid");
    }
}

void abort_nonfinite(std::uint32_t chain, int step) {
    std::ostringstream os;
    os << "non-finite score at chain " << chain << ", step " << step;
    throw NumericError(os.str());
}

template <typename Fn>
void parallel_chains(std::size_t n_chains, Fn&& body) {
    const unsigned threads = std::min<std::size_t>(effective_threads(), n_chains);
    if (threads <= 1) {
        for (std::size_t c = 0; c < n_chains; ++c) body(c);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t c = w; c < n_chains; c += threads) body(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

unsigned effective_threads() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("W2LAB_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

ScoreModel make_perturbed_score(const Profile& epsilon, ScoreModel::Mode mode,
                                std::vector<double> direction) {
    ScoreModel m;
    m.kind = ScoreModel::Kind::perturbed;
    m.mode = mode;
    m.epsilon = epsilon;
    if (!direction.empty()) {
        const double len = norm(direction);
        if (!(len > 0.0)) throw ValidationError("perturbation direction must be nonzero");
        for (double& v : direction) v /= len;
        m.direction = std::move(direction);
    }
    return m;
}

ScoreFn bind_score(const ScoreModel& model, const Target& target, std::uint64_t seed,
                   std::uint32_t chain) {
    const int d = target_dim(target);
    if (model.kind == ScoreModel::Kind::zero) {
        return [](int, double, std::span<const double>, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
        };
    }
    if (model.kind == ScoreModel::Kind::exact) {
        return [&target](int, double t, std::span<const double> y, std::span<double> out) {
            score_exact(target, t, y, out);
        };
    }
    if (model.mode == ScoreModel::Mode::constant_vector) {
        std::vector<double> u = model.direction;
        if (u.empty()) {
            u.assign(d, 0.0);
            u[0] = 1.0;
        }
        if (static_cast<int>(u.size()) != d)
            throw ValidationError("perturbation direction dimension must match the target");
        const Profile eps = model.epsilon;
        return [&target, u, eps](int, double t, std::span<const double> y, std::span<double> out) {
            score_exact(target, t, y, out);
            const double e = eps(t);
            for (std::size_t c = 0; c < out.size(); ++c) out[c] += e * u[c];
        };
    }
    // fresh unit direction per (chain, step)
    const Profile eps = model.epsilon;
    NormalStream dir(seed, RngDomain::perturbation_direction, chain);
    return [&target, eps, dir, d](int step, double t, std::span<const double> y,
                                  std::span<double> out) {
        score_exact(target, t, y, out);
        std::vector<double> u(d);
        dir.fill(static_cast<std::uint32_t>(step), u);
        double len = norm(u);
        if (len == 0.0) {
            u[0] = 1.0;
            len = 1.0;
        }
        const double e = eps(t);
        for (int c = 0; c < d; ++c) out[c] += e * u[c] / len;
    };
}

void ddpm_chain(const VarianceSchedule& schedule, const ScoreFn& score,
                std::span<const double> mu_hat, std::uint64_t seed, std::uint32_t chain,
                std::span<double> out, Matrix* trajectory) {
    const int n = schedule.n_steps();
    const int d = static_cast<int>(mu_hat.size());
    NormalStream noise(seed, RngDomain::sampler_noise, chain);

    std::vector<double> y(d), z(d), s(d);
    noise.fill(0, z);
    const double rt0 = std::sqrt(schedule.t0());
    for (int c = 0; c < d; ++c) y[c] = rt0 * mu_hat[c] + z[c];
    if (trajectory)
        std::copy(y.begin(), y.end(), trajectory->row(0));

    for (int i = 0; i < n; ++i) {
        const double beta = schedule.betas[i];
        const double t = schedule.times[i];
        score(i, t, y, s);
        if (!all_finite(s)) abort_nonfinite(chain, i);
        noise.fill(static_cast<std::uint32_t>(i + 1), z);
        const double inv = 1.0 / std::sqrt(1.0 - beta);
        const double rb = std::sqrt(beta);
        for (int c = 0; c < d; ++c) y[c] = inv * (y[c] + beta * s[c]) + rb * z[c];
        if (trajectory)
            std::copy(y.begin(), y.end(), trajectory->row(i + 1));
    }
    std::copy(y.begin(), y.end(), out.begin());
}

void follmer_chain(const VarianceSchedule& schedule, const ScoreFn& score,
                   std::span<const double> mu_hat, std::uint64_t seed, std::uint32_t chain,
                   std::span<double> out) {
    const int n = schedule.n_steps();
    const int d = static_cast<int>(mu_hat.size());
    NormalStream noise(seed, RngDomain::sampler_noise, chain);

    std::vector<double> x(d), z(d), s(d), arg(d);
    noise.fill(0, z);
    const double t0 = schedule.t0();
    const double rt0 = std::sqrt(t0);
    for (int c = 0; c < d; ++c) x[c] = t0 * mu_hat[c] + rt0 * z[c];

    for (int i = 0; i < n; ++i) {
        const double t = schedule.times[i];
        const double h = schedule.h(i);
        const double rt = std::sqrt(t);
        for (int c = 0; c < d; ++c) arg[c] = x[c] / rt;
        score(i, t, arg, s);
        if (!all_finite(s)) abort_nonfinite(chain, i);
        noise.fill(static_cast<std::uint32_t>(i + 1), z);
        const double gain = 1.0 + h / t;
        const double rh = std::sqrt(h);
        for (int c = 0; c < d; ++c) x[c] = gain * x[c] + (h / rt) * s[c] + rh * z[c];
    }
    const double rt_end = std::sqrt(schedule.t_end());
    for (int c = 0; c < d; ++c) out[c] = x[c] / rt_end;
}

Matrix ddpm_run(const VarianceSchedule& schedule, const Target& target,
                const SamplerConfig& config) {
    validate_config(schedule, target, config);
    const int d = target_dim(target);
    Matrix out(config.n_chains, d);
    parallel_chains(config.n_chains, [&](std::size_t c) {
        const auto chain = static_cast<std::uint32_t>(c);
        ScoreFn score = bind_score(config.score_model, target, config.seed, chain);
        ddpm_chain(schedule, score, config.mu_hat, config.seed, chain, out.row_span(c));
    });
    return out;
}

Matrix follmer_run(const VarianceSchedule& schedule, const Target& target,
                   const SamplerConfig& config) {
    validate_config(schedule, target, config);
    const int d = target_dim(target);
    Matrix out(config.n_chains, d);
    parallel_chains(config.n_chains, [&](std::size_t c) {
        const auto chain = static_cast<std::uint32_t>(c);
        ScoreFn score = bind_score(config.score_model, target, config.seed, chain);
        follmer_chain(schedule, score, config.mu_hat, config.seed, chain, out.row_span(c));
    });
    return out;
}

Matrix run_trajectory(const VarianceSchedule& schedule, const Target& target,
                      const SamplerConfig& config, std::size_t chain_index) {
    validate_config(schedule, target, config);
    if (chain_index >= config.n_chains) throw ValidationError("chain index out of bounds");
    const int d = target_dim(target);
    Matrix traj(schedule.n_steps() + 1, d);
    std::vector<double> last(d);
    const auto chain = static_cast<std::uint32_t>(chain_index);
    ScoreFn score = bind_score(config.score_model, target, config.seed, chain);
    ddpm_chain(schedule, score, config.mu_hat, config.seed, chain, last, &traj);
    return traj;
}

}  // namespace w2lab
