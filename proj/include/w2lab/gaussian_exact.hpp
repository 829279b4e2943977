#pragma once

#include <optional>
#include <vector>

#include "w2lab/sampler.hpp"
#include "w2lab/schedule.hpp"
#include "w2lab/target.hpp"

namespace w2lab {

/// Exact law of the scaled chain sqrt(t_i) * Y_i for a spherical Gaussian
/// target under the exact (or constant-vector-perturbed) score:
/// sqrt(t_i) * Y_i ~ N(mu_seq[i], var_seq[i] * I_d), with
///   mu_{i+1}  = (g(t_{i+1})/g(t_i)) mu_i + (h_i/g(t_i)) mu  [+ drift from eps]
///   var_{i+1} = (g(t_{i+1})/g(t_i))^2 var_i + h_i
/// where g(t) = (sigma^2 - 1) t + 1.
struct GaussianPipelineState {
    std::vector<std::vector<double>> mu_seq;  // N+1 vectors
    std::vector<double> var_seq;              // N+1 positive reals
    std::vector<double> g_values;             // g(t_i)

    const std::vector<double>& mu_end() const { return mu_seq.back(); }
    double var_end() const { return var_seq.back(); }
};

/// Optional score perturbation for the closed-form pipeline: the constant
/// unit-vector mode only, which adds the deterministic per-step drift
/// (h_i / sqrt(t_i)) * eps(t_i) * u to the mean recursion.
struct ConstantVectorPerturbation {
    Profile epsilon = Profile::constant(0.0);
    std::vector<double> direction;  // unit vector; defaults to e1
};

GaussianPipelineState moment_recursion(
    const VarianceSchedule& schedule, const SphericalGaussianTarget& target,
    const std::vector<double>& mu_hat,
    const std::optional<ConstantVectorPerturbation>& perturbation = std::nullopt);

/// W2 between N(mu1, var1 I_d) and N(mu2, var2 I_d):
/// sqrt(|mu1-mu2|^2 + d (sqrt(var1)-sqrt(var2))^2).
double w2_spherical_gaussians(const std::vector<double>& mu1, double var1,
                              const std::vector<double>& mu2, double var2, int d);

/// Exact sampling error of the pipeline. With delta = 0 the value is
/// W2(law(Y_N), P*); with delta > 0 the closed-form comparison is made
/// against the smoothed law S_{t_N}P* instead (reference = smoothed) and the
/// early-stopping bound sqrt(tr(Sigma) delta^2 + d delta) is attached.
struct ExactW2 {
    enum class Reference { target, smoothed };
    double value = 0.0;
    Reference reference = Reference::target;
    std::optional<double> early_stopping_bound;  // present when reference == smoothed
};

ExactW2 exact_sampler_w2(
    const VarianceSchedule& schedule, const SphericalGaussianTarget& target,
    const std::vector<double>& mu_hat,
    const std::optional<ConstantVectorPerturbation>& perturbation = std::nullopt);

/// Exact-score spherical-Gaussian lower bound on W2(law(Y_N), P*), valid for
/// delta = 0 when every beta_i >= eta.
double lower_bound_eq13(double t0, double eta, double sigma2, int d, double mu_gap);

/// W2(S_t P*, P*) in closed form for a spherical Gaussian target.
double smoothing_w2_gaussian(const SphericalGaussianTarget& target, double t);

/// KL(S_{t_N} P* | law(Y_N)) in closed form.
double kl_pipeline_gaussian(
    const VarianceSchedule& schedule, const SphericalGaussianTarget& target,
    const std::vector<double>& mu_hat,
    const std::optional<ConstantVectorPerturbation>& perturbation = std::nullopt);

/// KL(N(mu1, var1 I_d) | N(mu2, var2 I_d)).
double kl_spherical_gaussians(const std::vector<double>& mu1, double var1,
                              const std::vector<double>& mu2, double var2, int d);

}  // namespace w2lab
