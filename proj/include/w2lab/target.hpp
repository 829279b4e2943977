#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "w2lab/linalg.hpp"

namespace w2lab {

/// N(mu, sigma2 * I_d).
struct SphericalGaussianTarget {
    std::vector<double> mean;
    double variance = 1.0;

    int dim() const { return static_cast<int>(mean.size()); }
    double trace_sigma() const { return variance * dim(); }
    double sigma_op() const { return variance; }
};

/// Finite mixture of spherical Gaussians; weights sum to one.
struct GaussianMixtureTarget {
    std::vector<double> weights;
    std::vector<std::vector<double>> component_means;
    std::vector<double> component_variances;

    int dim() const { return static_cast<int>(component_means.front().size()); }
    int n_components() const { return static_cast<int>(weights.size()); }
};

using Target = std::variant<SphericalGaussianTarget, GaussianMixtureTarget>;

int target_dim(const Target& t);
void validate_target(const Target& t);

std::string target_to_json(const Target& t);
Target target_from_json(const std::string& text);

/// Parameters of the Gaussian-smoothed law at time t: each component k has
/// mean sqrt(t) * m_k and variance t * sigma_k^2 + 1 - t. A plain Gaussian is
/// the one-component case.
struct SmoothedLaw {
    std::vector<double> weights;
    std::vector<std::vector<double>> means;
    std::vector<double> variances;
};

SmoothedLaw smoothed_law(const Target& t, double time);

/// Score of the smoothed law at y, time in (0,1). Mixture responsibilities go
/// through log-sum-exp.
void score_exact(const Target& t, double time, std::span<const double> y, std::span<double> out);
std::vector<double> score_exact(const Target& t, double time, const std::vector<double>& y);

/// Log-density of the smoothed law at y.
double log_smoothed_density(const Target& t, double time, std::span<const double> y);

/// Central finite difference of log_smoothed_density; verification oracle,
/// restricted to d <= 3 and h in [1e-7, 1e-3].
std::vector<double> score_fd_oracle(const Target& t, double time, const std::vector<double>& y,
                                    double h);

/// Scalar profile on (0,1) used for L(t) envelopes and score-error magnitudes.
struct Profile {
    enum class Kind { constant, inv_sqrt_one_minus_t, tabulated };
    Kind kind = Kind::constant;
    double scale = 0.0;
    std::vector<double> knot_t;  // tabulated: piecewise-constant envelope,
    std::vector<double> knot_v;  // value held from each knot rightwards

    double operator()(double t) const;
    bool non_decreasing_on(std::span<const double> grid) const;

    static Profile constant(double c) { return Profile{Kind::constant, c, {}, {}}; }
    static Profile inv_sqrt_one_minus_t(double c) {
        return Profile{Kind::inv_sqrt_one_minus_t, c, {}, {}};
    }
};

/// Everything the bound evaluators need to know about a target's regularity.
struct RegularityProfile {
    Profile L = Profile::constant(0.0);
    Profile epsilon_score = Profile::constant(0.0);
    double lambda = 0.0;
    double alpha = 0.0;
    double M = 0.0;
    double beta_slc = 0.0;
    double L0 = 1.0;
};

/// Exact regularity parameters of a spherical Gaussian. The pointwise
/// Hessian envelope |sigma^2-1| / (t sigma^2 + 1 - t) decreases in t when
/// sigma > 1, so L is the constant majorant max{sigma^2-1, 1/sigma^2-1}; the
/// hypotheses then hold verbatim at the cost of slack.
RegularityProfile gaussian_regularity(const SphericalGaussianTarget& g);

/// n i.i.d. rows; pure function of (target, n, seed).
Matrix sample_target(const Target& t, std::size_t n, std::uint64_t seed);

}  // namespace w2lab
