#include "w2lab/gaussian_exact.hpp"

#include <cmath>

#include "w2lab/errors.hpp"

namespace w2lab {

namespace {

std::vector<double> unit_direction(const std::vector<double>& direction, int d) {
    if (direction.empty()) {
        std::vector<double> u(d, 0.0);
        u[0] = 1.0;
        return u;
    }
    if (static_cast<int>(direction.size()) != d)
        throw ValidationError("perturbation direction dimension must match the target");
    std::vector<double> u = direction;
    const double len = norm(u);
    if (!(len > 0.0)) throw ValidationError("perturbation direction must be nonzero");
    for (double& v : u) v /= len;
    return u;
}

}  // namespace

GaussianPipelineState moment_recursion(
    const VarianceSchedule& schedule, const SphericalGaussianTarget& target,
    const std::vector<double>& mu_hat,
    const std::optional<ConstantVectorPerturbation>& perturbation) {
    schedule.validate();
    const int d = target.dim();
    if (static_cast<int>(mu_hat.size()) != d)
        throw ValidationError("mu_hat dimension must match the target");
    const double s2 = target.variance;
    const int n = schedule.n_steps();

    std::vector<double> u;
    if (perturbation) u = unit_direction(perturbation->direction, d);

    GaussianPipelineState st;
    st.mu_seq.reserve(n + 1);
    st.var_seq.reserve(n + 1);
    st.g_values.reserve(n + 1);
    auto g = [s2](double t) { return (s2 - 1.0) * t + 1.0; };

    std::vector<double> mu_i(d);
    const double t0 = schedule.t0();
    for (int c = 0; c < d; ++c) mu_i[c] = t0 * mu_hat[c];
    double var_i = t0;
    st.mu_seq.push_back(mu_i);
    st.var_seq.push_back(var_i);
    st.g_values.push_back(g(t0));

    for (int i = 0; i < n; ++i) {
        const double ti = schedule.times[i];
        const double tip = schedule.times[i + 1];
        const double h = tip - ti;
        const double ratio = g(tip) / g(ti);
        for (int c = 0; c < d; ++c) mu_i[c] = ratio * mu_i[c] + (h / g(ti)) * target.mean[c];
        if (perturbation) {
            const double drift = (h / std::sqrt(ti)) * perturbation->epsilon(ti);
            for (int c = 0; c < d; ++c) mu_i[c] += drift * u[c];
        }
        var_i = ratio * ratio * var_i + h;
        st.mu_seq.push_back(mu_i);
        st.var_seq.push_back(var_i);
        st.g_values.push_back(g(tip));
    }
    return st;
}

double w2_spherical_gaussians(const std::vector<double>& mu1, double var1,
                              const std::vector<double>& mu2, double var2, int d) {
    if (var1 < 0.0 || var2 < 0.0) throw ValidationError("variances must be nonnegative");
    if (static_cast<int>(mu1.size()) != d || static_cast<int>(mu2.size()) != d)
        throw ValidationError("mean dimensions must equal d");
    const double dm = squared_distance(mu1, mu2);
    const double ds = std::sqrt(var1) - std::sqrt(var2);
    return std::sqrt(dm + d * ds * ds);
}

ExactW2 exact_sampler_w2(const VarianceSchedule& schedule, const SphericalGaussianTarget& target,
                         const std::vector<double>& mu_hat,
                         const std::optional<ConstantVectorPerturbation>& perturbation) {
    const GaussianPipelineState st = moment_recursion(schedule, target, mu_hat, perturbation);
    const int d = target.dim();
    const double t_end = schedule.t_end();

    ExactW2 out;
    if (schedule.delta == 0.0) {
        // t_N = 1: the scaled chain's terminal law is law(Y_N) itself
        out.value = w2_spherical_gaussians(st.mu_end(), st.var_end(), target.mean,
                                           target.variance, d);
        out.reference = ExactW2::Reference::target;
        return out;
    }
    const double rt = std::sqrt(t_end);
    std::vector<double> mean_y = st.mu_end();
    for (double& v : mean_y) v /= rt;
    std::vector<double> mean_s = target.mean;
    for (double& v : mean_s) v *= rt;
    const double var_y = st.var_end() / t_end;
    const double var_s = t_end * target.variance + 1.0 - t_end;
    out.value = w2_spherical_gaussians(mean_y, var_y, mean_s, var_s, d);
    out.reference = ExactW2::Reference::smoothed;
    out.early_stopping_bound =
        std::sqrt(target.trace_sigma() * schedule.delta * schedule.delta + d * schedule.delta);
    return out;
}

double lower_bound_eq13(double t0, double eta, double sigma2, int d, double mu_gap) {
    const double sigma = std::sqrt(sigma2);
    const double first = t0 * mu_gap;
    const double coeff = sigma2 * std::abs(sigma2 - 1.0) / (2.0 * std::max(sigma * sigma2, 1.0));
    const double second = coeff * (std::sqrt(static_cast<double>(d)) * t0 * t0 +
                                   (1.0 - t0 * t0) / (2.0 * std::max(sigma2, 1.0)) *
                                       std::sqrt(static_cast<double>(d)) * eta);
    return sigma2 / std::max(sigma2, 1.0) * std::min(first, second);
}

double smoothing_w2_gaussian(const SphericalGaussianTarget& target, double t) {
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("t outside (0,1]");
    const double rt = std::sqrt(t);
    const double smoothed_sd = std::sqrt(t * target.variance + 1.0 - t);
    const double mean_part = (1.0 - rt) * (1.0 - rt) * squared_norm(target.mean);
    const double sd_diff = smoothed_sd - std::sqrt(target.variance);
    return std::sqrt(mean_part + target.dim() * sd_diff * sd_diff);
}

double kl_spherical_gaussians(const std::vector<double>& mu1, double var1,
                              const std::vector<double>& mu2, double var2, int d) {
    if (!(var1 > 0.0) || !(var2 > 0.0)) throw ValidationError("degenerate variance in KL");
    const double dm = squared_distance(mu1, mu2);
    return 0.5 * (d * (var1 / var2) - d + d * std::log(var2 / var1) + dm / var2);
}

double kl_pipeline_gaussian(const VarianceSchedule& schedule,
                            const SphericalGaussianTarget& target,
                            const std::vector<double>& mu_hat,
                            const std::optional<ConstantVectorPerturbation>& perturbation) {
    const GaussianPipelineState st = moment_recursion(schedule, target, mu_hat, perturbation);
    const int d = target.dim();
    const double t_end = schedule.t_end();
    const double rt = std::sqrt(t_end);

    std::vector<double> mean_smoothed = target.mean;
    for (double& v : mean_smoothed) v *= rt;
    const double var_smoothed = t_end * target.variance + 1.0 - t_end;

    std::vector<double> mean_y = st.mu_end();
    for (double& v : mean_y) v /= rt;
    const double var_y = st.var_end() / t_end;

    return kl_spherical_gaussians(mean_smoothed, var_smoothed, mean_y, var_y, d);
}

}  // namespace w2lab
