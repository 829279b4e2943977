#include "w2lab/target.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "w2lab/errors.hpp"
#include "w2lab/rng.hpp"

namespace w2lab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_time_open(double t) {
    if (!(t > 0.0 && t < 1.0)) {
        std::ostringstream os;
        os << "t = " << t << " outside (0,1)";
        throw ValidationError(os.str());
    }
}

}  // namespace

int target_dim(const Target& t) {
    return std::visit([](const auto& x) { return x.dim(); }, t);
}

void validate_target(const Target& t) {
    if (const auto* g = std::get_if<SphericalGaussianTarget>(&t)) {
        if (g->mean.empty()) throw ValidationError("gaussian target needs a nonempty mean");
        if (!(g->variance > 0.0)) throw ValidationError("gaussian variance must be positive");
        if (!all_finite(g->mean)) throw ValidationError("gaussian mean must be finite");
        return;
    }
    const auto& m = std::get<GaussianMixtureTarget>(t);
    const std::size_t k = m.weights.size();
    if (k == 0) throw ValidationError("mixture needs at least one component");
    if (m.component_means.size() != k || m.component_variances.size() != k)
        throw ValidationError("mixture component arrays must agree in length");
    const std::size_t d = m.component_means.front().size();
    if (d == 0) throw ValidationError("mixture components need a nonempty mean");
    double wsum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (!(m.weights[j] > 0.0)) throw ValidationError("mixture weights must be positive");
        wsum += m.weights[j];
        if (!(m.component_variances[j] > 0.0))
            throw ValidationError("mixture variances must be positive");
        if (m.component_means[j].size() != d)
            throw ValidationError("mixture component means must share one dimension");
        if (!all_finite(m.component_means[j]))
            throw ValidationError("mixture means must be finite");
    }
    if (std::abs(wsum - 1.0) > 1e-12) throw ValidationError("mixture weights must sum to 1");
}

SmoothedLaw smoothed_law(const Target& t, double time) {
    if (!(time >= 0.0 && time < 1.0)) {
        std::ostringstream os;
        os << "t = " << time << " outside [0,1)";
        throw ValidationError(os.str());
    }
    const double rt = std::sqrt(time);
    SmoothedLaw out;
    if (const auto* g = std::get_if<SphericalGaussianTarget>(&t)) {
        out.weights = {1.0};
        out.means.emplace_back(g->mean);
        for (double& v : out.means.back()) v *= rt;
        out.variances = {time * g->variance + 1.0 - time};
        return out;
    }
    const auto& m = std::get<GaussianMixtureTarget>(t);
    out.weights = m.weights;
    out.means = m.component_means;
    for (auto& mean : out.means)
        for (double& v : mean) v *= rt;
    out.variances.resize(m.n_components());
    for (int j = 0; j < m.n_components(); ++j)
        out.variances[j] = time * m.component_variances[j] + 1.0 - time;
    return out;
}

void score_exact(const Target& t, double time, std::span<const double> y, std::span<double> out) {
    check_time_open(time);
    const double rt = std::sqrt(time);
    if (const auto* g = std::get_if<SphericalGaussianTarget>(&t)) {
        const double v = time * g->variance + 1.0 - time;
        for (std::size_t j = 0; j < y.size(); ++j) out[j] = -(y[j] - rt * g->mean[j]) / v;
        return;
    }
    const auto& m = std::get<GaussianMixtureTarget>(t);
    const int k = m.n_components();
    const int d = m.dim();
    std::vector<double> logw(k);
    double maxlog = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
        const double v = time * m.component_variances[j] + 1.0 - time;
        double q = 0.0;
        for (int c = 0; c < d; ++c) {
            const double diff = y[c] - rt * m.component_means[j][c];
            q += diff * diff;
        }
        logw[j] = std::log(m.weights[j]) - 0.5 * d * (kLog2Pi + std::log(v)) - 0.5 * q / v;
        maxlog = std::max(maxlog, logw[j]);
    }
    double z = 0.0;
    for (int j = 0; j < k; ++j) z += std::exp(logw[j] - maxlog);
    std::fill(out.begin(), out.end(), 0.0);
    for (int j = 0; j < k; ++j) {
        const double r = std::exp(logw[j] - maxlog) / z;  // responsibility
        const double v = time * m.component_variances[j] + 1.0 - time;
        for (int c = 0; c < d; ++c) out[c] += r * (-(y[c] - rt * m.component_means[j][c]) / v);
    }
}

std::vector<double> score_exact(const Target& t, double time, const std::vector<double>& y) {
    std::vector<double> out(y.size());
    score_exact(t, time, y, out);
    return out;
}

double log_smoothed_density(const Target& t, double time, std::span<const double> y) {
    check_time_open(time);
    const double rt = std::sqrt(time);
    auto log_comp = [&](std::span<const double> mean, double var) {
        double q = 0.0;
        for (std::size_t c = 0; c < y.size(); ++c) {
            const double diff = y[c] - rt * mean[c];
            q += diff * diff;
        }
        return -0.5 * static_cast<double>(y.size()) * (kLog2Pi + std::log(var)) - 0.5 * q / var;
    };
    if (const auto* g = std::get_if<SphericalGaussianTarget>(&t)) {
        return log_comp(g->mean, time * g->variance + 1.0 - time);
    }
    const auto& m = std::get<GaussianMixtureTarget>(t);
    double maxlog = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(m.n_components());
    for (int j = 0; j < m.n_components(); ++j) {
        logs[j] = std::log(m.weights[j]) +
                  log_comp(m.component_means[j], time * m.component_variances[j] + 1.0 - time);
        maxlog = std::max(maxlog, logs[j]);
    }
    double z = 0.0;
    for (double l : logs) z += std::exp(l - maxlog);
    return maxlog + std::log(z);
}

std::vector<double> score_fd_oracle(const Target& t, double time, const std::vector<double>& y,
                                    double h) {
    const int d = static_cast<int>(y.size());
    if (d > 3) throw ValidationError("finite-difference oracle only supports d <= 3");
    if (!(h >= 1e-7 && h <= 1e-3)) throw ValidationError("fd step h must lie in [1e-7, 1e-3]");
    std::vector<double> out(d);
    std::vector<double> probe = y;
    for (int c = 0; c < d; ++c) {
        probe[c] = y[c] + h;
        const double up = log_smoothed_density(t, time, probe);
        probe[c] = y[c] - h;
        const double dn = log_smoothed_density(t, time, probe);
        probe[c] = y[c];
        if (!std::isfinite(up) || !std::isfinite(dn))
            throw NumericError("log-density overflowed in the tail; probe a smaller |y|");
        out[c] = (up - dn) / (2.0 * h);
    }
    return out;
}

double Profile::operator()(double t) const {
    switch (kind) {
        case Kind::constant:
            return scale;
        case Kind::inv_sqrt_one_minus_t:
            return scale / std::sqrt(1.0 - t);
        case Kind::tabulated: {
            double v = 0.0;
            for (std::size_t i = 0; i < knot_t.size(); ++i)
                if (knot_t[i] <= t) v = knot_v[i];
            return v;
        }
    }
    return 0.0;
}

bool Profile::non_decreasing_on(std::span<const double> grid) const {
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : grid) {
        const double v = (*this)(t);
        if (v < prev) return false;
        prev = v;
    }
    return true;
}

RegularityProfile gaussian_regularity(const SphericalGaussianTarget& g) {
    RegularityProfile p;
    const double s2 = g.variance;
    p.beta_slc = 1.0 / s2;
    p.alpha = 1.0 / s2;
    p.M = 0.0;
    p.lambda = std::max(p.beta_slc - 1.0, std::max(1.0 - p.alpha, 0.0) / p.alpha);
    p.L = Profile::constant(std::max(s2 - 1.0, 1.0 / s2 - 1.0));
    p.L0 = 1.0;
    return p;
}

Matrix sample_target(const Target& t, std::size_t n, std::uint64_t seed) {
    validate_target(t);
    const int d = target_dim(t);
    Matrix out(n, d);
    if (const auto* g = std::get_if<SphericalGaussianTarget>(&t)) {
        const double sd = std::sqrt(g->variance);
        for (std::size_t i = 0; i < n; ++i) {
            NormalStream ns(seed, RngDomain::target_sampling, static_cast<std::uint32_t>(i));
            auto row = out.row_span(i);
            ns.fill(0, row);
            for (int c = 0; c < d; ++c) row[c] = g->mean[c] + sd * row[c];
        }
        return out;
    }
    const auto& m = std::get<GaussianMixtureTarget>(t);
    std::vector<double> cdf(m.weights.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        acc += m.weights[j];
        cdf[j] = acc;
    }
    cdf.back() = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        NormalStream ns(seed, RngDomain::target_sampling, static_cast<std::uint32_t>(i));
        const double u = ns.uniform(0, 0);
        const std::size_t j =
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        const double sd = std::sqrt(m.component_variances[j]);
        auto row = out.row_span(i);
        ns.fill(1, row);
        for (int c = 0; c < d; ++c) row[c] = m.component_means[j][c] + sd * row[c];
    }
    return out;
}

// ---------------------------------------------------------------------------
// serialization

std::string target_to_json(const Target& t) {
    nlohmann::json j;
    if (const auto* g = std::get_if<SphericalGaussianTarget>(&t)) {
        j["kind"] = "gaussian";
        j["mean"] = g->mean;
        j["variance"] = g->variance;
    } else {
        const auto& m = std::get<GaussianMixtureTarget>(t);
        j["kind"] = "mixture";
        j["weights"] = m.weights;
        j["component_means"] = m.component_means;
        j["component_variances"] = m.component_variances;
    }
    return j.dump();
}

Target target_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed target JSON: ") + e.what());
    }
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "gaussian") {
            SphericalGaussianTarget g;
            g.mean = j.at("mean").get<std::vector<double>>();
            g.variance = j.at("variance").get<double>();
            Target t = g;
            validate_target(t);
            return t;
        }
        if (kind == "mixture") {
            GaussianMixtureTarget m;
            m.weights = j.at("weights").get<std::vector<double>>();
            m.component_means = j.at("component_means").get<std::vector<std::vector<double>>>();
            m.component_variances = j.at("component_variances").get<std::vector<double>>();
            Target t = m;
            validate_target(t);
            return t;
        }
        throw ValidationError("unknown target kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed target JSON: ") + e.what());
    }
}

}  // namespace w2lab
