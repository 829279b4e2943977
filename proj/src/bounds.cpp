#include "w2lab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "w2lab/errors.hpp"

namespace w2lab {

namespace {

std::vector<double> cells_in(std::span<const double> grid, double a, double b) {
    std::vector<double> nodes;
    nodes.push_back(a);
    for (double t : grid)
        if (t > a && t < b) nodes.push_back(t);
    nodes.push_back(b);
    return nodes;
}

double simpson_once(const std::function<double(double)>& f, const std::vector<double>& nodes,
                    int panels) {
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < nodes.size(); ++c) {
        const double lo = nodes[c], hi = nodes[c + 1];
        const double h = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            const double x0 = lo + p * h;
            const double x1 = x0 + 0.5 * h;
            const double x2 = (p == panels - 1) ? hi : x0 + h;
            const double f0 = f(x0), f1 = f(x1), f2 = f(x2);
            if (!std::isfinite(f0) || !std::isfinite(f1) || !std::isfinite(f2)) {
                std::ostringstream os;
                os << "non-finite integrand near s = "
                   << (!std::isfinite(f0) ? x0 : (!std::isfinite(f1) ? x1 : x2));
                throw NumericError(os.str());
            }
            total += (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2);
        }
    }
    return total;
}

}  // namespace

QuadResult quad(const std::function<double(double)>& f, std::span<const double> grid, double a,
                double b, int refinement) {
    if (!(a < b)) {
        if (a == b) return {0.0, true};
        throw ValidationError("quad requires a < b");
    }
    if (refinement < 1) throw ValidationError("refinement must be >= 1");
    const std::vector<double> nodes = cells_in(grid, a, b);
    const double coarse = simpson_once(f, nodes, refinement);
    const double fine = simpson_once(f, nodes, 2 * refinement);
    const double scale = std::max({std::abs(coarse), std::abs(fine), 1e-300});
    QuadResult r;
    r.value = fine;
    r.converged = std::abs(fine - coarse) / scale < 1e-9 || std::abs(fine - coarse) < 1e-15;
    return r;
}

double upper_integral(const std::function<double(double)>& nd,
                      const std::function<double(double)>& ni, std::span<const double> grid,
                      double a, double b, int refinement) {
    if (!(a < b)) return 0.0;
    const std::vector<double> nodes = cells_in(grid, a, b);
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < nodes.size(); ++c) {
        const double lo = nodes[c], hi = nodes[c + 1];
        const double h = (hi - lo) / refinement;
        for (int p = 0; p < refinement; ++p) {
            const double x0 = lo + p * h;
            const double x1 = (p == refinement - 1) ? hi : x0 + h;
            const double v = nd(x1) * ni(x0);
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "non-finite integrand near s = " << x0;
                throw NumericError(os.str());
            }
            total += (x1 - x0) * v;
        }
    }
    return total;
}

namespace {

struct Integrals {
    double int_L;          // \int_{t0}^{tN} L
    double int_L2;         // \int_{t0}^{tN} L^2
    double int_L2_head;    // \int_0^{t0} L^2
    double int_eps_sqrt;   // \int_{t0}^{tN} eps(s)/sqrt(s)
    double int_eps_32;     // \int_{t0}^{tN} eps(s)/s^{3/2}
    double int_eps2_over;  // \int_{t0}^{tN} eps(s)^2/s
};

Integrals integrate_all(const BoundInputs& in) {
    const auto& s = *in.schedule;
    const double a = s.t0(), b = s.t_end();
    const Profile L = in.L;
    const Profile eps = in.epsilon_score;
    auto Lf = [L](double t) { return L(t); };
    auto L2f = [L](double t) { const double v = L(t); return v * v; };
    auto eps_f = [eps](double t) { return eps(t); };
    auto eps2_f = [eps](double t) { const double v = eps(t); return v * v; };

    Integrals out{};
    const std::vector<double> head_grid = {0.0, a};
    if (in.quad_mode == QuadMode::certified_upper) {
        auto one = [](double) { return 1.0; };
        auto inv_sqrt = [](double t) { return 1.0 / std::sqrt(t); };
        auto inv_32 = [](double t) { return 1.0 / (t * std::sqrt(t)); };
        auto inv = [](double t) { return 1.0 / t; };
        const int r = std::max(in.refinement, 64);
        out.int_L = upper_integral(Lf, one, s.times, a, b, r);
        out.int_L2 = upper_integral(L2f, one, s.times, a, b, r);
        out.int_L2_head = upper_integral(L2f, one, head_grid, 0.0, a, r);
        out.int_eps_sqrt = upper_integral(eps_f, inv_sqrt, s.times, a, b, r);
        out.int_eps_32 = upper_integral(eps_f, inv_32, s.times, a, b, r);
        out.int_eps2_over = upper_integral(eps2_f, inv, s.times, a, b, r);
        return out;
    }
    auto q = [&](const std::function<double(double)>& f, std::span<const double> grid, double lo,
                 double hi) {
        QuadResult r = quad(f, grid, lo, hi, in.refinement);
        if (!r.converged) {
            QuadResult r2 = quad(f, grid, lo, hi, 8 * in.refinement);
            if (!r2.converged) throw NumericError("quadrature failed to converge");
            return r2.value;
        }
        return r.value;
    };
    out.int_L = q(Lf, s.times, a, b);
    out.int_L2 = q(L2f, s.times, a, b);
    out.int_L2_head = q(L2f, head_grid, 0.0, a);
    out.int_eps_sqrt = q([eps](double t) { return eps(t) / std::sqrt(t); }, s.times, a, b);
    out.int_eps_32 = q([eps](double t) { return eps(t) / (t * std::sqrt(t)); }, s.times, a, b);
    out.int_eps2_over = q([eps](double t) { const double v = eps(t); return v * v / t; },
                          s.times, a, b);
    return out;
}

void require(bool ok, const std::string& condition) {
    if (!ok) throw HypothesisViolation(condition);
}

void require_schedule(const BoundInputs& in) {
    if (in.schedule == nullptr) throw ValidationError("bound inputs carry no schedule");
    if (in.d < 1) throw ValidationError("d must be >= 1");
}

void check_max_beta(const BoundInputs& in) {
    require(in.schedule->max_beta() <= 0.75 + 1e-15, "max beta_i <= 3/4");
}

// the supplied eta must satisfy the defining per-step ratios
void check_eta_max_h(const BoundInputs& in) {
    require(in.eta_max_h >= in.schedule->max_h() - 1e-15, "h_i <= eta for all i");
}

double checked_eta_14(const BoundInputs& in) {
    require(in.eta_14.has_value(), "h_i <= eta sqrt(1 - t_{i+1}) (infeasible: 1 - t_N = 0)");
    const auto& s = *in.schedule;
    for (int i = 0; i < s.n_steps(); ++i)
        require(s.h(i) <= *in.eta_14 * std::sqrt(1.0 - s.times[i + 1]) + 1e-15,
                "h_i <= eta sqrt(1 - t_{i+1})");
    return *in.eta_14;
}

double checked_eta_20(const BoundInputs& in) {
    require(in.eta_20.has_value(),
            "h_i <= eta min{sqrt t_{i+1}, sqrt(1 - t_{i+1})} (infeasible: 1 - t_N = 0)");
    const auto& s = *in.schedule;
    const double eta = *in.eta_20;
    for (int i = 0; i < s.n_steps(); ++i) {
        const double cap = eta * std::min(std::sqrt(s.times[i + 1]), std::sqrt(1.0 - s.times[i + 1]));
        require(s.h(i) <= cap + 1e-15, "h_i <= eta min{sqrt t_{i+1}, sqrt(1 - t_{i+1})}");
    }
    require(s.t0() >= eta * eta / 256.0, "t0 >= eta^2 / 256");
    return eta;
}

double checked_eta_15(const BoundInputs& in) {
    require(in.eta_15.has_value(),
            "h_i <= eta min{t_i, 1 - t_{i+1}} (infeasible: 1 - t_N = 0)");
    const auto& s = *in.schedule;
    for (int i = 0; i < s.n_steps(); ++i)
        require(s.h(i) <= *in.eta_15 * std::min(s.times[i], 1.0 - s.times[i + 1]) + 1e-15,
                "h_i <= eta min{t_i, 1 - t_{i+1}}");
    return *in.eta_15;
}

double log_inv_delta(const BoundInputs& in) {
    require(in.delta() > 0.0, "log(1/delta) requires delta > 0");
    return std::log(1.0 / in.delta());
}

double es_term(const BoundInputs& in) {
    return std::sqrt(in.trace_sigma * in.delta() * in.delta() + in.d * in.delta());
}

}  // namespace

BoundInputs make_bound_inputs(const VarianceSchedule& schedule, const ConditionReport& audit,
                              const SphericalGaussianTarget& target,
                              const std::vector<double>& mu_hat, const Profile& epsilon_score) {
    const RegularityProfile reg = gaussian_regularity(target);
    BoundInputs in;
    in.d = target.dim();
    in.schedule = &schedule;
    in.L = reg.L;
    in.epsilon_score = epsilon_score;
    std::vector<double> gap(target.mean.size());
    for (std::size_t c = 0; c < gap.size(); ++c) gap[c] = target.mean[c] - mu_hat[c];
    in.mu_gap = norm(gap);
    in.trace_sigma = target.trace_sigma();
    in.sigma_op = target.sigma_op();
    in.lambda = reg.lambda;
    in.alpha = reg.alpha;
    in.M = reg.M;
    in.L0 = reg.L0;
    in.eta_max_h = audit.max_h;
    in.eta_14 = audit.eta_14;
    in.eta_15 = audit.eta_15;
    in.eta_20 = audit.eta_20;
    return in;
}

BoundValue thm1_rhs(const BoundInputs& in) {
    require_schedule(in);
    require(in.delta() == 0.0, "delta = 0");
    check_max_beta(in);
    check_eta_max_h(in);
    const Integrals I = integrate_all(in);
    const double sd = std::sqrt(static_cast<double>(in.d));
    const double val =
        std::exp(I.int_L) * (in.schedule->t0() * (in.mu_gap + std::sqrt(in.d * I.int_L2_head)) +
                             sd * in.eta_max_h * std::sqrt(I.int_L2) + 2.0 * I.int_eps_sqrt);
    return {val, true, {}};
}

BoundValue thm2_rhs(const BoundInputs& in) {
    require_schedule(in);
    check_max_beta(in);
    const double eta = checked_eta_14(in);
    require(std::max(in.schedule->t0(), in.delta()) <= 0.5, "t0 v delta <= 1/2");
    const double ld = log_inv_delta(in);
    const Integrals I = integrate_all(in);
    const double t0 = in.schedule->t0();
    const double sd = std::sqrt(static_cast<double>(in.d));
    const double init =
        t0 * in.mu_gap +
        sd * t0 * std::max(2.0 * std::sqrt(t0), std::sqrt(I.int_L2_head));
    const double disc = std::sqrt(in.d * ld + std::max(in.trace_sigma, double(in.d))) * eta;
    const double val = std::sqrt(2.0) * std::exp(I.int_L) *
                           (init + disc + 2.0 * I.int_eps_sqrt) +
                       es_term(in);
    return {val, true, {}};
}

BoundValue thm3_rhs(const BoundInputs& in) {
    require_schedule(in);
    check_max_beta(in);
    const double eta = checked_eta_14(in);
    require(std::max(in.schedule->t0(), in.delta()) <= 0.5, "t0 v delta <= 1/2");
    const double ld = log_inv_delta(in);
    const Integrals I = integrate_all(in);
    const double t0 = in.schedule->t0();
    const double val =
        std::sqrt(2.0) * std::exp(I.int_L) *
            (t0 * (in.mu_gap + std::sqrt(in.trace_sigma + in.d)) +
             std::sqrt(in.d * ld + std::max(in.trace_sigma, double(in.d))) * eta +
             2.0 * I.int_eps_sqrt) +
        es_term(in);
    return {val, true, {}};
}

BoundValue cor1_rhs(const BoundInputs& in) {
    require_schedule(in);
    require(in.delta() == 0.0, "delta = 0");
    check_max_beta(in);
    check_eta_max_h(in);
    const Integrals I = integrate_all(in);
    const double t0 = in.schedule->t0();
    const double sd = std::sqrt(static_cast<double>(in.d));
    const double val = std::exp(in.lambda) *
                       (t0 * (in.mu_gap + in.lambda * std::sqrt(in.d * t0)) +
                        in.lambda * sd * in.eta_max_h + 2.0 * I.int_eps_sqrt);
    return {val, true, {}};
}

BoundValue cor2_rhs(const BoundInputs& in) {
    require_schedule(in);
    check_max_beta(in);
    const double eta = checked_eta_14(in);
    require(in.schedule->t0() <= 0.5, "t0 <= 1/2");
    require(in.delta() <= 0.5, "delta <= 1/2");
    require(in.alpha > 0.0, "alpha > 0");
    const double ld = log_inv_delta(in);
    const Integrals I = integrate_all(in);
    const double lam =
        std::max(1.0 - in.alpha, 0.0) / in.alpha + 2.0 * in.M / std::min(in.alpha * in.alpha, 1.0);
    const double t0 = in.schedule->t0();
    const double sd = std::sqrt(static_cast<double>(in.d));
    const double val =
        std::sqrt(2.0) * std::exp(lam) *
            (t0 * in.mu_gap + std::max(2.0, lam) * sd * t0 * std::sqrt(t0) +
             std::sqrt(in.d * ld + std::max(in.trace_sigma, double(in.d))) * eta +
             2.0 * I.int_eps_sqrt) +
        es_term(in);
    return {val, true, {}};
}

BoundValue thm7_rhs(const BoundInputs& in) {
    require_schedule(in);
    check_max_beta(in);
    const double eta = checked_eta_20(in);
    require(std::max(in.schedule->t0(), in.delta()) <= 0.5, "t0 v delta <= 1/2");
    const double ld = log_inv_delta(in);
    const Integrals I = integrate_all(in);
    const double t0 = in.schedule->t0();
    const double lam = in.Lambda();
    const double val = in.mu_gap + lam * std::sqrt(in.d * t0) +
                       (lam * std::sqrt(in.d * std::log(1.0 / t0)) + std::sqrt(in.d * ld)) * eta +
                       I.int_eps_32 + es_term(in);
    return {val, false, {}};
}

BoundValue thm8_rhs(const BoundInputs& in) {
    require_schedule(in);
    check_max_beta(in);
    const double eta = checked_eta_20(in);
    require(std::max(in.schedule->t0(), in.delta()) <= 0.5, "t0 v delta <= 1/2");
    const double ld = log_inv_delta(in);
    const Integrals I = integrate_all(in);
    const double t0 = in.schedule->t0();
    const double lam = in.Lambda();
    const double sd = std::sqrt(static_cast<double>(in.d));
    const double val = std::sqrt(lam * t0) * in.mu_gap +
                       std::pow(lam, -0.25) * std::pow(t0, 0.25) * in.mu_gap * in.mu_gap +
                       std::pow(lam, 1.5) * sd * t0 +
                       (lam * std::sqrt(in.d * std::log(1.0 / t0)) + std::sqrt(in.d * ld)) * eta +
                       4.0 * I.int_eps_32 + es_term(in);
    BoundValue out{val, false, {}};
    const double logd = std::log(static_cast<double>(in.d) + 1.0);
    out.side_flags.emplace_back("t0 <= 1/(Lambda d^2)", t0 <= 1.0 / (lam * in.d * in.d));
    out.side_flags.emplace_back("sqrt(Lambda d log(1/t0)) eta <= 1",
                                std::sqrt(lam * in.d * std::log(1.0 / t0)) * eta <= 1.0);
    out.side_flags.emplace_back("t0 <= 1/(Lambda log^4(d+1)) [c=1]",
                                t0 <= 1.0 / (lam * std::pow(logd, 4.0)));
    return out;
}

BoundValue prop6_rhs(const BoundInputs& in) {
    require_schedule(in);
    const double eta = checked_eta_15(in);
    require(eta < 1.0 / 6.0, "eta < 1/6");
    require(std::max(in.schedule->t0(), in.delta()) <= 0.5, "t0 v delta <= 1/2");
    require(in.L0 >= 1.0, "L0 >= 1");
    require(in.delta() > 0.0, "log(1/(t0 delta)) requires delta > 0");
    const Integrals I = integrate_all(in);
    const double t0 = in.schedule->t0();
    const double val = 0.5 * t0 * (in.mu_gap * in.mu_gap + in.trace_sigma) +
                       2.0 * t0 * t0 * in.d +
                       in.L0 * in.L0 * in.d * eta * eta * std::log(1.0 / (t0 * in.delta())) +
                       2.0 * I.int_eps2_over;
    return {val, false, {}};
}

BoundValue early_stopping_rhs(double trace_sigma, int d, double delta) {
    if (delta < 0.0 || trace_sigma < 0.0 || d < 1)
        throw ValidationError("early stopping bound needs delta >= 0, trace >= 0, d >= 1");
    return {std::sqrt(trace_sigma * delta * delta + d * delta), true, {}};
}

BoundValue eval_bound(const std::string& id, const BoundInputs& in) {
    if (id == "thm1") return thm1_rhs(in);
    if (id == "thm2") return thm2_rhs(in);
    if (id == "thm3") return thm3_rhs(in);
    if (id == "cor1") return cor1_rhs(in);
    if (id == "cor2") return cor2_rhs(in);
    if (id == "thm7") return thm7_rhs(in);
    if (id == "thm8") return thm8_rhs(in);
    if (id == "prop6") return prop6_rhs(in);
    throw ValidationError("unknown bound id: " + id);
}

double smallest_sufficient_constant(double kl, double base_terms, double constant_unit) {
    if (kl <= base_terms) return 0.0;
    if (!(constant_unit > 0.0)) return std::numeric_limits<double>::infinity();
    return (kl - base_terms) / constant_unit;
}

}  // namespace w2lab
