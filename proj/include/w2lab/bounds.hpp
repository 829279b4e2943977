#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "w2lab/schedule.hpp"
#include "w2lab/target.hpp"

namespace w2lab {

struct QuadResult {
    double value = 0.0;
    bool converged = true;  // successive refinements agreed to 1e-9 relative
};

/// Composite Simpson over the nodes of `grid` restricted to [a,b], each cell
/// split into `refinement` panels; compared against the 2x refinement.
QuadResult quad(const std::function<double(double)>& f, std::span<const double> grid, double a,
                double b, int refinement = 8);

/// Certified upper bound for the integral of nd(s)*ni(s) where nd is
/// non-decreasing and ni non-increasing on [a,b]: per-cell bound
/// (b-a) * nd(right) * ni(left) on the refined grid.
double upper_integral(const std::function<double(double)>& nd,
                      const std::function<double(double)>& ni, std::span<const double> grid,
                      double a, double b, int refinement = 64);

enum class QuadMode {
    simpson,         // accurate value
    certified_upper  // rigorous over-estimate; what domination tests use
};

/// Everything a theorem right-hand side consumes. `eta_*` defaults come from
/// the audit; evaluators re-check them against the schedule and throw
/// HypothesisViolation when the cited condition fails.
struct BoundInputs {
    int d = 1;
    const VarianceSchedule* schedule = nullptr;
    Profile L = Profile::constant(0.0);
    Profile epsilon_score = Profile::constant(0.0);
    double mu_gap = 0.0;
    double trace_sigma = 0.0;
    double sigma_op = 0.0;
    double lambda = 0.0;  // weakly-log-concave + semi-log-convex rate
    double alpha = 0.0;
    double M = 0.0;
    double L0 = 1.0;

    double eta_max_h = 0.0;              // h_i <= eta
    std::optional<double> eta_14;        // h_i <= eta sqrt(1-t_{i+1})
    std::optional<double> eta_15;        // h_i <= eta min{t_i, 1-t_{i+1}}
    std::optional<double> eta_20;        // h_i <= eta min{sqrt t_{i+1}, sqrt(1-t_{i+1})}

    QuadMode quad_mode = QuadMode::simpson;
    int refinement = 8;

    double Lambda() const { return sigma_op > 1.0 ? sigma_op : 1.0; }
    double delta() const { return schedule->delta; }
};

BoundInputs make_bound_inputs(const VarianceSchedule& schedule, const ConditionReport& audit,
                              const SphericalGaussianTarget& target,
                              const std::vector<double>& mu_hat, const Profile& epsilon_score);

/// A bound evaluated to a number. constant_known == false means the cited
/// inequality carries an unnamed universal constant; the value is the
/// bracketed expression with that constant set to 1 and only scaling or
/// monotonicity statements may be asserted against it.
struct BoundValue {
    double value = 0.0;
    bool constant_known = true;
    std::vector<std::pair<std::string, bool>> side_flags;
};

BoundValue thm1_rhs(const BoundInputs& in);
BoundValue thm2_rhs(const BoundInputs& in);
BoundValue thm3_rhs(const BoundInputs& in);
BoundValue cor1_rhs(const BoundInputs& in);
BoundValue cor2_rhs(const BoundInputs& in);
BoundValue thm7_rhs(const BoundInputs& in);
BoundValue thm8_rhs(const BoundInputs& in);
BoundValue prop6_rhs(const BoundInputs& in);
BoundValue early_stopping_rhs(double trace_sigma, int d, double delta);

inline const std::vector<std::string>& bound_ids() {
    static const std::vector<std::string> ids = {"thm1", "thm2", "thm3", "cor1",
                                                 "cor2", "thm7", "thm8", "prop6"};
    return ids;
}

BoundValue eval_bound(const std::string& id, const BoundInputs& in);

/// Smallest C making kl <= base + C * unit (0 when the C-free part already
/// covers it); reported, never asserted, for bounds with unnamed constants.
double smallest_sufficient_constant(double kl, double base_terms, double constant_unit);

}  // namespace w2lab
