#pragma once

#include <optional>
#include <string>
#include <vector>

namespace w2lab {

/// A DDPM variance schedule together with its induced time grid.
///
/// The grid satisfies t_i = (1-delta) * prod_{j>=i} (1-beta_j), equivalently
/// beta_i = 1 - t_i/t_{i+1}, with t_N = 1 - delta. Effective step sizes are
/// h_i = t_{i+1} - t_i = t_{i+1} * beta_i.
struct VarianceSchedule {
    std::vector<double> betas;  // N values in (0,1)
    std::vector<double> times;  // N+1 values, strictly increasing in (0,1]
    double delta = 0.0;         // early-stopping offset, t_N = 1 - delta

    struct CosineInfo {
        double s = 0.0;
        double eta_n = 0.0;  // pi / (2N(1+s))
    };
    // Set by cosine_schedule(); carries what the cosine-specific audit needs.
    std::optional<CosineInfo> cosine;

    int n_steps() const { return static_cast<int>(betas.size()); }
    double t0() const { return times.front(); }
    double t_end() const { return times.back(); }
    double h(int i) const { return times[i + 1] - times[i]; }
    double max_h() const;
    double max_beta() const;
    double min_beta() const;

    /// Checks every structural invariant; throws ValidationError naming the
    /// first violated one.
    void validate() const;

    /// {"betas":[...], "times":[...], "delta":x}
    std::string to_json() const;
    static VarianceSchedule from_json(const std::string& text);
};

VarianceSchedule schedule_from_betas(const std::vector<double>& betas, double delta);
VarianceSchedule schedule_from_times(const std::vector<double>& times);
VarianceSchedule constant_schedule(int n, double beta0, double delta);

/// beta_0 = N^-c0, beta_i = (c1 log N / N) * min{beta_0 (1 + c1 log N / N)^(N-i), 1}.
/// Rejects parameter combinations that push any beta_i out of (0,1).
VarianceSchedule geometric_schedule(int n, double c0, double c1, double delta);

/// t_i = sin^2(i * pi/(2N(1+s))) for i>=1; t0 defaults to t1/4 when negative.
/// The t1/4 default makes the small-t0 audit checks tight; any t0 in (0,t1)
/// is accepted.
VarianceSchedule cosine_schedule(int n, double s, double t0 = -1.0);

/// t_i = (i+1)/(N+1), beta_i = 1/(i+2), delta = 0.
VarianceSchedule harmonic_schedule(int n);

/// Step-size conditions audited against a schedule. Each eta_* is the exact
/// maximum of the defining ratio over i (the smallest feasible constant), or
/// absent when the condition cannot hold for any eta (division by zero at the
/// terminal step when delta = 0).
struct ConditionReport {
    double max_beta = 0.0;
    double min_beta = 0.0;
    double max_h = 0.0;

    std::optional<double> eta_14;  // h_i <= eta * sqrt(1 - t_{i+1})
    std::optional<double> eta_15;  // h_i <= eta * min{t_i, 1 - t_{i+1}}
    std::optional<double> eta_20;  // h_i <= eta * min{sqrt(t_{i+1}), sqrt(1 - t_{i+1})}
    bool cond20_t0_ok = false;     // t0 >= eta_20^2 / 256

    // (128 + log(1/t_i)) - sum_{j>=i} h_j/t_j, one entry per i
    std::vector<double> stepsum_margins;

    struct Prop5 {
        double s = 0.0;
        double eta_n = 0.0;
        bool a_applicable = false;  // t1 <= 4 t0
        bool a_holds = false;       // t0 >= eta_n^2/16 and max beta <= 3/4
        bool b_holds = false;       // h_i <= 2 eta_n sqrt(t_{i+1})
        bool c_applicable = false;  // s >= 1/(2N)
        bool c_holds = false;       // h_i <= 4 eta_n sqrt(1 - t_{i+1})
    };
    std::optional<Prop5> prop5;  // present only for cosine-built schedules

    double min_stepsum_margin() const;
    bool any_infeasible() const { return !eta_14 || !eta_15 || !eta_20 || !cond20_t0_ok; }

    std::string to_json() const;
    /// One CSV row per audited condition.
    std::string to_csv(const std::string& meta_comment) const;
};

/// Always completes; infeasibility is reported, never thrown.
ConditionReport audit_schedule(const VarianceSchedule& s);

}  // namespace w2lab
