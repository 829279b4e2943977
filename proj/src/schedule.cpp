#include "w2lab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "w2lab/errors.hpp"

namespace w2lab {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_beta_range(double b, int i) {
    if (!std::isfinite(b) || b <= 0.0 || b >= 1.0) {
        std::ostringstream os;
        os << "beta[" << i << "] = " << b << " outside (0,1)";
        throw ValidationError(os.str());
    }
}

}  // namespace

double VarianceSchedule::max_h() const {
    double m = 0.0;
    for (int i = 0; i < n_steps(); ++i) m = std::max(m, h(i));
    return m;
}

double VarianceSchedule::max_beta() const { return *std::max_element(betas.begin(), betas.end()); }

double VarianceSchedule::min_beta() const { return *std::min_element(betas.begin(), betas.end()); }

void VarianceSchedule::validate() const {
    const int n = n_steps();
    if (n < 1) throw ValidationError("schedule must have at least one step");
    if (times.size() != betas.size() + 1)
        throw ValidationError("times must hold exactly n_steps + 1 entries");
    if (!(delta >= 0.0 && delta < 1.0)) throw ValidationError("delta outside [0,1)");
    for (int i = 0; i <= n; ++i) {
        if (!std::isfinite(times[i]) || times[i] <= 0.0 || times[i] > 1.0)
            throw ValidationError("times must lie in (0,1]");
        if (i > 0 && times[i] <= times[i - 1])
            throw ValidationError("times must be strictly increasing");
    }
    if (times[n] != 1.0 - delta) throw ValidationError("t_N != 1 - delta");
    for (int i = 0; i < n; ++i) {
        check_beta_range(betas[i], i);
        const double implied = 1.0 - times[i] / times[i + 1];
        if (std::abs(implied - betas[i]) > 1e-12) {
            std::ostringstream os;
            os << "beta/time consistency violated at i=" << i << ": beta=" << betas[i]
               << " but 1 - t_i/t_{i+1} = " << implied;
            throw ValidationError(os.str());
        }
    }
}

VarianceSchedule schedule_from_betas(const std::vector<double>& betas, double delta) {
    if (betas.empty()) throw ValidationError("schedule must have at least one step");
    if (!(delta >= 0.0 && delta < 1.0)) throw ValidationError("delta outside [0,1)");
    const int n = static_cast<int>(betas.size());
    for (int i = 0; i < n; ++i) check_beta_range(betas[i], i);

    VarianceSchedule s;
    s.betas = betas;
    s.delta = delta;
    s.times.assign(n + 1, 0.0);
    s.times[n] = 1.0 - delta;
    // log-domain suffix products; t0 underflows doubles for aggressive schedules
    const double log_end = std::log1p(-delta);
    double acc = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        acc += std::log1p(-betas[i]);
        s.times[i] = std::exp(log_end + acc);
        if (s.times[i] <= 0.0)
            throw ValidationError("time grid underflowed to zero; schedule too aggressive");
    }
    s.validate();
    return s;
}

VarianceSchedule schedule_from_times(const std::vector<double>& times) {
    if (times.size() < 2) throw ValidationError("need at least two time points");
    const int n = static_cast<int>(times.size()) - 1;
    for (int i = 0; i <= n; ++i) {
        if (!std::isfinite(times[i]) || times[i] <= 0.0 || times[i] > 1.0)
            throw ValidationError("times must lie in (0,1]");
        if (i > 0 && times[i] <= times[i - 1])
            throw ValidationError("times must be strictly increasing");
    }
    VarianceSchedule s;
    s.times = times;
    s.delta = 1.0 - times[n];
    s.betas.resize(n);
    for (int i = 0; i < n; ++i) {
        s.betas[i] = 1.0 - times[i] / times[i + 1];
        check_beta_range(s.betas[i], i);
    }
    s.validate();
    return s;
}

VarianceSchedule constant_schedule(int n, double beta0, double delta) {
    if (n < 1) throw ValidationError("n must be >= 1");
    return schedule_from_betas(std::vector<double>(n, beta0), delta);
}

VarianceSchedule geometric_schedule(int n, double c0, double c1, double delta) {
    if (n < 1) throw ValidationError("n must be >= 1");
    if (!(c0 > 0.0) || !(c1 > 0.0)) throw ValidationError("c0 and c1 must be positive");
    std::vector<double> betas(n);
    betas[0] = std::pow(static_cast<double>(n), -c0);
    const double a = c1 * std::log(static_cast<double>(n)) / n;
    for (int i = 1; i < n; ++i) {
        betas[i] = a * std::min(betas[0] * std::pow(1.0 + a, n - i), 1.0);
    }
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(betas[i]) || betas[i] <= 0.0 || betas[i] >= 1.0) {
            std::ostringstream os;
            os << "geometric schedule (n=" << n << ", c0=" << c0 << ", c1=" << c1
               << ") yields beta[" << i << "] = " << betas[i] << " outside (0,1)";
            throw ValidationError(os.str());
        }
    }
    return schedule_from_betas(betas, delta);
}

VarianceSchedule cosine_schedule(int n, double s, double t0) {
    if (n < 1) throw ValidationError("n must be >= 1");
    if (!(s >= 0.0)) throw ValidationError("s must be >= 0");
    const double eta_n = kPi / (2.0 * n * (1.0 + s));
    std::vector<double> times(n + 1);
    for (int i = 1; i <= n; ++i) {
        const double si = std::sin(i * eta_n);
        times[i] = si * si;
    }
    if (t0 < 0.0) t0 = times[1] / 4.0;
    if (!(t0 > 0.0 && t0 < times[1])) {
        std::ostringstream os;
        os << "t0 = " << t0 << " outside (0, t1) with t1 = " << times[1];
        throw ValidationError(os.str());
    }
    times[0] = t0;
    VarianceSchedule sched = schedule_from_times(times);
    sched.cosine = VarianceSchedule::CosineInfo{s, eta_n};
    return sched;
}

VarianceSchedule harmonic_schedule(int n) {
    if (n < 1) throw ValidationError("n must be >= 1");
    std::vector<double> times(n + 1);
    for (int i = 0; i <= n; ++i) times[i] = static_cast<double>(i + 1) / (n + 1);
    return schedule_from_times(times);
}

double ConditionReport::min_stepsum_margin() const {
    return *std::min_element(stepsum_margins.begin(), stepsum_margins.end());
}

ConditionReport audit_schedule(const VarianceSchedule& s) {
    const int n = s.n_steps();
    ConditionReport r;
    r.max_beta = s.max_beta();
    r.min_beta = s.min_beta();
    r.max_h = s.max_h();

    double m14 = 0.0, m15 = 0.0, m20 = 0.0;
    bool feasible = s.delta > 0.0;  // 1 - t_N = 0 kills all three at i = N-1
    for (int i = 0; i < n; ++i) {
        const double h = s.h(i);
        const double rem = 1.0 - s.times[i + 1];
        if (rem <= 0.0) {
            feasible = false;
            break;
        }
        m14 = std::max(m14, h / std::sqrt(rem));
        m15 = std::max(m15, h / std::min(s.times[i], rem));
        m20 = std::max(m20, h / std::min(std::sqrt(s.times[i + 1]), std::sqrt(rem)));
    }
    if (feasible) {
        r.eta_14 = m14;
        r.eta_15 = m15;
        r.eta_20 = m20;
        r.cond20_t0_ok = s.t0() >= m20 * m20 / 256.0;
    }

    r.stepsum_margins.resize(n);
    double suffix = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        suffix += s.h(i) / s.times[i];
        r.stepsum_margins[i] = (128.0 + std::log(1.0 / s.times[i])) - suffix;
    }

    if (s.cosine) {
        ConditionReport::Prop5 p;
        p.s = s.cosine->s;
        p.eta_n = s.cosine->eta_n;
        p.a_applicable = s.times[1] <= 4.0 * s.t0();
        p.a_holds = p.a_applicable && s.t0() >= p.eta_n * p.eta_n / 16.0 && r.max_beta <= 0.75;
        p.b_holds = true;
        p.c_applicable = p.s >= 1.0 / (2.0 * n);
        p.c_holds = p.c_applicable;
        for (int i = 0; i < n; ++i) {
            const double h = s.h(i);
            if (h > 2.0 * p.eta_n * std::sqrt(s.times[i + 1])) p.b_holds = false;
            if (p.c_applicable && h > 4.0 * p.eta_n * std::sqrt(1.0 - s.times[i + 1]))
                p.c_holds = false;
        }
        r.prop5 = p;
    }
    return r;
}

// ---------------------------------------------------------------------------
// serialization

std::string VarianceSchedule::to_json() const {
    nlohmann::json j;
    j["betas"] = betas;
    j["times"] = times;
    j["delta"] = delta;
    return j.dump();
}

VarianceSchedule VarianceSchedule::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed schedule JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("betas") || !j.contains("times") || !j.contains("delta"))
        throw ValidationError("schedule JSON must carry betas, times and delta");
    VarianceSchedule s;
    try {
        s.betas = j["betas"].get<std::vector<double>>();
        s.times = j["times"].get<std::vector<double>>();
        s.delta = j["delta"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed schedule JSON: ") + e.what());
    }
    s.validate();
    return s;
}

namespace {

nlohmann::json optional_to_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

}  // namespace

std::string ConditionReport::to_json() const {
    nlohmann::json j;
    j["max_beta"] = max_beta;
    j["min_beta"] = min_beta;
    j["max_h"] = max_h;
    j["eta_14"] = optional_to_json(eta_14);
    j["eta_15"] = optional_to_json(eta_15);
    j["eta_20"] = optional_to_json(eta_20);
    j["cond20_t0_ok"] = cond20_t0_ok;
    j["stepsum_margins"] = stepsum_margins;
    j["min_stepsum_margin"] = min_stepsum_margin();
    if (prop5) {
        nlohmann::json p;
        p["s"] = prop5->s;
        p["eta_n"] = prop5->eta_n;
        p["a_applicable"] = prop5->a_applicable;
        p["a_holds"] = prop5->a_holds;
        p["b_holds"] = prop5->b_holds;
        p["c_applicable"] = prop5->c_applicable;
        p["c_holds"] = prop5->c_holds;
        j["prop5"] = p;
    }
    return j.dump();
}

std::string ConditionReport::to_csv(const std::string& meta_comment) const {
    std::ostringstream os;
    os.precision(17);
    os << "# " << meta_comment << "\r\n";
    os << "condition,value,feasible,detail\r\n";
    os << "max_beta," << max_beta << ",true,\r\n";
    os << "min_beta," << min_beta << ",true,\r\n";
    os << "max_h," << max_h << ",true,\r\n";
    auto eta_row = [&os](const char* name, const std::optional<double>& v, const std::string& detail) {
        os << name << ",";
        if (v)
            os << *v << ",true," << detail;
        else
            os << ",false,1 - t_N = 0";
        os << "\r\n";
    };
    eta_row("eta_14", eta_14, "");
    eta_row("eta_15", eta_15, "");
    eta_row("eta_20", eta_20, cond20_t0_ok ? "t0 >= eta^2/256" : "t0 < eta^2/256");
    os << "stepsum_margin_min," << min_stepsum_margin() << ","
       << (min_stepsum_margin() >= 0.0 ? "true" : "false") << ",min over i of 128+log(1/t_i)-sum\r\n";
    if (prop5) {
        os << "prop5_a," << (prop5->a_holds ? 1 : 0) << ","
           << (prop5->a_applicable ? "true" : "false") << ",t1<=4t0 case\r\n";
        os << "prop5_b," << (prop5->b_holds ? 1 : 0) << ",true,\r\n";
        os << "prop5_c," << (prop5->c_holds ? 1 : 0) << ","
           << (prop5->c_applicable ? "true" : "false") << ",s>=1/(2N) case\r\n";
    }
    return os.str();
}

}  // namespace w2lab
