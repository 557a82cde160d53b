#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace nfb {

// Longitudinal statistics for repeated-measures study data: within-subject
// CV with its SE approximation, random-intercept REML ICC, within/between
// correlations with Fisher z, phase-slope regression with Newey-West robust
// variance, and a running-mean tricube lowess smoother.

struct StatRecord {
    std::string participant;
    int session = 0;  // per-participant session index, defines time order
    double time_weeks = 0.0;
    int phase = 0;  // 0 baseline, 1 intervention
    std::string measure;
    double value = 0.0;
    bool follow_up = false;  // final session, held out of slope fits
};

struct LongitudinalDataset {
    std::vector<StatRecord> records;
    // The first baseline point per participant is an acclimation artifact and
    // the follow-up point postdates the intervention; both are dropped from
    // analyses when these flags are on.
    bool exclude_first_baseline = true;
    bool exclude_follow_up = true;

    // (participant, measure, session) unique; time non-decreasing in session
    // order within a participant.
    void validate() const {
        std::set<std::tuple<std::string, std::string, int>> seen;
        for (const StatRecord& rec : records)
            if (!seen.insert({rec.participant, rec.measure, rec.session}).second)
                throw std::invalid_argument(
                    "dataset: duplicate (participant, measure, session): " + rec.participant +
                    "/" + rec.measure + "/" + std::to_string(rec.session));
        std::map<std::string, std::vector<std::pair<int, double>>> order;
        for (const StatRecord& rec : records)
            order[rec.participant].push_back({rec.session, rec.time_weeks});
        for (auto& [participant, sessions] : order) {
            std::sort(sessions.begin(), sessions.end());
            for (std::size_t i = 1; i < sessions.size(); ++i)
                if (sessions[i].second < sessions[i - 1].second)
                    throw std::invalid_argument("dataset: time decreases within participant " +
                                                participant);
        }
    }

    // Records for one measure with the exclusion flags applied, sorted by
    // (participant, session).
    std::vector<StatRecord> filtered(const std::string& measure) const {
        std::map<std::string, int> first_baseline;
        for (const StatRecord& rec : records)
            if (rec.measure == measure && rec.phase == 0) {
                auto it = first_baseline.find(rec.participant);
                if (it == first_baseline.end() || rec.session < it->second)
                    first_baseline[rec.participant] = rec.session;
            }
        std::vector<StatRecord> out;
        for (const StatRecord& rec : records) {
            if (rec.measure != measure) continue;
            if (exclude_follow_up && rec.follow_up) continue;
            if (exclude_first_baseline && rec.phase == 0 &&
                first_baseline.at(rec.participant) == rec.session)
                continue;
            out.push_back(rec);
        }
        std::sort(out.begin(), out.end(), [](const StatRecord& a, const StatRecord& b) {
            return std::tie(a.participant, a.session) < std::tie(b.participant, b.session);
        });
        return out;
    }

    std::vector<std::string> measures() const {
        std::set<std::string> names;
        for (const StatRecord& rec : records) names.insert(rec.measure);
        return {names.begin(), names.end()};
    }

    std::vector<std::string> participants() const {
        std::set<std::string> names;
        for (const StatRecord& rec : records) names.insert(rec.participant);
        return {names.begin(), names.end()};
    }
};

inline std::string stats_csv(const LongitudinalDataset& data) {
    std::ostringstream out;
    out << std::setprecision(17);  // exact double round trip
    out << "participant,session,time_weeks,phase,measure,value,follow_up\n";
    for (const StatRecord& rec : data.records)
        out << rec.participant << ',' << rec.session << ',' << rec.time_weeks << ','
            << rec.phase << ',' << rec.measure << ',' << rec.value << ','
            << (rec.follow_up ? 1 : 0) << '\n';
    return out.str();
}

// Columns: participant,session,time_weeks,phase,measure,value[,follow_up].
// No quoting; field values must not contain commas.
inline LongitudinalDataset load_stats_csv(std::istream& in) {
    LongitudinalDataset data;
    std::string line;
    if (!std::getline(in, line) || line.rfind("participant,", 0) != 0)
        throw std::invalid_argument("stats csv: missing header row");
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 6 && fields.size() != 7)
            throw std::invalid_argument("stats csv: bad column count at line " +
                                        std::to_string(line_no));
        try {
            StatRecord rec;
            rec.participant = fields[0];
            rec.session = std::stoi(fields[1]);
            rec.time_weeks = std::stod(fields[2]);
            rec.phase = std::stoi(fields[3]);
            rec.measure = fields[4];
            rec.value = std::stod(fields[5]);
            rec.follow_up = fields.size() == 7 && std::stoi(fields[6]) != 0;
            data.records.push_back(rec);
        } catch (const std::exception&) {
            throw std::invalid_argument("stats csv: malformed value at line " +
                                        std::to_string(line_no));
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// Within-subject coefficient of variation

struct CvResult {
    double cv = 0.0;    // percent
    double se = 0.0;    // percent
    double df = 0.0;    // effective degrees of freedom
    int n = 0;          // participants
    double m = 0.0;     // average sessions per participant
    double r = 0.0;     // average longitudinal correlation used for df
    double rmse = 0.0;  // within-subject SD from the absorbing regression
    double grand_mean = 0.0;
};

// Absorbing regression: subtract participant means, RMSE = sqrt(SSR/(N-n)),
// cv = RMSE / grand mean * 100. Population-level estimate, not an average of
// per-participant CVs.
inline CvResult within_subject_cv(const std::vector<std::vector<double>>& groups) {
    int total = 0, n = 0;
    double grand_sum = 0.0, ssr = 0.0;
    for (const std::vector<double>& values : groups) {
        if (values.empty()) continue;
        ++n;
        total += static_cast<int>(values.size());
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        for (double v : values) {
            grand_sum += v;
            ssr += (v - mean) * (v - mean);
        }
    }
    if (total - n < 1)
        throw std::invalid_argument("within_subject_cv: need >= 2 sessions for >= 1 participant");
    double grand_mean = grand_sum / total;
    if (grand_mean == 0.0)
        throw std::domain_error("within_subject_cv: grand mean is zero, cv undefined");
    CvResult out;
    out.n = n;
    out.m = static_cast<double>(total) / n;
    out.rmse = std::sqrt(ssr / (total - n));
    out.grand_mean = grand_mean;
    out.cv = out.rmse / std::abs(grand_mean) * 100.0;
    return out;
}

inline double cv_effective_df(double n, double m, double r) {
    if (n < 1.0 || m < 1.0)
        throw std::invalid_argument("cv_effective_df: n and m must be >= 1");
    if (!(r >= 0.0 && r < 1.0))
        throw std::invalid_argument("cv_effective_df: r must lie in [0, 1)");
    double df = n * m / (1.0 + (m - 1.0) * r);
    if (df <= 0.0) throw std::invalid_argument("cv_effective_df: nonpositive df");
    return df;
}

inline double cv_standard_error(double cv, double n, double m, double r) {
    return cv / std::sqrt(2.0 * cv_effective_df(n, m, r));
}

// Pooled lag-1 autocorrelation of participant-demeaned values, the default r
// for the CV standard error when none is supplied. Clamped to [0, 0.99].
inline double lag1_autocorrelation(const std::vector<std::vector<double>>& groups) {
    std::vector<double> head, tail;
    for (const std::vector<double>& values : groups) {
        if (values.size() < 2) continue;
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            head.push_back(values[i] - mean);
            tail.push_back(values[i + 1] - mean);
        }
    }
    if (head.size() < 2) return 0.0;
    double mh = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < head.size(); ++i) {
        mh += head[i];
        mt += tail[i];
    }
    mh /= static_cast<double>(head.size());
    mt /= static_cast<double>(tail.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < head.size(); ++i) {
        sxy += (head[i] - mh) * (tail[i] - mt);
        sxx += (head[i] - mh) * (head[i] - mh);
        syy += (tail[i] - mt) * (tail[i] - mt);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), 0.0, 0.99);
}

// ---------------------------------------------------------------------------
// Random-intercept REML ICC

struct GroupSeries {
    std::vector<double> times;
    std::vector<double> values;
};

struct IccResult {
    double icc = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    double sigma2_u = 0.0;  // between-participant variance
    double sigma2_e = 0.0;  // residual variance
    double beta_intercept = 0.0;
    double beta_time = 0.0;
    double reml_loglik = 0.0;
    bool boundary = false;  // variance-ratio estimate pinned at a search bound
    bool converged = true;
    std::string diagnostic;
};

namespace detail {

struct RemlEval {
    double loglik = -std::numeric_limits<double>::infinity();
    double sigma2 = 0.0;
    Eigen::Vector2d beta = Eigen::Vector2d::Zero();
};

// Profiled REML log-likelihood for y = b0 + b1 t + u_group + eps at fixed
// variance ratio rho = sigma2_u / sigma2_e. Block inverses are closed-form:
// V_i^{-1} = I - rho/(1 + rho m_i) J, log|V_i| = log(1 + rho m_i). Constants
// are kept so an independent dense-matrix evaluation matches exactly.
inline RemlEval reml_profile(const std::vector<GroupSeries>& groups, double rho) {
    RemlEval eval;
    int total = 0;
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    double logdet_v = 0.0;
    for (const GroupSeries& g : groups) {
        const int m = static_cast<int>(g.values.size());
        total += m;
        Eigen::Vector2d colsum = Eigen::Vector2d::Zero();
        double ysum = 0.0;
        double shrink = rho / (1.0 + rho * m);
        for (int j = 0; j < m; ++j) {
            Eigen::Vector2d x(1.0, g.times[j]);
            a += x * x.transpose();
            b += x * g.values[j];
            colsum += x;
            ysum += g.values[j];
        }
        a -= shrink * colsum * colsum.transpose();
        b -= shrink * colsum * ysum;
        logdet_v += std::log1p(rho * m);
    }
    const int p = 2;
    double nu = total - p;
    if (nu < 1.0) return eval;
    double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    if (!(det > 0.0)) return eval;
    Eigen::Vector2d beta(
        (a(1, 1) * b(0) - a(0, 1) * b(1)) / det,
        (a(0, 0) * b(1) - a(1, 0) * b(0)) / det);
    double ssr = 0.0;
    for (const GroupSeries& g : groups) {
        const int m = static_cast<int>(g.values.size());
        double shrink = rho / (1.0 + rho * m);
        double acc = 0.0, rsum = 0.0;
        for (int j = 0; j < m; ++j) {
            double resid = g.values[j] - beta(0) - beta(1) * g.times[j];
            acc += resid * resid;
            rsum += resid;
        }
        ssr += acc - shrink * rsum * rsum;
    }
    double sigma2 = std::max(ssr / nu, 1e-300);
    constexpr double kLogTwoPi = 1.8378770664093453;
    eval.loglik = -0.5 * (nu * (kLogTwoPi + std::log(sigma2) + 1.0) + logdet_v + std::log(det));
    eval.sigma2 = sigma2;
    eval.beta = beta;
    return eval;
}

}  // namespace detail

// REML fit by one-dimensional search over the variance ratio: coarse log-grid
// scan bracketing the optimum, golden-section refinement, profile-likelihood
// CI at the chi-square(1) 95% cutoff. Boundary estimates (sigma2_u ~ 0 or
// within-variance ~ 0) are flagged rather than smoothed over.
inline IccResult icc_reml(const std::vector<GroupSeries>& groups) {
    int with_pairs = 0;
    for (const GroupSeries& g : groups) {
        if (g.times.size() != g.values.size())
            throw std::invalid_argument("icc_reml: times/values length mismatch");
        if (g.values.size() >= 2) ++with_pairs;
    }
    if (groups.size() < 2 || with_pairs < 2)
        throw std::invalid_argument("icc_reml: need >= 2 participants with >= 2 sessions");

    constexpr double kRhoMax = 1e8;
    auto loglik = [&](double rho) { return detail::reml_profile(groups, rho).loglik; };

    std::vector<double> grid = {0.0};
    for (int i = 0; i <= 128; ++i) grid.push_back(std::pow(10.0, -8.0 + 16.0 * i / 128.0));
    std::size_t best = 0;
    std::vector<double> lls(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        lls[i] = loglik(grid[i]);
        if (lls[i] > lls[best]) best = i;
    }

    IccResult out;
    if (!std::isfinite(lls[best])) {
        out.converged = false;
        out.diagnostic = "reml likelihood not finite; design collinear or too few points";
        return out;
    }

    double rho_hat = grid[best];
    double ll_hat = lls[best];
    if (best > 0) {
        // Golden-section on log rho between the grid neighbors of the max.
        double lo = std::log(grid[best == 1 ? 1 : best - 1] * (best == 1 ? 0.1 : 1.0));
        double hi = std::log(best + 1 < grid.size() ? grid[best + 1] : grid[best] * 10.0);
        constexpr double kInvPhi = 0.6180339887498949;
        double c = hi - kInvPhi * (hi - lo), d = lo + kInvPhi * (hi - lo);
        double fc = loglik(std::exp(c)), fd = loglik(std::exp(d));
        for (int it = 0; it < 160; ++it) {
            if (fc > fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - kInvPhi * (hi - lo);
                fc = loglik(std::exp(c));
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + kInvPhi * (hi - lo);
                fd = loglik(std::exp(d));
            }
        }
        double refined = std::exp(0.5 * (lo + hi));
        double ll_refined = loglik(refined);
        if (ll_refined > ll_hat) {
            rho_hat = refined;
            ll_hat = ll_refined;
        }
        if (lls[0] >= ll_hat) {
            rho_hat = 0.0;
            ll_hat = lls[0];
        }
    }

    detail::RemlEval at_hat = detail::reml_profile(groups, rho_hat);
    out.icc = rho_hat / (1.0 + rho_hat);
    out.sigma2_e = at_hat.sigma2;
    out.sigma2_u = rho_hat * at_hat.sigma2;
    out.beta_intercept = at_hat.beta(0);
    out.beta_time = at_hat.beta(1);
    out.reml_loglik = ll_hat;
    out.boundary = rho_hat <= 1e-10 || rho_hat >= kRhoMax * 0.1;

    // Profile-likelihood CI: chi-square(1) 0.95 quantile.
    double cutoff = ll_hat - 0.5 * 3.841458820694124;
    if (rho_hat <= 0.0 || loglik(0.0) >= cutoff) {
        out.ci_low = 0.0;
    } else {
        double lo = 0.0, hi = rho_hat;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (loglik(mid) >= cutoff ? hi : lo) = mid;
        }
        out.ci_low = hi / (1.0 + hi);
    }
    if (loglik(kRhoMax) >= cutoff) {
        out.ci_high = 1.0;
    } else {
        double lo = std::log(std::max(rho_hat, 1e-12)), hi = std::log(kRhoMax);
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (loglik(std::exp(mid)) >= cutoff ? lo : hi) = mid;
        }
        double rho_hi = std::exp(lo);
        out.ci_high = rho_hi / (1.0 + rho_hi);
    }
    return out;
}

// Baseline-only adapter: ICC of a measure over baseline sessions, adjusted
// for session time, honoring the dataset exclusion flags.
inline IccResult icc_reml(const LongitudinalDataset& data, const std::string& measure) {
    std::map<std::string, GroupSeries> by_participant;
    for (const StatRecord& rec : data.filtered(measure))
        if (rec.phase == 0) {
            by_participant[rec.participant].times.push_back(rec.time_weeks);
            by_participant[rec.participant].values.push_back(rec.value);
        }
    std::vector<GroupSeries> groups;
    for (auto& [participant, series] : by_participant) groups.push_back(std::move(series));
    return icc_reml(groups);
}

inline CvResult within_subject_cv(const LongitudinalDataset& data, const std::string& measure,
                                  std::optional<double> r = std::nullopt) {
    std::map<std::string, std::vector<double>> by_participant;
    for (const StatRecord& rec : data.filtered(measure))
        if (rec.phase == 0) by_participant[rec.participant].push_back(rec.value);
    std::vector<std::vector<double>> groups;
    for (auto& [participant, values] : by_participant) groups.push_back(std::move(values));
    CvResult out = within_subject_cv(groups);
    out.r = r.value_or(lag1_autocorrelation(groups));
    out.df = cv_effective_df(out.n, out.m, out.r);
    out.se = out.cv / std::sqrt(2.0 * out.df);
    return out;
}

// ---------------------------------------------------------------------------
// Within/between-subject correlation and Fisher z

struct BivariateGroup {
    std::vector<double> x;
    std::vector<double> y;
};

struct CorrelationResult {
    double r_within = 0.0;   // Pearson r of participant-demeaned residuals
    double r_between = 0.0;  // Pearson r of participant means
    int n_participants = 0;
    int n_observations = 0;
};

namespace detail {

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw std::domain_error("correlation: zero variance in a series");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

inline CorrelationResult within_between_correlation(const std::vector<BivariateGroup>& groups) {
    std::vector<double> wx, wy, bx, by;
    for (const BivariateGroup& g : groups) {
        if (g.x.size() != g.y.size())
            throw std::invalid_argument("within_between_correlation: x/y length mismatch");
        if (g.x.empty()) continue;
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            mx += g.x[i];
            my += g.y[i];
        }
        mx /= static_cast<double>(g.x.size());
        my /= static_cast<double>(g.y.size());
        bx.push_back(mx);
        by.push_back(my);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            wx.push_back(g.x[i] - mx);
            wy.push_back(g.y[i] - my);
        }
    }
    if (bx.size() < 2)
        throw std::invalid_argument("within_between_correlation: need >= 2 participants");
    CorrelationResult out;
    out.n_participants = static_cast<int>(bx.size());
    out.n_observations = static_cast<int>(wx.size());
    out.r_within = detail::pearson(wx, wy);
    out.r_between = detail::pearson(bx, by);
    return out;
}

// Joins two measures on (participant, session) after exclusions.
inline CorrelationResult within_between_correlation(const LongitudinalDataset& data,
                                                    const std::string& measure_x,
                                                    const std::string& measure_y) {
    std::map<std::string, std::map<int, double>> xs, ys;
    for (const StatRecord& rec : data.filtered(measure_x))
        xs[rec.participant][rec.session] = rec.value;
    for (const StatRecord& rec : data.filtered(measure_y))
        ys[rec.participant][rec.session] = rec.value;
    std::vector<BivariateGroup> groups;
    for (const auto& [participant, sessions] : xs) {
        auto it = ys.find(participant);
        if (it == ys.end()) continue;
        BivariateGroup g;
        for (const auto& [session, value] : sessions) {
            auto jt = it->second.find(session);
            if (jt == it->second.end()) continue;
            g.x.push_back(value);
            g.y.push_back(jt->second);
        }
        if (!g.x.empty()) groups.push_back(std::move(g));
    }
    return within_between_correlation(groups);
}

// z = atanh(r) * sqrt(df - 3).
inline double fisher_z(double r, double df) {
    if (!(std::abs(r) < 1.0)) throw std::invalid_argument("fisher_z: |r| must be < 1");
    if (!(df > 3.0)) throw std::invalid_argument("fisher_z: df must exceed 3");
    return std::atanh(r) * std::sqrt(df - 3.0);
}

// ---------------------------------------------------------------------------
// Phase slopes with Newey-West robust variance

struct PhaseSlopes {
    Eigen::Vector4d beta = Eigen::Vector4d::Zero();  // 1, t, phase, t*phase
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();   // HAC covariance
    int lag = 0;
    int n = 0;
    double baseline_slope = 0.0, baseline_se = 0.0;
    double intervention_slope = 0.0, intervention_se = 0.0;
    // Model-implied phase means at each phase's mean time, with HAC SEs.
    double baseline_mean = 0.0, baseline_mean_se = 0.0;
    double intervention_mean = 0.0, intervention_mean_se = 0.0;
    double change = 0.0, change_se = 0.0;  // intervention mean - baseline mean
};

// Bartlett-kernel automatic lag.
inline int newey_west_auto_lag(int t) {
    return static_cast<int>(std::floor(4.0 * std::pow(t / 100.0, 2.0 / 9.0)));
}

// OLS of value on time, phase, and time-by-phase; Bartlett-kernel HAC
// covariance with no small-sample correction, so lag 0 reduces to HC0.
// Observations are ordered by time before the lag structure is applied.
inline PhaseSlopes phase_slopes_newey_west(const std::vector<double>& time_weeks,
                                           const std::vector<int>& phase,
                                           const std::vector<double>& value, int lag = -1) {
    const std::size_t n = time_weeks.size();
    if (phase.size() != n || value.size() != n)
        throw std::invalid_argument("phase_slopes: input length mismatch");
    int n_baseline = 0, n_intervention = 0;
    for (int p : phase) (p == 0 ? n_baseline : n_intervention)++;
    if (n_baseline < 3 || n_intervention < 3)
        throw std::invalid_argument("phase_slopes: need >= 3 points per phase");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return time_weeks[a] < time_weeks[b]; });

    Eigen::MatrixXd x(n, 4);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = order[i];
        double ph = phase[j] == 0 ? 0.0 : 1.0;
        x(i, 0) = 1.0;
        x(i, 1) = time_weeks[j];
        x(i, 2) = ph;
        x(i, 3) = time_weeks[j] * ph;
        y(i) = value[j];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < 4)
        throw std::runtime_error(
            "phase_slopes: design matrix rank deficient (constant time within a phase?)");
    Eigen::Vector4d beta = qr.solve(y);
    Eigen::VectorXd resid = y - x * beta;

    PhaseSlopes out;
    out.beta = beta;
    out.n = static_cast<int>(n);
    out.lag = lag >= 0 ? lag : newey_west_auto_lag(static_cast<int>(n));

    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    for (std::size_t t = 0; t < n; ++t)
        s += resid(t) * resid(t) * x.row(t).transpose() * x.row(t);
    for (int l = 1; l <= out.lag; ++l) {
        double w = 1.0 - static_cast<double>(l) / (out.lag + 1);
        Eigen::Matrix4d gamma = Eigen::Matrix4d::Zero();
        for (std::size_t t = l; t < n; ++t)
            gamma += resid(t) * resid(t - l) * x.row(t).transpose() * x.row(t - l);
        s += w * (gamma + gamma.transpose());
    }
    Eigen::Matrix4d xtx_inv = (x.transpose() * x).inverse();
    out.cov = xtx_inv * s * xtx_inv;

    auto contrast = [&](const Eigen::Vector4d& c, double& est, double& se) {
        est = c.dot(beta);
        se = std::sqrt(std::max(0.0, c.dot(out.cov * c)));
    };
    contrast(Eigen::Vector4d(0, 1, 0, 0), out.baseline_slope, out.baseline_se);
    contrast(Eigen::Vector4d(0, 1, 0, 1), out.intervention_slope, out.intervention_se);

    double tb = 0.0, ti = 0.0;
    for (std::size_t i = 0; i < n; ++i) (x(i, 2) == 0.0 ? tb : ti) += x(i, 1);
    tb /= n_baseline;
    ti /= n_intervention;
    Eigen::Vector4d cb(1, tb, 0, 0), ci(1, ti, 1, ti);
    contrast(cb, out.baseline_mean, out.baseline_mean_se);
    contrast(ci, out.intervention_mean, out.intervention_mean_se);
    contrast(ci - cb, out.change, out.change_se);
    return out;
}

inline PhaseSlopes phase_slopes_newey_west(const LongitudinalDataset& data,
                                           const std::string& participant,
                                           const std::string& measure, int lag = -1) {
    std::vector<double> times, values;
    std::vector<int> phases;
    for (const StatRecord& rec : data.filtered(measure))
        if (rec.participant == participant) {
            times.push_back(rec.time_weeks);
            phases.push_back(rec.phase);
            values.push_back(rec.value);
        }
    return phase_slopes_newey_west(times, phases, values, lag);
}

// ---------------------------------------------------------------------------
// Tricube running-mean lowess

// Degree-0 local fit: each point is replaced by the tricube-weighted mean of
// its nearest round(frac*n) neighbors. Zero-span neighborhoods fall back to a
// plain mean. Neighbor ties at equal distance resolve by lower index.
inline std::vector<double> lowess_tricube(const std::vector<double>& x,
                                          const std::vector<double>& y, double frac = 0.8) {
    const std::size_t n = x.size();
    if (y.size() != n) throw std::invalid_argument("lowess_tricube: x/y length mismatch");
    if (n < 2) throw std::invalid_argument("lowess_tricube: need >= 2 points");
    if (!(frac > 0.0)) throw std::invalid_argument("lowess_tricube: frac must be positive");
    const std::size_t k = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(frac * static_cast<double>(n))), 1, n);

    std::vector<double> smoothed(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            double da = std::abs(x[a] - x[i]), db = std::abs(x[b] - x[i]);
            int ca = a == i ? 0 : 1, cb = b == i ? 0 : 1;
            return std::tie(da, ca, a) < std::tie(db, cb, b);
        });
        double h = std::abs(x[order[k - 1]] - x[i]);
        double wsum = 0.0, acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double w = 1.0;
            if (h > 0.0) {
                double u = std::abs(x[order[j]] - x[i]) / h;
                double t = 1.0 - u * u * u;
                w = t * t * t;
            }
            wsum += w;
            acc += w * y[order[j]];
        }
        smoothed[i] = acc / wsum;
    }
    return smoothed;
}

// ---------------------------------------------------------------------------
// Report formatting

inline std::string format_measurement(double value, double se, int decimals) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(decimals) << value << " ± " << se;
    return out.str();
}

inline std::string format_icc(const IccResult& icc) {
    if (icc.boundary && icc.icc < 0.005) return "≈ 0";
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << icc.icc << " [" << icc.ci_low << ","
        << icc.ci_high << "]";
    return out.str();
}

// Baseline stability table: one row per measure, CV +/- SE (%) and ICC with
// its 95% CI.
inline std::string stability_table_text(const LongitudinalDataset& data,
                                        std::vector<std::string> measures = {}) {
    if (measures.empty()) measures = data.measures();
    std::ostringstream out;
    out << "Measure\tCV ± SE (%)\tICC [95% CI]\n";
    for (const std::string& measure : measures) {
        out << measure << '\t';
        try {
            CvResult cv = within_subject_cv(data, measure);
            out << format_measurement(cv.cv, cv.se, 2) << '\t';
        } catch (const std::exception&) {
            out << "n/a\t";
        }
        try {
            out << format_icc(icc_reml(data, measure)) << '\n';
        } catch (const std::exception&) {
            out << "n/a\n";
        }
    }
    return out.str();
}

// Longitudinal slope table: per measure and participant, baseline and
// intervention slopes with Newey-West SEs.
inline std::string slopes_table_text(const LongitudinalDataset& data, int decimals = 1) {
    std::ostringstream out;
    out << "Measure\tParticipant\tPhase\tSlope ± SE\n";
    for (const std::string& measure : data.measures())
        for (const std::string& participant : data.participants()) {
            try {
                PhaseSlopes fit = phase_slopes_newey_west(data, participant, measure);
                out << measure << '\t' << participant << "\tBaseline\t"
                    << format_measurement(fit.baseline_slope, fit.baseline_se, decimals) << '\n';
                out << measure << '\t' << participant << "\tIntervention\t"
                    << format_measurement(fit.intervention_slope, fit.intervention_se, decimals)
                    << '\n';
            } catch (const std::exception&) {
                continue;  // participant lacks enough points in one phase
            }
        }
    return out.str();
}

}  // namespace nfb
