#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nfb/rng.hpp"
#include "nfb/stats.hpp"

namespace {

// Dense-matrix REML log-likelihood, the oracle for the block-closed-form
// profile in the library: V = I + rho ZZ' built explicitly and inverted.
double dense_reml_loglik(const std::vector<nfb::GroupSeries>& groups, double rho) {
    int n = 0;
    for (const nfb::GroupSeries& g : groups) n += static_cast<int>(g.values.size());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    int at = 0;
    for (const nfb::GroupSeries& g : groups) {
        int m = static_cast<int>(g.values.size());
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) v(at + a, at + b) += rho;
        for (int j = 0; j < m; ++j) {
            x(at + j, 0) = 1.0;
            x(at + j, 1) = g.times[j];
            y(at + j) = g.values[j];
        }
        at += m;
    }
    Eigen::MatrixXd w = v.inverse();
    Eigen::Matrix2d a2 = x.transpose() * w * x;
    Eigen::Vector2d beta = a2.inverse() * (x.transpose() * w * y);
    Eigen::VectorXd resid = y - x * beta;
    double ssr = resid.dot(w * resid);
    double nu = n - 2;
    double sigma2 = ssr / nu;
    return -0.5 * (nu * (std::log(2.0 * M_PI) + std::log(sigma2) + 1.0) +
                   std::log(v.determinant()) + std::log(a2.determinant()));
}

std::vector<nfb::GroupSeries> toy_groups() {
    return {{{0, 1, 2}, {4.1, 5.0, 4.4}},
            {{0, 1, 2, 3}, {7.2, 6.8, 7.9, 7.0}},
            {{0, 2}, {2.3, 3.1}}};
}

nfb::LongitudinalDataset slope_dataset() {
    nfb::LongitudinalDataset data;
    auto add = [&](int session, double t, int phase, double v, bool fu = false) {
        data.records.push_back({"p1", session, t, phase, "srf", v, fu});
    };
    // y = 2 + t on baseline, 2 + 1.5 t - 2.5 on intervention; first baseline
    // point deliberately aberrant, follow-up point deliberately wild.
    add(0, 0.0, 0, 99.0);
    for (int s = 1; s <= 4; ++s) add(s, s, 0, 2.0 + s);
    for (int s = 5; s <= 12; ++s) add(s, s, 1, 2.0 + 1.5 * s - 2.5);
    add(13, 16.0, 1, -50.0, true);
    return data;
}

}  // namespace

TEST_CASE("dataset validates uniqueness and time order", "[stats]") {
    nfb::LongitudinalDataset data;
    data.records.push_back({"p1", 0, 0.0, 0, "auc", 0.7, false});
    data.records.push_back({"p1", 1, 1.0, 0, "auc", 0.8, false});
    data.records.push_back({"p2", 0, 0.0, 0, "auc", 0.6, false});
    REQUIRE_NOTHROW(data.validate());

    nfb::LongitudinalDataset dup = data;
    dup.records.push_back({"p1", 1, 1.0, 0, "auc", 0.9, false});
    REQUIRE_THROWS_AS(dup.validate(), std::invalid_argument);

    nfb::LongitudinalDataset backwards = data;
    backwards.records.push_back({"p1", 2, 0.5, 0, "auc", 0.9, false});
    REQUIRE_THROWS_AS(backwards.validate(), std::invalid_argument);
}

TEST_CASE("csv round trip preserves records exactly", "[stats]") {
    nfb::LongitudinalDataset data;
    data.records.push_back({"p1", 0, 0.0, 0, "auc", 0.7321, false});
    data.records.push_back({"p1", 13, 16.25, 1, "alpha", 0.1, true});
    std::string csv = nfb::stats_csv(data);
    std::istringstream in(csv);
    nfb::LongitudinalDataset back = nfb::load_stats_csv(in);
    REQUIRE(back.records.size() == 2);
    REQUIRE(back.records[0].participant == "p1");
    REQUIRE(back.records[0].value == 0.7321);
    REQUIRE(back.records[1].time_weeks == 16.25);
    REQUIRE(back.records[1].measure == "alpha");
    REQUIRE(back.records[1].follow_up);

    std::istringstream bad("wrong,header\n");
    REQUIRE_THROWS_AS(nfb::load_stats_csv(bad), std::invalid_argument);
    std::istringstream short_row("participant,session,time_weeks,phase,measure,value,follow_up\n"
                                 "p1,0,0.0\n");
    REQUIRE_THROWS_AS(nfb::load_stats_csv(short_row), std::invalid_argument);
    std::istringstream bad_number("participant,session,time_weeks,phase,measure,value,follow_up\n"
                                  "p1,0,zero,0,auc,0.5,0\n");
    REQUIRE_THROWS_AS(nfb::load_stats_csv(bad_number), std::invalid_argument);
}

TEST_CASE("filtered applies first-baseline and follow-up exclusions", "[stats]") {
    nfb::LongitudinalDataset data = slope_dataset();
    std::vector<nfb::StatRecord> kept = data.filtered("srf");
    REQUIRE(kept.size() == 12);
    for (const nfb::StatRecord& rec : kept) {
        REQUIRE(rec.session != 0);
        REQUIRE(!rec.follow_up);
    }

    data.exclude_first_baseline = false;
    data.exclude_follow_up = false;
    REQUIRE(data.filtered("srf").size() == 14);
}

TEST_CASE("within-subject cv matches the absorbing-regression formula", "[stats]") {
    // Hand oracle: SSR 16 over N-n = 4 gives RMSE 2; grand mean 16.
    nfb::CvResult cv = nfb::within_subject_cv({{10, 12, 14}, {20, 18, 22}});
    REQUIRE(cv.rmse == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(cv.grand_mean == Catch::Approx(16.0).margin(1e-12));
    REQUIRE(cv.cv == Catch::Approx(12.5).margin(1e-12));
    REQUIRE(cv.n == 2);
    REQUIRE(cv.m == Catch::Approx(3.0));

    // Constant participants: zero volatility.
    REQUIRE(nfb::within_subject_cv({{5.0, 5.0}, {9.0, 9.0, 9.0}}).cv == 0.0);

    // RMSE is invariant to per-participant shifts; cv moves only through the
    // grand mean.
    nfb::CvResult shifted = nfb::within_subject_cv({{10, 12, 14}, {27, 25, 29}});
    REQUIRE(shifted.rmse == Catch::Approx(cv.rmse).margin(1e-12));
    REQUIRE(shifted.cv ==
            Catch::Approx(shifted.rmse / shifted.grand_mean * 100.0).margin(1e-12));

    REQUIRE_THROWS_AS(nfb::within_subject_cv({{-1.0, 1.0}, {2.0, -2.0}}), std::domain_error);
    REQUIRE_THROWS_AS(nfb::within_subject_cv({{1.0}, {2.0}}), std::invalid_argument);
}

TEST_CASE("within-subject cv agrees with a brute-force sweep", "[stats]") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        nfb::Rng rng(seed);
        std::vector<std::vector<double>> groups(3 + rng.below(3));
        for (std::vector<double>& g : groups) {
            g.resize(2 + rng.below(5));
            for (double& v : g) v = rng.uniform(5.0, 15.0);
        }
        double ssr = 0.0, total = 0.0;
        int n_obs = 0;
        for (const std::vector<double>& g : groups) {
            double mean = 0.0;
            for (double v : g) mean += v;
            mean /= static_cast<double>(g.size());
            for (double v : g) {
                ssr += (v - mean) * (v - mean);
                total += v;
                ++n_obs;
            }
        }
        double rmse = std::sqrt(ssr / (n_obs - static_cast<int>(groups.size())));
        double expect = rmse / (total / n_obs) * 100.0;
        REQUIRE(nfb::within_subject_cv(groups).cv == Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("cv standard error follows the effective-df formula", "[stats]") {
    // Independence: df = n*m.
    REQUIRE(nfb::cv_effective_df(5, 4, 0.0) == Catch::Approx(20.0));
    REQUIRE(nfb::cv_standard_error(10.0, 5, 4, 0.0) ==
            Catch::Approx(10.0 / std::sqrt(40.0)).epsilon(1e-12));

    // Single measurement per participant: df = n regardless of r.
    REQUIRE(nfb::cv_effective_df(5, 1, 0.0) == Catch::Approx(5.0));
    REQUIRE(nfb::cv_effective_df(5, 1, 0.9) == Catch::Approx(5.0));

    // Published stability row: back-solve r from cv 9.23 +/- 2.57 at n=5,
    // m=4.4, then confirm the forward computation reproduces the SE.
    double df = (9.23 / 2.57) * (9.23 / 2.57) / 2.0;
    double r = (5.0 * 4.4 / df - 1.0) / (4.4 - 1.0);
    REQUIRE(r > 0.6);
    REQUIRE(r < 0.8);
    double se = nfb::cv_standard_error(9.23, 5, 4.4, r);
    REQUIRE(se == Catch::Approx(2.57).epsilon(1e-9));
    REQUIRE(std::round(se * 100.0) / 100.0 == 2.57);

    REQUIRE_THROWS_AS(nfb::cv_standard_error(10.0, 5, 4, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(nfb::cv_standard_error(10.0, 0, 4, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(nfb::cv_standard_error(10.0, 5, 4, -0.1), std::invalid_argument);
}

TEST_CASE("profiled reml likelihood matches a dense-matrix evaluation", "[stats]") {
    std::vector<nfb::GroupSeries> groups = toy_groups();
    for (double rho : {0.0, 0.3, 1.0, 2.5, 10.0}) {
        double fast = nfb::detail::reml_profile(groups, rho).loglik;
        double dense = dense_reml_loglik(groups, rho);
        REQUIRE(fast == Catch::Approx(dense).margin(1e-9));
    }
}

TEST_CASE("reml estimate maximizes the dense likelihood", "[stats]") {
    std::vector<nfb::GroupSeries> groups = toy_groups();
    nfb::IccResult icc = nfb::icc_reml(groups);
    REQUIRE(icc.converged);
    REQUIRE(!icc.boundary);
    double rho_hat = icc.sigma2_u / icc.sigma2_e;
    double at_hat = dense_reml_loglik(groups, rho_hat);
    REQUIRE(at_hat >= dense_reml_loglik(groups, rho_hat * 1.05));
    REQUIRE(at_hat >= dense_reml_loglik(groups, rho_hat / 1.05));
    REQUIRE(icc.ci_low < icc.icc);
    REQUIRE(icc.icc < icc.ci_high);
}

TEST_CASE("icc recovers a half-and-half variance split", "[stats]") {
    nfb::Rng rng(11);
    std::vector<nfb::GroupSeries> groups(50);
    for (nfb::GroupSeries& g : groups) {
        double u = rng.normal(0.0, 1.0);
        for (int t = 0; t < 20; ++t) {
            g.times.push_back(t);
            g.values.push_back(2.0 + 0.1 * t + u + rng.normal(0.0, 1.0));
        }
    }
    nfb::IccResult icc = nfb::icc_reml(groups);
    REQUIRE(icc.icc > 0.45);
    REQUIRE(icc.icc < 0.55);
    REQUIRE(icc.ci_low < 0.5);
    REQUIRE(icc.ci_high > 0.5);
    REQUIRE(icc.beta_time == Catch::Approx(0.1).margin(0.01));
}

TEST_CASE("icc boundaries are flagged rather than smoothed over", "[stats]") {
    // No within-participant variance: all variance is between participants.
    std::vector<nfb::GroupSeries> pure_between = {
        {{0, 1, 2}, {1, 1, 1}}, {{0, 1, 2}, {2, 2, 2}}, {{0, 1, 2}, {3, 3, 3}}};
    nfb::IccResult high = nfb::icc_reml(pure_between);
    REQUIRE(high.icc > 0.99);
    REQUIRE(high.boundary);

    // Identical participants: no between variance at all.
    std::vector<nfb::GroupSeries> identical(3, {{0, 1, 2, 3}, {1.0, 5.0, 3.0, 4.0}});
    nfb::IccResult zero = nfb::icc_reml(identical);
    REQUIRE(zero.icc == 0.0);
    REQUIRE(zero.boundary);
    REQUIRE(nfb::format_icc(zero) == "≈ 0");

    REQUIRE_THROWS_AS(nfb::icc_reml({{{0, 1}, {1, 2}}}), std::invalid_argument);
}

TEST_CASE("icc is invariant under affine transforms of the outcome", "[stats]") {
    nfb::Rng rng(23);
    std::vector<nfb::GroupSeries> groups(8);
    for (nfb::GroupSeries& g : groups) {
        double u = rng.normal(0.0, 1.5);
        for (int t = 0; t < 6; ++t) {
            g.times.push_back(t);
            g.values.push_back(10.0 + 0.3 * t + u + rng.normal(0.0, 1.0));
        }
    }
    nfb::IccResult base = nfb::icc_reml(groups);
    for (nfb::GroupSeries& g : groups)
        for (double& v : g.values) v = 3.0 * v - 40.0;
    nfb::IccResult scaled = nfb::icc_reml(groups);
    REQUIRE(scaled.icc == Catch::Approx(base.icc).margin(1e-6));
    REQUIRE(scaled.ci_low == Catch::Approx(base.ci_low).margin(1e-5));
    REQUIRE(scaled.ci_high == Catch::Approx(base.ci_high).margin(1e-5));
}

TEST_CASE("within and between correlations split as constructed", "[stats]") {
    // y == x: both correlations are exactly one.
    std::vector<nfb::BivariateGroup> mirror = {{{1, 2, 3}, {1, 2, 3}}, {{4, 6, 8}, {4, 6, 8}}};
    nfb::CorrelationResult same = nfb::within_between_correlation(mirror);
    REQUIRE(same.r_within == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(same.r_between == Catch::Approx(1.0).margin(1e-12));

    // Participant means collinear, within-participant patterns orthogonal.
    std::vector<nfb::BivariateGroup> split;
    for (int i = 1; i <= 5; ++i) {
        double cx = i, cy = 2.0 * i;
        split.push_back({{cx - 1.0, cx, cx + 1.0}, {cy + 1.0, cy - 2.0, cy + 1.0}});
    }
    nfb::CorrelationResult orth = nfb::within_between_correlation(split);
    REQUIRE(orth.r_between == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(orth.r_within == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(orth.n_participants == 5);
    REQUIRE(orth.n_observations == 15);

    // Zero variance is an error, not a silent NaN.
    std::vector<nfb::BivariateGroup> flat = {{{1, 1}, {1, 2}}, {{1, 1}, {3, 4}}};
    REQUIRE_THROWS_AS(nfb::within_between_correlation(flat), std::domain_error);
}

TEST_CASE("correlations agree with direct demeaned computation", "[stats]") {
    nfb::Rng rng(31);
    std::vector<nfb::BivariateGroup> groups(4);
    for (nfb::BivariateGroup& g : groups)
        for (int t = 0; t < 5; ++t) {
            g.x.push_back(rng.uniform(0.0, 10.0));
            g.y.push_back(rng.uniform(0.0, 10.0));
        }
    std::vector<double> wx, wy, bx, by;
    for (const nfb::BivariateGroup& g : groups) {
        double mx = 0.0, my = 0.0;
        for (double v : g.x) mx += v;
        for (double v : g.y) my += v;
        mx /= g.x.size();
        my /= g.y.size();
        bx.push_back(mx);
        by.push_back(my);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            wx.push_back(g.x[i] - mx);
            wy.push_back(g.y[i] - my);
        }
    }
    auto pearson = [](const std::vector<double>& a, const std::vector<double>& b) {
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ma += a[i];
            mb += b[i];
        }
        ma /= a.size();
        mb /= b.size();
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
        }
        return sab / std::sqrt(saa * sbb);
    };
    nfb::CorrelationResult result = nfb::within_between_correlation(groups);
    REQUIRE(result.r_within == Catch::Approx(pearson(wx, wy)).margin(1e-12));
    REQUIRE(result.r_between == Catch::Approx(pearson(bx, by)).margin(1e-12));
}

TEST_CASE("correlation adapter joins measures on participant and session", "[stats]") {
    nfb::LongitudinalDataset data;
    data.exclude_first_baseline = false;
    data.exclude_follow_up = false;
    auto add = [&](const std::string& p, int s, const std::string& m, double v) {
        data.records.push_back({p, s, static_cast<double>(s), 0, m, v, false});
    };
    for (int s = 0; s < 3; ++s) {
        add("p1", s, "auc", 0.7 + 0.05 * s);
        add("p1", s, "alpha", 0.2 + 0.01 * s);
    }
    add("p2", 0, "auc", 0.6);
    add("p2", 1, "auc", 0.65);
    for (int s = 0; s < 3; ++s) add("p2", s, "alpha", 0.3 - 0.02 * s);
    nfb::CorrelationResult joined = nfb::within_between_correlation(data, "auc", "alpha");
    REQUIRE(joined.n_participants == 2);
    REQUIRE(joined.n_observations == 5);  // p2 session 2 has no auc value
}

TEST_CASE("fisher z reproduces the published between-subject value", "[stats]") {
    REQUIRE(nfb::fisher_z(0.0, 10.0) == 0.0);
    double z = nfb::fisher_z(0.94, 5.0);
    REQUIRE(std::round(z * 100.0) / 100.0 == Catch::Approx(2.46));
    REQUIRE(nfb::fisher_z(-0.94, 5.0) == Catch::Approx(-z).margin(1e-15));

    // Strictly increasing in r and in df for positive r.
    double prev = 0.0;
    for (double r = 0.1; r < 0.95; r += 0.1) {
        double cur = nfb::fisher_z(r, 10.0);
        REQUIRE(cur > prev);
        prev = cur;
    }
    prev = 0.0;
    for (double df = 4.0; df <= 30.0; df += 1.0) {
        double cur = nfb::fisher_z(0.5, df);
        REQUIRE(cur > prev);
        prev = cur;
    }

    REQUIRE_THROWS_AS(nfb::fisher_z(1.0, 10.0), std::invalid_argument);
    REQUIRE_THROWS_AS(nfb::fisher_z(0.5, 3.0), std::invalid_argument);
}

TEST_CASE("phase slopes recover exact piecewise-linear data", "[stats]") {
    std::vector<double> t, y;
    std::vector<int> ph;
    for (int i = 0; i < 12; ++i) {
        t.push_back(i);
        ph.push_back(i >= 6 ? 1 : 0);
        double p = i >= 6 ? 1.0 : 0.0;
        y.push_back(10.0 + 0.5 * i - 3.0 * p + 1.5 * i * p);
    }
    nfb::PhaseSlopes fit = nfb::phase_slopes_newey_west(t, ph, y);
    REQUIRE(fit.baseline_slope == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(fit.intervention_slope == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(fit.baseline_se < 1e-7);
    REQUIRE(fit.intervention_se < 1e-7);

    // Model-implied phase means at the mean phase times.
    double tb = (0 + 1 + 2 + 3 + 4 + 5) / 6.0;
    double ti = (6 + 7 + 8 + 9 + 10 + 11) / 6.0;
    REQUIRE(fit.baseline_mean == Catch::Approx(10.0 + 0.5 * tb).margin(1e-9));
    REQUIRE(fit.intervention_mean == Catch::Approx(7.0 + 2.0 * ti).margin(1e-9));
    REQUIRE(fit.change ==
            Catch::Approx(fit.intervention_mean - fit.baseline_mean).margin(1e-12));

    REQUIRE_THROWS_AS(
        nfb::phase_slopes_newey_west({0, 1, 2, 3}, {0, 0, 1, 1}, {1, 2, 3, 4}),
        std::invalid_argument);
    REQUIRE_THROWS_AS(
        nfb::phase_slopes_newey_west({0, 0, 0, 1, 1, 1}, {0, 0, 0, 1, 1, 1},
                                     {1, 2, 3, 4, 5, 6}),
        std::runtime_error);
}

TEST_CASE("newey-west covariance matches brute force", "[stats]") {
    nfb::Rng rng(7);
    const int n = 12;
    std::vector<double> t, y;
    std::vector<int> ph;
    for (int i = 0; i < n; ++i) {
        t.push_back(i);
        ph.push_back(i >= 6 ? 1 : 0);
        y.push_back(5.0 + 0.3 * i + (i >= 6 ? 1.0 + 0.2 * i : 0.0) + rng.normal(0.0, 1.0));
    }

    Eigen::MatrixXd x(n, 4);
    Eigen::VectorXd yy(n);
    for (int i = 0; i < n; ++i) {
        double p = ph[i];
        x(i, 0) = 1.0;
        x(i, 1) = t[i];
        x(i, 2) = p;
        x(i, 3) = t[i] * p;
        yy(i) = y[i];
    }
    Eigen::Matrix4d xtx = x.transpose() * x;
    Eigen::Vector4d beta = xtx.ldlt().solve(x.transpose() * yy);
    Eigen::VectorXd e = yy - x * beta;

    // Explicit double sum with Bartlett weights.
    const int lag = 3;
    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            int d = std::abs(a - b);
            if (d > lag) continue;
            double w = 1.0 - static_cast<double>(d) / (lag + 1);
            s += w * e(a) * e(b) * x.row(a).transpose() * x.row(b);
        }
    Eigen::Matrix4d expect = xtx.inverse() * s * xtx.inverse();

    nfb::PhaseSlopes fit = nfb::phase_slopes_newey_west(t, ph, y, lag);
    REQUIRE(fit.lag == 3);
    double scale = expect.cwiseAbs().maxCoeff();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            REQUIRE(fit.cov(a, b) == Catch::Approx(expect(a, b)).margin(1e-9 * scale));
    for (int a = 0; a < 4; ++a)
        REQUIRE(fit.beta(a) == Catch::Approx(beta(a)).margin(1e-9));

    // Lag zero degenerates to HC0.
    Eigen::Matrix4d s0 = Eigen::Matrix4d::Zero();
    for (int a = 0; a < n; ++a) s0 += e(a) * e(a) * x.row(a).transpose() * x.row(a);
    Eigen::Matrix4d hc0 = xtx.inverse() * s0 * xtx.inverse();
    nfb::PhaseSlopes fit0 = nfb::phase_slopes_newey_west(t, ph, y, 0);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            REQUIRE(fit0.cov(a, b) == Catch::Approx(hc0(a, b)).margin(1e-9 * scale));
}

TEST_CASE("newey-west covariance is positive semidefinite", "[stats]") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        nfb::Rng rng(seed);
        const int n = 20;
        std::vector<double> t, y;
        std::vector<int> ph;
        double walk = 0.0;
        for (int i = 0; i < n; ++i) {
            walk += rng.normal(0.0, 1.0);
            t.push_back(i);
            ph.push_back(i >= 10 ? 1 : 0);
            y.push_back(walk + 0.1 * i);
        }
        nfb::PhaseSlopes fit = nfb::phase_slopes_newey_west(t, ph, y);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(
            0.5 * (fit.cov + fit.cov.transpose()));
        double floor = -1e-10 * std::max(1.0, fit.cov.cwiseAbs().maxCoeff());
        REQUIRE(es.eigenvalues().minCoeff() >= floor);
    }
}

TEST_CASE("automatic bartlett lag follows the T to the two-ninths rule", "[stats]") {
    REQUIRE(nfb::newey_west_auto_lag(100) == 4);
    REQUIRE(nfb::newey_west_auto_lag(25) == 2);
    REQUIRE(nfb::newey_west_auto_lag(16) == 2);
    REQUIRE(nfb::newey_west_auto_lag(4) == 1);

    std::vector<double> t, y;
    std::vector<int> ph;
    nfb::Rng rng(3);
    for (int i = 0; i < 25; ++i) {
        t.push_back(i);
        ph.push_back(i >= 12 ? 1 : 0);
        y.push_back(rng.uniform(0.0, 1.0) + 0.1 * i);
    }
    REQUIRE(nfb::phase_slopes_newey_west(t, ph, y).lag == 2);
}

TEST_CASE("slope adapter applies exclusions before fitting", "[stats]") {
    nfb::LongitudinalDataset data = slope_dataset();
    nfb::PhaseSlopes fit = nfb::phase_slopes_newey_west(data, "p1", "srf");
    REQUIRE(fit.n == 12);  // aberrant first baseline and follow-up dropped
    REQUIRE(fit.baseline_slope == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(fit.intervention_slope == Catch::Approx(1.5).margin(1e-9));
}

TEST_CASE("lowess tricube matches hand-computed weights", "[stats]") {
    std::vector<double> x = {0, 1, 2, 3, 4};
    std::vector<double> constant(5, 7.5);
    for (double v : nfb::lowess_tricube(x, constant, 0.8))
        REQUIRE(v == Catch::Approx(7.5).margin(1e-12));

    // Full-span window at the center point: weights 0, (7/8)^3, 1, (7/8)^3, 0
    // over distances {2,1,0,1,2} with h=2, so (343*2 + 512*3 + 343*5)/1198.
    std::vector<double> y = {1, 2, 3, 5, 10};
    std::vector<double> smooth = nfb::lowess_tricube(x, y, 1.0);
    REQUIRE(smooth[2] == Catch::Approx(3937.0 / 1198.0).epsilon(1e-12));

    // Linear data: interior points are reproduced exactly (symmetric
    // effective window), endpoints pull toward the interior.
    std::vector<double> lin_x, lin_y;
    for (int i = 0; i <= 10; ++i) {
        lin_x.push_back(i);
        lin_y.push_back(i);
    }
    std::vector<double> lin_smooth = nfb::lowess_tricube(lin_x, lin_y, 0.45);
    for (int i = 2; i <= 8; ++i)
        REQUIRE(lin_smooth[i] == Catch::Approx(lin_y[i]).margin(1e-9));
    REQUIRE(lin_smooth[0] > lin_y[0]);
    REQUIRE(lin_smooth[10] < lin_y[10]);

    // Zero-span neighborhoods (duplicate x) fall back to a plain mean over
    // the selected points, with the center always selected.
    std::vector<double> same_x = {1, 1, 1, 1};
    std::vector<double> vals = {10, 20, 30, 40};
    std::vector<double> flat = nfb::lowess_tricube(same_x, vals, 0.5);
    REQUIRE(flat[0] == Catch::Approx(15.0).margin(1e-12));
    REQUIRE(flat[2] == Catch::Approx(20.0).margin(1e-12));

    REQUIRE(nfb::lowess_tricube(x, y, 5.0).size() == 5);  // frac clamps to n
    REQUIRE_THROWS_AS(nfb::lowess_tricube(x, y, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(nfb::lowess_tricube({1.0}, {1.0}, 0.8), std::invalid_argument);
}

TEST_CASE("report tables render the published layout conventions", "[stats]") {
    REQUIRE(nfb::format_measurement(9.23, 2.57, 2) == "9.23 ± 2.57");
    REQUIRE(nfb::format_measurement(0.0, 4.1, 1) == "0.0 ± 4.1");

    nfb::LongitudinalDataset data = slope_dataset();
    nfb::Rng rng(5);
    for (const char* p : {"p2", "p3"})
        for (int s = 0; s <= 4; ++s)
            data.records.push_back(
                {p, s, static_cast<double>(s), 0, "srf", rng.uniform(10.0, 14.0), false});

    std::string stability = nfb::stability_table_text(data);
    REQUIRE(stability.find("Measure\tCV ± SE (%)\tICC [95% CI]") == 0);
    REQUIRE(stability.find("srf\t") != std::string::npos);

    std::string slopes = nfb::slopes_table_text(data);
    REQUIRE(slopes.find("p1\tBaseline\t1.0 ±") != std::string::npos);
    REQUIRE(slopes.find("p1\tIntervention\t1.5 ±") != std::string::npos);
    // p2 and p3 have no intervention phase and are skipped, not faked.
    REQUIRE(slopes.find("p2\t") == std::string::npos);
}

TEST_CASE("cv dataset adapter fills df from the estimated correlation", "[stats]") {
    nfb::LongitudinalDataset data;
    nfb::Rng rng(17);
    for (const char* p : {"a", "b", "c"}) {
        double level = rng.uniform(8.0, 12.0);
        for (int s = 0; s <= 5; ++s)
            data.records.push_back(
                {p, s, static_cast<double>(s), 0, "auc", level + rng.normal(0.0, 0.5), false});
    }
    nfb::CvResult cv = nfb::within_subject_cv(data, "auc");
    REQUIRE(cv.n == 3);
    REQUIRE(cv.m == Catch::Approx(5.0));  // first baseline excluded
    REQUIRE(cv.r >= 0.0);
    REQUIRE(cv.r < 1.0);
    REQUIRE(cv.df == Catch::Approx(nfb::cv_effective_df(cv.n, cv.m, cv.r)));
    REQUIRE(cv.se == Catch::Approx(cv.cv / std::sqrt(2.0 * cv.df)));

    nfb::CvResult fixed_r = nfb::within_subject_cv(data, "auc", 0.0);
    REQUIRE(fixed_r.df == Catch::Approx(15.0));
}
