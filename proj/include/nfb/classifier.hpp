#pragma once
// Target/non-target epoch classification.
//
// Pipeline: downsample to 150 Hz, 2-45 Hz zero-phase bandpass, slice 0-500 ms
// epochs after each letter onset, decimate to 175 features, z-score with
// training statistics, then regularized discriminant analysis (Friedman
// shrinkage: class-pooling weight lambda, identity weight gamma). Scores are
// log-likelihood ratios (target vs non-target); a kernel density calibration
// turns a score into the likelihood ratio consumed by the typing engine.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "nfb/detail/quantile.hpp"
#include "nfb/eeg.hpp"
#include "nfb/events.hpp"
#include "nfb/filters.hpp"
#include "nfb/rng.hpp"

namespace nfb {

inline constexpr double kClassifierRate = 150.0;    // Hz after downsampling
inline constexpr double kEpochSeconds = 0.5;        // post-stimulus window
inline constexpr double kClassifierBandLow = 2.0;   // Hz
inline constexpr double kClassifierBandHigh = 45.0; // Hz
inline constexpr std::size_t kFeatureDecimation = 3;

// Epochs are stored channel-major: epochs[i][ch * n_samples + s].
// event_ids index into the source SessionLog's event vector and stay unique
// within a session; fold assignment is keyed to them so that reordering the
// epochs cannot change a cross-validation result.
struct EpochSet {
    double sample_rate = kClassifierRate;
    std::size_t n_channels = 0;
    std::size_t n_samples = 0; // per channel
    std::vector<std::string> channels;
    std::vector<std::vector<double>> epochs;
    std::vector<int> labels; // 1 = target presentation
    std::vector<std::size_t> event_ids;
    std::vector<std::size_t> dropped_event_ids; // too close to the block edge

    std::size_t n_epochs() const { return epochs.size(); }
    std::size_t n_dropped() const { return dropped_event_ids.size(); }
};

// One epoch per letter event. Events whose window would run past either end
// of the recording are dropped and reported via dropped_event_ids.
inline EpochSet extract_epochs(const EegBlock& eeg, const SessionLog& log) {
    EegBlock ds = downsample(eeg, kClassifierRate);
    EegBlock filt =
        bandpass_filter(ds, kClassifierBandLow, kClassifierBandHigh, FilterMode::zero_phase);

    EpochSet set;
    set.sample_rate = filt.sample_rate;
    set.n_channels = filt.n_channels();
    set.n_samples =
        static_cast<std::size_t>(std::lround(kEpochSeconds * filt.sample_rate));
    set.channels = filt.channels;

    const std::size_t n = filt.n_samples();
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        const SessionEvent& ev = log.events[i];
        if (ev.kind != EventKind::letter) continue;
        long start = std::lround((ev.t - filt.t0) * filt.sample_rate);
        if (start < 0 ||
            static_cast<std::size_t>(start) + set.n_samples > n) {
            set.dropped_event_ids.push_back(i);
            continue;
        }
        std::vector<double> epoch(set.n_channels * set.n_samples);
        for (std::size_t ch = 0; ch < set.n_channels; ++ch) {
            const double* src = filt.data[ch].data() + start;
            std::copy(src, src + set.n_samples, epoch.begin() + ch * set.n_samples);
        }
        set.epochs.push_back(std::move(epoch));
        set.labels.push_back(ev.is_target ? 1 : 0);
        set.event_ids.push_back(i);
    }
    return set;
}

inline std::size_t n_epoch_features(const EpochSet& set) {
    std::size_t per_channel = (set.n_samples + kFeatureDecimation - 1) / kFeatureDecimation;
    return set.n_channels * per_channel;
}

// Every third sample of every channel, in channel-major order.
inline std::vector<double> epoch_features(const EpochSet& set, std::size_t index) {
    if (index >= set.n_epochs()) throw std::out_of_range("epoch_features: index");
    std::vector<double> f;
    f.reserve(n_epoch_features(set));
    const std::vector<double>& e = set.epochs[index];
    for (std::size_t ch = 0; ch < set.n_channels; ++ch)
        for (std::size_t s = 0; s < set.n_samples; s += kFeatureDecimation)
            f.push_back(e[ch * set.n_samples + s]);
    return f;
}

inline Eigen::MatrixXd feature_matrix(const EpochSet& set) {
    Eigen::MatrixXd f(set.n_epochs(), n_epoch_features(set));
    for (std::size_t i = 0; i < set.n_epochs(); ++i) {
        std::vector<double> row = epoch_features(set, i);
        for (std::size_t j = 0; j < row.size(); ++j) f(i, j) = row[j];
    }
    return f;
}

// Per-feature z-scoring fitted on training data. Population variance keeps
// means and covariances sufficient: duplicating the training set leaves the
// fitted transform unchanged. Constant features get sd 1 (they standardize
// to zero and are absorbed by the identity shrinkage).
struct Standardizer {
    std::vector<double> mean, sd;

    Eigen::VectorXd apply(const std::vector<double>& x) const {
        if (x.size() != mean.size())
            throw std::invalid_argument("Standardizer: feature count mismatch");
        Eigen::VectorXd z(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / sd[j];
        return z;
    }
};

// Mann-Whitney AUC with ties counted one half, computed from midranks. The
// rank sums are half-integers, so the result matches a pairwise count
// exactly, not merely to rounding.
inline double auc(const std::vector<double>& scores_target,
                  const std::vector<double>& scores_nontarget) {
    if (scores_target.empty() || scores_nontarget.empty())
        throw std::invalid_argument("auc: both score lists must be non-empty");
    struct Entry {
        double score;
        int is_target;
    };
    std::vector<Entry> all;
    all.reserve(scores_target.size() + scores_nontarget.size());
    for (double s : scores_target) {
        if (!std::isfinite(s)) throw std::invalid_argument("auc: non-finite score");
        all.push_back({s, 1});
    }
    for (double s : scores_nontarget) {
        if (!std::isfinite(s)) throw std::invalid_argument("auc: non-finite score");
        all.push_back({s, 0});
    }
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    double rank_sum_target = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (all[k].is_target) rank_sum_target += midrank;
        i = j;
    }
    double nt = static_cast<double>(scores_target.size());
    double nn = static_cast<double>(scores_nontarget.size());
    double u = rank_sum_target - nt * (nt + 1.0) / 2.0;
    return u / (nt * nn);
}

// Gaussian KDE over decision scores, one density per class. Bandwidth is the
// Silverman rule 0.9 min(sd, IQR/1.34) n^(-1/5) with sd fallback when the
// IQR collapses. Degenerate inputs (a class with fewer than two distinct
// scores) disable calibration: the likelihood ratio is pinned at 1.
struct ScoreCalibration {
    std::vector<double> target_scores, nontarget_scores;
    double bandwidth_target = 0.0, bandwidth_nontarget = 0.0;
    bool degenerate = true;

    // log f(s) via log-sum-exp; stable far into the tails where both class
    // densities underflow.
    static double log_density(const std::vector<double>& xs, double h, double s) {
        double best = -std::numeric_limits<double>::infinity();
        for (double x : xs) {
            double e = -(s - x) * (s - x) / (2.0 * h * h);
            if (e > best) best = e;
        }
        double acc = 0.0;
        for (double x : xs)
            acc += std::exp(-(s - x) * (s - x) / (2.0 * h * h) - best);
        return best + std::log(acc) -
               std::log(static_cast<double>(xs.size()) * h * std::sqrt(2.0 * M_PI));
    }

    double likelihood_ratio(double score) const {
        if (degenerate) return 1.0;
        double dlog = log_density(target_scores, bandwidth_target, score) -
                      log_density(nontarget_scores, bandwidth_nontarget, score);
        if (dlog >= std::log(1e3)) return 1e3;
        if (dlog <= std::log(1e-3)) return 1e-3;
        return std::clamp(std::exp(dlog), 1e-3, 1e3);
    }
};

namespace detail {

inline double silverman_bandwidth(std::vector<double> xs) {
    std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::sort(xs.begin(), xs.end());
    double iqr = percentile_sorted(xs, 75.0) - percentile_sorted(xs, 25.0);
    double scale = std::min(sd, iqr / 1.34);
    if (scale <= 0.0) scale = sd;
    return 0.9 * scale * std::pow(static_cast<double>(n), -0.2);
}

} // namespace detail

inline ScoreCalibration fit_score_calibration(std::vector<double> target_scores,
                                              std::vector<double> nontarget_scores) {
    ScoreCalibration cal;
    cal.bandwidth_target = detail::silverman_bandwidth(target_scores);
    cal.bandwidth_nontarget = detail::silverman_bandwidth(nontarget_scores);
    cal.target_scores = std::move(target_scores);
    cal.nontarget_scores = std::move(nontarget_scores);
    cal.degenerate = !(cal.bandwidth_target > 0.0) || !(cal.bandwidth_nontarget > 0.0) ||
                     !std::isfinite(cal.bandwidth_target) ||
                     !std::isfinite(cal.bandwidth_nontarget);
    return cal;
}

struct ClassifierModel {
    double lambda = 0.0, gamma = 0.0;
    double cv_auc = 0.0;
    std::size_t n_features = 0;
    Standardizer standardizer;
    Eigen::VectorXd mean_target, mean_nontarget; // standardized space
    Eigen::MatrixXd chol_target, chol_nontarget; // lower Cholesky factors
    double logdet_target = 0.0, logdet_nontarget = 0.0;
    ScoreCalibration calibration;

    // Log-likelihood ratio target vs non-target; shared -d/2 log(2 pi) terms
    // cancel.
    double score(const std::vector<double>& features) const {
        Eigen::VectorXd z = standardizer.apply(features);
        double qt = chol_target.triangularView<Eigen::Lower>()
                        .solve(z - mean_target)
                        .squaredNorm();
        double qn = chol_nontarget.triangularView<Eigen::Lower>()
                        .solve(z - mean_nontarget)
                        .squaredNorm();
        return 0.5 * (qn - qt + logdet_nontarget - logdet_target);
    }

    double likelihood_ratio(const std::vector<double>& features) const {
        return calibration.likelihood_ratio(score(features));
    }
};

namespace detail {

struct ClassStats {
    double count = 0.0;
    Eigen::VectorXd mean;    // standardized space
    Eigen::MatrixXd scatter; // standardized space, centered
};

// Uncentered per-class sufficient statistics in raw feature space.
struct RawTotals {
    double count[2] = {0.0, 0.0};
    Eigen::VectorXd sum[2];
    Eigen::MatrixXd sxx[2];
};

struct StandardizedStats {
    Eigen::VectorXd mean, sd; // the z-scoring transform, both classes pooled
    ClassStats cls[2];
    ClassStats pooled;
};

// Everything downstream of the raw sums is pure arithmetic on sufficient
// statistics, so scaling every count, sum, and product matrix by the same
// power of two (duplicated training data) leaves the result bit-identical.
inline StandardizedStats standardize_stats(const RawTotals& raw) {
    const std::size_t d = raw.sum[0].size();
    StandardizedStats out;
    double n = raw.count[0] + raw.count[1];
    out.mean = (raw.sum[0] + raw.sum[1]) / n;
    out.sd.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        double ex2 = (raw.sxx[0](j, j) + raw.sxx[1](j, j)) / n;
        double v = std::max(ex2 - out.mean[j] * out.mean[j], 0.0);
        double sd = std::sqrt(v);
        out.sd[j] = sd > 0.0 ? sd : 1.0; // constant feature
    }
    Eigen::MatrixXd sd_outer = out.sd * out.sd.transpose();
    for (int c : {0, 1}) {
        ClassStats& st = out.cls[c];
        st.count = raw.count[c];
        Eigen::VectorXd mu = raw.sum[c] / raw.count[c];
        st.mean = (mu - out.mean).cwiseQuotient(out.sd);
        Eigen::MatrixXd scatter = raw.sxx[c] - raw.count[c] * mu * mu.transpose();
        st.scatter = scatter.cwiseQuotient(sd_outer);
    }
    out.pooled.count = n;
    out.pooled.scatter = out.cls[0].scatter + out.cls[1].scatter;
    return out;
}

// Friedman shrinkage: pool each class scatter toward the common scatter with
// weight lambda, then shrink toward a scaled identity with weight gamma.
inline Eigen::MatrixXd rda_covariance(const ClassStats& cls, const ClassStats& pooled,
                                      double lambda, double gamma) {
    double denom = (1.0 - lambda) * cls.count + lambda * pooled.count;
    Eigen::MatrixXd sigma =
        ((1.0 - lambda) * cls.scatter + lambda * pooled.scatter) / denom;
    double d = static_cast<double>(sigma.rows());
    return (1.0 - gamma) * sigma +
           (gamma * sigma.trace() / d) *
               Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
}

struct CholResult {
    bool ok = false;
    Eigen::MatrixXd l;
    double logdet = 0.0;
};

// Rejects factorizations whose pivots collapse relative to the largest one;
// those come from rank-deficient scatters that only look positive definite
// through roundoff.
inline CholResult guarded_llt(const Eigen::MatrixXd& m) {
    CholResult r;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return r;
    r.l = llt.matrixL();
    double dmin = r.l.diagonal().minCoeff();
    double dmax = r.l.diagonal().maxCoeff();
    if (!(dmin > 0.0) || dmin < 1e-7 * dmax) return r;
    r.logdet = 2.0 * r.l.diagonal().array().log().sum();
    r.ok = true;
    return r;
}

} // namespace detail

// Fits the discriminant at fixed (lambda, gamma) on every epoch in the set.
// cv_auc is left at zero; cross-validation owns that number.
inline ClassifierModel train_rda(const EpochSet& set, double lambda, double gamma) {
    if (lambda < 0.0 || lambda > 1.0 || gamma < 0.0 || gamma > 1.0)
        throw std::invalid_argument("train_rda: lambda and gamma must lie in [0, 1]");
    std::size_t nt = 0, nn = 0;
    for (int l : set.labels) (l ? nt : nn)++;
    if (nt < 2 || nn < 2)
        throw std::invalid_argument("train_rda: need at least two epochs per class");

    Eigen::MatrixXd f = feature_matrix(set);
    const std::size_t n = f.rows(), d = f.cols();

    detail::RawTotals raw;
    for (int c : {0, 1}) {
        raw.sum[c] = Eigen::VectorXd::Zero(d);
        raw.sxx[c] = Eigen::MatrixXd::Zero(d, d);
    }
    for (std::size_t i = 0; i < n; ++i) {
        int c = set.labels[i] ? 1 : 0;
        Eigen::VectorXd x = f.row(i).transpose();
        raw.count[c] += 1.0;
        raw.sum[c] += x;
        raw.sxx[c].selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    for (int c : {0, 1}) raw.sxx[c] = raw.sxx[c].selfadjointView<Eigen::Lower>();
    detail::StandardizedStats ss = detail::standardize_stats(raw);

    ClassifierModel model;
    model.lambda = lambda;
    model.gamma = gamma;
    model.n_features = d;
    model.standardizer.mean.assign(ss.mean.begin(), ss.mean.end());
    model.standardizer.sd.assign(ss.sd.begin(), ss.sd.end());

    detail::CholResult ch[2];
    for (int c : {0, 1}) {
        ch[c] = detail::guarded_llt(detail::rda_covariance(ss.cls[c], ss.pooled, lambda, gamma));
        if (!ch[c].ok) {
            if (gamma == 0.0)
                throw std::runtime_error(
                    "train_rda: class covariance is singular at gamma=0; increase gamma");
            throw std::runtime_error("train_rda: covariance not positive definite");
        }
    }
    model.mean_nontarget = ss.cls[0].mean;
    model.mean_target = ss.cls[1].mean;
    model.chol_nontarget = ch[0].l;
    model.chol_target = ch[1].l;
    model.logdet_nontarget = ch[0].logdet;
    model.logdet_target = ch[1].logdet;
    return model;
}

struct ClassifierConfig {
    std::size_t n_folds = 10;
    std::uint64_t seed = 1;
    std::vector<double> lambda_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> gamma_grid{0.0, 0.25, 0.5, 0.75, 1.0};
};

struct CrossvalResult {
    double lambda = 0.0, gamma = 0.0;
    double cv_auc = 0.0; // AUC of pooled held-out scores at the chosen point
    std::vector<double> heldout_target, heldout_nontarget; // at the chosen point
    // mean per-fold AUC for every grid point; NaN where a covariance was
    // singular in some fold.
    std::vector<std::vector<double>> mean_fold_auc; // [lambda index][gamma index]
};

// Stratified k-fold grid search. Folds are dealt round-robin from each
// class's event-id-sorted epoch list after one seeded shuffle (targets
// first), so the assignment depends on which epochs exist, never on their
// storage order. Selection maximizes the mean per-fold held-out AUC;
// ties keep the earliest grid point (lambda outer, gamma inner).
inline CrossvalResult crossval_auc(const EpochSet& set, const ClassifierConfig& cfg = {}) {
    if (cfg.n_folds < 2) throw std::invalid_argument("crossval_auc: need at least 2 folds");
    if (cfg.lambda_grid.empty() || cfg.gamma_grid.empty())
        throw std::invalid_argument("crossval_auc: empty parameter grid");
    if (set.event_ids.size() != set.n_epochs() || set.labels.size() != set.n_epochs())
        throw std::invalid_argument("crossval_auc: inconsistent epoch set");

    // Per-class epoch order keyed to event ids.
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < set.n_epochs(); ++i)
        by_class[set.labels[i] ? 1 : 0].push_back(i);
    for (auto& v : by_class)
        std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
            return set.event_ids[a] < set.event_ids[b];
        });
    if (by_class[0].size() < cfg.n_folds || by_class[1].size() < cfg.n_folds)
        throw std::invalid_argument("crossval_auc: need at least n_folds epochs per class");

    Rng rng(cfg.seed);
    rng.shuffle(by_class[1]); // targets first, then non-targets
    rng.shuffle(by_class[0]);

    const std::size_t k = cfg.n_folds;
    std::vector<std::vector<std::size_t>> fold_members(k); // epoch indices, deal order
    for (int c : {1, 0})
        for (std::size_t i = 0; i < by_class[c].size(); ++i)
            fold_members[i % k].push_back(by_class[c][i]);

    Eigen::MatrixXd f = feature_matrix(set);
    const std::size_t d = f.cols();

    // Uncentered sufficient statistics per fold and class; training-side
    // stats are totals minus the held-out fold.
    struct FoldStats {
        double count[2] = {0.0, 0.0};
        Eigen::VectorXd sum[2];
        Eigen::MatrixXd sxx[2];
    };
    std::vector<FoldStats> fs(k);
    for (std::size_t fi = 0; fi < k; ++fi) {
        for (int c : {0, 1}) {
            fs[fi].sum[c] = Eigen::VectorXd::Zero(d);
            fs[fi].sxx[c] = Eigen::MatrixXd::Zero(d, d);
        }
        for (std::size_t idx : fold_members[fi]) {
            int c = set.labels[idx] ? 1 : 0;
            Eigen::VectorXd x = f.row(idx).transpose();
            fs[fi].count[c] += 1.0;
            fs[fi].sum[c] += x;
            fs[fi].sxx[c].selfadjointView<Eigen::Lower>().rankUpdate(x);
        }
        for (int c : {0, 1})
            fs[fi].sxx[c] = fs[fi].sxx[c].selfadjointView<Eigen::Lower>();
    }
    double total_count[2] = {0.0, 0.0};
    Eigen::VectorXd total_sum[2] = {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
    Eigen::MatrixXd total_sxx[2] = {Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d)};
    for (std::size_t fi = 0; fi < k; ++fi)
        for (int c : {0, 1}) {
            total_count[c] += fs[fi].count[c];
            total_sum[c] += fs[fi].sum[c];
            total_sxx[c] += fs[fi].sxx[c];
        }

    const std::size_t nl = cfg.lambda_grid.size(), ng = cfg.gamma_grid.size();
    std::vector<std::vector<double>> auc_sum(nl, std::vector<double>(ng, 0.0));
    std::vector<std::vector<bool>> valid(nl, std::vector<bool>(ng, true));
    // Pooled held-out scores per grid point, split by label.
    std::vector<std::vector<std::vector<double>>> pooled(
        nl, std::vector<std::vector<double>>(ng));
    std::vector<std::vector<std::vector<double>>> pooled_nt(
        nl, std::vector<std::vector<double>>(ng));

    for (std::size_t fi = 0; fi < k; ++fi) {
        detail::RawTotals raw;
        for (int c : {0, 1}) {
            raw.count[c] = total_count[c] - fs[fi].count[c];
            raw.sum[c] = total_sum[c] - fs[fi].sum[c];
            raw.sxx[c] = total_sxx[c] - fs[fi].sxx[c];
        }
        detail::StandardizedStats ss = detail::standardize_stats(raw);

        // Held-out epochs standardized with this fold's training transform.
        const auto& members = fold_members[fi];
        Eigen::MatrixXd zheld(members.size(), d);
        for (std::size_t r = 0; r < members.size(); ++r)
            zheld.row(r) = (f.row(members[r]).transpose() - ss.mean)
                               .cwiseQuotient(ss.sd)
                               .transpose();

        for (std::size_t li = 0; li < nl; ++li) {
            for (std::size_t gi = 0; gi < ng; ++gi) {
                if (!valid[li][gi]) continue;
                double lambda = cfg.lambda_grid[li], gamma = cfg.gamma_grid[gi];
                detail::CholResult ch[2];
                bool ok = true;
                for (int c : {0, 1}) {
                    ch[c] = detail::guarded_llt(
                        detail::rda_covariance(ss.cls[c], ss.pooled, lambda, gamma));
                    if (!ch[c].ok) ok = false;
                }
                if (!ok) {
                    valid[li][gi] = false;
                    continue;
                }
                std::vector<double> st, sn;
                for (std::size_t r = 0; r < members.size(); ++r) {
                    Eigen::VectorXd zv = zheld.row(r).transpose();
                    double qt = ch[1].l.triangularView<Eigen::Lower>()
                                    .solve(zv - ss.cls[1].mean)
                                    .squaredNorm();
                    double qn = ch[0].l.triangularView<Eigen::Lower>()
                                    .solve(zv - ss.cls[0].mean)
                                    .squaredNorm();
                    double s = 0.5 * (qn - qt + ch[0].logdet - ch[1].logdet);
                    (set.labels[members[r]] ? st : sn).push_back(s);
                }
                auc_sum[li][gi] += auc(st, sn);
                auto& pt = pooled[li][gi];
                auto& pn = pooled_nt[li][gi];
                pt.insert(pt.end(), st.begin(), st.end());
                pn.insert(pn.end(), sn.begin(), sn.end());
            }
        }
    }

    CrossvalResult result;
    result.mean_fold_auc.assign(nl, std::vector<double>(ng, std::numeric_limits<double>::quiet_NaN()));
    double best = -1.0;
    std::size_t best_li = 0, best_gi = 0;
    bool any = false;
    for (std::size_t li = 0; li < nl; ++li)
        for (std::size_t gi = 0; gi < ng; ++gi) {
            if (!valid[li][gi]) continue;
            double mean_auc = auc_sum[li][gi] / static_cast<double>(k);
            result.mean_fold_auc[li][gi] = mean_auc;
            if (mean_auc > best) {
                best = mean_auc;
                best_li = li;
                best_gi = gi;
                any = true;
            }
        }
    if (!any)
        throw std::runtime_error(
            "crossval_auc: every grid point produced a singular covariance");
    result.lambda = cfg.lambda_grid[best_li];
    result.gamma = cfg.gamma_grid[best_gi];
    result.heldout_target = pooled[best_li][best_gi];
    result.heldout_nontarget = pooled_nt[best_li][best_gi];
    result.cv_auc = auc(result.heldout_target, result.heldout_nontarget);
    return result;
}

// Refits the score densities from the given epochs' resubstitution scores.
inline ClassifierModel calibrate_score_densities(ClassifierModel model,
                                                 const EpochSet& set) {
    std::vector<double> st, sn;
    for (std::size_t i = 0; i < set.n_epochs(); ++i) {
        double s = model.score(epoch_features(set, i));
        (set.labels[i] ? st : sn).push_back(s);
    }
    model.calibration = fit_score_calibration(std::move(st), std::move(sn));
    return model;
}

// Grid-searched cross-validation, final fit on all epochs at the chosen
// point, and calibration from the pooled held-out scores (held-out rather
// than resubstitution, so the densities match deployment scores).
inline ClassifierModel train_classifier(const EpochSet& set,
                                        const ClassifierConfig& cfg = {}) {
    CrossvalResult cv = crossval_auc(set, cfg);
    ClassifierModel model = train_rda(set, cv.lambda, cv.gamma);
    model.cv_auc = cv.cv_auc;
    model.calibration =
        fit_score_calibration(cv.heldout_target, cv.heldout_nontarget);
    return model;
}

inline constexpr int kClassifierModelFormatVersion = 1;

namespace detail {

inline std::vector<double> pack_lower(const Eigen::MatrixXd& l) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(l.rows()) * (l.rows() + 1) / 2);
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        for (Eigen::Index j = 0; j <= i; ++j) out.push_back(l(i, j));
    return out;
}

inline Eigen::MatrixXd unpack_lower(const std::vector<double>& v, std::size_t d) {
    if (v.size() != d * (d + 1) / 2)
        throw std::invalid_argument("classifier model: packed factor has wrong length");
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) l(i, j) = v[idx++];
    return l;
}

} // namespace detail

inline nlohmann::json model_to_json(const ClassifierModel& m) {
    nlohmann::json j;
    j["format_version"] = kClassifierModelFormatVersion;
    j["lambda"] = m.lambda;
    j["gamma"] = m.gamma;
    j["cv_auc"] = m.cv_auc;
    j["n_features"] = m.n_features;
    j["standardizer"] = {{"mean", m.standardizer.mean}, {"sd", m.standardizer.sd}};
    j["mean_target"] = std::vector<double>(m.mean_target.begin(), m.mean_target.end());
    j["mean_nontarget"] =
        std::vector<double>(m.mean_nontarget.begin(), m.mean_nontarget.end());
    j["chol_target"] = detail::pack_lower(m.chol_target);
    j["chol_nontarget"] = detail::pack_lower(m.chol_nontarget);
    j["logdet_target"] = m.logdet_target;
    j["logdet_nontarget"] = m.logdet_nontarget;
    j["calibration"] = {{"target_scores", m.calibration.target_scores},
                        {"nontarget_scores", m.calibration.nontarget_scores},
                        {"bandwidth_target", m.calibration.bandwidth_target},
                        {"bandwidth_nontarget", m.calibration.bandwidth_nontarget},
                        {"degenerate", m.calibration.degenerate}};
    return j;
}

inline ClassifierModel model_from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != kClassifierModelFormatVersion)
        throw std::invalid_argument("classifier model: unsupported format version");
    ClassifierModel m;
    m.lambda = j.at("lambda").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.cv_auc = j.at("cv_auc").get<double>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    m.standardizer.sd = j.at("standardizer").at("sd").get<std::vector<double>>();
    auto vec = [&](const char* key) {
        auto v = j.at(key).get<std::vector<double>>();
        return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()).eval();
    };
    m.mean_target = vec("mean_target");
    m.mean_nontarget = vec("mean_nontarget");
    m.chol_target = detail::unpack_lower(
        j.at("chol_target").get<std::vector<double>>(), m.n_features);
    m.chol_nontarget = detail::unpack_lower(
        j.at("chol_nontarget").get<std::vector<double>>(), m.n_features);
    m.logdet_target = j.at("logdet_target").get<double>();
    m.logdet_nontarget = j.at("logdet_nontarget").get<double>();
    const auto& c = j.at("calibration");
    m.calibration.target_scores = c.at("target_scores").get<std::vector<double>>();
    m.calibration.nontarget_scores = c.at("nontarget_scores").get<std::vector<double>>();
    m.calibration.bandwidth_target = c.at("bandwidth_target").get<double>();
    m.calibration.bandwidth_nontarget = c.at("bandwidth_nontarget").get<double>();
    m.calibration.degenerate = c.at("degenerate").get<bool>();
    if (m.standardizer.mean.size() != m.n_features ||
        m.standardizer.sd.size() != m.n_features ||
        static_cast<std::size_t>(m.mean_target.size()) != m.n_features ||
        static_cast<std::size_t>(m.mean_nontarget.size()) != m.n_features)
        throw std::invalid_argument("classifier model: inconsistent dimensions");
    return m;
}

} // namespace nfb
