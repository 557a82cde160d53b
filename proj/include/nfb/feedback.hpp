#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfb/detail/quantile.hpp"
#include "nfb/eeg.hpp"
#include "nfb/filters.hpp"
#include "nfb/welch.hpp"

namespace nfb {

// Ascending relative-alpha-PSD cutoffs. Percentile ranks 30/55/70/85 split
// the distribution into bands of 30/25/15/15/15 percent mapped to levels
// 5..1: low alpha reads as engaged attention and earns the best level, and
// the widest band sits at the top so feedback stays encouraging.
struct ThresholdSet {
    double t30 = 0.0;
    double t55 = 0.0;
    double t70 = 0.0;
    double t85 = 0.0;
    bool carried_forward = false;  // previous week's values reused for lack of data
};

// Cutoffs from at least 20 relative-PSD samples, each in [0, 1].
inline ThresholdSet compute_thresholds(std::vector<double> samples) {
    if (samples.size() < 20)
        throw std::invalid_argument("compute_thresholds: need at least 20 samples, got " +
                                    std::to_string(samples.size()));
    for (double v : samples)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("compute_thresholds: relative PSD outside [0, 1]");
    std::sort(samples.begin(), samples.end());
    ThresholdSet t;
    t.t30 = detail::percentile_sorted(samples, 30.0);
    t.t55 = detail::percentile_sorted(samples, 55.0);
    t.t70 = detail::percentile_sorted(samples, 70.0);
    t.t85 = detail::percentile_sorted(samples, 85.0);
    return t;
}

// Level bands, half-open at the lower edge:
//   v < t30 -> 5, [t30, t55) -> 4, [t55, t70) -> 3, [t70, t85) -> 2, >= t85 -> 1.
// Fully degenerate cutoffs (every calibration sample identical) put the
// entire mass in the lowest 30%, so a value equal to them reads as level 5.
inline int feedback_level(double value, const ThresholdSet& th) {
    if (!std::isfinite(value)) throw std::invalid_argument("feedback_level: non-finite value");
    if (th.t30 == th.t85 && value == th.t30) return 5;
    if (value < th.t30) return 5;
    if (value < th.t55) return 4;
    if (value < th.t70) return 3;
    if (value < th.t85) return 2;
    return 1;
}

// Fraction of sequences at each level; index 0 holds level 1.
inline std::array<double, 5> feedback_distribution(const std::vector<int>& levels) {
    if (levels.empty()) throw std::invalid_argument("feedback_distribution: no levels");
    std::array<double, 5> frac{};
    for (int l : levels) {
        if (l < 1 || l > 5) throw std::invalid_argument("feedback_distribution: level outside 1..5");
        frac[static_cast<std::size_t>(l - 1)] += 1.0;
    }
    for (auto& f : frac) f /= static_cast<double>(levels.size());
    return frac;
}

enum class StudyPhase { baseline, intervention, followup };

inline const char* to_string(StudyPhase p) {
    switch (p) {
        case StudyPhase::baseline: return "baseline";
        case StudyPhase::intervention: return "intervention";
        case StudyPhase::followup: return "followup";
    }
    throw std::invalid_argument("unknown StudyPhase");
}

// Relative-PSD samples grouped by the session that produced them.
struct SessionSamples {
    StudyPhase phase = StudyPhase::baseline;
    int week = 0;  // 1-based within its phase
    std::vector<double> samples;
};

using WeekHistory = std::vector<SessionSamples>;

// Thresholds for intervention week `week_index` (1-based). Week 1 pools
// every baseline session; later weeks recalibrate from the previous
// intervention week only, so the difficulty tracks the training. When the
// source week contributed too little data the previous thresholds are
// retained and flagged.
inline ThresholdSet update_thresholds_weekly(const WeekHistory& history, int week_index,
                                             const ThresholdSet* previous = nullptr) {
    if (week_index < 1) throw std::invalid_argument("update_thresholds_weekly: week index is 1-based");
    std::vector<double> pool;
    for (const auto& s : history) {
        bool use = (week_index == 1) ? s.phase == StudyPhase::baseline
                                     : (s.phase == StudyPhase::intervention && s.week == week_index - 1);
        if (use) pool.insert(pool.end(), s.samples.begin(), s.samples.end());
    }
    if (pool.size() < 20) {
        if (previous) {
            ThresholdSet t = *previous;
            t.carried_forward = true;
            return t;
        }
        throw std::invalid_argument("update_thresholds_weekly: source week has too few samples and no "
                                    "previous thresholds to retain");
    }
    return compute_thresholds(std::move(pool));
}

struct SequencePsd {
    BandPowerResult power;
    bool repaired = false;  // non-finite samples were patched by interpolation
};

struct SequenceFeedback {
    BandPowerResult power;
    int level = 0;
    bool repaired = false;
};

// Online relative alpha for one sequence: repair non-finite samples, causal
// 7-20 Hz bandpass on the feedback channel (stream order preserved, as the
// display cannot wait for future samples), Welch relative alpha over the
// sequence window. Baseline sessions record this without showing feedback.
inline SequencePsd sequence_relative_psd(const EegBlock& block, const TimeWindow& window,
                                         const std::string& channel = "P4",
                                         const AlphaBandConfig& config = {}) {
    std::size_t c = block.channel_index(channel);
    std::size_t end = block.index_at(window.t_end) + 1;
    std::vector<double> x(block.data[c].begin(), block.data[c].begin() + end);

    SequencePsd out;
    // Linear interpolation across non-finite runs; edges hold the nearest
    // finite value. A fully dead channel cannot be repaired.
    std::size_t first_ok = x.size();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::isfinite(x[i])) {
            first_ok = i;
            break;
        }
    if (first_ok == x.size())
        throw std::invalid_argument("sequence_relative_psd: channel has no finite samples");
    for (std::size_t i = 0; i < first_ok; ++i) {
        x[i] = x[first_ok];
        out.repaired = true;
    }
    std::size_t i = first_ok;
    while (i < x.size()) {
        if (std::isfinite(x[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < x.size() && !std::isfinite(x[j])) ++j;
        double left = x[i - 1];
        if (j == x.size()) {
            for (std::size_t k = i; k < j; ++k) x[k] = left;
        } else {
            double right = x[j];
            double span = static_cast<double>(j - i + 1);
            for (std::size_t k = i; k < j; ++k)
                x[k] = left + (right - left) * static_cast<double>(k - i + 1) / span;
        }
        out.repaired = true;
        i = j;
    }

    SosChain sos = butter_bandpass(4, config.wide_lo, config.wide_hi, block.sample_rate);
    std::vector<double> filtered = sosfilt(sos, x);

    EegBlock fb;
    fb.sample_rate = block.sample_rate;
    fb.t0 = block.t0;
    fb.channels = {channel};
    fb.data = {std::move(filtered)};
    out.power = relative_alpha_power(fb, channel, window, config);
    return out;
}

// The full online step: relative alpha, then the level mapping. Runs in well
// under the pre-display budget.
inline SequenceFeedback sequence_feedback(const EegBlock& block, const TimeWindow& window,
                                          const ThresholdSet& thresholds,
                                          const std::string& channel = "P4",
                                          const AlphaBandConfig& config = {}) {
    SequencePsd psd = sequence_relative_psd(block, window, channel, config);
    SequenceFeedback out;
    out.power = psd.power;
    out.repaired = psd.repaired;
    out.level = feedback_level(out.power.relative, thresholds);
    return out;
}

}  // namespace nfb
