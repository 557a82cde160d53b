#pragma once

// Offline ERP pipeline: preprocessing, regression-based blink removal,
// segmentation with baseline correction, four-rule artifact rejection,
// averaging, and N200/P300 peak quantification.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfb/eeg.hpp"
#include "nfb/events.hpp"
#include "nfb/filters.hpp"

namespace nfb {

inline constexpr double kErpRate = 150.0;
inline constexpr double kErpPreStimulusS = 0.200;
inline constexpr double kErpPostStimulusS = 1.000;

// Artifact thresholds. The step rule fires on a consecutive-sample difference
// above 50 uV: the source criterion is stated per millisecond at the
// analyzer's 1 kHz reference rate, where one sampling step spans exactly 1 ms.
inline constexpr double kStepThresholdUv = 50.0;
inline constexpr double kWindowChangeUv = 125.0;
inline constexpr double kWindowChangeS = 0.050;
inline constexpr double kAbsAmplitudeUv = 75.0;
inline constexpr double kFlatThresholdUv = 0.5;
inline constexpr double kFlatDurationS = 0.100;

// Peak search windows, milliseconds after stimulus onset.
inline constexpr double kN200WindowMs[2] = {250.0, 400.0};
inline constexpr double kP300WindowMs[2] = {350.0, 500.0};
inline constexpr double kOppositePeakLookbackMs = 200.0;

// Raw 300 Hz recording to the offline analysis stream: 150 Hz, 1-45 Hz
// zero-phase bandpass, 60 Hz notch.
inline EegBlock preprocess_offline(const EegBlock& eeg) {
    EegBlock out = downsample(eeg, kErpRate);
    out = bandpass_filter(out, 1.0, 45.0, FilterMode::zero_phase);
    out = notch_filter(out, 60.0, FilterMode::zero_phase);
    return out;
}

struct BlinkRemoval {
    EegBlock eeg;
    bool applied = false;  // false: no samples crossed the blink threshold
    std::vector<double> coefficients;  // per channel; 0 for the EOG channel
    std::size_t n_blink_samples = 0;
};

// Regression-based blink subtraction. The coefficient of each channel onto
// the EOG trace is estimated on blink samples only (|EOG| above threshold)
// and the scaled EOG is subtracted from the full record, so blink tails
// below threshold are corrected too.
inline BlinkRemoval remove_blinks(const EegBlock& eeg, const std::string& eog_channel = "F7",
                                  double threshold_uv = 75.0) {
    BlinkRemoval out{eeg, false, std::vector<double>(eeg.n_channels(), 0.0), 0};
    const std::size_t eog = eeg.channel_index(eog_channel);
    const std::vector<double>& ref = eeg.data[eog];

    std::vector<std::size_t> blink;
    for (std::size_t i = 0; i < ref.size(); ++i)
        if (std::abs(ref[i]) > threshold_uv) blink.push_back(i);
    out.n_blink_samples = blink.size();
    if (blink.empty()) return out;

    double see = 0.0;
    for (std::size_t i : blink) see += ref[i] * ref[i];
    for (std::size_t c = 0; c < eeg.n_channels(); ++c) {
        if (c == eog) continue;
        double sxe = 0.0;
        for (std::size_t i : blink) sxe += eeg.data[c][i] * ref[i];
        double b = sxe / see;
        out.coefficients[c] = b;
        for (std::size_t i = 0; i < ref.size(); ++i) out.eeg.data[c][i] -= b * ref[i];
    }
    out.applied = true;
    return out;
}

struct ArtifactFlags {
    bool step = false;       // consecutive-sample jump
    bool window = false;     // peak-to-peak change within 50 ms
    bool amplitude = false;  // absolute value beyond +/-75 uV
    bool flat = false;       // sub-0.5 uV stretch longer than 100 ms
    bool any() const { return step || window || amplitude || flat; }
};

struct ErpEpoch {
    int label = 0;  // 1 = target
    std::size_t event_id = 0;
    double sample_rate = kErpRate;
    std::size_t n_samples = 0;
    std::vector<std::string> channels;
    std::vector<double> data;  // [channel * n_samples + s]
    ArtifactFlags flags;

    double at(std::size_t ch, std::size_t s) const { return data[ch * n_samples + s]; }
    std::size_t stimulus_index() const {
        return static_cast<std::size_t>(std::lround(kErpPreStimulusS * sample_rate));
    }
};

struct SegmentResult {
    std::vector<ErpEpoch> epochs;
    std::vector<std::size_t> dropped_event_ids;  // windows running past the block
};

// Letter-locked epochs, -200..+1000 ms, baseline defined as the mean of the
// 200 ms strictly before stimulus onset and subtracted per channel.
inline SegmentResult segment_and_baseline(const EegBlock& eeg, const SessionLog& log) {
    const double fs = eeg.sample_rate;
    const long pre = std::lround(kErpPreStimulusS * fs);
    const long post = std::lround(kErpPostStimulusS * fs);
    if (pre < 1) throw std::invalid_argument("segment_and_baseline: sample rate too low");
    const std::size_t n_samples = static_cast<std::size_t>(pre + post + 1);
    const long n = static_cast<long>(eeg.n_samples());

    SegmentResult out;
    for (std::size_t id = 0; id < log.events.size(); ++id) {
        const SessionEvent& ev = log.events[id];
        if (ev.kind != EventKind::letter) continue;
        long stim = std::lround((ev.t - eeg.t0) * fs);
        if (stim - pre < 0 || stim + post >= n) {
            out.dropped_event_ids.push_back(id);
            continue;
        }
        ErpEpoch ep;
        ep.label = ev.is_target ? 1 : 0;
        ep.event_id = id;
        ep.sample_rate = fs;
        ep.n_samples = n_samples;
        ep.channels = eeg.channels;
        ep.data.resize(eeg.n_channels() * n_samples);
        for (std::size_t c = 0; c < eeg.n_channels(); ++c) {
            const std::vector<double>& src = eeg.data[c];
            double baseline = 0.0;
            for (long s = stim - pre; s < stim; ++s) baseline += src[static_cast<std::size_t>(s)];
            baseline /= static_cast<double>(pre);
            for (std::size_t s = 0; s < n_samples; ++s)
                ep.data[c * n_samples + s] =
                    src[static_cast<std::size_t>(stim - pre + static_cast<long>(s))] - baseline;
        }
        out.epochs.push_back(std::move(ep));
    }
    return out;
}

namespace detail {

inline void flag_artifacts(ErpEpoch& ep) {
    const double fs = ep.sample_rate;
    // Largest window fully contained in 50 ms, and the shortest run strictly
    // longer than 100 ms.
    const std::size_t w =
        static_cast<std::size_t>(std::floor(kWindowChangeS * fs + 1e-9)) + 1;
    const std::size_t flat_run =
        static_cast<std::size_t>(std::floor(kFlatDurationS * fs + 1e-9)) + 2;

    ep.flags = ArtifactFlags{};
    for (std::size_t c = 0; c < ep.channels.size(); ++c) {
        const double* v = ep.data.data() + c * ep.n_samples;
        const std::size_t ns = ep.n_samples;

        for (std::size_t s = 0; s + 1 < ns; ++s)
            if (std::abs(v[s + 1] - v[s]) > kStepThresholdUv) ep.flags.step = true;

        for (std::size_t s = 0; s + w <= ns; ++s) {
            double lo = v[s], hi = v[s];
            for (std::size_t k = 1; k < w; ++k) {
                lo = std::min(lo, v[s + k]);
                hi = std::max(hi, v[s + k]);
            }
            if (hi - lo > kWindowChangeUv) ep.flags.window = true;
        }

        for (std::size_t s = 0; s < ns; ++s)
            if (std::abs(v[s]) > kAbsAmplitudeUv) ep.flags.amplitude = true;

        std::size_t run = 0;
        for (std::size_t s = 0; s < ns; ++s) {
            run = std::abs(v[s]) < kFlatThresholdUv ? run + 1 : 0;
            if (run >= flat_run) ep.flags.flat = true;
        }
    }
}

}  // namespace detail

// Four independent boolean flags per epoch; an epoch is rejected when any is
// set. Thresholds are fixed in microvolts, so the rules are scale-covariant.
inline std::vector<ErpEpoch> reject_artifacts(std::vector<ErpEpoch> epochs) {
    for (ErpEpoch& ep : epochs) detail::flag_artifacts(ep);
    return epochs;
}

struct ErpAverage {
    int label = 0;
    std::size_t n = 0;  // accepted epochs averaged
    double sample_rate = kErpRate;
    std::size_t n_samples = 0;
    std::vector<std::string> channels;
    std::vector<double> data;  // [channel * n_samples + s]

    double at(std::size_t ch, std::size_t s) const { return data[ch * n_samples + s]; }
    std::size_t channel_index(const std::string& name) const {
        for (std::size_t c = 0; c < channels.size(); ++c)
            if (channels[c] == name) return c;
        throw std::out_of_range("ErpAverage: unknown channel " + name);
    }
    double time_ms(std::size_t s) const {
        return (static_cast<double>(s) - kErpPreStimulusS * sample_rate) * 1000.0 / sample_rate;
    }
};

// Pointwise mean over accepted epochs of one label.
inline ErpAverage average_erp(const std::vector<ErpEpoch>& epochs, int label) {
    ErpAverage avg;
    avg.label = label;
    for (const ErpEpoch& ep : epochs) {
        if (ep.label != label || ep.flags.any()) continue;
        if (avg.n == 0) {
            avg.sample_rate = ep.sample_rate;
            avg.n_samples = ep.n_samples;
            avg.channels = ep.channels;
            avg.data.assign(ep.data.size(), 0.0);
        }
        if (ep.data.size() != avg.data.size())
            throw std::invalid_argument("average_erp: epochs disagree in shape");
        for (std::size_t i = 0; i < ep.data.size(); ++i) avg.data[i] += ep.data[i];
        ++avg.n;
    }
    if (avg.n == 0)
        throw std::invalid_argument("average_erp: no accepted epochs with the requested label");
    for (double& v : avg.data) v /= static_cast<double>(avg.n);
    return avg;
}

struct PeakMeasurement {
    std::string component;
    double latency_ms = 0.0;
    double amplitude_uv = 0.0;  // peak-to-trough against the preceding opposite peak
    bool low_confidence = false;
};

struct PeakPair {
    PeakMeasurement n200;
    PeakMeasurement p300;
};

namespace detail {

// Window extremum plus preceding-opposite-peak search. `sign` is +1 for a
// positive component. An opposite peak must be a strict extremum over a
// +/-20 ms neighborhood, so sample-scale noise wiggles do not qualify. If no
// such peak exists within the lookback, the window-start voltage stands in
// and the result is flagged.
inline PeakMeasurement measure_component(const char* name, const double* v, std::size_t ns,
                                         double fs, std::size_t stim, const double window_ms[2],
                                         int sign) {
    const std::size_t lo = static_cast<std::size_t>(
        std::ceil(static_cast<double>(stim) + window_ms[0] * fs / 1000.0 - 1e-9));
    const std::size_t hi = static_cast<std::size_t>(
        std::floor(static_cast<double>(stim) + window_ms[1] * fs / 1000.0 + 1e-9));
    if (hi >= ns || lo > hi)
        throw std::invalid_argument("detect_peaks: waveform does not cover the search window");

    std::size_t best = lo;
    for (std::size_t s = lo + 1; s <= hi; ++s)
        if (sign * v[s] > sign * v[best]) best = s;

    PeakMeasurement m;
    m.component = name;
    m.latency_ms = (static_cast<double>(best) - static_cast<double>(stim)) * 1000.0 / fs;
    m.low_confidence = best == lo || best == hi;

    const std::size_t lookback =
        static_cast<std::size_t>(std::lround(kOppositePeakLookbackMs * fs / 1000.0));
    const std::size_t w = static_cast<std::size_t>(std::lround(0.020 * fs));
    auto opposite_peak = [&](std::size_t s) {
        std::size_t a = s >= w ? s - w : 0;
        std::size_t b = std::min(ns - 1, s + w);
        for (std::size_t j = a; j <= b; ++j)
            if (j != s && sign * v[j] <= sign * v[s]) return false;
        return true;
    };
    double reference = v[lo];
    bool found = false;
    for (std::size_t s = best; s-- > 0;) {
        if (best - s > lookback) break;
        if (opposite_peak(s)) {
            reference = v[s];
            found = true;
            break;
        }
    }
    if (!found) m.low_confidence = true;
    m.amplitude_uv = sign * (v[best] - reference);
    return m;
}

}  // namespace detail

// N200 = most negative sample in 250-400 ms, P300 = most positive in
// 350-500 ms; amplitudes are peak-to-trough against the most recent
// opposite-polarity peak. Boundary or missing peaks are flagged, not errors.
inline PeakPair detect_peaks(const ErpAverage& avg, const std::string& channel = "Pz") {
    const std::size_t c = avg.channel_index(channel);
    const double* v = avg.data.data() + c * avg.n_samples;
    const std::size_t stim =
        static_cast<std::size_t>(std::lround(kErpPreStimulusS * avg.sample_rate));
    PeakPair out;
    out.n200 = detail::measure_component("N200", v, avg.n_samples, avg.sample_rate, stim,
                                         kN200WindowMs, -1);
    out.p300 = detail::measure_component("P300", v, avg.n_samples, avg.sample_rate, stim,
                                         kP300WindowMs, +1);
    return out;
}

struct PeakRow {
    std::string channel;
    PeakMeasurement peak;
    std::size_t n_epochs = 0;
};

inline std::string peak_table_csv(const std::vector<PeakRow>& rows) {
    std::ostringstream os;
    os << "channel,component,latency_ms,amplitude_uv,n_epochs,flags\n";
    for (const PeakRow& r : rows)
        os << r.channel << ',' << r.peak.component << ',' << r.peak.latency_ms << ','
           << r.peak.amplitude_uv << ',' << r.n_epochs << ','
           << (r.peak.low_confidence ? "low_confidence" : "ok") << '\n';
    return os.str();
}

inline std::string erp_average_csv(const ErpAverage& avg) {
    std::ostringstream os;
    os << "time_ms";
    for (const std::string& ch : avg.channels) os << ',' << ch;
    os << '\n';
    for (std::size_t s = 0; s < avg.n_samples; ++s) {
        os << avg.time_ms(s);
        for (std::size_t c = 0; c < avg.channels.size(); ++c) os << ',' << avg.at(c, s);
        os << '\n';
    }
    return os.str();
}

}  // namespace nfb
