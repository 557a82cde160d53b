#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfb {

// Montage used throughout: frontocentral + EOG site + parietal/occipital row.
// F7 doubles as the EOG reference for blink handling.
inline const std::vector<std::string>& canonical_montage() {
    static const std::vector<std::string> m = {"FCz", "F7", "Pz", "P4", "PO7", "PO8", "Oz"};
    return m;
}

// Small closed interval of absolute time, seconds.
struct TimeWindow {
    double t_begin = 0.0;
    double t_end = 0.0;

    double length() const { return t_end - t_begin; }
};

// A multichannel recording slab. data[c][i] is channel c, frame i, microvolts.
// t0 is the absolute time of frame 0; all event times in a session log refer
// to the same clock.
struct EegBlock {
    double sample_rate = 0.0;
    double t0 = 0.0;
    std::vector<std::string> channels;
    std::vector<std::vector<double>> data;

    std::size_t n_channels() const { return channels.size(); }

    std::size_t n_samples() const { return data.empty() ? 0 : data.front().size(); }

    double duration() const { return sample_rate > 0.0 ? n_samples() / sample_rate : 0.0; }

    std::size_t channel_index(const std::string& name) const {
        for (std::size_t c = 0; c < channels.size(); ++c)
            if (channels[c] == name) return c;
        throw std::invalid_argument("EegBlock: no channel named " + name);
    }

    // Nearest frame index for an absolute time; clamped to the valid range.
    std::size_t index_at(double t) const {
        double i = std::round((t - t0) * sample_rate);
        if (i < 0.0) return 0;
        std::size_t n = n_samples();
        if (n == 0) return 0;
        if (i > static_cast<double>(n - 1)) return n - 1;
        return static_cast<std::size_t>(i);
    }

    // Equal channel lengths, positive rate, all samples finite. Reports the
    // first offending sample so corrupted archives are diagnosable.
    void validate() const {
        if (sample_rate <= 0.0) throw std::invalid_argument("EegBlock: sample_rate must be positive");
        if (channels.size() != data.size())
            throw std::invalid_argument("EegBlock: channel label count does not match data rows");
        std::size_t n = n_samples();
        for (std::size_t c = 0; c < data.size(); ++c) {
            if (data[c].size() != n)
                throw std::invalid_argument("EegBlock: channel " + channels[c] + " has mismatched length");
            for (std::size_t i = 0; i < data[c].size(); ++i) {
                if (!std::isfinite(data[c][i]))
                    throw std::invalid_argument("EegBlock: non-finite sample at channel " + channels[c] +
                                                " index " + std::to_string(i));
            }
        }
    }
};

// Copies [t_begin, t_end) out of a block. The slice keeps the source clock:
// its t0 is the time of the first copied frame.
inline EegBlock slice(const EegBlock& block, const TimeWindow& w) {
    if (w.t_end < w.t_begin) throw std::invalid_argument("slice: window ends before it begins");
    double fs = block.sample_rate;
    long i0 = std::lround((w.t_begin - block.t0) * fs);
    long i1 = std::lround((w.t_end - block.t0) * fs);
    long n = static_cast<long>(block.n_samples());
    if (i0 < 0) i0 = 0;
    if (i1 > n) i1 = n;
    if (i0 > i1) i0 = i1;
    EegBlock out;
    out.sample_rate = fs;
    out.t0 = block.t0 + static_cast<double>(i0) / fs;
    out.channels = block.channels;
    out.data.resize(block.data.size());
    for (std::size_t c = 0; c < block.data.size(); ++c)
        out.data[c].assign(block.data[c].begin() + i0, block.data[c].begin() + i1);
    return out;
}

// Appends b to a in place. Rates and montages must agree; b's clock is
// assumed to continue a's (the caller owns scheduling).
inline void append(EegBlock& a, const EegBlock& b) {
    if (a.n_channels() == 0 && a.n_samples() == 0) {
        a = b;
        return;
    }
    if (a.sample_rate != b.sample_rate) throw std::invalid_argument("append: sample rates differ");
    if (a.channels != b.channels) throw std::invalid_argument("append: montages differ");
    for (std::size_t c = 0; c < a.data.size(); ++c)
        a.data[c].insert(a.data[c].end(), b.data[c].begin(), b.data[c].end());
}

}  // namespace nfb
