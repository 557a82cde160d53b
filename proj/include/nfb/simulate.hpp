#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nfb/detail/fft.hpp"
#include "nfb/eeg.hpp"
#include "nfb/events.hpp"
#include "nfb/rng.hpp"

namespace nfb {

// Generative model of one participant. Amplitudes are microvolts. Alpha
// amplitude follows the attention link
//     amp = alpha_base_amp * (1 + alpha_attention_gain * (1 - a))
// so a fully inattentive state (a = 0) carries (1 + gain) times the alpha of
// a fully attentive one; gain 0.17 reproduces the 17% difference the
// feedback design is built around. ERP amplitudes scale directly with a.
struct SubjectProfile {
    double alpha_peak_hz = 9.0;
    double alpha_base_amp = 10.0;
    double alpha_attention_gain = 0.17;
    double p300_amp = 8.0;
    double p300_latency_s = 0.400;
    double n200_amp = 5.0;  // magnitude; injected as a negative deflection
    double n200_latency_s = 0.300;
    double ssvep_amp = 1.5;
    double emg_level = 0.0;
    double blink_rate_per_min = 0.0;
    double noise_scale = 4.0;  // RMS of the 1/f background per channel
    std::uint64_t rng_seed = 1;
};

// Mean-reverting attention state, one value per sequence:
// a' = a + theta * (mean - a) + sigma * e, clipped to [0, 1].
struct AttentionWalk {
    double theta = 0.2;
    double mean = 0.6;
    double sigma = 0.15;
};

inline std::vector<double> attention_trajectory(const AttentionWalk& w, std::size_t n, Rng& rng) {
    if (!(w.theta >= 0.0 && w.theta <= 1.0))
        throw std::invalid_argument("attention_trajectory: theta must lie in [0, 1]");
    if (!(w.mean >= 0.0 && w.mean <= 1.0))
        throw std::invalid_argument("attention_trajectory: mean must lie in [0, 1]");
    if (w.sigma < 0.0) throw std::invalid_argument("attention_trajectory: sigma must be >= 0");
    std::vector<double> a(n);
    double cur = w.mean;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = cur;
        cur = cur + w.theta * (w.mean - cur) + w.sigma * rng.normal();
        cur = std::clamp(cur, 0.0, 1.0);
    }
    return a;
}

namespace detail {

// 1/f background by spectral shaping: white noise, amplitude-scaled by
// f^-1/2 above 1 Hz (flat below), normalized to the requested RMS after
// truncation. Deterministic in the rng stream.
inline std::vector<double> pink_noise(std::size_t n, double rms_uv, double fs, Rng& rng) {
    if (n == 0) return {};
    std::size_t nfft = next_pow2(std::max<std::size_t>(n, 2));
    std::vector<std::complex<double>> buf(nfft);
    for (auto& v : buf) v = rng.normal();
    fft(buf);
    for (std::size_t k = 0; k < nfft; ++k) {
        double f = (k <= nfft / 2 ? k : nfft - k) * fs / static_cast<double>(nfft);
        buf[k] *= (k == 0) ? 0.0 : 1.0 / std::sqrt(std::max(f, 1.0));
    }
    fft(buf, true);
    std::vector<double> x(n);
    double msq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = buf[i].real();
        msq += x[i] * x[i];
    }
    msq /= static_cast<double>(n);
    double scale = (msq > 0.0 && rms_uv > 0.0) ? rms_uv / std::sqrt(msq) : 0.0;
    for (auto& v : x) v *= scale;
    return x;
}

inline void add_gaussian_pulse(std::vector<double>& ch, double fs, double t0_block, double center_s,
                               double amp, double fwhm_s) {
    double sigma = fwhm_s / 2.3548200450309493;  // FWHM -> sd
    for (std::size_t i = 0; i < ch.size(); ++i) {
        double t = t0_block + static_cast<double>(i) / fs;
        double d = (t - center_s) / sigma;
        ch[i] += amp * std::exp(-0.5 * d * d);
    }
}

}  // namespace detail

// Synthesizes the recording for one stimulus sequence. `attention` is the
// scalar state for the whole sequence; `events` supplies letter onsets (only
// letter events are consulted). The output spans [t0, t0 + duration) on all
// seven canonical channels. The same (profile, attention, events, stream)
// always yields the identical block; streams index sequences so any sequence
// can be regenerated in isolation.
//
// Composition, purely additive: 1/f noise everywhere; attention-modulated
// alpha plus SSVEP (letter rate and its second harmonic) posteriorly; N200
// and P300 pulses on Pz and P4 after each target letter, scaled by
// attention; optional EMG bursts on the occipital row; blink artifacts on F7
// with a fixed 20% bleed onto FCz.
inline EegBlock simulate_sequence(const SubjectProfile& p, double attention,
                                  const std::vector<SessionEvent>& events, double t0,
                                  double duration, double fs, std::uint64_t stream) {
    if (!(attention >= 0.0 && attention <= 1.0))
        throw std::invalid_argument("simulate_sequence: attention must lie in [0, 1]");
    if (!(duration > 0.0) || !(fs > 0.0))
        throw std::invalid_argument("simulate_sequence: duration and rate must be positive");

    const auto& montage = canonical_montage();
    std::size_t n = static_cast<std::size_t>(std::lround(duration * fs));
    EegBlock block;
    block.sample_rate = fs;
    block.t0 = t0;
    block.channels = montage;
    block.data.assign(montage.size(), std::vector<double>(n, 0.0));

    Rng rng = Rng::split(p.rng_seed, stream);

    // Draw order is part of the format: background noise per channel first,
    // then alpha phases, then EMG, then blinks.
    for (auto& ch : block.data) {
        std::vector<double> noise = detail::pink_noise(n, p.noise_scale, fs, rng);
        for (std::size_t i = 0; i < n; ++i) ch[i] += noise[i];
    }

    static const std::vector<std::string> posterior = {"Pz", "P4", "PO7", "PO8", "Oz"};
    double alpha_amp = p.alpha_base_amp * (1.0 + p.alpha_attention_gain * (1.0 - attention));
    for (const auto& name : posterior) {
        double phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        auto& ch = block.data[block.channel_index(name)];
        for (std::size_t i = 0; i < n; ++i)
            ch[i] += alpha_amp * std::sin(2.0 * 3.14159265358979323846 * p.alpha_peak_hz * i / fs + phase);
    }

    std::vector<const SessionEvent*> letters;
    for (const auto& e : events)
        if (e.kind == EventKind::letter) letters.push_back(&e);

    if (letters.size() >= 2 && p.ssvep_amp > 0.0) {
        double rate = 1.0 / (letters[1]->t - letters[0]->t);
        double t_first = letters.front()->t;
        static const std::vector<std::string> occipital = {"Oz", "PO7", "PO8"};
        for (const auto& name : occipital) {
            auto& ch = block.data[block.channel_index(name)];
            for (std::size_t i = 0; i < n; ++i) {
                double t = t0 + i / fs - t_first;
                ch[i] += p.ssvep_amp * std::sin(2.0 * 3.14159265358979323846 * rate * t) +
                         0.5 * p.ssvep_amp * std::sin(2.0 * 3.14159265358979323846 * 2.0 * rate * t);
            }
        }
    }

    auto& pz = block.data[block.channel_index("Pz")];
    auto& p4 = block.data[block.channel_index("P4")];
    for (const auto* e : letters) {
        if (!e->is_target) continue;
        double n200 = -p.n200_amp * attention;
        double p300 = p.p300_amp * attention;
        detail::add_gaussian_pulse(pz, fs, t0, e->t + p.n200_latency_s, n200, 0.060);
        detail::add_gaussian_pulse(pz, fs, t0, e->t + p.p300_latency_s, p300, 0.120);
        detail::add_gaussian_pulse(p4, fs, t0, e->t + p.n200_latency_s, 0.7 * n200, 0.060);
        detail::add_gaussian_pulse(p4, fs, t0, e->t + p.p300_latency_s, 0.7 * p300, 0.120);
    }

    if (p.emg_level > 0.0) {
        static const std::vector<std::string> occipital = {"Oz", "PO7", "PO8"};
        std::size_t burst = static_cast<std::size_t>(std::lround(0.5 * fs));
        for (const auto& name : occipital) {
            auto& ch = block.data[block.channel_index(name)];
            for (std::size_t off = 0; off < n; off += burst) {
                bool active = rng.uniform() < 0.3;
                if (!active) continue;
                std::size_t end = std::min(n, off + burst);
                for (std::size_t i = off; i < end; ++i) ch[i] += rng.normal(0.0, p.emg_level);
            }
        }
    }

    if (p.blink_rate_per_min > 0.0) {
        const double width = 0.400;
        std::uint64_t count = rng.poisson(p.blink_rate_per_min * duration / 60.0);
        auto& f7 = block.data[block.channel_index("F7")];
        auto& fcz = block.data[block.channel_index("FCz")];
        for (std::uint64_t b = 0; b < count; ++b) {
            double onset = rng.uniform(0.0, std::max(duration - width, 0.0));
            long i0 = std::lround(onset * fs);
            long i1 = std::min(static_cast<long>(n) - 1, std::lround((onset + width) * fs));
            for (long i = i0; i <= i1; ++i) {
                double tau = (i / fs - onset) / width;  // 0..1 across the blink
                double v = 150.0 * std::sin(3.14159265358979323846 * tau);
                f7[static_cast<std::size_t>(i)] += v;
                fcz[static_cast<std::size_t>(i)] += 0.2 * v;
            }
        }
    }

    return block;
}

// Stateful wrapper holding a profile and its attention walk for one session.
// The trajectory is drawn up front so per-sequence EEG streams stay
// independent of how many sequences were generated before.
class SimSubject {
public:
    explicit SimSubject(SubjectProfile profile, AttentionWalk walk = {})
        : profile_(profile), walk_(walk) {}

    void start_session(std::uint64_t session_seed, std::size_t n_sequences) {
        session_seed_ = session_seed;
        Rng rng = Rng::split(profile_.rng_seed ^ session_seed, 0);
        trajectory_ = attention_trajectory(walk_, n_sequences, rng);
    }

    double attention_at(std::size_t sequence_index) const {
        if (sequence_index >= trajectory_.size())
            throw std::out_of_range("SimSubject: sequence index beyond the started session");
        return trajectory_[sequence_index];
    }

    EegBlock sequence_eeg(const std::vector<SessionEvent>& events, double t0, double duration,
                          double fs, std::size_t sequence_index) {
        SubjectProfile p = profile_;
        p.rng_seed = profile_.rng_seed ^ session_seed_;
        return simulate_sequence(p, attention_at(sequence_index), events, t0, duration, fs,
                                 sequence_index + 1);
    }

    const SubjectProfile& profile() const { return profile_; }
    const std::vector<double>& trajectory() const { return trajectory_; }

private:
    SubjectProfile profile_;
    AttentionWalk walk_;
    std::uint64_t session_seed_ = 0;
    std::vector<double> trajectory_;
};

}  // namespace nfb
