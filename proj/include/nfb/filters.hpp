#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "nfb/eeg.hpp"

namespace nfb {

// One second-order section, transposed direct form II.
// H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

using SosChain = std::vector<Biquad>;

enum class FilterMode { causal, zero_phase };

namespace detail {

inline constexpr double pi_v = 3.14159265358979323846264338327950288;

inline std::vector<std::complex<double>> butter_prototype_poles(int order) {
    std::vector<std::complex<double>> p;
    for (int k = 0; k < order; ++k) {
        double theta = pi_v / 2.0 + pi_v * (2.0 * k + 1.0) / (2.0 * order);
        p.emplace_back(std::cos(theta), std::sin(theta));
    }
    return p;
}

inline std::complex<double> bilinear_map(std::complex<double> s, double fs) {
    double k = 2.0 * fs;
    return (k + s) / (k - s);
}

// Groups a full pole set (closed under conjugation) into biquad denominators.
inline std::vector<Biquad> pair_poles(std::vector<std::complex<double>> z) {
    std::vector<Biquad> out;
    std::vector<double> reals;
    std::vector<std::complex<double>> upper;
    for (const auto& p : z) {
        if (std::abs(p.imag()) < 1e-12)
            reals.push_back(p.real());
        else if (p.imag() > 0.0)
            upper.push_back(p);
    }
    for (const auto& p : upper) {
        Biquad s;
        s.a1 = -2.0 * p.real();
        s.a2 = std::norm(p);
        out.push_back(s);
    }
    std::sort(reals.begin(), reals.end());
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
        Biquad s;
        s.a1 = -(reals[i] + reals[i + 1]);
        s.a2 = reals[i] * reals[i + 1];
        out.push_back(s);
    }
    if (reals.size() % 2 == 1) {
        Biquad s;
        s.a1 = -reals.back();
        out.push_back(s);
    }
    return out;
}

}  // namespace detail

// Complex frequency response of a cascade at f_hz.
inline std::complex<double> sos_response(const SosChain& sos, double f_hz, double fs) {
    std::complex<double> zinv = std::exp(std::complex<double>(0.0, -2.0 * detail::pi_v * f_hz / fs));
    std::complex<double> h(1.0, 0.0);
    for (const auto& s : sos) {
        std::complex<double> num = s.b0 + zinv * (s.b1 + zinv * s.b2);
        std::complex<double> den = 1.0 + zinv * (s.a1 + zinv * s.a2);
        h *= num / den;
    }
    return h;
}

inline double sos_gain_at(const SosChain& sos, double f_hz, double fs) {
    return std::abs(sos_response(sos, f_hz, fs));
}

// Butterworth bandpass via the analog prototype, lowpass-to-bandpass
// transform, and the bilinear transform with prewarped edges. An order-N
// prototype yields N sections (2N poles). Unit gain at the geometric band
// center.
inline SosChain butter_bandpass(int order, double lo_hz, double hi_hz, double fs) {
    if (order < 1) throw std::invalid_argument("butter_bandpass: order must be >= 1");
    if (!(lo_hz > 0.0) || !(hi_hz > lo_hz))
        throw std::invalid_argument("butter_bandpass: need 0 < lo < hi");
    if (!(hi_hz < fs / 2.0))
        throw std::invalid_argument("butter_bandpass: high cutoff must stay below the Nyquist rate");

    double w1 = 2.0 * fs * std::tan(detail::pi_v * lo_hz / fs);
    double w2 = 2.0 * fs * std::tan(detail::pi_v * hi_hz / fs);
    double w0sq = w1 * w2;
    double bw = w2 - w1;

    std::vector<std::complex<double>> zpoles;
    for (const auto& p : detail::butter_prototype_poles(order)) {
        std::complex<double> pb = p * bw;
        std::complex<double> disc = std::sqrt(pb * pb - 4.0 * w0sq);
        zpoles.push_back(detail::bilinear_map((pb + disc) / 2.0, fs));
        zpoles.push_back(detail::bilinear_map((pb - disc) / 2.0, fs));
    }

    SosChain sos = detail::pair_poles(zpoles);
    // N zero pairs at z = +1/-1: numerator (1 - z^-2) per section.
    for (auto& s : sos) {
        s.b0 = 1.0;
        s.b1 = 0.0;
        s.b2 = -1.0;
    }
    double f_ref = std::sqrt(lo_hz * hi_hz);
    double g = sos_gain_at(sos, f_ref, fs);
    if (!(g > 0.0)) throw std::runtime_error("butter_bandpass: degenerate design");
    sos.front().b0 /= g;
    sos.front().b1 /= g;
    sos.front().b2 /= g;
    return sos;
}

// Butterworth lowpass, unit DC gain.
inline SosChain butter_lowpass(int order, double cut_hz, double fs) {
    if (order < 1) throw std::invalid_argument("butter_lowpass: order must be >= 1");
    if (!(cut_hz > 0.0) || !(cut_hz < fs / 2.0))
        throw std::invalid_argument("butter_lowpass: cutoff must lie in (0, Nyquist)");

    double wc = 2.0 * fs * std::tan(detail::pi_v * cut_hz / fs);
    std::vector<std::complex<double>> zpoles;
    for (const auto& p : detail::butter_prototype_poles(order))
        zpoles.push_back(detail::bilinear_map(p * wc, fs));

    SosChain sos = detail::pair_poles(zpoles);
    // Zeros at z = -1; the odd-order leftover section (a2 == 0) carries one.
    for (auto& s : sos) {
        s.b0 = 1.0;
        s.b1 = (s.a2 == 0.0) ? 1.0 : 2.0;
        s.b2 = (s.a2 == 0.0) ? 0.0 : 1.0;
    }
    double g = sos_gain_at(sos, 0.0, fs);
    sos.front().b0 /= g;
    sos.front().b1 /= g;
    sos.front().b2 /= g;
    return sos;
}

// Narrow notch (constant-Q biquad).
inline Biquad notch_biquad(double f0_hz, double q, double fs) {
    if (!(f0_hz > 0.0) || !(f0_hz < fs / 2.0))
        throw std::invalid_argument("notch_biquad: center must lie in (0, Nyquist)");
    if (!(q > 0.0)) throw std::invalid_argument("notch_biquad: q must be positive");
    double w0 = 2.0 * detail::pi_v * f0_hz / fs;
    double alpha = std::sin(w0) / (2.0 * q);
    double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = 1.0 / a0;
    s.b1 = -2.0 * std::cos(w0) / a0;
    s.b2 = 1.0 / a0;
    s.a1 = -2.0 * std::cos(w0) / a0;
    s.a2 = (1.0 - alpha) / a0;
    return s;
}

// Causal cascade run.
inline std::vector<double> sosfilt(const SosChain& sos, const std::vector<double>& x) {
    std::vector<double> y = x;
    for (const auto& s : sos) {
        double z1 = 0.0, z2 = 0.0;
        for (double& v : y) {
            double in = v;
            double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

// Zero-phase run: odd-extension padding, forward pass, time reversal, second
// pass, reversal, trim. Squares the magnitude response.
inline std::vector<double> sosfiltfilt(const SosChain& sos, const std::vector<double>& x,
                                       std::size_t padlen) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    if (padlen >= n) padlen = n - 1;

    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

    std::vector<double> y = sosfilt(sos, ext);
    std::reverse(y.begin(), y.end());
    y = sosfilt(sos, y);
    std::reverse(y.begin(), y.end());

    return std::vector<double>(y.begin() + padlen, y.begin() + padlen + n);
}

namespace detail {

inline std::size_t edge_padlen(double fs, double slow_hz, std::size_t n) {
    std::size_t p = static_cast<std::size_t>(std::ceil(3.0 * fs / slow_hz));
    return std::min(p, n > 0 ? n - 1 : 0);
}

inline EegBlock apply_per_channel(const EegBlock& block, const SosChain& sos, FilterMode mode,
                                  std::size_t padlen) {
    EegBlock out = block;
    for (auto& ch : out.data)
        ch = (mode == FilterMode::causal) ? sosfilt(sos, ch) : sosfiltfilt(sos, ch, padlen);
    return out;
}

}  // namespace detail

// 4th-order Butterworth bandpass over every channel. Causal mode preserves
// sample timing for online use (group delay applies); zero-phase mode is for
// offline analysis.
inline EegBlock bandpass_filter(const EegBlock& block, double lo_hz, double hi_hz, FilterMode mode,
                                int order = 4) {
    block.validate();
    SosChain sos = butter_bandpass(order, lo_hz, hi_hz, block.sample_rate);
    return detail::apply_per_channel(block, sos, mode,
                                     detail::edge_padlen(block.sample_rate, lo_hz, block.n_samples()));
}

inline EegBlock notch_filter(const EegBlock& block, double f0_hz, FilterMode mode, double q = 30.0) {
    block.validate();
    SosChain sos = {notch_biquad(f0_hz, q, block.sample_rate)};
    return detail::apply_per_channel(block, sos, mode,
                                     detail::edge_padlen(block.sample_rate, f0_hz / q, block.n_samples()));
}

// Integer-factor rate reduction with an anti-alias lowpass (zero-phase,
// cutoff at 0.45x the target Nyquist) before frame decimation. Frame 0 is
// kept, so t0 and event alignment survive within one sample period.
inline EegBlock downsample(const EegBlock& block, double target_rate) {
    block.validate();
    if (!(target_rate > 0.0)) throw std::invalid_argument("downsample: target rate must be positive");
    double ratio = block.sample_rate / target_rate;
    double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 || rounded < 1.0)
        throw std::invalid_argument("downsample: target rate must divide the sample rate");
    std::size_t m = static_cast<std::size_t>(rounded);
    if (m == 1) return block;

    double cutoff = 0.45 * (target_rate / 2.0);
    SosChain sos = butter_lowpass(4, cutoff, block.sample_rate);
    EegBlock out = block;
    out.sample_rate = target_rate;
    for (std::size_t c = 0; c < block.data.size(); ++c) {
        std::vector<double> filtered = sosfiltfilt(
            sos, block.data[c], detail::edge_padlen(block.sample_rate, cutoff, block.n_samples()));
        std::vector<double> dec;
        dec.reserve(filtered.size() / m + 1);
        for (std::size_t i = 0; i < filtered.size(); i += m) dec.push_back(filtered[i]);
        out.data[c] = std::move(dec);
    }
    return out;
}

}  // namespace nfb
