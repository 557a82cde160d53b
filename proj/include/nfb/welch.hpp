#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfb/detail/fft.hpp"
#include "nfb/eeg.hpp"

namespace nfb {

enum class Taper { hann, rectangular };

struct WelchParams {
    double segment_seconds = 2.0;  // 0.5 Hz native resolution at typical rates
    double overlap = 0.5;          // fraction of a segment
    Taper taper = Taper::hann;
};

// One-sided power spectral density, uV^2/Hz. power[k] estimates the density
// at frequency k * df.
struct Psd {
    double df = 0.0;
    double fs = 0.0;
    std::vector<double> power;

    double max_freq() const { return power.empty() ? 0.0 : df * (power.size() - 1); }
};

// Welch's method: mean of modified periodograms over overlapping segments.
// Segments are zero-padded to a power of two, which refines the bin grid
// without changing total power. Satisfies Parseval: integrating the PSD over
// [0, Nyquist] recovers the signal power.
inline Psd welch_psd(const std::vector<double>& x, double fs, const WelchParams& params = {}) {
    if (!(fs > 0.0)) throw std::invalid_argument("welch_psd: sample rate must be positive");
    if (!(params.overlap >= 0.0) || !(params.overlap < 1.0))
        throw std::invalid_argument("welch_psd: overlap must lie in [0, 1)");
    std::size_t seg = static_cast<std::size_t>(std::lround(params.segment_seconds * fs));
    if (seg < 2) throw std::invalid_argument("welch_psd: segment is shorter than two samples");
    if (seg > x.size())
        throw std::invalid_argument("welch_psd: segment (" + std::to_string(seg) +
                                    " samples) exceeds the data (" + std::to_string(x.size()) + ")");

    std::size_t hop = static_cast<std::size_t>(std::lround(seg * (1.0 - params.overlap)));
    if (hop == 0) hop = 1;

    std::vector<double> w(seg, 1.0);
    if (params.taper == Taper::hann) {
        for (std::size_t i = 0; i < seg; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * 3.14159265358979323846 * i / static_cast<double>(seg));
    }
    double u = 0.0;  // window power, normalizes the periodogram
    for (double v : w) u += v * v;

    std::size_t nfft = detail::next_pow2(seg);
    std::size_t nbins = nfft / 2 + 1;
    std::vector<double> acc(nbins, 0.0);
    std::vector<std::complex<double>> buf(nfft);

    std::size_t nseg = 0;
    for (std::size_t off = 0; off + seg <= x.size(); off += hop) {
        for (std::size_t i = 0; i < seg; ++i) buf[i] = x[off + i] * w[i];
        for (std::size_t i = seg; i < nfft; ++i) buf[i] = 0.0;
        detail::fft(buf);
        for (std::size_t k = 0; k < nbins; ++k) acc[k] += std::norm(buf[k]);
        ++nseg;
    }

    Psd out;
    out.fs = fs;
    out.df = fs / static_cast<double>(nfft);
    out.power.resize(nbins);
    double scale = 2.0 / (fs * u * static_cast<double>(nseg));
    for (std::size_t k = 0; k < nbins; ++k) out.power[k] = acc[k] * scale;
    out.power.front() /= 2.0;  // DC and Nyquist are not mirrored
    out.power.back() /= 2.0;
    return out;
}

// Integrates the PSD over [lo_hz, hi_hz]. Each bin is treated as covering
// [f - df/2, f + df/2] and contributes its density times the covered length,
// so a flat spectrum yields power exactly proportional to bandwidth
// regardless of where band edges fall relative to the bin grid.
inline double band_power(const Psd& psd, double lo_hz, double hi_hz) {
    if (!(hi_hz > lo_hz)) throw std::invalid_argument("band_power: need lo < hi");
    if (psd.power.empty() || psd.df <= 0.0) throw std::invalid_argument("band_power: empty PSD");
    double total = 0.0;
    for (std::size_t k = 0; k < psd.power.size(); ++k) {
        double f = psd.df * static_cast<double>(k);
        double bin_lo = std::max(f - psd.df / 2.0, 0.0);
        double bin_hi = f + psd.df / 2.0;
        double covered = std::min(bin_hi, hi_hz) - std::max(bin_lo, lo_hz);
        if (covered > 0.0) total += psd.power[k] * covered;
    }
    return total;
}

struct AlphaBandConfig {
    double target_lo = 8.0;  // individualized lower alpha band
    double target_hi = 10.0;
    double wide_lo = 7.0;  // comparison band; excludes the rate harmonics below
    double wide_hi = 20.0;
    WelchParams welch;
};

struct BandPowerResult {
    double target_power = 0.0;  // uV^2 in the target band
    double wide_power = 0.0;    // uV^2 in the wide band
    double relative = 0.0;      // target / wide, in [0, 1] when target lies inside wide
};

// Relative alpha PSD on one channel over a time window. The caller is
// expected to have band-limited the data to the wide band already (the
// online pipeline filters 7-20 Hz first); this routine only forms the ratio.
// A silent window (zero wide-band power) yields relative = 0.
inline BandPowerResult relative_alpha_power(const EegBlock& block, const std::string& channel,
                                            const TimeWindow& window,
                                            const AlphaBandConfig& config = {}) {
    if (!(config.target_lo >= config.wide_lo) || !(config.target_hi <= config.wide_hi))
        throw std::invalid_argument("relative_alpha_power: target band must nest inside the wide band");
    std::size_t c = block.channel_index(channel);
    EegBlock win = slice(block, window);
    if (win.n_samples() == 0) throw std::invalid_argument("relative_alpha_power: empty window");

    WelchParams wp = config.welch;
    double max_seg_seconds = win.n_samples() / block.sample_rate;
    if (wp.segment_seconds > max_seg_seconds) wp.segment_seconds = max_seg_seconds;

    Psd psd = welch_psd(win.data[c], block.sample_rate, wp);
    BandPowerResult r;
    r.target_power = band_power(psd, config.target_lo, config.target_hi);
    r.wide_power = band_power(psd, config.wide_lo, config.wide_hi);
    r.relative = (r.wide_power > 0.0) ? r.target_power / r.wide_power : 0.0;
    return r;
}

}  // namespace nfb
