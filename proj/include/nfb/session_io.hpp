#pragma once

// Session archives: one directory per recorded session holding a manifest,
// the event log as JSON lines, and the raw EEG as a small binary container.
// Archives are self-describing: everything downstream (epochs, spectra,
// thresholds, models) can be rebuilt from (events.jsonl, eeg.bin) plus the
// study config, so nothing derived needs to survive for the data to.

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "eeg.hpp"
#include "events.hpp"
#include "feedback.hpp"

namespace nfb {

constexpr int kSessionFormatVersion = 1;
constexpr int kEegBinFormatVersion = 1;

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

// Hex FNV-1a of a canonical config serialization. nlohmann objects keep keys
// sorted, so the same config always hashes the same.
inline std::string config_fingerprint(const nlohmann::json& config) {
    return detail::hex64(detail::fnv1a64(config.dump()));
}

// ---------------------------------------------------------------------------
// events.jsonl: a meta line, then one event per line, in recording order.

inline std::string events_jsonl(const SessionLog& log) {
    std::string out;
    nlohmann::json meta{{"type", "meta"},
                        {"format_version", kSessionFormatVersion},
                        {"session_id", log.session_id},
                        {"letter_rate_hz", log.letter_rate_hz},
                        {"seed", log.seed}};
    out += meta.dump();
    out += '\n';
    for (const SessionEvent& e : log.events) {
        nlohmann::json j{{"type", "event"},       {"kind", to_string(e.kind)},
                         {"t", e.t},              {"symbol", e.symbol},
                         {"is_target", e.is_target}, {"level", e.level},
                         {"value", e.value},      {"forced", e.forced}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline SessionLog parse_events_jsonl(const std::string& text) {
    SessionLog log;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_meta = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("events.jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        std::string type = j.at("type").get<std::string>();
        if (!have_meta) {
            if (type != "meta")
                throw std::runtime_error("events.jsonl: first line must be the meta record");
            int version = j.at("format_version").get<int>();
            if (version != kSessionFormatVersion)
                throw std::runtime_error("events.jsonl: unsupported format version " +
                                         std::to_string(version) + " (expected " +
                                         std::to_string(kSessionFormatVersion) + ")");
            log.session_id = j.at("session_id").get<std::string>();
            log.letter_rate_hz = j.at("letter_rate_hz").get<double>();
            log.seed = j.at("seed").get<std::uint64_t>();
            have_meta = true;
            continue;
        }
        if (type != "event")
            throw std::runtime_error("events.jsonl line " + std::to_string(line_no) +
                                     ": unknown record type '" + type + "'");
        SessionEvent e;
        e.kind = event_kind_from_string(j.at("kind").get<std::string>());
        e.t = j.at("t").get<double>();
        e.symbol = j.at("symbol").get<std::string>();
        e.is_target = j.at("is_target").get<bool>();
        e.level = j.at("level").get<int>();
        e.value = j.at("value").get<double>();
        e.forced = j.at("forced").get<bool>();
        log.events.push_back(e);
    }
    if (!have_meta) throw std::runtime_error("events.jsonl: empty file");
    return log;
}

// ---------------------------------------------------------------------------
// eeg.bin: "NFB1", little-endian u32 header length, a JSON header (rate,
// channel labels, sample count), then frame-interleaved little-endian 32-bit
// floats. Samples quantize to float on write; a block read back re-encodes
// byte-identically.

inline std::string eeg_bin_bytes(const EegBlock& eeg) {
    eeg.validate();
    nlohmann::json header{{"format_version", kEegBinFormatVersion},
                          {"sample_rate", eeg.sample_rate},
                          {"t0", eeg.t0},
                          {"channels", eeg.channels},
                          {"n_samples", eeg.n_samples()}};
    std::string h = header.dump();
    std::size_t n = eeg.n_samples(), c = eeg.n_channels();
    std::string out;
    out.reserve(8 + h.size() + 4 * n * c);
    out += "NFB1";
    detail::put_u32le(out, static_cast<std::uint32_t>(h.size()));
    out += h;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
            auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(eeg.data[ch][i]));
            detail::put_u32le(out, bits);
        }
    return out;
}

inline EegBlock parse_eeg_bin(const std::string& bytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 8 || bytes.compare(0, 4, "NFB1") != 0)
        throw std::runtime_error("eeg.bin: bad magic; not an EEG container");
    std::uint32_t hlen = detail::get_u32le(p + 4);
    if (hlen > (1u << 20) || bytes.size() < 8 + static_cast<std::size_t>(hlen))
        throw std::runtime_error("eeg.bin: truncated or corrupt header");
    nlohmann::json header = nlohmann::json::parse(bytes.substr(8, hlen));
    int version = header.at("format_version").get<int>();
    if (version != kEegBinFormatVersion)
        throw std::runtime_error("eeg.bin: unsupported format version " + std::to_string(version) +
                                 " (expected " + std::to_string(kEegBinFormatVersion) + ")");
    EegBlock eeg;
    eeg.sample_rate = header.at("sample_rate").get<double>();
    eeg.t0 = header.at("t0").get<double>();
    eeg.channels = header.at("channels").get<std::vector<std::string>>();
    std::size_t n = header.at("n_samples").get<std::size_t>();
    std::size_t c = eeg.channels.size();
    std::size_t expected = 4 * n * c;
    std::size_t actual = bytes.size() - 8 - hlen;
    if (actual < expected) {
        std::size_t frames = c > 0 ? actual / (4 * c) : 0;
        throw std::runtime_error("eeg.bin: truncated payload: header declares " +
                                 std::to_string(n) + " samples x " + std::to_string(c) +
                                 " channels (" + std::to_string(expected) + " bytes), found " +
                                 std::to_string(actual) + " bytes (" + std::to_string(frames) +
                                 " complete frames)");
    }
    if (actual > expected)
        throw std::runtime_error("eeg.bin: " + std::to_string(actual - expected) +
                                 " trailing bytes after the payload");
    eeg.data.assign(c, std::vector<double>(n));
    const unsigned char* q = p + 8 + hlen;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
            eeg.data[ch][i] = static_cast<double>(std::bit_cast<float>(detail::get_u32le(q)));
            q += 4;
        }
    eeg.validate();
    return eeg;
}

inline void write_eeg_bin(const std::filesystem::path& path, const EegBlock& eeg) {
    detail::write_file(path, eeg_bin_bytes(eeg));
}

inline EegBlock read_eeg_bin(const std::filesystem::path& path) {
    try {
        return parse_eeg_bin(detail::read_file(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Archive directory: manifest.json + events.jsonl + eeg.bin. Derived
// artifacts (model.json, thresholds.json, summaries) sit alongside.

struct SessionManifest {
    int format_version = kSessionFormatVersion;
    std::string session_id;
    std::string kind;  // study phase, or "calibration" for a standalone session
    int week = 1;      // 1-based within its phase
    int ordinal = 1;   // 1-based across the study
    std::uint64_t seed = 0;
    std::string config_hash;  // fingerprint of the study config that produced this
    bool nfb = false;
    bool partial = false;  // a stage failed mid-session; kept for diagnosis
};

inline nlohmann::json manifest_to_json(const SessionManifest& m) {
    return nlohmann::json{{"format_version", m.format_version},
                          {"session_id", m.session_id},
                          {"kind", m.kind},
                          {"week", m.week},
                          {"ordinal", m.ordinal},
                          {"seed", m.seed},
                          {"config_hash", m.config_hash},
                          {"nfb", m.nfb},
                          {"partial", m.partial}};
}

inline SessionManifest manifest_from_json(const nlohmann::json& j) {
    SessionManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kSessionFormatVersion)
        throw std::runtime_error("manifest: unsupported format version " +
                                 std::to_string(m.format_version) + " (expected " +
                                 std::to_string(kSessionFormatVersion) + ")");
    m.session_id = j.at("session_id").get<std::string>();
    m.kind = j.at("kind").get<std::string>();
    m.week = j.at("week").get<int>();
    m.ordinal = j.at("ordinal").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.nfb = j.at("nfb").get<bool>();
    m.partial = j.at("partial").get<bool>();
    return m;
}

struct SessionArchive {
    SessionManifest manifest;
    SessionLog log;
    EegBlock eeg;
};

inline void write_session(const std::filesystem::path& dir, const SessionArchive& archive) {
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "manifest.json", manifest_to_json(archive.manifest).dump(2) + "\n");
    detail::write_file(dir / "events.jsonl", events_jsonl(archive.log));
    write_eeg_bin(dir / "eeg.bin", archive.eeg);
}

// Reads an archive back. When the caller knows which config should have
// produced it, a fingerprint mismatch is refused unless explicitly
// overridden; a silently edited config must not masquerade as the original.
inline SessionArchive read_session(const std::filesystem::path& dir,
                                   const std::string& expected_config_hash = "",
                                   bool allow_config_mismatch = false) {
    SessionArchive a;
    a.manifest = manifest_from_json(nlohmann::json::parse(detail::read_file(dir / "manifest.json")));
    if (!expected_config_hash.empty() && a.manifest.config_hash != expected_config_hash &&
        !allow_config_mismatch)
        throw std::runtime_error("config hash mismatch: archive " + dir.string() +
                                 " was written under config " + a.manifest.config_hash +
                                 ", current config hashes to " + expected_config_hash +
                                 "; pass the override to read anyway");
    a.log = parse_events_jsonl(detail::read_file(dir / "events.jsonl"));
    if (a.log.session_id != a.manifest.session_id)
        throw std::runtime_error("archive " + dir.string() + ": events.jsonl session '" +
                                 a.log.session_id + "' does not match manifest '" +
                                 a.manifest.session_id + "'");
    a.eeg = read_eeg_bin(dir / "eeg.bin");
    return a;
}

// ---------------------------------------------------------------------------
// Per-sequence relative alpha rebuilt from an archive. Mirrors the online
// path exactly: each sequence block is filtered from its own start (the
// display had no earlier samples), ratio over the letter window on the
// feedback channel. Lets threshold fitting run on stored sessions.

inline std::vector<double> session_relative_psd(const SessionLog& log, const EegBlock& eeg,
                                                const std::string& channel = "P4",
                                                const AlphaBandConfig& alpha = {}) {
    if (log.letter_rate_hz <= 0.0)
        throw std::invalid_argument("session_relative_psd: log has no letter rate");
    std::vector<std::size_t> fix;
    for (std::size_t i = 0; i < log.events.size(); ++i)
        if (log.events[i].kind == EventKind::fixation) fix.push_back(i);
    double block_end = eeg.t0 + static_cast<double>(eeg.n_samples()) / eeg.sample_rate;
    std::vector<double> out;
    out.reserve(fix.size());
    for (std::size_t k = 0; k < fix.size(); ++k) {
        double t_begin = log.events[fix[k]].t;
        double t_end = (k + 1 < fix.size()) ? log.events[fix[k + 1]].t : block_end;
        std::size_t stop = (k + 1 < fix.size()) ? fix[k + 1] : log.events.size();
        double first_letter = 0.0, last_letter = 0.0;
        bool any = false;
        for (std::size_t i = fix[k] + 1; i < stop; ++i) {
            if (log.events[i].kind != EventKind::letter) continue;
            if (!any) first_letter = log.events[i].t;
            last_letter = log.events[i].t;
            any = true;
        }
        if (!any)
            throw std::runtime_error("session_relative_psd: sequence " + std::to_string(k) +
                                     " has no letter events");
        EegBlock seq = slice(eeg, TimeWindow{t_begin, t_end});
        TimeWindow letters{first_letter, last_letter + 1.0 / log.letter_rate_hz};
        out.push_back(sequence_relative_psd(seq, letters, channel, alpha).power.relative);
    }
    return out;
}

}  // namespace nfb
