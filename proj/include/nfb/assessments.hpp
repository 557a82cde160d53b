#pragma once

// Generators and scorers for the repeated behavioral measures: letter
// cancellation forms, letter span stimulus sets, and the reading-fluency
// form-order schedule.

#include <array>
#include <cstdint>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nfb/rng.hpp"

namespace nfb {

inline constexpr int kCancellationRows = 15;
inline constexpr int kCancellationCols = 10;
inline constexpr int kCancellationCells = kCancellationRows * kCancellationCols;
inline constexpr int kCancellationTargets = 20;
inline constexpr char kCancellationTarget = 'Z';
inline constexpr int kGeneratorAttemptCap = 10000;

enum class FoilStyle { curved, straight };

// The source names only examples; the full ten-letter memberships are a
// documented choice.
inline const std::array<char, 10>& foil_set(FoilStyle style) {
    static const std::array<char, 10> curved = {'B', 'C', 'D', 'G', 'J',
                                                'O', 'P', 'Q', 'R', 'S'};
    static const std::array<char, 10> straight = {'K', 'M', 'Y', 'A', 'E',
                                                  'F', 'H', 'L', 'N', 'V'};
    return style == FoilStyle::curved ? curved : straight;
}

struct CancellationForm {
    FoilStyle style = FoilStyle::curved;
    std::uint64_t seed = 0;
    std::array<char, kCancellationCells> cells{};  // row-major

    char at(int row, int col) const { return cells[row * kCancellationCols + col]; }
};

namespace detail {

// True if any row, column, or corner-diagonal contains a run of more than
// three adjacent targets.
inline bool has_adjacent_run(const std::array<bool, kCancellationCells>& target) {
    static constexpr int dirs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
    for (int r = 0; r < kCancellationRows; ++r) {
        for (int c = 0; c < kCancellationCols; ++c) {
            if (!target[r * kCancellationCols + c]) continue;
            for (const auto& d : dirs) {
                int run = 1;
                int rr = r + d[0], cc = c + d[1];
                while (rr >= 0 && rr < kCancellationRows && cc >= 0 && cc < kCancellationCols &&
                       target[rr * kCancellationCols + cc]) {
                    ++run;
                    rr += d[0];
                    cc += d[1];
                }
                if (run > 3) return true;
            }
        }
    }
    return false;
}

}  // namespace detail

// Uniformly placed targets with style foils elsewhere; forms violating the
// adjacency rule are resampled wholesale.
inline CancellationForm generate_cancellation_form(FoilStyle style, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> positions(kCancellationCells);
    for (int i = 0; i < kCancellationCells; ++i) positions[i] = i;

    for (int attempt = 0; attempt < kGeneratorAttemptCap; ++attempt) {
        rng.shuffle(positions);
        std::array<bool, kCancellationCells> target{};
        for (int i = 0; i < kCancellationTargets; ++i) target[positions[i]] = true;
        if (detail::has_adjacent_run(target)) continue;

        CancellationForm form;
        form.style = style;
        form.seed = seed;
        const std::array<char, 10>& foils = foil_set(style);
        for (int i = 0; i < kCancellationCells; ++i)
            form.cells[i] = target[i] ? kCancellationTarget
                                      : foils[rng.below(foils.size())];
        return form;
    }
    throw std::runtime_error("generate_cancellation_form: attempt cap exceeded");
}

struct CancellationScore {
    double corrected_time_s = 0.0;  // total time over accuracy
    double accuracy = 0.0;
    int hits = 0;
    int false_alarms = 0;
    bool missing = false;  // zero hits: undefined score
};

inline CancellationScore score_cancellation(double completion_time_s, int hits,
                                            int false_alarms) {
    if (!(completion_time_s > 0.0))
        throw std::invalid_argument("score_cancellation: completion time must be positive");
    if (hits < 0 || hits > kCancellationTargets)
        throw std::invalid_argument("score_cancellation: hits out of range");
    if (false_alarms < 0)
        throw std::invalid_argument("score_cancellation: false alarms out of range");
    CancellationScore s;
    s.hits = hits;
    s.false_alarms = false_alarms;
    s.accuracy = static_cast<double>(hits) / kCancellationTargets;
    if (hits == 0) {
        s.missing = true;
        s.corrected_time_s = std::numeric_limits<double>::quiet_NaN();
    } else {
        s.corrected_time_s = completion_time_s / s.accuracy;
    }
    return s;
}

inline constexpr int kSpanMin = 2;
inline constexpr int kSpanMax = 8;
inline constexpr int kSpanItemsPerLength = 2;
inline constexpr int kSpanVersions = 15;

inline const std::string& span_consonants() {
    static const std::string c = "BCDFGHJKLMNPQRSTVWXYZ";
    return c;
}

inline const std::vector<std::string>& default_banned_acronyms() {
    static const std::vector<std::string> banned = {"BRB", "HQ", "RSVP"};
    return banned;
}

struct LetterSpanSet {
    int version = 0;  // 1-based
    // items[length - kSpanMin][item]
    std::array<std::array<std::string, kSpanItemsPerLength>, kSpanMax - kSpanMin + 1> items;
};

inline std::vector<LetterSpanSet> generate_letter_span_sets(
    int n_versions = kSpanVersions,
    const std::vector<std::string>& banned = default_banned_acronyms(),
    std::uint64_t seed = 1) {
    if (n_versions < 1)
        throw std::invalid_argument("generate_letter_span_sets: need at least one version");
    Rng rng(seed);
    const std::string& alphabet = span_consonants();

    auto draw_sequence = [&](int length) {
        for (int attempt = 0; attempt < kGeneratorAttemptCap; ++attempt) {
            std::string s;
            for (int i = 0; i < length; ++i) s += alphabet[rng.below(alphabet.size())];
            bool ok = true;
            for (const std::string& b : banned)
                if (!b.empty() && s.find(b) != std::string::npos) ok = false;
            if (ok) return s;
        }
        throw std::runtime_error("generate_letter_span_sets: attempt cap exceeded");
    };

    std::vector<LetterSpanSet> out;
    std::set<std::string> fingerprints;  // versions must be pairwise distinct
    for (int attempt = 0; static_cast<int>(out.size()) < n_versions; ++attempt) {
        if (attempt >= kGeneratorAttemptCap)
            throw std::runtime_error("generate_letter_span_sets: attempt cap exceeded");
        LetterSpanSet set;
        set.version = static_cast<int>(out.size()) + 1;
        std::string fingerprint;
        for (int length = kSpanMin; length <= kSpanMax; ++length)
            for (int item = 0; item < kSpanItemsPerLength; ++item) {
                std::string s = draw_sequence(length);
                set.items[length - kSpanMin][item] = s;
                fingerprint += s + "|";
            }
        if (fingerprints.insert(fingerprint).second) out.push_back(std::move(set));
    }
    return out;
}

// Longest length with at least one correct item, honoring the
// discontinuation rule: everything after a double-failure length is ignored.
inline int score_letter_span(const std::vector<bool>& responses) {
    const std::size_t max_items =
        static_cast<std::size_t>((kSpanMax - kSpanMin + 1) * kSpanItemsPerLength);
    if (responses.size() % kSpanItemsPerLength != 0 || responses.size() > max_items)
        throw std::invalid_argument("score_letter_span: responses must come in length pairs");
    int best = 0;
    for (std::size_t pair = 0; pair * 2 < responses.size(); ++pair) {
        bool first = responses[pair * 2];
        bool second = responses[pair * 2 + 1];
        int length = kSpanMin + static_cast<int>(pair);
        if (first || second) best = length;
        if (!first && !second) break;
    }
    return best;
}

// Reading-fluency forms A/B/C, permuted independently within each block of
// three sessions.
inline std::vector<char> wjta_form_order(int n_sessions, std::uint64_t seed) {
    if (n_sessions < 0) throw std::invalid_argument("wjta_form_order: negative session count");
    Rng rng(seed);
    std::vector<char> out;
    while (static_cast<int>(out.size()) < n_sessions) {
        std::vector<char> block = {'A', 'B', 'C'};
        rng.shuffle(block);
        for (char f : block) out.push_back(f);
    }
    out.resize(static_cast<std::size_t>(n_sessions));
    return out;
}

inline std::string cancellation_form_text(const CancellationForm& form) {
    std::ostringstream os;
    for (int r = 0; r < kCancellationRows; ++r) {
        for (int c = 0; c < kCancellationCols; ++c) {
            if (c) os << ' ';
            os << form.at(r, c);
        }
        os << '\n';
    }
    return os.str();
}

inline std::string cancellation_form_csv(const CancellationForm& form) {
    std::ostringstream os;
    for (int r = 0; r < kCancellationRows; ++r) {
        for (int c = 0; c < kCancellationCols; ++c) {
            if (c) os << ',';
            os << form.at(r, c);
        }
        os << '\n';
    }
    return os.str();
}

inline nlohmann::json letter_span_json(const std::vector<LetterSpanSet>& sets) {
    nlohmann::json out = nlohmann::json::array();
    for (const LetterSpanSet& set : sets) {
        nlohmann::json version;
        version["version"] = set.version;
        nlohmann::json items = nlohmann::json::object();
        for (int length = kSpanMin; length <= kSpanMax; ++length) {
            nlohmann::json pair = nlohmann::json::array();
            for (const std::string& s : set.items[length - kSpanMin]) pair.push_back(s);
            items[std::to_string(length)] = pair;
        }
        version["items"] = items;
        out.push_back(version);
    }
    return out;
}

}  // namespace nfb
