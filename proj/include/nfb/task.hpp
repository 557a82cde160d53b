#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfb/eeg.hpp"
#include "nfb/events.hpp"
#include "nfb/feedback.hpp"
#include "nfb/rng.hpp"

namespace nfb {

inline const std::string& rsvp_letters() {
    static const std::string a = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    return a;
}

// One calibration sequence: a cued target plus nine distractors, all
// distinct, presented one at a time at the letter rate.
struct SequenceSpec {
    std::string target;
    std::vector<std::string> items;  // exactly one equals target
    double rate_hz = 3.0;
    double fixation_lead_s = 1.0;
};

inline SequenceSpec build_calibration_sequence(Rng& rng, double rate_hz = 3.0,
                                               double fixation_lead_s = 1.0) {
    if (!(rate_hz > 0.0)) throw std::invalid_argument("build_calibration_sequence: rate must be positive");
    const std::string& a = rsvp_letters();
    SequenceSpec s;
    s.rate_hz = rate_hz;
    s.fixation_lead_s = fixation_lead_s;
    s.target = std::string(1, a[rng.below(a.size())]);

    std::vector<std::string> rest;
    for (char c : a)
        if (c != s.target[0]) rest.emplace_back(1, c);
    rng.shuffle(rest);
    s.items.assign(rest.begin(), rest.begin() + 9);
    std::size_t pos = rng.below(10);
    s.items.insert(s.items.begin() + pos, s.target);
    return s;
}

// Generates one sequence's EEG. Receives that sequence's scheduled events,
// the block start time and duration, and the sequence index (drivers key
// their RNG streams off it). May throw to model acquisition failure.
using SequenceEegFn = std::function<EegBlock(const std::vector<SessionEvent>& events, double t0,
                                             double duration, std::size_t sequence_index)>;

struct CalibrationConfig {
    std::size_t n_sequences = 100;
    double rate_hz = 3.0;
    double fixation_lead_s = 1.0;
    double inter_sequence_gap_s = 2.0;  // also the feedback display time
    double sample_rate = 300.0;
    std::uint64_t seed = 1;
    std::string session_id = "calibration";
    const ThresholdSet* nfb = nullptr;  // feedback shown after each sequence when set
    std::string nfb_channel = "P4";
    AlphaBandConfig alpha;
};

struct SessionResult {
    SessionLog log;
    EegBlock eeg;
    std::vector<double> relative_psd;  // one per completed sequence, always recorded
    bool partial = false;              // driver failed before the session finished
    std::string error;
};

// Runs a calibration (or neurofeedback intervention) session: per sequence, a
// fixation cue, ten letters at the rate, then either a feedback display or a
// silent gap of the same length. The recording is one continuous block; all
// event times share its clock. Deterministic in (config.seed, driver).
inline SessionResult run_calibration_session(const CalibrationConfig& config,
                                             const SequenceEegFn& driver) {
    if (config.n_sequences == 0)
        throw std::invalid_argument("run_calibration_session: need at least one sequence");
    Rng rng(config.seed);
    SessionResult out;
    out.log.session_id = config.session_id;
    out.log.letter_rate_hz = config.rate_hz;
    out.log.seed = config.seed;
    out.eeg.sample_rate = config.sample_rate;
    out.eeg.t0 = 0.0;

    const double seq_dur =
        config.fixation_lead_s + 10.0 / config.rate_hz + config.inter_sequence_gap_s;
    double t = 0.0;
    for (std::size_t k = 0; k < config.n_sequences; ++k) {
        SequenceSpec spec = build_calibration_sequence(rng, config.rate_hz, config.fixation_lead_s);

        std::vector<SessionEvent> ev;
        SessionEvent fix;
        fix.kind = EventKind::fixation;
        fix.t = t;
        fix.symbol = spec.target;
        ev.push_back(fix);
        for (std::size_t j = 0; j < spec.items.size(); ++j) {
            SessionEvent e;
            e.kind = EventKind::letter;
            e.t = t + config.fixation_lead_s + static_cast<double>(j) / config.rate_hz;
            e.symbol = spec.items[j];
            e.is_target = (spec.items[j] == spec.target);
            ev.push_back(e);
        }

        EegBlock seq_eeg;
        try {
            seq_eeg = driver(ev, t, seq_dur, k);
        } catch (const std::exception& e) {
            out.partial = true;
            out.error = e.what();
            break;
        }
        if (seq_eeg.sample_rate != config.sample_rate)
            throw std::runtime_error("run_calibration_session: driver rate mismatch");

        TimeWindow letters{t + config.fixation_lead_s,
                           t + config.fixation_lead_s + 10.0 / config.rate_hz};
        SequencePsd psd = sequence_relative_psd(seq_eeg, letters, config.nfb_channel, config.alpha);
        out.relative_psd.push_back(psd.power.relative);

        if (config.nfb != nullptr) {
            SessionEvent fb;
            fb.kind = EventKind::feedback;
            fb.t = letters.t_end;
            fb.level = feedback_level(psd.power.relative, *config.nfb);
            fb.value = psd.power.relative;
            ev.push_back(fb);
        }

        out.log.events.insert(out.log.events.end(), ev.begin(), ev.end());
        append(out.eeg, seq_eeg);
        t += seq_dur;
    }
    return out;
}

// Yes/no target-detection practice. The responder sees what the participant
// sees: the cued target and the presented items.
using PracticeResponder =
    std::function<bool(const std::string& target, const std::vector<std::string>& items)>;

struct PracticeTrial {
    std::string target;
    std::vector<std::string> items;
    bool target_present = false;
    bool answer = false;
    bool correct = false;
};

struct PracticeBlock {
    double rate_hz = 0.0;
    std::vector<PracticeTrial> trials;

    int score() const {
        int s = 0;
        for (const auto& t : trials) s += t.correct ? 1 : 0;
        return s;
    }
};

// Ten trials, exactly five containing the cued target, order shuffled.
inline PracticeBlock run_practice_block(double rate_hz, Rng& rng,
                                        const PracticeResponder& responder) {
    PracticeBlock block;
    block.rate_hz = rate_hz;
    std::vector<bool> present(10, false);
    std::fill(present.begin(), present.begin() + 5, true);
    rng.shuffle(present);

    const std::string& a = rsvp_letters();
    for (bool has_target : present) {
        PracticeTrial trial;
        trial.target_present = has_target;
        if (has_target) {
            SequenceSpec s = build_calibration_sequence(rng, rate_hz);
            trial.target = s.target;
            trial.items = s.items;
        } else {
            trial.target = std::string(1, a[rng.below(a.size())]);
            std::vector<std::string> rest;
            for (char c : a)
                if (c != trial.target[0]) rest.emplace_back(1, c);
            rng.shuffle(rest);
            trial.items.assign(rest.begin(), rest.begin() + 10);
        }
        trial.answer = responder(trial.target, trial.items);
        trial.correct = (trial.answer == trial.target_present);
        block.trials.push_back(std::move(trial));
    }
    return block;
}

struct RateOutcome {
    double rate_hz = 0.0;
    std::vector<int> block_scores;
    bool passed = false;
};

struct PracticeProgression {
    std::vector<RateOutcome> rates;
    bool eligible = false;  // passed the criterion at the final (fastest) rate
};

// Study-entry screening: at each rate in turn, up to `max_blocks` practice
// blocks; scoring `pass_score` or better on any block advances. Failing all
// blocks at a rate halts the progression, leaving faster rates unattempted.
inline PracticeProgression practice_progression(Rng& rng, const PracticeResponder& responder,
                                                const std::vector<double>& rates = {1.0, 2.0, 3.0,
                                                                                    4.0},
                                                int max_blocks = 4, int pass_score = 8) {
    if (rates.empty()) throw std::invalid_argument("practice_progression: no rates given");
    PracticeProgression prog;
    for (double rate : rates) {
        RateOutcome outcome;
        outcome.rate_hz = rate;
        for (int b = 0; b < max_blocks && !outcome.passed; ++b) {
            PracticeBlock block = run_practice_block(rate, rng, responder);
            outcome.block_scores.push_back(block.score());
            if (block.score() >= pass_score) outcome.passed = true;
        }
        bool halted = !outcome.passed;
        prog.rates.push_back(std::move(outcome));
        if (halted) return prog;
    }
    prog.eligible = prog.rates.back().passed;
    return prog;
}

}  // namespace nfb
