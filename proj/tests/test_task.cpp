#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "nfb/simulate.hpp"
#include "nfb/task.hpp"

namespace {

nfb::SequenceEegFn sim_driver(nfb::SimSubject& subject, double fs) {
    return [&subject, fs](const std::vector<nfb::SessionEvent>& ev, double t0, double dur,
                          std::size_t k) { return subject.sequence_eeg(ev, t0, dur, fs, k); };
}

}  // namespace

TEST_CASE("calibration sequences cue exactly one target among distinct items", "[task]") {
    nfb::Rng rng(31);
    std::vector<int> position_counts(10, 0);
    const int draws = 5000;
    for (int i = 0; i < draws; ++i) {
        nfb::SequenceSpec s = nfb::build_calibration_sequence(rng);
        REQUIRE(s.items.size() == 10);
        std::set<std::string> uniq(s.items.begin(), s.items.end());
        REQUIRE(uniq.size() == 10);
        int hits = 0;
        for (std::size_t j = 0; j < s.items.size(); ++j) {
            if (s.items[j] == s.target) {
                ++hits;
                ++position_counts[j];
            }
        }
        REQUIRE(hits == 1);
    }
    // Target position is uniform over the ten slots: each cell within 5 sd.
    double expected = draws / 10.0;
    double sd = std::sqrt(draws * 0.1 * 0.9);
    for (int c : position_counts) REQUIRE(std::abs(c - expected) < 5.0 * sd);
}

TEST_CASE("session timeline is exact and deterministic", "[task]") {
    nfb::SubjectProfile p;
    p.rng_seed = 77;
    nfb::SimSubject subject(p);
    nfb::CalibrationConfig cfg;
    cfg.n_sequences = 8;
    cfg.seed = 5;
    subject.start_session(cfg.seed, cfg.n_sequences);

    nfb::SessionResult r = nfb::run_calibration_session(cfg, sim_driver(subject, cfg.sample_rate));
    REQUIRE_FALSE(r.partial);
    REQUIRE(r.relative_psd.size() == 8);

    auto letters = r.log.letters();
    REQUIRE(letters.size() == 80);
    // Letters within a sequence are spaced by 1/rate to within one sample.
    for (std::size_t i = 0; i < letters.size(); ++i) {
        if (i % 10 == 0) continue;
        double gap = letters[i].t - letters[i - 1].t;
        REQUIRE(std::abs(gap - 1.0 / cfg.rate_hz) <= 1.0 / cfg.sample_rate);
    }
    // One fixation per sequence, no feedback without thresholds.
    REQUIRE(r.log.of_kind(nfb::EventKind::fixation).size() == 8);
    REQUIRE(r.log.of_kind(nfb::EventKind::feedback).empty());

    // Times strictly increase across the log.
    for (std::size_t i = 1; i < r.log.events.size(); ++i)
        REQUIRE(r.log.events[i].t >= r.log.events[i - 1].t);

    // Recording covers the whole session.
    double expected_dur = 8.0 * (1.0 + 10.0 / 3.0 + 2.0);
    REQUIRE(r.eeg.duration() == Catch::Approx(expected_dur).epsilon(0.001));
    REQUIRE(expected_dur == Catch::Approx(8.0 * 6.333).epsilon(0.1));

    // Bitwise replay with the same seed and subject.
    nfb::SimSubject subject2(p);
    subject2.start_session(cfg.seed, cfg.n_sequences);
    nfb::SessionResult r2 = nfb::run_calibration_session(cfg, sim_driver(subject2, cfg.sample_rate));
    REQUIRE(r2.eeg.data == r.eeg.data);
    REQUIRE(r2.relative_psd == r.relative_psd);
    REQUIRE(r2.log.events.size() == r.log.events.size());
    for (std::size_t i = 0; i < r.log.events.size(); ++i) {
        REQUIRE(r2.log.events[i].t == r.log.events[i].t);
        REQUIRE(r2.log.events[i].symbol == r.log.events[i].symbol);
    }
}

TEST_CASE("neurofeedback sessions log a level after every sequence", "[task]") {
    nfb::SubjectProfile p;
    p.rng_seed = 78;
    nfb::SimSubject subject(p);
    nfb::ThresholdSet th;
    th.t30 = 0.1;
    th.t55 = 0.15;
    th.t70 = 0.2;
    th.t85 = 0.3;

    nfb::CalibrationConfig cfg;
    cfg.n_sequences = 6;
    cfg.seed = 9;
    cfg.nfb = &th;
    subject.start_session(cfg.seed, cfg.n_sequences);
    nfb::SessionResult r = nfb::run_calibration_session(cfg, sim_driver(subject, cfg.sample_rate));

    auto fb = r.log.of_kind(nfb::EventKind::feedback);
    REQUIRE(fb.size() == 6);
    for (const auto& e : fb) {
        REQUIRE(e.level >= 1);
        REQUIRE(e.level <= 5);
        REQUIRE(e.value >= 0.0);
        REQUIRE(e.value <= 1.0);
    }
    // The feedback value matches the recorded per-sequence relative PSD.
    for (std::size_t k = 0; k < fb.size(); ++k)
        REQUIRE(fb[k].value == r.relative_psd[k]);
    // Feedback lands right after the last letter of its sequence.
    auto letters = r.log.letters();
    for (std::size_t k = 0; k < fb.size(); ++k) {
        double last_letter = letters[10 * k + 9].t;
        REQUIRE(fb[k].t == Catch::Approx(last_letter + 1.0 / cfg.rate_hz).margin(1e-9));
    }
}

TEST_CASE("a failing driver surfaces a partial session", "[task]") {
    nfb::SubjectProfile p;
    nfb::SimSubject subject(p);
    nfb::CalibrationConfig cfg;
    cfg.n_sequences = 10;
    cfg.seed = 3;
    subject.start_session(cfg.seed, cfg.n_sequences);

    auto flaky = [&](const std::vector<nfb::SessionEvent>& ev, double t0, double dur,
                     std::size_t k) {
        if (k == 4) throw std::runtime_error("amplifier unplugged");
        return subject.sequence_eeg(ev, t0, dur, cfg.sample_rate, k);
    };
    nfb::SessionResult r = nfb::run_calibration_session(cfg, flaky);
    REQUIRE(r.partial);
    REQUIRE(r.error == "amplifier unplugged");
    REQUIRE(r.relative_psd.size() == 4);
    REQUIRE(r.log.letters().size() == 40);
    REQUIRE(r.eeg.duration() == Catch::Approx(4.0 * (1.0 + 10.0 / 3.0 + 2.0)).epsilon(0.001));
}

TEST_CASE("practice blocks balance target-present and absent trials", "[task]") {
    nfb::Rng rng(101);
    auto oracle = [](const std::string& target, const std::vector<std::string>& items) {
        return std::find(items.begin(), items.end(), target) != items.end();
    };
    nfb::PracticeBlock block = nfb::run_practice_block(3.0, rng, oracle);
    REQUIRE(block.trials.size() == 10);
    int present = 0;
    for (const auto& t : block.trials) {
        if (t.target_present) ++present;
        bool actually_there =
            std::find(t.items.begin(), t.items.end(), t.target) != t.items.end();
        REQUIRE(actually_there == t.target_present);
        REQUIRE(t.items.size() == 10);
    }
    REQUIRE(present == 5);
    REQUIRE(block.score() == 10);
}

TEST_CASE("a perfect responder clears the progression", "[task]") {
    nfb::Rng rng(55);
    auto oracle = [](const std::string& target, const std::vector<std::string>& items) {
        return std::find(items.begin(), items.end(), target) != items.end();
    };
    nfb::PracticeProgression prog = nfb::practice_progression(rng, oracle);
    REQUIRE(prog.eligible);
    REQUIRE(prog.rates.size() == 4);
    for (const auto& r : prog.rates) {
        REQUIRE(r.passed);
        REQUIRE(r.block_scores.size() == 1);
        REQUIRE(r.block_scores[0] == 10);
    }
}

TEST_CASE("a chronically sub-threshold responder halts at the first rate", "[task]") {
    nfb::Rng rng(56);
    int trial_counter = 0;
    // Scores exactly 7 of every 10: misses every 10th, 9th, and 8th trial.
    auto seven = [&trial_counter](const std::string& target, const std::vector<std::string>& items) {
        bool truth = std::find(items.begin(), items.end(), target) != items.end();
        bool sabotage = (trial_counter % 10) >= 7;
        ++trial_counter;
        return sabotage ? !truth : truth;
    };
    nfb::PracticeProgression prog = nfb::practice_progression(rng, seven);
    REQUIRE_FALSE(prog.eligible);
    REQUIRE(prog.rates.size() == 1);
    REQUIRE(prog.rates[0].block_scores == std::vector<int>{7, 7, 7, 7});
    REQUIRE_FALSE(prog.rates[0].passed);
}

TEST_CASE("session rejects an empty request", "[task]") {
    nfb::CalibrationConfig cfg;
    cfg.n_sequences = 0;
    REQUIRE_THROWS_AS(
        nfb::run_calibration_session(cfg, [](const std::vector<nfb::SessionEvent>&, double, double,
                                             std::size_t) { return nfb::EegBlock{}; }),
        std::invalid_argument);
}
