#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nfb/session_io.hpp"
#include "nfb/simulate.hpp"
#include "nfb/study.hpp"
#include "nfb/task.hpp"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "nfb-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nfb::EegBlock tiny_block(std::uint64_t seed, std::size_t n = 64) {
    nfb::Rng rng(seed);
    nfb::EegBlock b;
    b.sample_rate = 100.0;
    b.t0 = 1.25;
    b.channels = {"Pz", "P4", "F7"};
    b.data.resize(3);
    for (auto& ch : b.data) {
        ch.resize(n);
        // Values pinned to float precision so the container round-trips them
        // without loss.
        for (double& v : ch) v = static_cast<double>(static_cast<float>(rng.normal(0.0, 20.0)));
    }
    return b;
}

nfb::SessionLog small_log() {
    nfb::SessionLog log;
    log.session_id = "roundtrip";
    log.letter_rate_hz = 3.0;
    log.seed = 99;
    nfb::SessionEvent fix;
    fix.kind = nfb::EventKind::fixation;
    fix.t = 0.0;
    fix.symbol = "Q";
    log.events.push_back(fix);
    nfb::SessionEvent letter;
    letter.kind = nfb::EventKind::letter;
    letter.t = 1.0 / 3.0;  // exercises shortest-round-trip float printing
    letter.symbol = "Q";
    letter.is_target = true;
    log.events.push_back(letter);
    nfb::SessionEvent feedback;
    feedback.kind = nfb::EventKind::feedback;
    feedback.t = 4.3333333333333339;
    feedback.level = 5;
    feedback.value = 0.23456789012345678;
    log.events.push_back(feedback);
    nfb::SessionEvent decision;
    decision.kind = nfb::EventKind::decision;
    decision.t = 6.0;
    decision.symbol = "_";
    decision.forced = true;
    log.events.push_back(decision);
    return log;
}

void require_logs_equal(const nfb::SessionLog& a, const nfb::SessionLog& b) {
    REQUIRE(a.session_id == b.session_id);
    REQUIRE(a.letter_rate_hz == b.letter_rate_hz);
    REQUIRE(a.seed == b.seed);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        REQUIRE(a.events[i].kind == b.events[i].kind);
        REQUIRE(a.events[i].t == b.events[i].t);
        REQUIRE(a.events[i].symbol == b.events[i].symbol);
        REQUIRE(a.events[i].is_target == b.events[i].is_target);
        REQUIRE(a.events[i].level == b.events[i].level);
        REQUIRE(a.events[i].value == b.events[i].value);
        REQUIRE(a.events[i].forced == b.events[i].forced);
    }
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            files[fs::relative(entry.path(), root).generic_string()] =
                nfb::detail::read_file(entry.path());
    return files;
}

nfb::StudyConfig small_study_config() {
    nfb::StudyConfig c;
    c.participant = "t1";
    c.n_baseline_sessions = 4;
    c.intervention_weeks = 2;
    c.sessions_per_week = 3;
    c.n_sequences = 30;
    c.copy_phrase = "HI_";
    c.copy_max_sequences = 8;
    c.seed = 7;
    return c;
}

}  // namespace

TEST_CASE("eeg container round-trips samples, labels and clock bit-exactly", "[sessionio]") {
    nfb::EegBlock a = tiny_block(5);
    std::string bytes = nfb::eeg_bin_bytes(a);
    nfb::EegBlock b = nfb::parse_eeg_bin(bytes);
    REQUIRE(b.sample_rate == a.sample_rate);
    REQUIRE(b.t0 == a.t0);
    REQUIRE(b.channels == a.channels);
    REQUIRE(b.data == a.data);
    // Re-encoding is the identity on bytes, so a stored block never drifts.
    REQUIRE(nfb::eeg_bin_bytes(b) == bytes);
}

TEST_CASE("eeg container quantizes to float once and is stable after that", "[sessionio]") {
    nfb::Rng rng(17);
    nfb::EegBlock raw;
    raw.sample_rate = 300.0;
    raw.t0 = 0.0;
    raw.channels = {"Pz", "P4"};
    raw.data.assign(2, std::vector<double>(50));
    for (auto& ch : raw.data)
        for (double& v : ch) v = rng.normal(0.0, 20.0);

    nfb::EegBlock once = nfb::parse_eeg_bin(nfb::eeg_bin_bytes(raw));
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 50; ++i) {
            REQUIRE(once.data[c][i] == static_cast<double>(static_cast<float>(raw.data[c][i])));
            REQUIRE(std::abs(once.data[c][i] - raw.data[c][i]) < 1e-4);
        }
    REQUIRE(nfb::eeg_bin_bytes(once) == nfb::eeg_bin_bytes(raw));
}

TEST_CASE("eeg container rejects corruption with specific diagnoses", "[sessionio]") {
    nfb::EegBlock a = tiny_block(6, 32);
    std::string bytes = nfb::eeg_bin_bytes(a);

    SECTION("truncated payload names expected and found sizes") {
        std::string cut = bytes.substr(0, bytes.size() - 10);
        REQUIRE_THROWS_WITH(nfb::parse_eeg_bin(cut),
                            Catch::Matchers::ContainsSubstring("truncated payload") &&
                                Catch::Matchers::ContainsSubstring("32 samples x 3 channels") &&
                                Catch::Matchers::ContainsSubstring("complete frames"));
    }
    SECTION("trailing garbage is refused") {
        REQUIRE_THROWS_WITH(nfb::parse_eeg_bin(bytes + "xx"),
                            Catch::Matchers::ContainsSubstring("trailing bytes"));
    }
    SECTION("bad magic is refused") {
        std::string wrong = bytes;
        wrong[0] = 'X';
        REQUIRE_THROWS_WITH(nfb::parse_eeg_bin(wrong),
                            Catch::Matchers::ContainsSubstring("bad magic"));
    }
    SECTION("future format version is refused") {
        nlohmann::json header = nlohmann::json::parse(
            bytes.substr(8, nfb::detail::get_u32le(
                                reinterpret_cast<const unsigned char*>(bytes.data()) + 4)));
        header["format_version"] = 2;
        std::string h = header.dump();
        std::string rebuilt = "NFB1";
        nfb::detail::put_u32le(rebuilt, static_cast<std::uint32_t>(h.size()));
        rebuilt += h;
        rebuilt += bytes.substr(bytes.size() - 4 * 32 * 3);
        REQUIRE_THROWS_WITH(nfb::parse_eeg_bin(rebuilt),
                            Catch::Matchers::ContainsSubstring("unsupported format version 2"));
    }
    SECTION("header shorter than its declared length is refused") {
        REQUIRE_THROWS_WITH(nfb::parse_eeg_bin(bytes.substr(0, 20)),
                            Catch::Matchers::ContainsSubstring("truncated or corrupt header"));
    }
}

TEST_CASE("event log lines round-trip every field and reject malformed input", "[sessionio]") {
    nfb::SessionLog log = small_log();
    std::string text = nfb::events_jsonl(log);

    std::string first = text.substr(0, text.find('\n'));
    REQUIRE(first.find("\"type\":\"meta\"") != std::string::npos);
    REQUIRE(first.find("\"session_id\":\"roundtrip\"") != std::string::npos);

    require_logs_equal(nfb::parse_events_jsonl(text), log);
    // Serialization is stable across a round trip.
    REQUIRE(nfb::events_jsonl(nfb::parse_events_jsonl(text)) == text);

    REQUIRE_THROWS_WITH(nfb::parse_events_jsonl(""), Catch::Matchers::ContainsSubstring("empty"));
    REQUIRE_THROWS_WITH(nfb::parse_events_jsonl("{\"type\":\"event\"}\n"),
                        Catch::Matchers::ContainsSubstring("meta"));
    std::string bad_version = text;
    bad_version.replace(bad_version.find("\"format_version\":1"), 18, "\"format_version\":9");
    REQUIRE_THROWS_WITH(nfb::parse_events_jsonl(bad_version),
                        Catch::Matchers::ContainsSubstring("unsupported format version 9"));
    REQUIRE_THROWS_WITH(
        nfb::parse_events_jsonl(text + "{\"type\":\"mystery\"}\n"),
        Catch::Matchers::ContainsSubstring("unknown record type"));
    REQUIRE_THROWS_WITH(nfb::parse_events_jsonl(text + "not json\n"),
                        Catch::Matchers::ContainsSubstring("line 6"));
}

TEST_CASE("session archives round-trip and enforce the config fingerprint", "[sessionio]") {
    fs::path dir = fresh_dir("archive-roundtrip");
    nfb::SessionArchive a;
    a.manifest.session_id = "roundtrip";
    a.manifest.kind = "baseline";
    a.manifest.week = 2;
    a.manifest.ordinal = 2;
    a.manifest.seed = 424242;
    a.manifest.config_hash = "00aa11bb22cc33dd";
    a.log = small_log();
    a.eeg = tiny_block(9);
    nfb::write_session(dir, a);

    nfb::SessionArchive b = nfb::read_session(dir);
    REQUIRE(b.manifest.session_id == a.manifest.session_id);
    REQUIRE(b.manifest.kind == a.manifest.kind);
    REQUIRE(b.manifest.week == a.manifest.week);
    REQUIRE(b.manifest.ordinal == a.manifest.ordinal);
    REQUIRE(b.manifest.seed == a.manifest.seed);
    REQUIRE(b.manifest.config_hash == a.manifest.config_hash);
    REQUIRE(b.manifest.nfb == a.manifest.nfb);
    REQUIRE(b.manifest.partial == a.manifest.partial);
    require_logs_equal(b.log, a.log);
    REQUIRE(b.eeg.data == a.eeg.data);

    // The expected fingerprint gate: matching hash passes, a different one
    // is refused unless overridden.
    REQUIRE_NOTHROW(nfb::read_session(dir, "00aa11bb22cc33dd"));
    REQUIRE_THROWS_WITH(nfb::read_session(dir, "ffffffffffffffff"),
                        Catch::Matchers::ContainsSubstring("config hash mismatch") &&
                            Catch::Matchers::ContainsSubstring("override"));
    REQUIRE_NOTHROW(nfb::read_session(dir, "ffffffffffffffff", true));

    // A log whose id disagrees with the manifest marks a stitched archive.
    nfb::SessionLog wrong = a.log;
    wrong.session_id = "someone-else";
    nfb::detail::write_file(dir / "events.jsonl", nfb::events_jsonl(wrong));
    REQUIRE_THROWS_WITH(nfb::read_session(dir),
                        Catch::Matchers::ContainsSubstring("does not match manifest"));
}

TEST_CASE("relative alpha rebuilt from a stored session matches the online values",
          "[sessionio]") {
    nfb::SubjectProfile profile;
    profile.rng_seed = 21;
    nfb::SimSubject subject(profile);
    subject.start_session(501, 10);
    nfb::CalibrationConfig cc;
    cc.n_sequences = 10;
    cc.seed = 501;
    cc.session_id = "rederive";
    nfb::SequenceEegFn driver = [&subject](const std::vector<nfb::SessionEvent>& ev, double t0,
                                           double dur, std::size_t k) {
        return subject.sequence_eeg(ev, t0, dur, 300.0, k);
    };
    nfb::SessionResult cal = nfb::run_calibration_session(cc, driver);
    REQUIRE(cal.relative_psd.size() == 10);

    // From the in-memory block the rebuild is the very same computation.
    std::vector<double> direct = nfb::session_relative_psd(cal.log, cal.eeg);
    REQUIRE(direct.size() == 10);
    for (std::size_t k = 0; k < 10; ++k) REQUIRE(direct[k] == cal.relative_psd[k]);

    // Through the container the samples pass float quantization; the ratio
    // moves by float epsilon, nothing more.
    nfb::EegBlock stored = nfb::parse_eeg_bin(nfb::eeg_bin_bytes(cal.eeg));
    std::vector<double> rebuilt = nfb::session_relative_psd(cal.log, stored);
    for (std::size_t k = 0; k < 10; ++k)
        REQUIRE(rebuilt[k] == Catch::Approx(cal.relative_psd[k]).epsilon(1e-4));
}

TEST_CASE("study config serialization is lossless and validation guards the design",
          "[sessionio]") {
    nfb::StudyConfig c = small_study_config();
    c.behaviors["srf"].base = 60.0;
    c.subject.p300_amp = 7.5;
    nfb::StudyConfig back = nfb::study_config_from_json(nfb::study_config_to_json(c));
    REQUIRE(nfb::config_fingerprint(back) == nfb::config_fingerprint(c));
    REQUIRE(back.behaviors.at("srf").base == 60.0);
    REQUIRE(back.subject.p300_amp == 7.5);
    REQUIRE(back.copy_phrase == "HI_");

    // A partial config only overrides what it states.
    nfb::StudyConfig sparse = nfb::study_config_from_json(nlohmann::json{{"participant", "p9"}});
    REQUIRE(sparse.participant == "p9");
    REQUIRE(sparse.n_baseline_sessions == 4);
    REQUIRE(sparse.behaviors.size() == 5);

    nfb::StudyConfig bad = c;
    bad.n_baseline_sessions = 3;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.n_baseline_sessions = 8;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.intervention_weeks = 7;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.follow_up_gap_weeks = 3.5;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.n_sequences = 19;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.copy_phrase = "HI!";
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.copy_threshold = 0.5;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);

    // Any config edit moves the fingerprint.
    nfb::StudyConfig tweaked = c;
    tweaked.seed = 8;
    REQUIRE(nfb::config_fingerprint(tweaked) != nfb::config_fingerprint(c));
}

TEST_CASE("the schedule follows the protocol cadence", "[sessionio]") {
    nfb::StudyConfig c;
    c.n_baseline_sessions = 4;
    c.intervention_weeks = 6;
    std::vector<nfb::ScheduledSession> plan = nfb::study_schedule(c);
    REQUIRE(plan.size() == 4 + 18 + 1);
    REQUIRE(plan.front().id == "baseline-01");
    REQUIRE(plan[4].id == "intervention-w1-s1");
    REQUIRE(plan.back().id == "followup-01");

    for (int b = 0; b < 4; ++b) {
        REQUIRE(plan[b].phase == nfb::StudyPhase::baseline);
        REQUIRE(plan[b].time_weeks == static_cast<double>(b));
        REQUIRE(plan[b].nfb == false);
        REQUIRE(plan[b].measures == true);
    }
    int i = 4;
    for (int w = 1; w <= 6; ++w)
        for (int k = 1; k <= 3; ++k, ++i) {
            REQUIRE(plan[i].phase == nfb::StudyPhase::intervention);
            REQUIRE(plan[i].week == w);
            REQUIRE(plan[i].nfb == true);
            REQUIRE(plan[i].measures == (k == 3));
            REQUIRE(plan[i].time_weeks ==
                    Catch::Approx(4.0 + (w - 1) + (k - 1) / 3.0).margin(1e-12));
        }
    REQUIRE(plan.back().phase == nfb::StudyPhase::followup);
    REQUIRE(plan.back().time_weeks == 4.0 + 6.0 + 4.0);
    REQUIRE(plan.back().nfb == false);
    REQUIRE(plan.back().measures == true);
    REQUIRE(plan.back().ordinal == 23);

    nfb::StudyConfig no_follow = c;
    no_follow.include_follow_up = false;
    REQUIRE(nfb::study_schedule(no_follow).size() == 22);
}

TEST_CASE("seed derivation separates roles and sessions", "[sessionio]") {
    std::set<std::uint64_t> seen;
    for (int ordinal = 1; ordinal <= 30; ++ordinal) {
        seen.insert(nfb::detail::derive_seed(7, "calibration", ordinal));
        seen.insert(nfb::detail::derive_seed(7, "copy", ordinal));
        seen.insert(nfb::detail::derive_seed(7, "crossval", ordinal));
    }
    REQUIRE(seen.size() == 90);
    REQUIRE(nfb::detail::derive_seed(7, "copy", 3) == nfb::detail::derive_seed(7, "copy", 3));
    REQUIRE(nfb::detail::derive_seed(7, "copy", 3) != nfb::detail::derive_seed(8, "copy", 3));
}

TEST_CASE("scripted span responses land the scorer on the target", "[sessionio]") {
    // The shortest list has two items, so 1 is not an achievable score.
    for (int target = 0; target <= 8; ++target) {
        int expected = target < nfb::kSpanMin ? 0 : target;
        REQUIRE(nfb::score_letter_span(nfb::detail::span_responses_for(target)) == expected);
    }
}

TEST_CASE("a study run emits the full archive and a same-seed rerun is byte-identical",
          "[sessionio]") {
    nfb::StudyConfig c = small_study_config();
    fs::path dir_a = fresh_dir("study-a");
    nfb::StudyResult run = nfb::run_study(c, dir_a);

    REQUIRE_FALSE(run.halted);
    REQUIRE(run.error.empty());
    REQUIRE(run.sessions.size() == 4 + 6 + 1);

    // Sessions, feedback cadence and artifacts.
    std::vector<std::string> ids;
    for (const nfb::SessionOutcome& s : run.sessions) ids.push_back(s.slot.id);
    REQUIRE(ids == std::vector<std::string>{"baseline-01", "baseline-02", "baseline-03",
                                            "baseline-04", "intervention-w1-s1",
                                            "intervention-w1-s2", "intervention-w1-s3",
                                            "intervention-w2-s1", "intervention-w2-s2",
                                            "intervention-w2-s3", "followup-01"});

    double auc_sum = 0.0;
    for (const nfb::SessionOutcome& s : run.sessions) {
        fs::path sd = dir_a / "sessions" / s.slot.id;
        REQUIRE(fs::exists(sd / "manifest.json"));
        REQUIRE(fs::exists(sd / "events.jsonl"));
        REQUIRE(fs::exists(sd / "eeg.bin"));
        REQUIRE(fs::exists(sd / "model.json"));
        REQUIRE(fs::exists(sd / "copy-events.jsonl"));
        REQUIRE(fs::exists(sd / "summary.json"));
        REQUIRE(fs::exists(sd / "thresholds.json") == s.slot.nfb);
        REQUIRE(fs::exists(sd / "cancellation_curved_form.txt") == s.slot.measures);

        nfb::SessionArchive arch = nfb::read_session(sd, run.config_hash);
        REQUIRE(arch.manifest.kind == nfb::phase_name(s.slot.phase));
        REQUIRE_FALSE(arch.manifest.partial);
        std::size_t feedback_events = 0;
        for (const nfb::SessionEvent& e : arch.log.events)
            if (e.kind == nfb::EventKind::feedback) ++feedback_events;
        // Feedback after every intervention sequence, never otherwise.
        REQUIRE(feedback_events == (s.slot.nfb ? c.n_sequences : 0));

        // 30 sequences is a small training set; individual sessions wobble
        // but every one must beat chance comfortably.
        REQUIRE(s.auc > 0.55);
        auc_sum += s.auc;
        REQUIRE(s.median_relative_alpha > 0.0);
        REQUIRE(s.median_relative_alpha < 1.0);
    }
    REQUIRE(auc_sum / static_cast<double>(run.sessions.size()) > 0.65);

    // Weekly refit: week 2 ran on week 1 data, so its cutoffs moved.
    std::string w1 = nfb::detail::read_file(dir_a / "sessions" / "intervention-w1-s1" /
                                            "thresholds.json");
    std::string w2 = nfb::detail::read_file(dir_a / "sessions" / "intervention-w2-s1" /
                                            "thresholds.json");
    REQUIRE(w1 != w2);
    REQUIRE(nlohmann::json::parse(w1).at("week").get<int>() == 1);
    REQUIRE(nlohmann::json::parse(w2).at("week").get<int>() == 2);
    // All three sessions of a week run under the same cutoffs.
    REQUIRE(nfb::detail::read_file(dir_a / "sessions" / "intervention-w1-s2" /
                                   "thresholds.json") == w1);

    // Dataset cadence and study metadata.
    nfb::LongitudinalDataset data;
    {
        std::ifstream in(dir_a / "dataset.csv");
        data = nfb::load_stats_csv(in);
    }
    data.validate();
    std::map<std::string, int> counts;
    for (const nfb::StatRecord& r : data.records) ++counts[r.measure];
    REQUIRE(counts.at("auc") == 11);
    REQUIRE(counts.at("median_relative_alpha") == 11);
    // Battery on every baseline session, the last session of each
    // intervention week, and follow-up: 4 + 2 + 1 administrations.
    for (const char* m : {"cancellation_curved_s", "cancellation_straight_s",
                          "letter_span_forward", "letter_span_backward", "srf"})
        REQUIRE(counts.at(m) == 7);
    for (const nfb::StatRecord& r : data.records) {
        REQUIRE(r.participant == "t1");
        REQUIRE(r.follow_up == (r.session == 11));
    }

    nlohmann::json study =
        nlohmann::json::parse(nfb::detail::read_file(dir_a / "study.json"));
    REQUIRE(study.at("halted").get<bool>() == false);
    REQUIRE(study.at("config_hash").get<std::string>() == run.config_hash);
    REQUIRE(study.at("sessions").size() == 11);
    REQUIRE(nfb::config_fingerprint(
                nfb::study_config_from_json(study.at("config"))) == run.config_hash);

    REQUIRE(fs::exists(dir_a / "reports" / "stability.txt"));
    REQUIRE(fs::exists(dir_a / "reports" / "slopes.txt"));
    REQUIRE(fs::exists(dir_a / "reports" / "auc_trajectory.csv"));
    REQUIRE(fs::exists(dir_a / "assessments" / "letter_spans.json"));
    // auc is recorded every session, so both phases have enough points
    // for a slope fit even in this shortened design.
    std::string slopes = nfb::detail::read_file(dir_a / "reports" / "slopes.txt");
    REQUIRE(slopes.find("auc\tt1\tBaseline") != std::string::npos);

    // Same seed, same bytes; different seed, different bytes.
    fs::path dir_b = fresh_dir("study-b");
    nfb::run_study(c, dir_b);
    auto tree_a = snapshot_tree(dir_a);
    auto tree_b = snapshot_tree(dir_b);
    REQUIRE(tree_a.size() == tree_b.size());
    for (const auto& [rel, bytes] : tree_a) {
        INFO(rel);
        auto it = tree_b.find(rel);
        REQUIRE(it != tree_b.end());
        REQUIRE(bytes == it->second);
    }

    nfb::StudyConfig reseeded = c;
    reseeded.seed = 8;
    fs::path dir_c = fresh_dir("study-c");
    nfb::run_study(reseeded, dir_c);
    auto tree_c = snapshot_tree(dir_c);
    REQUIRE(tree_c.at("sessions/baseline-01/eeg.bin") !=
            tree_a.at("sessions/baseline-01/eeg.bin"));
}

TEST_CASE("a stage failure halts the study and the partial archive survives", "[sessionio]") {
    nfb::StudyConfig c = small_study_config();
    c.nfb_channel = "XX";  // not in the montage; the first sequence analysis trips
    fs::path dir = fresh_dir("study-halt");
    nfb::StudyResult run = nfb::run_study(c, dir);
    REQUIRE(run.halted);
    REQUIRE(run.error.find("baseline-01") == 0);
    REQUIRE(run.sessions.empty());

    nlohmann::json study = nlohmann::json::parse(nfb::detail::read_file(dir / "study.json"));
    REQUIRE(study.at("halted").get<bool>() == true);
    REQUIRE(study.at("error").get<std::string>() == run.error);
    REQUIRE(study.at("sessions").empty());
    REQUIRE(fs::exists(dir / "dataset.csv"));
    REQUIRE_FALSE(fs::exists(dir / "reports" / "stability.txt"));
}
