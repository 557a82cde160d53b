#pragma once

// Deterministic end-to-end study runner: weekly baseline sessions, a
// three-per-week neurofeedback intervention with weekly threshold updates,
// and a delayed follow-up, each session pairing a calibration run with a
// copy-phrase block and (on scheduled days) the behavioral battery. Given
// the same config and seed the emitted archive is byte-for-byte identical.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "assessments.hpp"
#include "classifier.hpp"
#include "session_io.hpp"
#include "simulate.hpp"
#include "stats.hpp"
#include "task.hpp"
#include "typing.hpp"

namespace nfb {

constexpr int kStudyFormatVersion = 1;

inline const char* phase_name(StudyPhase p) {
    switch (p) {
        case StudyPhase::baseline: return "baseline";
        case StudyPhase::intervention: return "intervention";
        case StudyPhase::followup: return "followup";
    }
    throw std::invalid_argument("phase_name: unknown phase");
}

// How a simulated participant performs one behavioral measure over the
// study: a level, a practice trend, a shift once training starts, noise,
// and an acclimation artifact on the very first administration.
struct BehavioralScript {
    double base = 0.0;
    double trend_per_week = 0.0;
    double intervention_shift = 0.0;
    double noise_sd = 0.0;
    double first_session_offset = 0.0;
};

// Magnitudes in the range of adult norms for these instruments; the trends
// give the longitudinal fits something honest to find. Cancellation scripts
// are completion times in seconds (lower is better), spans are item counts,
// srf is a raw reading-fluency score.
inline std::map<std::string, BehavioralScript> default_behavioral_scripts() {
    return {{"cancellation_curved_s", {34.0, -0.30, -1.5, 2.0, 8.0}},
            {"cancellation_straight_s", {48.0, -1.00, 0.0, 3.0, 10.0}},
            {"letter_span_forward", {5.0, 0.02, 0.5, 0.7, -1.0}},
            {"letter_span_backward", {3.5, 0.02, 0.0, 0.5, -1.0}},
            {"srf", {55.0, 0.30, 1.0, 2.0, -6.0}}};
}

struct StudyConfig {
    std::string participant = "p1";
    int n_baseline_sessions = 4;  // weekly; the enrollment design admits 4 to 7
    int intervention_weeks = 6;   // up to 6; fewer models early termination
    int sessions_per_week = 3;
    bool include_follow_up = true;
    double follow_up_gap_weeks = 4.0;  // 4 to 5 after the intervention ends
    std::uint64_t seed = 1;
    std::size_t n_sequences = 100;  // calibration sequences per session
    double sample_rate = 300.0;
    double rate_hz = 3.0;
    std::string nfb_channel = "P4";
    std::string copy_phrase = "HELLO_";
    double copy_threshold = 0.80;
    std::size_t copy_max_sequences = 25;
    SubjectProfile subject;
    AttentionWalk attention;
    std::map<std::string, BehavioralScript> behaviors = default_behavioral_scripts();

    void validate() const {
        if (participant.empty()) throw std::invalid_argument("study config: empty participant id");
        if (n_baseline_sessions < 4 || n_baseline_sessions > 7)
            throw std::invalid_argument("study config: baseline sessions must number 4 to 7");
        if (intervention_weeks < 0 || intervention_weeks > 6)
            throw std::invalid_argument("study config: intervention runs 0 to 6 weeks");
        if (sessions_per_week < 1 || sessions_per_week > 7)
            throw std::invalid_argument("study config: sessions per week must be 1 to 7");
        if (follow_up_gap_weeks < 4.0 || follow_up_gap_weeks > 5.0)
            throw std::invalid_argument("study config: follow-up gap must be 4 to 5 weeks");
        if (n_sequences < 20)
            throw std::invalid_argument(
                "study config: threshold fits need at least 20 sequences per session");
        if (sample_rate <= 0.0 || rate_hz <= 0.0)
            throw std::invalid_argument("study config: rates must be positive");
        if (copy_phrase.empty()) throw std::invalid_argument("study config: empty copy phrase");
        for (char c : copy_phrase)
            if (alphabet_index(c) >= kAlphabetSize)
                throw std::invalid_argument("study config: copy phrase outside the alphabet");
        if (copy_threshold <= 0.5 || copy_threshold > 1.0)
            throw std::invalid_argument("study config: decision threshold must lie in (0.5, 1]");
        if (copy_max_sequences < 1)
            throw std::invalid_argument("study config: need at least one sequence per letter");
    }
};

inline nlohmann::json study_config_to_json(const StudyConfig& c) {
    nlohmann::json subject{{"alpha_peak_hz", c.subject.alpha_peak_hz},
                           {"alpha_base_amp", c.subject.alpha_base_amp},
                           {"alpha_attention_gain", c.subject.alpha_attention_gain},
                           {"p300_amp", c.subject.p300_amp},
                           {"p300_latency_s", c.subject.p300_latency_s},
                           {"n200_amp", c.subject.n200_amp},
                           {"n200_latency_s", c.subject.n200_latency_s},
                           {"ssvep_amp", c.subject.ssvep_amp},
                           {"emg_level", c.subject.emg_level},
                           {"blink_rate_per_min", c.subject.blink_rate_per_min},
                           {"noise_scale", c.subject.noise_scale},
                           {"rng_seed", c.subject.rng_seed}};
    nlohmann::json attention{{"theta", c.attention.theta},
                             {"mean", c.attention.mean},
                             {"sigma", c.attention.sigma}};
    nlohmann::json behaviors = nlohmann::json::object();
    for (const auto& [name, s] : c.behaviors)
        behaviors[name] = {{"base", s.base},
                           {"trend_per_week", s.trend_per_week},
                           {"intervention_shift", s.intervention_shift},
                           {"noise_sd", s.noise_sd},
                           {"first_session_offset", s.first_session_offset}};
    return nlohmann::json{{"format_version", kStudyFormatVersion},
                          {"participant", c.participant},
                          {"n_baseline_sessions", c.n_baseline_sessions},
                          {"intervention_weeks", c.intervention_weeks},
                          {"sessions_per_week", c.sessions_per_week},
                          {"include_follow_up", c.include_follow_up},
                          {"follow_up_gap_weeks", c.follow_up_gap_weeks},
                          {"seed", c.seed},
                          {"n_sequences", c.n_sequences},
                          {"sample_rate", c.sample_rate},
                          {"rate_hz", c.rate_hz},
                          {"nfb_channel", c.nfb_channel},
                          {"copy_phrase", c.copy_phrase},
                          {"copy_threshold", c.copy_threshold},
                          {"copy_max_sequences", c.copy_max_sequences},
                          {"subject", subject},
                          {"attention", attention},
                          {"behaviors", behaviors}};
}

// Absent keys keep their defaults so a config file only needs to state what
// it changes.
inline StudyConfig study_config_from_json(const nlohmann::json& j) {
    StudyConfig c;
    if (j.contains("format_version") && j.at("format_version").get<int>() != kStudyFormatVersion)
        throw std::runtime_error("study config: unsupported format version");
    c.participant = j.value("participant", c.participant);
    c.n_baseline_sessions = j.value("n_baseline_sessions", c.n_baseline_sessions);
    c.intervention_weeks = j.value("intervention_weeks", c.intervention_weeks);
    c.sessions_per_week = j.value("sessions_per_week", c.sessions_per_week);
    c.include_follow_up = j.value("include_follow_up", c.include_follow_up);
    c.follow_up_gap_weeks = j.value("follow_up_gap_weeks", c.follow_up_gap_weeks);
    c.seed = j.value("seed", c.seed);
    c.n_sequences = j.value("n_sequences", c.n_sequences);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.rate_hz = j.value("rate_hz", c.rate_hz);
    c.nfb_channel = j.value("nfb_channel", c.nfb_channel);
    c.copy_phrase = j.value("copy_phrase", c.copy_phrase);
    c.copy_threshold = j.value("copy_threshold", c.copy_threshold);
    c.copy_max_sequences = j.value("copy_max_sequences", c.copy_max_sequences);
    if (j.contains("subject")) {
        const nlohmann::json& s = j.at("subject");
        c.subject.alpha_peak_hz = s.value("alpha_peak_hz", c.subject.alpha_peak_hz);
        c.subject.alpha_base_amp = s.value("alpha_base_amp", c.subject.alpha_base_amp);
        c.subject.alpha_attention_gain =
            s.value("alpha_attention_gain", c.subject.alpha_attention_gain);
        c.subject.p300_amp = s.value("p300_amp", c.subject.p300_amp);
        c.subject.p300_latency_s = s.value("p300_latency_s", c.subject.p300_latency_s);
        c.subject.n200_amp = s.value("n200_amp", c.subject.n200_amp);
        c.subject.n200_latency_s = s.value("n200_latency_s", c.subject.n200_latency_s);
        c.subject.ssvep_amp = s.value("ssvep_amp", c.subject.ssvep_amp);
        c.subject.emg_level = s.value("emg_level", c.subject.emg_level);
        c.subject.blink_rate_per_min = s.value("blink_rate_per_min", c.subject.blink_rate_per_min);
        c.subject.noise_scale = s.value("noise_scale", c.subject.noise_scale);
        c.subject.rng_seed = s.value("rng_seed", c.subject.rng_seed);
    }
    if (j.contains("attention")) {
        const nlohmann::json& a = j.at("attention");
        c.attention.theta = a.value("theta", c.attention.theta);
        c.attention.mean = a.value("mean", c.attention.mean);
        c.attention.sigma = a.value("sigma", c.attention.sigma);
    }
    if (j.contains("behaviors")) {
        c.behaviors.clear();
        for (const auto& [name, s] : j.at("behaviors").items()) {
            BehavioralScript b;
            b.base = s.value("base", 0.0);
            b.trend_per_week = s.value("trend_per_week", 0.0);
            b.intervention_shift = s.value("intervention_shift", 0.0);
            b.noise_sd = s.value("noise_sd", 0.0);
            b.first_session_offset = s.value("first_session_offset", 0.0);
            c.behaviors[name] = b;
        }
    }
    return c;
}

inline std::string config_fingerprint(const StudyConfig& c) {
    return config_fingerprint(study_config_to_json(c));
}

struct ScheduledSession {
    std::string id;
    StudyPhase phase = StudyPhase::baseline;
    int week = 1;  // 1-based within its phase
    int index_in_week = 1;
    int ordinal = 1;  // 1-based across the study
    double time_weeks = 0.0;
    bool nfb = false;
    bool measures = false;  // behavioral battery administered this session
};

// Baseline sessions run weekly, intervention sessions several times a week
// with the battery on the week's last session, follow-up after a gap.
inline std::vector<ScheduledSession> study_schedule(const StudyConfig& c) {
    c.validate();
    std::vector<ScheduledSession> out;
    int ordinal = 1;
    char id[48];
    for (int b = 1; b <= c.n_baseline_sessions; ++b) {
        std::snprintf(id, sizeof id, "baseline-%02d", b);
        ScheduledSession s;
        s.id = id;
        s.phase = StudyPhase::baseline;
        s.week = b;
        s.index_in_week = 1;
        s.ordinal = ordinal++;
        s.time_weeks = static_cast<double>(b - 1);
        s.measures = true;
        out.push_back(s);
    }
    double base_weeks = static_cast<double>(c.n_baseline_sessions);
    for (int w = 1; w <= c.intervention_weeks; ++w)
        for (int k = 1; k <= c.sessions_per_week; ++k) {
            std::snprintf(id, sizeof id, "intervention-w%d-s%d", w, k);
            ScheduledSession s;
            s.id = id;
            s.phase = StudyPhase::intervention;
            s.week = w;
            s.index_in_week = k;
            s.ordinal = ordinal++;
            s.time_weeks = base_weeks + (w - 1) +
                           static_cast<double>(k - 1) / static_cast<double>(c.sessions_per_week);
            s.nfb = true;
            s.measures = (k == c.sessions_per_week);
            out.push_back(s);
        }
    if (c.include_follow_up) {
        ScheduledSession s;
        s.id = "followup-01";
        s.phase = StudyPhase::followup;
        s.week = 1;
        s.index_in_week = 1;
        s.ordinal = ordinal++;
        s.time_weeks = base_weeks + c.intervention_weeks + c.follow_up_gap_weeks;
        s.measures = true;
        out.push_back(s);
    }
    return out;
}

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t base, const std::string& role, int ordinal) {
    return fnv1a64(std::to_string(base) + ":" + role + ":" + std::to_string(ordinal));
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Responses that make the span scorer land exactly on `target`: one hit per
// length up to it, a double miss right after.
inline std::vector<bool> span_responses_for(int target) {
    std::vector<bool> r;
    for (int len = kSpanMin; len <= kSpanMax; ++len) {
        if (len <= target) {
            r.push_back(true);
            r.push_back(false);
        } else {
            r.push_back(false);
            r.push_back(false);
            break;
        }
    }
    return r;
}

}  // namespace detail

struct SessionOutcome {
    ScheduledSession slot;
    double auc = 0.0;
    double median_relative_alpha = 0.0;
    bool thresholds_carried = false;
    std::string copy_typed;
    bool copy_success = false;
    std::size_t copy_sequences = 0;  // presented across the whole phrase
};

struct StudyResult {
    std::filesystem::path root;
    std::string config_hash;
    std::vector<SessionOutcome> sessions;
    LongitudinalDataset dataset;
    bool halted = false;
    std::string error;
};

// Runs the whole protocol into `out_dir`. Week 1 thresholds pool every
// baseline session; each later week refits from the week before. A stage
// failure halts the study; everything written so far stays on disk with the
// failure recorded in study.json.
inline StudyResult run_study(const StudyConfig& config, const std::filesystem::path& out_dir) {
    std::vector<ScheduledSession> schedule = study_schedule(config);
    nlohmann::json cfg_json = study_config_to_json(config);
    StudyResult result;
    result.root = out_dir;
    result.config_hash = config_fingerprint(cfg_json);
    result.dataset.records.reserve(schedule.size() * (2 + config.behaviors.size()));

    std::filesystem::create_directories(out_dir / "sessions");
    std::filesystem::create_directories(out_dir / "reports");
    std::filesystem::create_directories(out_dir / "assessments");

    std::vector<LetterSpanSet> span_sets = generate_letter_span_sets(
        kSpanVersions, default_banned_acronyms(), detail::derive_seed(config.seed, "span-sets", 0));
    detail::write_file(out_dir / "assessments" / "letter_spans.json",
                       letter_span_json(span_sets).dump(2) + "\n");
    int n_measure_days = 0;
    for (const ScheduledSession& s : schedule) n_measure_days += s.measures ? 1 : 0;
    std::vector<char> wjta_order =
        wjta_form_order(std::max(n_measure_days, 1), detail::derive_seed(config.seed, "wjta", 0));
    {
        nlohmann::json order = nlohmann::json::array();
        for (char f : wjta_order) order.push_back(std::string(1, f));
        detail::write_file(out_dir / "assessments" / "wjta_order.json", order.dump(2) + "\n");
    }

    TrigramLm lm = TrigramLm::from_text(default_typing_corpus());
    WeekHistory history;
    ThresholdSet thresholds;
    bool have_thresholds = false;
    int measure_day = 0;

    auto record = [&](const ScheduledSession& slot, const std::string& measure, double value) {
        StatRecord r;
        r.participant = config.participant;
        r.session = slot.ordinal;
        r.time_weeks = slot.time_weeks;
        r.phase = slot.phase == StudyPhase::baseline ? 0 : 1;
        r.measure = measure;
        r.value = value;
        r.follow_up = slot.phase == StudyPhase::followup;
        result.dataset.records.push_back(r);
    };

    for (const ScheduledSession& slot : schedule) {
        try {
            if (slot.phase == StudyPhase::intervention && slot.index_in_week == 1) {
                thresholds = update_thresholds_weekly(history, slot.week,
                                                      have_thresholds ? &thresholds : nullptr);
                have_thresholds = true;
            }

            SimSubject subject(config.subject, config.attention);
            std::uint64_t cal_seed = detail::derive_seed(config.seed, "calibration", slot.ordinal);
            subject.start_session(cal_seed, config.n_sequences);
            CalibrationConfig cc;
            cc.n_sequences = config.n_sequences;
            cc.rate_hz = config.rate_hz;
            cc.sample_rate = config.sample_rate;
            cc.seed = cal_seed;
            cc.session_id = slot.id;
            cc.nfb = slot.nfb ? &thresholds : nullptr;
            cc.nfb_channel = config.nfb_channel;
            SequenceEegFn driver = [&subject, fs = config.sample_rate](
                                       const std::vector<SessionEvent>& ev, double t0,
                                       double duration, std::size_t k) {
                return subject.sequence_eeg(ev, t0, duration, fs, k);
            };
            SessionResult cal = run_calibration_session(cc, driver);

            SessionArchive archive;
            archive.manifest.session_id = slot.id;
            archive.manifest.kind = phase_name(slot.phase);
            archive.manifest.week = slot.week;
            archive.manifest.ordinal = slot.ordinal;
            archive.manifest.seed = cal_seed;
            archive.manifest.config_hash = result.config_hash;
            archive.manifest.nfb = slot.nfb;
            archive.manifest.partial = cal.partial;
            archive.log = cal.log;
            archive.eeg = cal.eeg;
            std::filesystem::path dir = out_dir / "sessions" / slot.id;

            if (cal.partial) {
                write_session(dir, archive);
                result.halted = true;
                result.error = slot.id + ": calibration driver failed: " + cal.error;
                break;
            }

            if (slot.phase != StudyPhase::followup) {
                SessionSamples samples;
                samples.phase = slot.phase;
                samples.week = slot.week;
                samples.samples = cal.relative_psd;
                history.push_back(std::move(samples));
            }

            EpochSet epochs = extract_epochs(cal.eeg, cal.log);
            ClassifierConfig clf;
            clf.seed = detail::derive_seed(config.seed, "crossval", slot.ordinal);
            ClassifierModel model = train_classifier(epochs, clf);

            std::uint64_t copy_seed = detail::derive_seed(config.seed, "copy", slot.ordinal);
            subject.start_session(copy_seed, config.copy_phrase.size() * config.copy_max_sequences);
            SequenceEvidenceFn evidence = make_eeg_evidence(driver, model);
            CopyPhraseConfig cp;
            cp.threshold = config.copy_threshold;
            cp.max_sequences = config.copy_max_sequences;
            cp.rate_hz = config.rate_hz;
            cp.seed = copy_seed;
            cp.session_id = slot.id + "-copy";
            CopyPhraseResult copy = run_copy_phrase(config.copy_phrase, evidence, lm, cp);
            if (copy.aborted)
                throw std::runtime_error("copy-phrase aborted: " + copy.error);

            write_session(dir, archive);
            detail::write_file(dir / "model.json", model_to_json(model).dump(2) + "\n");
            if (slot.nfb) {
                nlohmann::json th{{"t30", thresholds.t30},
                                  {"t55", thresholds.t55},
                                  {"t70", thresholds.t70},
                                  {"t85", thresholds.t85},
                                  {"carried_forward", thresholds.carried_forward},
                                  {"week", slot.week}};
                detail::write_file(dir / "thresholds.json", th.dump(2) + "\n");
            }
            detail::write_file(dir / "copy-events.jsonl", events_jsonl(copy.log));

            SessionOutcome outcome;
            outcome.slot = slot;
            outcome.auc = model.cv_auc;
            outcome.median_relative_alpha = detail::median(cal.relative_psd);
            outcome.thresholds_carried = slot.nfb && thresholds.carried_forward;
            outcome.copy_typed = copy.typed;
            outcome.copy_success = copy.success;
            for (const LetterResult& lr : copy.letters) outcome.copy_sequences += lr.n_sequences;

            record(slot, "auc", outcome.auc);
            record(slot, "median_relative_alpha", outcome.median_relative_alpha);

            nlohmann::json summary{{"session_id", slot.id},
                                   {"kind", phase_name(slot.phase)},
                                   {"time_weeks", slot.time_weeks},
                                   {"auc", outcome.auc},
                                   {"median_relative_alpha", outcome.median_relative_alpha}};
            {
                nlohmann::json letters = nlohmann::json::array();
                for (const LetterResult& lr : copy.letters)
                    letters.push_back({{"attended", lr.attended},
                                       {"typed", lr.typed},
                                       {"n_sequences", lr.n_sequences},
                                       {"forced", lr.forced},
                                       {"posterior", lr.posterior}});
                summary["copy"] = {{"phrase", copy.phrase},
                                   {"typed", copy.typed},
                                   {"success", copy.success},
                                   {"n_sequences", outcome.copy_sequences},
                                   {"letters", letters}};
            }

            if (slot.measures) {
                nlohmann::json measures = nlohmann::json::object();
                nlohmann::json materials = nlohmann::json::object();
                for (const auto& [name, script] : config.behaviors) {
                    Rng rng(detail::derive_seed(config.seed, "behavior:" + name, slot.ordinal));
                    double scripted = script.base + script.trend_per_week * slot.time_weeks +
                                      (slot.phase != StudyPhase::baseline ? script.intervention_shift
                                                                          : 0.0) +
                                      (slot.ordinal == 1 ? script.first_session_offset : 0.0) +
                                      rng.normal(0.0, script.noise_sd);
                    double value;
                    if (name.rfind("cancellation", 0) == 0) {
                        FoilStyle style = name.find("curved") != std::string::npos
                                              ? FoilStyle::curved
                                              : FoilStyle::straight;
                        CancellationForm form = generate_cancellation_form(
                            style, detail::derive_seed(config.seed, "form:" + name, slot.ordinal));
                        std::string stem = name;
                        if (stem.size() > 2 && stem.compare(stem.size() - 2, 2, "_s") == 0)
                            stem.resize(stem.size() - 2);
                        detail::write_file(dir / (stem + "_form.txt"), cancellation_form_text(form));
                        CancellationScore sc =
                            score_cancellation(std::max(5.0, scripted), kCancellationTargets, 0);
                        value = sc.corrected_time_s;
                        materials[name] = stem + "_form.txt";
                    } else if (name.rfind("letter_span", 0) == 0) {
                        const LetterSpanSet& set =
                            span_sets[static_cast<std::size_t>(measure_day) % span_sets.size()];
                        int target = static_cast<int>(std::lround(
                            std::clamp(scripted, 0.0, static_cast<double>(kSpanMax))));
                        value = score_letter_span(detail::span_responses_for(target));
                        materials[name] = "letter_spans.json version " + std::to_string(set.version);
                    } else if (name == "srf") {
                        char form = wjta_order[static_cast<std::size_t>(measure_day) %
                                               wjta_order.size()];
                        value = std::max(0.0, std::round(scripted));
                        materials[name] = std::string("form ") + form;
                    } else {
                        value = scripted;
                    }
                    record(slot, name, value);
                    measures[name] = value;
                }
                summary["measures"] = measures;
                summary["materials"] = materials;
                ++measure_day;
            }

            detail::write_file(dir / "summary.json", summary.dump(2) + "\n");
            result.sessions.push_back(std::move(outcome));
        } catch (const std::exception& e) {
            result.halted = true;
            result.error = slot.id + ": " + e.what();
            break;
        }
    }

    result.dataset.validate();
    detail::write_file(out_dir / "dataset.csv", stats_csv(result.dataset));

    std::vector<std::string> measure_names{"auc", "median_relative_alpha"};
    for (const auto& [name, script] : config.behaviors) measure_names.push_back(name);
    if (!result.halted && !result.sessions.empty()) {
        detail::write_file(out_dir / "reports" / "stability.txt",
                           stability_table_text(result.dataset, measure_names));
        detail::write_file(out_dir / "reports" / "slopes.txt", slopes_table_text(result.dataset));
        std::vector<double> t, auc;
        for (const SessionOutcome& s : result.sessions) {
            t.push_back(s.slot.time_weeks);
            auc.push_back(s.auc);
        }
        std::vector<double> smooth = lowess_tricube(t, auc);
        std::ostringstream csv;
        csv << "session,time_weeks,auc,auc_smoothed\n";
        csv.precision(17);
        for (std::size_t i = 0; i < t.size(); ++i)
            csv << result.sessions[i].slot.id << ',' << t[i] << ',' << auc[i] << ',' << smooth[i]
                << '\n';
        detail::write_file(out_dir / "reports" / "auc_trajectory.csv", csv.str());
    }

    nlohmann::json sessions = nlohmann::json::array();
    for (const SessionOutcome& s : result.sessions) sessions.push_back(s.slot.id);
    nlohmann::json study{{"format_version", kStudyFormatVersion},
                         {"participant", config.participant},
                         {"config", cfg_json},
                         {"config_hash", result.config_hash},
                         {"halted", result.halted},
                         {"error", result.error},
                         {"sessions", sessions}};
    detail::write_file(out_dir / "study.json", study.dump(2) + "\n");
    return result;
}

}  // namespace nfb
