// Command-line surface for the engine. Every command is a pure function of
// (inputs, seed, config): rerunning it reproduces the outputs byte for byte.
// Commands that read archives need nothing beyond the archive and the flags.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nfb/assessments.hpp"
#include "nfb/classifier.hpp"
#include "nfb/erp.hpp"
#include "nfb/feedback.hpp"
#include "nfb/session_io.hpp"
#include "nfb/simulate.hpp"
#include "nfb/stats.hpp"
#include "nfb/study.hpp"
#include "nfb/task.hpp"
#include "nfb/typing.hpp"

namespace fs = std::filesystem;

namespace {

nfb::StudyConfig load_config(const std::string& path) {
    if (path.empty()) return nfb::StudyConfig{};
    return nfb::study_config_from_json(nlohmann::json::parse(nfb::detail::read_file(path)));
}

nfb::SequenceEegFn sim_driver(nfb::SimSubject& subject, double fs) {
    return [&subject, fs](const std::vector<nfb::SessionEvent>& ev, double t0, double dur,
                          std::size_t k) { return subject.sequence_eeg(ev, t0, dur, fs, k); };
}

fs::path require_out(const std::string& out, const char* command) {
    if (out.empty())
        throw CLI::ValidationError(std::string(command) + ": --out is required");
    return fs::path(out);
}

nfb::ThresholdSet thresholds_from_json(const nlohmann::json& j) {
    nfb::ThresholdSet t;
    t.t30 = j.at("t30").get<double>();
    t.t55 = j.at("t55").get<double>();
    t.t70 = j.at("t70").get<double>();
    t.t85 = j.at("t85").get<double>();
    t.carried_forward = j.value("carried_forward", false);
    return t;
}

// Shared body of simulate-calibration and simulate-intervention. The archive
// is written even when the driver failed mid-session so the partial run can
// be inspected.
int run_simulated_session(const nfb::StudyConfig& c, std::uint64_t seed,
                          const std::string& session_id, const nfb::ThresholdSet* nfb,
                          const fs::path& out) {
    nfb::SimSubject subject(c.subject, c.attention);
    nfb::CalibrationConfig cal;
    cal.n_sequences = static_cast<std::size_t>(c.n_sequences);
    cal.rate_hz = c.rate_hz;
    cal.sample_rate = c.sample_rate;
    cal.seed = seed;
    cal.session_id = session_id;
    cal.nfb = nfb;
    cal.nfb_channel = c.nfb_channel;
    subject.start_session(cal.seed, cal.n_sequences);
    nfb::SessionResult r = nfb::run_calibration_session(cal, sim_driver(subject, cal.sample_rate));

    nfb::SessionArchive archive;
    archive.manifest.session_id = session_id;
    archive.manifest.kind = nfb ? "intervention" : "calibration";
    archive.manifest.seed = seed;
    archive.manifest.config_hash = nfb::config_fingerprint(c);
    archive.manifest.nfb = nfb != nullptr;
    archive.manifest.partial = r.partial;
    archive.log = r.log;
    archive.eeg = r.eeg;
    nfb::write_session(out, archive);

    if (r.partial) {
        std::cerr << session_id << " failed mid-run: " << r.error
                  << " (partial archive kept at " << out.string() << ")\n";
        return 1;
    }
    std::cout << "wrote " << out.string() << ": " << r.relative_psd.size()
              << " sequences, median relative alpha " << nfb::detail::median(r.relative_psd)
              << "\n";
    if (nfb) {
        std::vector<int> levels;
        for (const nfb::SessionEvent& e : r.log.events)
            if (e.kind == nfb::EventKind::feedback) levels.push_back(e.level);
        std::array<double, 5> dist = nfb::feedback_distribution(levels);
        std::cout << "feedback level fractions:";
        for (double d : dist) std::cout << ' ' << d;
        std::cout << "\n";
    }
    return 0;
}

int cmd_gen_assessments(const fs::path& out, std::uint64_t seed, int sessions) {
    fs::create_directories(out);
    for (nfb::FoilStyle style : {nfb::FoilStyle::curved, nfb::FoilStyle::straight}) {
        std::string name = style == nfb::FoilStyle::curved ? "cancellation_curved"
                                                           : "cancellation_straight";
        // Same derivation the study runner uses for its first session, so a
        // standalone form matches the archived one at equal seeds.
        nfb::CancellationForm form = nfb::generate_cancellation_form(
            style, nfb::detail::derive_seed(seed, "form:" + name + "_s", 1));
        nfb::detail::write_file(out / (name + ".txt"), nfb::cancellation_form_text(form));
        nfb::detail::write_file(out / (name + ".csv"), nfb::cancellation_form_csv(form));
    }
    std::vector<nfb::LetterSpanSet> sets = nfb::generate_letter_span_sets(
        nfb::kSpanVersions, nfb::default_banned_acronyms(),
        nfb::detail::derive_seed(seed, "span-sets", 0));
    nfb::detail::write_file(out / "letter_spans.json", nfb::letter_span_json(sets).dump(2) + "\n");
    std::vector<char> order =
        nfb::wjta_form_order(sessions, nfb::detail::derive_seed(seed, "wjta", 0));
    nlohmann::json order_json = nlohmann::json::array();
    for (char f : order) order_json.push_back(std::string(1, f));
    nfb::detail::write_file(out / "wjta_order.json", order_json.dump(2) + "\n");
    std::cout << "wrote " << out.string() << ": 2 cancellation forms, " << sets.size()
              << " letter-span versions, reading-fluency order for " << sessions
              << " sessions\n";
    return 0;
}

int cmd_train_classifier(const fs::path& session_dir, std::string out_file, int folds,
                         std::uint64_t seed) {
    nfb::SessionArchive arch = nfb::read_session(session_dir);
    nfb::EpochSet set = nfb::extract_epochs(arch.eeg, arch.log);
    nfb::ClassifierConfig cfg;
    cfg.n_folds = folds;
    cfg.seed = seed;
    nfb::CrossvalResult cv = nfb::crossval_auc(set, cfg);
    nfb::ClassifierModel model = nfb::train_classifier(set, cfg);
    fs::path out = out_file.empty() ? session_dir / "model.json" : fs::path(out_file);
    nfb::detail::write_file(out, nfb::model_to_json(model).dump(2) + "\n");
    std::cout << "wrote " << out.string() << ": cv_auc " << cv.cv_auc << " (lambda "
              << cv.lambda << ", gamma " << cv.gamma << ", " << folds << " folds, "
              << set.labels.size() << " epochs)\n";
    return 0;
}

int cmd_nfb_thresholds(const std::vector<std::string>& sessions, const fs::path& out,
                       const std::string& channel) {
    std::vector<double> pool;
    nlohmann::json sources = nlohmann::json::array();
    for (const std::string& dir : sessions) {
        nfb::SessionArchive arch = nfb::read_session(dir);
        std::vector<double> psd = nfb::session_relative_psd(arch.log, arch.eeg, channel);
        pool.insert(pool.end(), psd.begin(), psd.end());
        sources.push_back({{"session_id", arch.manifest.session_id},
                           {"n_sequences", psd.size()}});
    }
    if (pool.size() < 20)
        throw std::runtime_error("nfb-thresholds: pooled " + std::to_string(pool.size()) +
                                 " sequences; at least 20 are required to fit cutoffs");
    nfb::ThresholdSet t = nfb::compute_thresholds(pool);
    nlohmann::json j{{"format_version", 1},
                     {"t30", t.t30},
                     {"t55", t.t55},
                     {"t70", t.t70},
                     {"t85", t.t85},
                     {"carried_forward", false},
                     {"channel", channel},
                     {"n_samples", pool.size()},
                     {"source_sessions", sources}};
    nfb::detail::write_file(out, j.dump(2) + "\n");
    std::cout << "wrote " << out.string() << ": t30 " << t.t30 << ", t55 " << t.t55 << ", t70 "
              << t.t70 << ", t85 " << t.t85 << " from " << pool.size() << " sequences\n";
    return 0;
}

int cmd_copy_spell(const nfb::StudyConfig& c, std::uint64_t seed, const std::string& model_file,
                   const std::string& phrase, const std::string& lm_file,
                   const std::string& out) {
    nfb::ClassifierModel model =
        nfb::model_from_json(nlohmann::json::parse(nfb::detail::read_file(model_file)));
    nfb::TrigramLm lm = nfb::TrigramLm::from_text(
        lm_file.empty() ? nfb::default_typing_corpus() : nfb::detail::read_file(lm_file));

    nfb::SimSubject subject(c.subject, c.attention);
    nfb::CopyPhraseConfig cfg;
    cfg.threshold = c.copy_threshold;
    cfg.max_sequences = static_cast<std::size_t>(c.copy_max_sequences);
    cfg.rate_hz = c.rate_hz;
    cfg.seed = seed;
    subject.start_session(cfg.seed, phrase.size() * cfg.max_sequences);
    nfb::SequenceEvidenceFn evidence =
        nfb::make_eeg_evidence(sim_driver(subject, c.sample_rate), model);
    nfb::CopyPhraseResult r = nfb::run_copy_phrase(phrase, evidence, lm, cfg);

    for (const nfb::LetterResult& l : r.letters)
        std::cout << l.attended << " -> " << l.typed << "  sequences " << l.n_sequences
                  << "  posterior " << l.posterior << (l.forced ? "  (forced)" : "") << "\n";
    std::cout << "typed \"" << r.typed << "\" for \"" << r.phrase << "\" ("
              << (r.success ? "match" : r.aborted ? "aborted: " + r.error : "mismatch")
              << ")\n";
    if (!out.empty()) {
        fs::path dir(out);
        fs::create_directories(dir);
        nfb::detail::write_file(dir / "copy-events.jsonl", nfb::events_jsonl(r.log));
        nlohmann::json letters = nlohmann::json::array();
        for (const nfb::LetterResult& l : r.letters)
            letters.push_back({{"attended", l.attended},
                               {"typed", l.typed},
                               {"n_sequences", l.n_sequences},
                               {"forced", l.forced},
                               {"posterior", l.posterior}});
        nlohmann::json j{{"phrase", r.phrase},
                         {"typed", r.typed},
                         {"success", r.success},
                         {"aborted", r.aborted},
                         {"letters", letters}};
        nfb::detail::write_file(dir / "copy_result.json", j.dump(2) + "\n");
        std::cout << "wrote " << dir.string() << "\n";
    }
    return r.success ? 0 : 1;
}

int cmd_erp_analyze(const std::vector<std::string>& sessions, const std::string& out,
                    const std::string& channel) {
    std::vector<nfb::ErpEpoch> epochs;
    std::size_t dropped = 0;
    for (const std::string& dir : sessions) {
        nfb::SessionArchive arch = nfb::read_session(dir);
        nfb::EegBlock pre = nfb::preprocess_offline(arch.eeg);
        nfb::BlinkRemoval blink = nfb::remove_blinks(pre);
        nfb::SegmentResult seg = nfb::segment_and_baseline(blink.eeg, arch.log);
        dropped += seg.dropped_event_ids.size();
        std::vector<nfb::ErpEpoch> flagged = nfb::reject_artifacts(std::move(seg.epochs));
        epochs.insert(epochs.end(), flagged.begin(), flagged.end());
    }
    std::size_t rejected = 0;
    for (const nfb::ErpEpoch& e : epochs) rejected += e.flags.any() ? 1 : 0;
    std::cout << epochs.size() << " epochs from " << sessions.size() << " session"
              << (sessions.size() == 1 ? "" : "s") << ", " << rejected << " rejected, "
              << dropped << " windows past the recording\n";

    nfb::ErpAverage target = nfb::average_erp(epochs, 1);
    nfb::ErpAverage nontarget = nfb::average_erp(epochs, 0);
    std::vector<nfb::PeakRow> rows;
    for (const std::string& ch : target.channels) {
        nfb::PeakPair p = nfb::detect_peaks(target, ch);
        rows.push_back({ch, p.n200, target.n});
        rows.push_back({ch, p.p300, target.n});
    }
    std::string table = nfb::peak_table_csv(rows);
    std::cout << table;
    nfb::PeakPair main_pair = nfb::detect_peaks(target, channel);
    std::cout << channel << ": N200 " << main_pair.n200.amplitude_uv << " uV at "
              << main_pair.n200.latency_ms << " ms, P300 " << main_pair.p300.amplitude_uv
              << " uV at " << main_pair.p300.latency_ms << " ms\n";
    if (!out.empty()) {
        fs::path dir(out);
        fs::create_directories(dir);
        nfb::detail::write_file(dir / "peaks.csv", table);
        nfb::detail::write_file(dir / "target_average.csv", nfb::erp_average_csv(target));
        nfb::detail::write_file(dir / "nontarget_average.csv", nfb::erp_average_csv(nontarget));
        std::cout << "wrote " << dir.string() << "\n";
    }
    return 0;
}

nfb::LongitudinalDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("stats: cannot open " + path);
    nfb::LongitudinalDataset data = nfb::load_stats_csv(in);
    data.validate();
    return data;
}

int cmd_stats_cv(const std::string& data_file, const std::string& measure) {
    nfb::LongitudinalDataset data = load_dataset(data_file);
    if (measure.empty()) {
        std::cout << nfb::stability_table_text(data);
        return 0;
    }
    nfb::CvResult cv = nfb::within_subject_cv(data, measure, std::nullopt);
    std::cout << measure << ": cv " << nfb::format_measurement(cv.cv, cv.se, 1)
              << " %, effective df " << cv.df << ", " << cv.n << " participants, " << cv.m
              << " sessions each, r " << cv.r << "\n";
    return 0;
}

int cmd_stats_icc(const std::string& data_file, const std::string& measure) {
    nfb::LongitudinalDataset data = load_dataset(data_file);
    nfb::IccResult icc = nfb::icc_reml(data, measure);
    std::cout << measure << ": icc " << nfb::format_icc(icc) << ", sigma2_u " << icc.sigma2_u
              << ", sigma2_e " << icc.sigma2_e;
    if (!icc.diagnostic.empty()) std::cout << " (" << icc.diagnostic << ")";
    std::cout << "\n";
    return 0;
}

int cmd_stats_corr(const std::string& data_file, const std::string& x, const std::string& y) {
    nfb::LongitudinalDataset data = load_dataset(data_file);
    nfb::CorrelationResult r = nfb::within_between_correlation(data, x, y);
    std::cout << x << " vs " << y << ": r_within " << r.r_within << ", r_between "
              << r.r_between << " (" << r.n_participants << " participants, "
              << r.n_observations << " observations)";
    if (r.n_participants > 3)
        std::cout << ", z_between " << nfb::fisher_z(r.r_between, r.n_participants - 3);
    std::cout << "\n";
    return 0;
}

int cmd_stats_slopes(const std::string& data_file, const std::string& participant,
                     const std::string& measure) {
    nfb::LongitudinalDataset data = load_dataset(data_file);
    if (participant.empty() || measure.empty()) {
        std::cout << nfb::slopes_table_text(data);
        return 0;
    }
    nfb::PhaseSlopes s = nfb::phase_slopes_newey_west(data, participant, measure);
    std::cout << measure << " for " << participant << " (" << s.n << " points, lag " << s.lag
              << "):\n"
              << "  baseline slope     " << s.baseline_slope << " +/- " << s.baseline_se
              << " per week\n"
              << "  intervention slope " << s.intervention_slope << " +/- " << s.intervention_se
              << " per week\n"
              << "  phase change       " << s.change << " +/- " << s.change_se << "\n";
    return 0;
}

int cmd_stats_lowess(const std::string& data_file, const std::string& measure,
                     const std::string& participant, double frac, const std::string& out) {
    nfb::LongitudinalDataset data = load_dataset(data_file);
    std::vector<const nfb::StatRecord*> rows;
    for (const nfb::StatRecord& r : data.records)
        if (r.measure == measure && (participant.empty() || r.participant == participant))
            rows.push_back(&r);
    if (rows.size() < 2) throw std::runtime_error("stats lowess: fewer than 2 matching rows");
    std::sort(rows.begin(), rows.end(), [](const nfb::StatRecord* a, const nfb::StatRecord* b) {
        return a->time_weeks < b->time_weeks;
    });
    std::vector<double> x, y;
    for (const nfb::StatRecord* r : rows) {
        x.push_back(r->time_weeks);
        y.push_back(r->value);
    }
    std::vector<double> smooth = nfb::lowess_tricube(x, y, frac);
    std::ostringstream os;
    os.precision(17);
    os << "time_weeks,value,smoothed\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        os << x[i] << ',' << y[i] << ',' << smooth[i] << '\n';
    if (out.empty()) {
        std::cout << os.str();
    } else {
        nfb::detail::write_file(out, os.str());
        std::cout << "wrote " << out << " (" << x.size() << " points, frac " << frac << ")\n";
    }
    return 0;
}

int cmd_run_study(nfb::StudyConfig c, const fs::path& out) {
    nfb::StudyResult r = nfb::run_study(c, out);
    for (const nfb::SessionOutcome& s : r.sessions) {
        std::cout << s.slot.id << ": auc " << s.auc << ", median relative alpha "
                  << s.median_relative_alpha << ", copied \"" << s.copy_typed << "\""
                  << (s.thresholds_carried ? ", thresholds carried forward" : "") << "\n";
    }
    if (r.halted) {
        std::cerr << "study halted: " << r.error << " (partial archive kept at " << out.string()
                  << ")\n";
        return 1;
    }
    std::cout << "wrote " << out.string() << ": " << r.sessions.size() << " sessions, dataset "
              << (out / "dataset.csv").string() << ", reports in " << (out / "reports").string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated RSVP speller with alpha neurofeedback: sessions, classifiers, "
                 "assessments, longitudinal statistics"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string g_config, g_out;
    std::uint64_t g_seed = 1;
    CLI::Option* seed_opt = app.add_option("--seed", g_seed, "Seed for the command's RNG streams");
    app.add_option("--config", g_config, "Study config JSON; defaults apply where absent");
    app.add_option("--out", g_out, "Output file or directory (per command)");

    CLI::App* gen = app.add_subcommand("gen-assessments",
                                       "Write cancellation forms, letter-span sets and the "
                                       "reading-fluency form order");
    int gen_sessions = 12;
    gen->add_option("--sessions", gen_sessions, "Sessions covered by the reading-fluency order")
        ->check(CLI::PositiveNumber);

    CLI::App* sim_cal = app.add_subcommand(
        "simulate-calibration", "Run a simulated calibration session and archive it");
    std::string cal_id = "calibration";
    sim_cal->add_option("--session-id", cal_id, "Session id recorded in the archive");

    CLI::App* train = app.add_subcommand("train-classifier",
                                         "Cross-validate and fit the detector on an archived "
                                         "session; write model.json");
    std::string train_session;
    int train_folds = 10;
    train->add_option("--session", train_session, "Session archive directory")->required();
    train->add_option("--folds", train_folds, "Cross-validation folds")->check(CLI::PositiveNumber);

    CLI::App* thr = app.add_subcommand("nfb-thresholds",
                                       "Fit feedback cutoffs from archived baseline sessions");
    std::vector<std::string> thr_sessions;
    std::string thr_channel = "P4";
    thr->add_option("sessions", thr_sessions, "Baseline session archive directories")
        ->required()
        ->expected(1, -1);
    thr->add_option("--channel", thr_channel, "Feedback channel");

    CLI::App* sim_int = app.add_subcommand(
        "simulate-intervention",
        "Run a simulated session with post-sequence neurofeedback and archive it");
    std::string int_id = "intervention";
    std::string int_thresholds;
    sim_int->add_option("--session-id", int_id, "Session id recorded in the archive");
    sim_int->add_option("--thresholds", int_thresholds, "Thresholds JSON from nfb-thresholds")
        ->required();

    CLI::App* copy = app.add_subcommand("copy-spell",
                                        "Copy-spell a phrase with a trained model on the "
                                        "simulated subject");
    std::string copy_model, copy_phrase = "HELLO_", copy_lm;
    copy->add_option("--model", copy_model, "model.json from train-classifier")->required();
    copy->add_option("--phrase", copy_phrase, "Phrase to copy (A-Z and _)");
    copy->add_option("--lm", copy_lm, "Corpus text file for the trigram language model");

    CLI::App* erp = app.add_subcommand("erp-analyze",
                                       "Average archived sessions offline and measure "
                                       "N200/P300 peaks");
    std::vector<std::string> erp_sessions;
    std::string erp_channel = "Pz";
    erp->add_option("sessions", erp_sessions, "Session archive directories")
        ->required()
        ->expected(1, -1);
    erp->add_option("--channel", erp_channel, "Channel for the headline peak report");

    CLI::App* stats = app.add_subcommand("stats", "Longitudinal statistics on a dataset CSV");
    stats->require_subcommand(1);
    stats->fallthrough();
    std::string st_data, st_measure, st_participant, st_x, st_y;
    double st_frac = 0.8;
    stats->add_option("--data", st_data, "Dataset CSV (participant,session,time_weeks,phase,measure,value)")
        ->required();
    CLI::App* st_cv = stats->add_subcommand(
        "cv", "Within-subject CV; full stability table when --measure is omitted");
    st_cv->add_option("--measure", st_measure, "Measure name");
    CLI::App* st_icc = stats->add_subcommand("icc", "Intraclass correlation (REML)");
    st_icc->add_option("--measure", st_measure, "Measure name")->required();
    CLI::App* st_corr = stats->add_subcommand("corr", "Within/between-participant correlation");
    st_corr->add_option("--x", st_x, "First measure")->required();
    st_corr->add_option("--y", st_y, "Second measure")->required();
    CLI::App* st_slopes = stats->add_subcommand(
        "slopes", "Phase slopes with Newey-West errors; full table when flags are omitted");
    st_slopes->add_option("--participant", st_participant, "Participant id");
    st_slopes->add_option("--measure", st_measure, "Measure name");
    CLI::App* st_lowess = stats->add_subcommand("lowess", "Tricube-weighted local regression");
    st_lowess->add_option("--measure", st_measure, "Measure name")->required();
    st_lowess->add_option("--participant", st_participant, "Restrict to one participant");
    st_lowess->add_option("--frac", st_frac, "Neighborhood fraction")
        ->check(CLI::Range(0.0, 1.0));

    CLI::App* study = app.add_subcommand("run-study",
                                         "Run the full multi-week protocol into an archive "
                                         "tree");

    CLI11_PARSE(app, argc, argv);

    try {
        nfb::StudyConfig cfg = load_config(g_config);
        bool seed_given = seed_opt->count() > 0;
        std::uint64_t seed = seed_given ? g_seed : cfg.seed;

        if (gen->parsed())
            return cmd_gen_assessments(require_out(g_out, "gen-assessments"), seed, gen_sessions);
        if (sim_cal->parsed())
            return run_simulated_session(cfg, seed, cal_id, nullptr,
                                         require_out(g_out, "simulate-calibration"));
        if (train->parsed()) return cmd_train_classifier(train_session, g_out, train_folds, seed);
        if (thr->parsed())
            return cmd_nfb_thresholds(thr_sessions, require_out(g_out, "nfb-thresholds"),
                                      thr_channel);
        if (sim_int->parsed()) {
            nfb::ThresholdSet t = thresholds_from_json(
                nlohmann::json::parse(nfb::detail::read_file(int_thresholds)));
            return run_simulated_session(cfg, seed, int_id, &t,
                                         require_out(g_out, "simulate-intervention"));
        }
        if (copy->parsed()) return cmd_copy_spell(cfg, seed, copy_model, copy_phrase, copy_lm, g_out);
        if (erp->parsed()) return cmd_erp_analyze(erp_sessions, g_out, erp_channel);
        if (stats->parsed()) {
            if (st_cv->parsed()) return cmd_stats_cv(st_data, st_measure);
            if (st_icc->parsed()) return cmd_stats_icc(st_data, st_measure);
            if (st_corr->parsed()) return cmd_stats_corr(st_data, st_x, st_y);
            if (st_slopes->parsed()) return cmd_stats_slopes(st_data, st_participant, st_measure);
            if (st_lowess->parsed())
                return cmd_stats_lowess(st_data, st_measure, st_participant, st_frac, g_out);
        }
        if (study->parsed()) {
            if (seed_given) cfg.seed = seed;
            return cmd_run_study(cfg, require_out(g_out, "run-study"));
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
