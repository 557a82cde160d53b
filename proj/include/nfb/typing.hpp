#pragma once
// Copy-spelling controller. Classifier evidence for the ten presented
// symbols multiplies a language-model prior; sequences repeat until one
// symbol's posterior reaches the decision threshold (or a hard cap forces
// the argmax), and the typed history conditions the next letter's prior.
//
// Posteriors live as unnormalized log weights: updates only add log
// likelihood ratios, so ten thousand sequential updates stay finite and an
// all-ones update is a bitwise no-op. Normalization happens on read.

#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nfb/classifier.hpp"
#include "nfb/events.hpp"
#include "nfb/rng.hpp"
#include "nfb/task.hpp"

namespace nfb {

inline constexpr std::size_t kAlphabetSize = 27; // A-Z plus "_" as space

inline const std::vector<std::string>& typing_alphabet() {
    static const std::vector<std::string> symbols = [] {
        std::vector<std::string> v;
        for (char c = 'A'; c <= 'Z'; ++c) v.emplace_back(1, c);
        v.emplace_back("_");
        return v;
    }();
    return symbols;
}

// Index in the typing alphabet, or kAlphabetSize when the character does not
// belong to it.
inline std::size_t alphabet_index(char c) {
    if (c >= 'A' && c <= 'Z') return static_cast<std::size_t>(c - 'A');
    if (c == '_') return 26;
    return kAlphabetSize;
}

class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    // Distribution over the alphabet for the next symbol given the typed
    // history. Implementations must return kAlphabetSize probabilities.
    virtual std::vector<double> next_distribution(const std::string& history) const = 0;
};

class UniformLm : public LanguageModel {
public:
    std::vector<double> next_distribution(const std::string&) const override {
        return std::vector<double>(kAlphabetSize, 1.0 / static_cast<double>(kAlphabetSize));
    }
};

// Character trigram model with add-one smoothing, backing off to shorter
// contexts only when the history itself is shorter. Unseen contexts resolve
// to the uniform distribution through the smoothing.
class TrigramLm : public LanguageModel {
public:
    static TrigramLm from_text(const std::string& text) {
        TrigramLm lm;
        std::vector<std::size_t> mapped;
        mapped.reserve(text.size());
        for (char raw : text) {
            char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') c = '_';
            std::size_t idx = alphabet_index(c);
            if (idx < kAlphabetSize) mapped.push_back(idx);
        }
        for (std::size_t i = 0; i < mapped.size(); ++i) {
            lm.unigram_[mapped[i]] += 1;
            if (i >= 1) lm.bigram_[mapped[i - 1] * kAlphabetSize + mapped[i]] += 1;
            if (i >= 2)
                lm.trigram_[(mapped[i - 2] * kAlphabetSize + mapped[i - 1]) * kAlphabetSize +
                            mapped[i]] += 1;
        }
        return lm;
    }

    std::vector<double> next_distribution(const std::string& history) const override {
        // Use the longest context the history provides; characters outside
        // the alphabet would violate the state invariant upstream.
        std::size_t len = history.size();
        const std::uint32_t* row = unigram_.data();
        if (len >= 2) {
            std::size_t c1 = alphabet_index(history[len - 2]);
            std::size_t c2 = alphabet_index(history[len - 1]);
            if (c1 < kAlphabetSize && c2 < kAlphabetSize)
                row = trigram_.data() + (c1 * kAlphabetSize + c2) * kAlphabetSize;
            else
                throw std::invalid_argument("TrigramLm: history outside the alphabet");
        } else if (len == 1) {
            std::size_t c1 = alphabet_index(history[0]);
            if (c1 < kAlphabetSize)
                row = bigram_.data() + c1 * kAlphabetSize;
            else
                throw std::invalid_argument("TrigramLm: history outside the alphabet");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < kAlphabetSize; ++i) total += row[i];
        std::vector<double> p(kAlphabetSize);
        for (std::size_t i = 0; i < kAlphabetSize; ++i)
            p[i] = (static_cast<double>(row[i]) + 1.0) /
                   (total + static_cast<double>(kAlphabetSize));
        return p;
    }

private:
    TrigramLm()
        : unigram_(kAlphabetSize, 0),
          bigram_(kAlphabetSize * kAlphabetSize, 0),
          trigram_(kAlphabetSize * kAlphabetSize * kAlphabetSize, 0) {}

    std::vector<std::uint32_t> unigram_, bigram_, trigram_;
};

struct LmPrior {
    std::vector<double> p;
    bool fallback = false; // model failed; the uniform prior substituted
};

inline LmPrior lm_prior(const LanguageModel& model, const std::string& history) {
    LmPrior out;
    try {
        out.p = model.next_distribution(history);
        if (out.p.size() != kAlphabetSize) throw std::runtime_error("wrong arity");
        double sum = 0.0;
        for (double v : out.p) {
            if (!std::isfinite(v) || v < 0.0) throw std::runtime_error("invalid probability");
            sum += v;
        }
        if (!(sum > 0.0)) throw std::runtime_error("zero mass");
        for (double& v : out.p) v /= sum;
        return out;
    } catch (const std::exception&) {
        out.p.assign(kAlphabetSize, 1.0 / static_cast<double>(kAlphabetSize));
        out.fallback = true;
        return out;
    }
}

struct PosteriorState {
    std::vector<double> log_weight; // unnormalized, indexed like the alphabet
    std::string history;
    std::size_t sequence_count = 0; // sequences spent on the current letter
    bool lm_fallback = false;       // any prior came from the uniform fallback

    std::vector<double> probabilities() const {
        double max = log_weight[0];
        for (double w : log_weight) max = std::max(max, w);
        std::vector<double> p(log_weight.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = std::exp(log_weight[i] - max);
            sum += p[i];
        }
        for (double& v : p) v /= sum;
        return p;
    }
};

inline PosteriorState make_posterior_state(const LanguageModel& lm,
                                           const std::string& history = "") {
    LmPrior prior = lm_prior(lm, history);
    PosteriorState state;
    state.history = history;
    state.lm_fallback = prior.fallback;
    state.log_weight.resize(kAlphabetSize);
    for (std::size_t i = 0; i < kAlphabetSize; ++i)
        state.log_weight[i] = std::log(prior.p[i]);
    return state;
}

// Bayes update: presented symbols multiply in their likelihood ratios,
// everything else keeps its weight. A ratio of exactly 1 is skipped so an
// uninformative sequence leaves the state bit-identical.
inline PosteriorState update_posterior(const PosteriorState& state,
                                       const std::vector<std::string>& presented,
                                       const std::vector<double>& likelihood_ratios) {
    if (presented.size() != likelihood_ratios.size())
        throw std::invalid_argument("update_posterior: one ratio per presented symbol");
    PosteriorState next = state;
    for (std::size_t i = 0; i < presented.size(); ++i) {
        double lr = likelihood_ratios[i];
        if (!std::isfinite(lr) || lr <= 0.0)
            throw std::invalid_argument("update_posterior: ratios must be positive and finite");
        if (presented[i].size() != 1)
            throw std::invalid_argument("update_posterior: symbols are single characters");
        std::size_t idx = alphabet_index(presented[i][0]);
        if (idx >= kAlphabetSize)
            throw std::invalid_argument("update_posterior: symbol outside the alphabet");
        if (lr != 1.0) next.log_weight[idx] += std::log(lr);
    }
    return next;
}

// The k highest-posterior symbols, ties resolved toward the front of the
// alphabet. This is the selection before the display shuffle.
inline std::vector<std::string> top_k_symbols(const PosteriorState& state, std::size_t k) {
    if (k > kAlphabetSize)
        throw std::invalid_argument("top_k_symbols: k exceeds the alphabet");
    std::vector<double> p = state.probabilities();
    std::vector<std::size_t> order(kAlphabetSize);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(typing_alphabet()[order[i]]);
    return out;
}

inline std::vector<std::string> select_next_stimuli(const PosteriorState& state, std::size_t k,
                                                    Rng& rng) {
    std::vector<std::string> stimuli = top_k_symbols(state, k);
    rng.shuffle(stimuli);
    return stimuli;
}

struct StepDecision {
    bool typed = false;
    std::string symbol;          // set when typed
    bool forced = false;         // cap reached without crossing the threshold
    double posterior = 0.0;      // posterior of the argmax after this sequence
    std::size_t n_sequences = 0; // sequences spent on this letter so far
};

// Consumes one sequence of evidence. Types the argmax symbol once its
// posterior reaches the threshold, or when the sequence cap is hit (flagged
// as forced). Typing extends the history and restarts the posterior from the
// language model.
inline StepDecision copy_spell_step(PosteriorState& state,
                                    const std::vector<std::string>& presented,
                                    const std::vector<double>& likelihood_ratios,
                                    const LanguageModel& lm, double threshold = 0.80,
                                    std::size_t max_sequences = 25) {
    if (!(threshold > 0.0) || threshold > 1.0)
        throw std::invalid_argument("copy_spell_step: threshold must lie in (0, 1]");
    if (max_sequences == 0)
        throw std::invalid_argument("copy_spell_step: need a positive sequence cap");

    state = update_posterior(state, presented, likelihood_ratios);
    state.sequence_count += 1;

    std::vector<double> p = state.probabilities();
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i; // ties keep the earlier symbol

    StepDecision d;
    d.posterior = p[best];
    d.n_sequences = state.sequence_count;
    if (p[best] >= threshold || state.sequence_count >= max_sequences) {
        d.typed = true;
        d.forced = p[best] < threshold;
        d.symbol = typing_alphabet()[best];
        std::string history = state.history + d.symbol;
        bool fallback_seen = state.lm_fallback;
        state = make_posterior_state(lm, history);
        state.lm_fallback = state.lm_fallback || fallback_seen;
    }
    return d;
}

// Evidence for one presented sequence: a likelihood ratio per letter event,
// in presentation order. The events carry is_target for the attended symbol
// so a simulated subject can evoke the matching response.
using SequenceEvidenceFn = std::function<std::vector<double>(
    const std::vector<SessionEvent>& letters, double t0, double duration,
    std::size_t sequence_index)>;

// Scores a simulated (or recorded) sequence block with a trained model.
inline SequenceEvidenceFn make_eeg_evidence(SequenceEegFn driver, ClassifierModel model) {
    return [driver = std::move(driver), model = std::move(model)](
               const std::vector<SessionEvent>& letters, double t0, double duration,
               std::size_t sequence_index) {
        EegBlock block = driver(letters, t0, duration, sequence_index);
        SessionLog tmp;
        tmp.events = letters;
        EpochSet set = extract_epochs(block, tmp);
        if (set.n_epochs() != letters.size())
            throw std::runtime_error(
                "eeg evidence: an epoch window ran past the sequence block");
        std::vector<double> lrs;
        lrs.reserve(set.n_epochs());
        for (std::size_t i = 0; i < set.n_epochs(); ++i)
            lrs.push_back(model.likelihood_ratio(epoch_features(set, i)));
        return lrs;
    };
}

struct CopyPhraseConfig {
    double threshold = 0.80;
    std::size_t max_sequences = 25; // per letter
    std::size_t n_stimuli = 10;
    double rate_hz = 3.0;
    double lead_s = 1.0; // fixation before the first letter of each sequence
    double gap_s = 2.0;  // idle tail; covers the final epoch window
    std::uint64_t seed = 1;
    std::string session_id = "copy-spell";
};

struct LetterResult {
    std::string attended; // the phrase letter the subject was copying
    std::string typed;
    std::size_t n_sequences = 0;
    bool forced = false;
    double posterior = 0.0;
};

struct CopyPhraseResult {
    std::string phrase;
    std::string typed;
    std::vector<LetterResult> letters;
    bool success = false; // typed equals the phrase, no abort
    bool aborted = false;
    std::string error;
    SessionLog log; // letter presentations and decisions
};

// Copy-spells the phrase letter by letter. A wrong letter marks the attempt
// failed but spelling continues to the phrase length; an evidence failure
// aborts and is recorded. Deterministic in (config.seed, evidence).
inline CopyPhraseResult run_copy_phrase(const std::string& phrase,
                                        const SequenceEvidenceFn& evidence,
                                        const LanguageModel& lm,
                                        const CopyPhraseConfig& config = {}) {
    if (phrase.empty()) throw std::invalid_argument("run_copy_phrase: empty phrase");
    for (char c : phrase)
        if (alphabet_index(c) >= kAlphabetSize)
            throw std::invalid_argument("run_copy_phrase: phrase outside the alphabet");
    if (config.n_stimuli < 2 || config.n_stimuli > kAlphabetSize)
        throw std::invalid_argument("run_copy_phrase: unusable stimulus count");

    CopyPhraseResult out;
    out.phrase = phrase;
    out.log.session_id = config.session_id;
    out.log.letter_rate_hz = config.rate_hz;
    out.log.seed = config.seed;

    PosteriorState state = make_posterior_state(lm);
    Rng display_rng(config.seed);
    const double seq_dur = config.lead_s +
                           static_cast<double>(config.n_stimuli) / config.rate_hz +
                           config.gap_s;
    double t = 0.0;
    std::size_t sequence_index = 0;

    for (std::size_t pos = 0; pos < phrase.size(); ++pos) {
        std::string attended(1, phrase[pos]);
        while (true) {
            std::vector<std::string> presented =
                select_next_stimuli(state, config.n_stimuli, display_rng);
            std::vector<SessionEvent> letters;
            for (std::size_t j = 0; j < presented.size(); ++j) {
                SessionEvent ev;
                ev.kind = EventKind::letter;
                ev.t = t + config.lead_s + static_cast<double>(j) / config.rate_hz;
                ev.symbol = presented[j];
                ev.is_target = presented[j] == attended;
                letters.push_back(ev);
            }
            out.log.events.insert(out.log.events.end(), letters.begin(), letters.end());

            std::vector<double> lrs;
            try {
                lrs = evidence(letters, t, seq_dur, sequence_index);
            } catch (const std::exception& e) {
                out.aborted = true;
                out.error = e.what();
                return out;
            }
            ++sequence_index;
            StepDecision d = copy_spell_step(state, presented, lrs, lm, config.threshold,
                                             config.max_sequences);
            double letters_end =
                t + config.lead_s + static_cast<double>(config.n_stimuli) / config.rate_hz;
            t += seq_dur;
            if (d.typed) {
                SessionEvent ev;
                ev.kind = EventKind::decision;
                ev.t = letters_end;
                ev.symbol = d.symbol;
                ev.forced = d.forced;
                ev.value = d.posterior;
                out.log.events.push_back(ev);
                out.letters.push_back({attended, d.symbol, d.n_sequences, d.forced, d.posterior});
                out.typed += d.symbol;
                break;
            }
        }
    }
    out.success = !out.aborted && out.typed == phrase;
    return out;
}

// Compact English sample used as the default spelling prior. Large enough
// that the copy phrase's transitions rank inside the ten presented symbols,
// varied enough that no context is deterministic.
inline const std::string& default_typing_corpus() {
    static const std::string text =
        "HELLO THERE SAID THE YELLOW FELLOW ON THE HILL AND HELLO AGAIN SAID "
        "THE OTHER FELLOW BELOW THE HOLLOW HALLOWED HALLS HELD ALL THE HELP "
        "THE VILLAGE COULD HOLD WHILE THE HELLO CALLS ECHOED OVER THE SHALLOW "
        "VALLEY AND EVERY FELLOW WHO FOLLOWED THE LONG HOLLOW ROAD WOULD "
        "HOLLER HELLO TO THE MELLOW OLD TELLER WHO TOLD TALL TALES OF THE "
        "HELLO HALLOO AND THE LONG LOW CALL OF THE GULLS OVER THE YELLOW "
        "MEADOW WHERE THE SLOW RIVER ROLLS PAST THE WILLOW AND THE SWALLOW "
        "LANDS ON THE LOW WALL NEAR THE WELL WHERE ALL THE PEOPLE OF THE "
        "LITTLE TOWN WOULD TELL EACH OTHER HELLO AND FAREWELL";
    return text;
}

} // namespace nfb
