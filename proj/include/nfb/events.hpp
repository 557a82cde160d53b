#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfb {

enum class EventKind { fixation, letter, feedback, decision };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::fixation: return "fixation";
        case EventKind::letter: return "letter";
        case EventKind::feedback: return "feedback";
        case EventKind::decision: return "decision";
    }
    throw std::invalid_argument("unknown EventKind");
}

inline EventKind event_kind_from_string(const std::string& s) {
    if (s == "fixation") return EventKind::fixation;
    if (s == "letter") return EventKind::letter;
    if (s == "feedback") return EventKind::feedback;
    if (s == "decision") return EventKind::decision;
    throw std::invalid_argument("unknown event kind: " + s);
}

// One timeline entry. Letter events carry symbol and target flag; feedback
// events carry the level (1 worst .. 5 best) and the relative PSD behind it;
// decision events carry the typed symbol, its posterior, and whether the
// decision was forced by the sequence cap.
struct SessionEvent {
    EventKind kind = EventKind::letter;
    double t = 0.0;  // absolute seconds on the recording clock
    std::string symbol;
    bool is_target = false;
    int level = 0;
    double value = 0.0;
    bool forced = false;
};

struct SessionLog {
    std::string session_id;
    double letter_rate_hz = 0.0;
    std::uint64_t seed = 0;
    std::vector<SessionEvent> events;

    std::vector<SessionEvent> letters() const {
        std::vector<SessionEvent> out;
        for (const auto& e : events)
            if (e.kind == EventKind::letter) out.push_back(e);
        return out;
    }

    std::vector<SessionEvent> of_kind(EventKind k) const {
        std::vector<SessionEvent> out;
        for (const auto& e : events)
            if (e.kind == k) out.push_back(e);
        return out;
    }
};

}  // namespace nfb
