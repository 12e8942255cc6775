#pragma once

// Trace serialization: one JSON object per reasoning cycle, one line per
// object. Sets serialize in their canonical order, so equal traces produce
// byte-identical files.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agent.hpp"
#include "errors.hpp"

namespace lisa {

inline nlohmann::ordered_json record_to_json(const CycleRecord& rec) {
    nlohmann::ordered_json j;
    j["cycle"] = rec.cycle;
    auto preds = [](const PredicateSet& s) {
        std::vector<std::string> out;
        for (const auto& p : s) out.push_back(p.str());
        return out;
    };
    j["beliefs"] = preds(rec.beliefs);
    j["events"] = preds(rec.events);
    j["desires"] = rec.desires;
    j["actions_fired"] = rec.actions_fired;
    j["operational_states"] = preds(rec.operational_states);
    return j;
}

inline CycleRecord record_from_json(const nlohmann::json& j) {
    CycleRecord rec;
    try {
        rec.cycle = j.at("cycle").get<std::uint64_t>();
        for (const auto& s : j.at("beliefs")) rec.beliefs.insert(predicate_from_string(s));
        for (const auto& s : j.at("events")) rec.events.insert(predicate_from_string(s));
        rec.desires = j.at("desires").get<std::vector<std::string>>();
        rec.actions_fired = j.at("actions_fired").get<std::vector<std::string>>();
        for (const auto& s : j.at("operational_states"))
            rec.operational_states.insert(predicate_from_string(s));
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("bad trace record: ") + e.what());
    }
    return rec;
}

inline void write_trace(std::ostream& os, const Trace& trace) {
    for (const auto& rec : trace) os << record_to_json(rec).dump() << '\n';
}

inline std::string trace_to_string(const Trace& trace) {
    std::ostringstream os;
    write_trace(os, trace);
    return os.str();
}

inline Trace read_trace(std::istream& is) {
    Trace trace;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ModelError(std::string("bad trace line: ") + e.what());
        }
        trace.push_back(record_from_json(j));
    }
    return trace;
}

} // namespace lisa
