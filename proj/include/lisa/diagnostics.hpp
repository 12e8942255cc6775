#pragma once

#include <string>
#include <vector>

namespace lisa {

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    int line = 0;    // 1-based; 0 when no source position applies
    int column = 0;
    std::string message;

    std::string str() const {
        std::string s = severity == Severity::error ? "error" : "warning";
        if (line > 0) s += " [" + std::to_string(line) + ":" + std::to_string(column) + "]";
        return s + ": " + message;
    }
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Diagnostic::Severity::error) return true;
    return false;
}

} // namespace lisa
