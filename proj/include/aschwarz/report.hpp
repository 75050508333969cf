#pragma once

// Serialization of run reports: JSON report files and residual-history CSV.
// All emitters are deterministic — identical reports serialize to identical
// bytes, which the reproducibility tests rely on.

#include <string>

#include "aschwarz/config.hpp"

namespace aschwarz {

// JSON object describing the report (stable key order, 2-space indent).
std::string report_to_json(const RunReport& rep);

// CSV body "k,residual" with a versioned schema comment line.
std::string residuals_to_csv(const RunReport& rep);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace aschwarz
