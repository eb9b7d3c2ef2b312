#pragma once

#include <string>

#include "dyncausal/panel.hpp"

namespace dyncausal {

/// Parses a long-format panel CSV with header `t,unit,<var_1>,...,<var_p>`.
/// Stamps 1..T and units 1..m must be contiguous and complete; rows may come
/// in any order. Errors carry the offending line number.
PanelTensor ingest_panel_csv(const std::string& path);

/// Writes the long-format CSV, one row per (t, unit), doubles at 17
/// significant digits, '\n' line endings. The write is atomic (temp+rename).
void emit_panel_csv(const std::string& path, const PanelTensor& panel);

/// Renders a double with up to 17 significant digits (round-trip exact).
std::string format_double(double value);

/// Writes `content` to `path` via a temp file + rename.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace dyncausal
