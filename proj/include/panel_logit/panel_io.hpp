#pragma once

#include <iosfwd>
#include <string>

#include "panel_logit/model.hpp"

namespace panel_logit {

/// Long-format CSV with header `id,t,y`, one row per (individual, period).
/// Rows may appear in any order; every individual must cover the same
/// contiguous range of periods. Lines starting with '#' are ignored.
PanelData read_panel_csv(std::istream& in);
PanelData read_panel_csv_file(const std::string& path);

void write_panel_csv(std::ostream& out, const PanelData& panel);
void write_panel_csv_file(const std::string& path, const PanelData& panel);

}  // namespace panel_logit
