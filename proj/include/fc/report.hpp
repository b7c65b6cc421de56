#pragma once

#include <string>

#include "fc/harness.hpp"

namespace fc {

// Writes "iteration,y_bp,y_fc,abs_err,gate1,gate2" plus one row per
// iteration. Reals carry 17 significant digits so they parse back to the
// same bits; lines end in a bare line feed. Byte-identical output for a
// fixed report.
void emit_csv(const EquivalenceReport& report, const std::string& path);

// Standalone SVG error curve: x = iteration, y = |y_bp - y_fc|. On a log
// axis, exact zeros are drawn at a 1e-18 display floor (the stored data is
// never clamped). Byte-identical output for a fixed report.
void emit_svg(const EquivalenceReport& report, const std::string& path, bool log_scale);

// Per-run sweep table, one row per seed.
void emit_sweep_csv(const SweepSummary& summary, const std::string& path);

std::string format_double(double value); // shortest 17-significant-digit form

} // namespace fc
