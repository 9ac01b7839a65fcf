#pragma once

#include "cacc/simulation.hpp"

#include <filesystem>
#include <ostream>
#include <string>

namespace cacc {

/// Version of the trace column layout; bumped whenever columns change.
inline constexpr int kTraceFormatVersion = 1;

/// Comma-separated header for a platoon of `vehicles` cars.
std::string trace_header(int vehicles);

/// Trace table: one header row, then one row per record.
void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace, int vehicles);

/// Metrics summary including reference values for comparison.
std::string metrics_json(const RunResult& r);

void write_alarms(std::ostream& out, const std::vector<AlarmEvent>& alarms);

/// Filtered EOI of the estimated component with its thresholds, the
/// injected attack and the estimate, one row per tick.
void write_plot_eoi(std::ostream& out, const std::vector<TraceRecord>& trace);

/// The same quantities at communication instants only (the points where
/// event-triggered thresholds are final).
void write_plot_comm_markers(std::ostream& out, const std::vector<TraceRecord>& trace);

/// Writes trace.csv, metrics.json, alarms.csv, plot_eoi.csv and
/// plot_comm_markers.csv into `out_dir`, creating it if needed.
/// Throws IoError on failure.
void emit(const RunResult& r, const std::filesystem::path& out_dir);

}  // namespace cacc
