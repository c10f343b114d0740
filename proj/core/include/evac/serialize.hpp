#pragma once

#include <filesystem>
#include <string>

#include "evac/exact.hpp"
#include "evac/lns.hpp"
#include "evac/sim.hpp"

namespace evac {

// Plan files: {"routes":[{"node":id,"next":id}],
//              "departures":[{"source":id,"t":int,"count":int}]}
std::string plan_to_json(const EvacuationNetwork& net, const EvacuationPlan& plan);
EvacuationPlan plan_from_json(const EvacuationNetwork& net, const std::string& text);
void save_plan(const EvacuationNetwork& net, const EvacuationPlan& plan,
               const std::filesystem::path& path);
EvacuationPlan load_plan(const EvacuationNetwork& net, const std::filesystem::path& path);

std::string report_to_json(const SolveReport& report);

/// Bound trace CSV: wall_ms,Z_U,Z_L,gap.
std::string bound_trace_to_csv(const SolveReport& report);

/// LNS trace CSV: iter,objective,completion,horizon,p,status.
std::string lns_trace_to_csv(const LnsTrace& trace);

std::string sim_result_to_json(const EvacuationNetwork& net, const SimResult& result);

/// Event log CSV: t,agent,event,location.
std::string events_to_csv(const SimResult& result);

/// Rate curve CSV: t,cumulative_arrived.
std::string rate_curve_to_csv(const SimResult& result);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Deterministic decimal rendering used in CSV output.
std::string format_double(double v);

}  // namespace evac
