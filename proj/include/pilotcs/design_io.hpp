// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// JSON / CSV persistence for designs, traces and coherence reports.
//
// Design JSON: {"K","M","Nt","Pt","allocation":[0-based ints],
// "x_real":[[...]],"x_imag":[[...]]}, one row per transmit antenna holding
// the M K entries of [X_1 .. X_K].

#ifndef PILOTCS_DESIGN_IO_HPP
#define PILOTCS_DESIGN_IO_HPP

#include "pilotcs/pilot_optimizer.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace pilotcs
{

nlohmann::json design_to_json(const PilotDesign &design);
/// Throws std::invalid_argument on missing fields, shape or power mismatch.
PilotDesign design_from_json(const nlohmann::json &j);

void write_design(const std::filesystem::path &path, const PilotDesign &design);
PilotDesign read_design(const std::filesystem::path &path);

/// `iteration,loss,f_term,g_term,grad_norm`
void write_trace_csv(const std::filesystem::path &path, const OptimizationTrace &trace);

nlohmann::json coherence_summary_json(const CoherenceReport &report, const PilotDesign &design);
/// `kind,value` rows, kind is "inner_product" or "column_norm".
void write_cdf_csv(const std::filesystem::path &path, const std::string &kind, const std::vector<double> &values);

void write_text(const std::filesystem::path &path, const std::string &text);
/// Shortest round-trip decimal form.
std::string format_double(double x);

} // namespace pilotcs

#endif
