#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "wdrc/backtest.hpp"
#include "wdrc/calibrate.hpp"
#include "wdrc/certificate.hpp"
#include "wdrc/dro.hpp"
#include "wdrc/montecarlo.hpp"

// JSON codecs for the documented file formats. Keys are emitted in sorted
// order (nlohmann default), so outputs are byte-stable.
namespace wdrc::json_io {

using json = nlohmann::json;

json radius_table_to_json(const calibrate::RadiusTable& table, double beta);
calibrate::RadiusTable radius_table_from_json(const json& j);

json support_to_json(const model::BoxSupport& support);
model::BoxSupport support_from_json(const json& j);

json problem_to_json(const dro::RelaxationProblem& pb);
dro::RelaxationProblem problem_from_json(const json& j);

json solution_to_json(const dro::RelaxationSolution& sol);
json gap_report_to_json(const certificate::GapReport& report);
json metrics_to_json(const backtest::MetricBlock& m);
json long_run_to_json(const montecarlo::LongRunReport& r);
json viability_to_json(const montecarlo::ViabilityReport& r);

json load_json_file(const std::string& path);
void write_json_file(const json& j, const std::string& path);

}  // namespace wdrc::json_io
