#pragma once

#include <string>

#include "json.hpp"
#include "qiblab/channel.hpp"
#include "qiblab/error.hpp"
#include "qiblab/estimators.hpp"
#include "qiblab/registers.hpp"
#include "qiblab/series.hpp"
#include "qiblab/trainer.hpp"

namespace qiblab {

using Json = nlohmann::ordered_json;

// Ensemble file:
//   {"dim_label": 2, "records": [{"tag": 0, "state": [a0, [re, im], ...], "label": 0, "weight": 0.5}, ...]}
// Amplitudes are normalized on load only if "normalize": true.
LabeledEnsemble ensemble_from_json(const Json& j);
// Channel file:
//   {"data_qubits": 1, "env_qubits": 1, "discard_qubits": 1,
//    "generators": ["XY", [["XX", 1.0], ["ZI", 0.5]], ...], "parameters": [0.1, ...]}
ParameterizedChannel channel_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

Json to_json(const PlanBounds& plan);
Json to_json(const EstimateReport& report);
Json to_json(const InfoPlaneTrajectory& trajectory);
Json error_to_json(const Error& e);

}  // namespace qiblab
