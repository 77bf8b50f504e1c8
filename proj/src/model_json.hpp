#pragma once

#include <json.hpp>

#include "emrec/model.hpp"

namespace emrec {

// Shared by model save/load and the pipeline bundle format.
nlohmann::ordered_json model_to_json(const BaggingModel& model);
BaggingModel model_from_json(const nlohmann::json& doc);

}  // namespace emrec
