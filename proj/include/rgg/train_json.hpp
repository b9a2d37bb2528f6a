#ifndef RGG_TRAIN_JSON_HPP
#define RGG_TRAIN_JSON_HPP

#include "rgg/trainer.hpp"

#include <json.hpp>

#include <string>

namespace rgg {

/**
 * Reads a TrainConfig from a JSON object. Every key is optional and named as
 * the struct field. "target" takes {"p", "mu", "sigma"} where sigma may be
 * replaced by "sigma_rule": "gn" | "rgn" (default gn). "target_kind" is
 * "rectified" or "dense", "policy" a projection policy name.
 * Unknown keys and wrongly typed values throw ParseError; out-of-range
 * values throw DomainError from validate().
 */
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig load_train_config(const std::string& path);

/// Full echo of the resolved configuration; round-trips through
/// train_config_from_json.
nlohmann::json to_json(const TrainConfig& config);

nlohmann::json to_json(const TraceRecord& record);

/// Resolved configuration, the final record and the sparsity predicted for
/// the target.
nlohmann::json train_summary(const TrainConfig& config, const TrainResult& result);

} // namespace rgg

#endif
