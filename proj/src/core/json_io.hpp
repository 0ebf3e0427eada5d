#ifndef EQHMM_CORE_JSON_IO_HPP
#define EQHMM_CORE_JSON_IO_HPP

#include <string>

#include "core/catalog.hpp"
#include "core/estimation.hpp"
#include "core/evaluate.hpp"
#include "core/hmm.hpp"

namespace eqhmm {

// JSON round trips are exact: doubles are emitted with enough digits to
// reparse to the identical value.

std::string params_to_json(const HmmParams& params);
HmmParams params_from_json(const std::string& text);
void save_params(const HmmParams& params, const std::string& path);
HmmParams load_params(const std::string& path);

std::string partition_to_json(const RegionPartition& partition);
RegionPartition partition_from_json(const std::string& text);
void save_partition(const RegionPartition& partition, const std::string& path);
RegionPartition load_partition(const std::string& path);

std::string fit_config_to_json(const FitConfig& config);
/// Missing keys keep the given defaults.
FitConfig fit_config_from_json(const std::string& text,
                               const FitConfig& defaults);

std::string fit_result_to_json(const FitResult& result);
std::string fit_trace_csv(const FitResult& result);

std::string eval_config_to_json(const EvalConfig& config);
EvalConfig eval_config_from_json(const std::string& text);
EvalConfig load_eval_config(const std::string& path);

}  // namespace eqhmm

#endif
