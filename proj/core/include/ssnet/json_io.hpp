#pragma once

#include "ssnet/lasso.hpp"
#include "ssnet/selection.hpp"
#include "ssnet/simgen.hpp"
#include "ssnet/theory.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace ssnet {

// All emitters return pretty-printed JSON (2-space indent). Index fields
// are 0-based; column names are added when `names` is nonempty.
// Non-finite numbers are written as null.

std::string plan_to_json(const ExperimentPlan& plan);
// Missing fields keep their ExperimentPlan defaults. Throws
// std::invalid_argument on malformed input.
ExperimentPlan plan_from_json(std::string_view text);
// Built-in plan id, or a path to a JSON plan file.
ExperimentPlan load_plan(const std::string& id_or_path);

std::string fit_to_json(const LassoFit& fit, const std::vector<std::string>& names = {});
std::string path_to_json(const std::vector<LassoFit>& path, const std::vector<std::string>& names = {});
std::string selection_to_json(const SelectionResult& result, const std::vector<std::string>& names = {});
std::string selections_to_json(const std::vector<SelectionResult>& results,
                               const std::vector<std::string>& names = {});
std::string theory_report_to_json(const TheoryReport& report);

}  // namespace ssnet
