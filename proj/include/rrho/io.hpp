#pragma once

#include <string>

#include "rrho/point_set.hpp"
#include "rrho/solver.hpp"

#include <json.hpp>

namespace rrho {

struct LoadResult {
    WeightedPointSet points;
    double raw_weight_sum = 1.0;
    bool renormalized_warning = false;  // |sum - 1| was in (1e-6, 1e-2]
};

// CSV with header "w,x1,...,xd"; weights positive, zero-weight rows dropped.
// Rows off by more than 1e-2 in total weight raise WeightSumError.
LoadResult load_point_set(const std::string& path);

nlohmann::json report_to_json(const SolverReport& report);
nlohmann::json params_to_json(const SolverParams& params);

}  // namespace rrho
