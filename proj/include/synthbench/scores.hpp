#pragma once

#include <string>
#include <vector>

namespace synthbench {

enum class Label { regular, outlier };

enum class Orientation { higher_is_outlier, lower_is_outlier };

// One score per instance plus the direction in which scores point at outliers.
// Density-derived scores are kept in log space, so +-inf may appear as support
// sentinels; NaN never may.
struct ScoreVector {
    std::vector<double> scores;
    Orientation orientation = Orientation::higher_is_outlier;
    std::string method_id;
};

}  // namespace synthbench
