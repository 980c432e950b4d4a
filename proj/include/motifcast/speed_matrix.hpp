#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace motifcast::pipeline {

using BoolMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// N x T average speeds, one row per road segment, one column per interval.
// Missing cells are flagged in the mask, never zero-filled.
struct SpeedMatrix {
    Eigen::MatrixXd values;
    BoolMask missing;
    int interval_minutes = 15;
    std::string start_timestamp;  // ISO 8601, aligned to midnight of day 0
    std::vector<std::string> segment_ids;

    int segment_count() const { return static_cast<int>(values.rows()); }
    int interval_count() const { return static_cast<int>(values.cols()); }
    int intervals_per_day() const { return 1440 / interval_minutes; }
    int day_count() const { return interval_count() / intervals_per_day(); }

    bool has_missing() const { return missing.any(); }
    void validate() const;  // non-negative finite unmasked speeds, shape consistency
};

}  // namespace motifcast::pipeline
