#pragma once

#include <string>
#include <vector>

#include "topictraj/align.hpp"
#include "topictraj/btm.hpp"

namespace topictraj {

// Mean origin distance per level as a line chart with the baseline level
// marked. Output is deterministic: identical input gives identical bytes.
std::string render_distance_plot(const std::vector<std::pair<int, double>>& level_distances,
                                 int baseline_level);

// One polyline with an arrowhead per topic, ordered from the highest to the
// lowest word level, topic label at the final point, axes through the origin.
std::string render_trajectory_plot(const TrajectorySet& trajectories,
                                   const std::vector<std::string>& labels);

// CSV report: one row per (topic, rank) with the topic weight attached,
// exactly topic_count * k data rows.
std::string render_report(const TopicWordMatrix& matrix, const TopicDistribution& theta,
                          std::size_t k);

}  // namespace topictraj
