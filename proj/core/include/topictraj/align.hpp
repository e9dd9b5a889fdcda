#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "topictraj/lsirm.hpp"

namespace topictraj {

// Least-squares orthogonal map (reflections allowed, no scaling) taking the
// centered source onto the centered target.
Eigen::MatrixXd orthogonal_procrustes_rotation(const Eigen::MatrixXd& source_centered,
                                               const Eigen::MatrixXd& target_centered);

struct ProcrustesTransform {
  Eigen::MatrixXd rotation;        // d x d orthogonal, det +-1
  Eigen::RowVectorXd translation;  // aligned = source * rotation + translation
};

struct ProcrustesResult {
  ProcrustesTransform transform;
  Eigen::MatrixXd aligned;
  double residual = 0.0;  // Frobenius norm of (aligned - target)
};

ProcrustesResult procrustes_fit(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target);

double mean_origin_distance(const PositionMatrix& positions);

// Level whose matrix has the largest mean row distance from the origin;
// ties break toward the lower level.
int select_baseline(const std::vector<PositionMatrix>& matrices);

// Procrustes-aligns every matrix to the one at `baseline_level`.
std::vector<PositionMatrix> align_all(const std::vector<PositionMatrix>& matrices,
                                      int baseline_level);

struct RotationMatrix {
  Eigen::MatrixXd values;  // d x d, unit-norm columns, invertible
  bool converged = true;
  std::size_t iterations = 0;
};

// Oblimin family criterion of a coordinate matrix (gamma = 0 is quartimin).
double oblimin_criterion(const Eigen::MatrixXd& matrix, double gamma = 0.0);

struct ObliminResult {
  PositionMatrix rotated;  // B = A * R
  RotationMatrix rotation;
  double criterion_before = 0.0;
  double criterion_after = 0.0;
};

// Gradient-projection minimization of the oblimin criterion over oblique
// rotations with unit-norm columns, started from the identity. The criterion
// never increases across accepted steps, so criterion(B) <= criterion(A).
ObliminResult oblimin_rotate(const PositionMatrix& matrix, double gamma = 0.0,
                             double tolerance = 1e-6, std::size_t max_iterations = 1000);

struct TrajectorySet {
  std::vector<int> levels;                 // strictly decreasing
  std::vector<Eigen::MatrixXd> positions;  // per level, P x d rotated coordinates

  std::size_t topic_count() const {
    return positions.empty() ? 0 : static_cast<std::size_t>(positions.front().rows());
  }
  // Ordered (level, coordinate) pairs for one topic, highest level first.
  std::vector<std::pair<int, Eigen::RowVectorXd>> trajectory(std::size_t topic) const;
};

// Applies the shared rotation to every aligned matrix: B_i = A*_i * R.
TrajectorySet build_trajectories(const std::vector<PositionMatrix>& aligned,
                                 const RotationMatrix& rotation);

void save_rotation_matrix(const std::filesystem::path& path, const RotationMatrix& rotation);
RotationMatrix load_rotation_matrix(const std::filesystem::path& path);
void save_trajectories(const std::filesystem::path& path, const TrajectorySet& trajectories);
TrajectorySet load_trajectories(const std::filesystem::path& path);

}  // namespace topictraj
