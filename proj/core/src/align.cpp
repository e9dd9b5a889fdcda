#include "topictraj/align.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "topictraj/csv.hpp"

namespace topictraj {

Eigen::MatrixXd orthogonal_procrustes_rotation(const Eigen::MatrixXd& source_centered,
                                               const Eigen::MatrixXd& target_centered) {
  if (source_centered.rows() != target_centered.rows() ||
      source_centered.cols() != target_centered.cols())
    throw std::invalid_argument("Procrustes inputs must share their shape");
  const Eigen::MatrixXd C = source_centered.transpose() * target_centered;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

ProcrustesResult procrustes_fit(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target) {
  if (source.rows() < 2) throw std::invalid_argument("Procrustes needs at least 2 rows");
  const Eigen::RowVectorXd source_mean = source.colwise().mean();
  const Eigen::RowVectorXd target_mean = target.colwise().mean();
  const Eigen::MatrixXd source_c = source.rowwise() - source_mean;
  const Eigen::MatrixXd target_c = target.rowwise() - target_mean;

  ProcrustesResult result;
  result.transform.rotation = orthogonal_procrustes_rotation(source_c, target_c);
  result.transform.translation = target_mean - source_mean * result.transform.rotation;
  result.aligned = (source * result.transform.rotation).rowwise() + result.transform.translation;
  result.residual = (result.aligned - target).norm();
  return result;
}

double mean_origin_distance(const PositionMatrix& positions) {
  return positions.coords.rowwise().norm().mean();
}

int select_baseline(const std::vector<PositionMatrix>& matrices) {
  if (matrices.empty()) throw std::invalid_argument("no position matrices");
  int best_level = matrices.front().level;
  double best = -1.0;
  for (const auto& m : matrices) {
    const double dist = mean_origin_distance(m);
    if (dist > best || (dist == best && m.level < best_level)) {
      best = dist;
      best_level = m.level;
    }
  }
  return best_level;
}

std::vector<PositionMatrix> align_all(const std::vector<PositionMatrix>& matrices,
                                      int baseline_level) {
  const auto baseline =
      std::find_if(matrices.begin(), matrices.end(),
                   [&](const PositionMatrix& m) { return m.level == baseline_level; });
  if (baseline == matrices.end())
    throw std::invalid_argument("baseline level is not among the matrices");
  std::vector<PositionMatrix> aligned;
  aligned.reserve(matrices.size());
  for (const auto& m : matrices) {
    ProcrustesResult fit = procrustes_fit(m.coords, baseline->coords);
    aligned.push_back(PositionMatrix{std::move(fit.aligned), m.level});
  }
  return aligned;
}

double oblimin_criterion(const Eigen::MatrixXd& matrix, double gamma) {
  const auto p = matrix.rows();
  const auto k = matrix.cols();
  const Eigen::MatrixXd L2 = matrix.array().square();
  const Eigen::MatrixXd M = Eigen::MatrixXd::Ones(k, k) - Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd X = L2 * M;
  if (gamma != 0.0) {
    X -= Eigen::MatrixXd::Constant(p, p, gamma / static_cast<double>(p)) * X;
  }
  return (L2.array() * X.array()).sum() / 4.0;
}

namespace {

// Criterion and its gradient with respect to the rotated matrix L.
std::pair<double, Eigen::MatrixXd> oblimin_value_gradient(const Eigen::MatrixXd& L,
                                                          double gamma) {
  const auto p = L.rows();
  const auto k = L.cols();
  const Eigen::MatrixXd L2 = L.array().square();
  const Eigen::MatrixXd M = Eigen::MatrixXd::Ones(k, k) - Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd X = L2 * M;
  if (gamma != 0.0) X -= Eigen::MatrixXd::Constant(p, p, gamma / static_cast<double>(p)) * X;
  const double f = (L2.array() * X.array()).sum() / 4.0;
  const Eigen::MatrixXd Gq = L.array() * X.array();
  return {f, Gq};
}

Eigen::MatrixXd normalize_columns(const Eigen::MatrixXd& T) {
  Eigen::MatrixXd out = T;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double n = out.col(c).norm();
    if (n <= 0.0) throw std::runtime_error("rotation column collapsed to zero");
    out.col(c) /= n;
  }
  return out;
}

}  // namespace

ObliminResult oblimin_rotate(const PositionMatrix& matrix, double gamma, double tolerance,
                             std::size_t max_iterations) {
  const Eigen::MatrixXd& A = matrix.coords;
  const auto d = A.cols();
  if (d < 2) throw std::invalid_argument("oblique rotation needs latent dimension >= 2");

  ObliminResult result;
  result.criterion_before = oblimin_criterion(A, gamma);

  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(d, d);
  auto [f, Gq] = oblimin_value_gradient(A * T, gamma);
  Eigen::MatrixXd G = A.transpose() * Gq;  // df/dT for L = A * T
  double step = 1.0;
  bool converged = false;
  std::size_t iter = 0;
  for (; iter < max_iterations; ++iter) {
    // Project out the per-column radial component to stay on the oblique
    // manifold {T : diag(T'T) = I} to first order.
    const Eigen::MatrixXd Gp = G - T * (T.array() * G.array()).colwise().sum().matrix().asDiagonal();
    const double s = Gp.norm();
    if (s < tolerance) {
      converged = true;
      break;
    }
    step *= 2.0;
    Eigen::MatrixXd T_next = T;
    double f_next = f;
    Eigen::MatrixXd Gq_next = Gq;
    for (int halvings = 0; halvings < 32; ++halvings) {
      const Eigen::MatrixXd candidate = normalize_columns(T - step * Gp);
      auto [fc, gc] = oblimin_value_gradient(A * candidate, gamma);
      if (fc < f - 0.5 * s * s * step) {
        T_next = candidate;
        f_next = fc;
        Gq_next = gc;
        break;
      }
      step /= 2.0;
    }
    if (f_next >= f) break;  // line search stalled; keep the best iterate
    T = T_next;
    f = f_next;
    Gq = Gq_next;
    G = A.transpose() * Gq;
  }

  result.rotation.values = T;
  result.rotation.converged = converged;
  result.rotation.iterations = iter;
  result.rotated = PositionMatrix{A * T, matrix.level};
  result.criterion_after = f;
  if (std::abs(T.determinant()) < 1e-12)
    throw std::runtime_error("oblique rotation became singular");
  return result;
}

std::vector<std::pair<int, Eigen::RowVectorXd>> TrajectorySet::trajectory(
    std::size_t topic) const {
  std::vector<std::pair<int, Eigen::RowVectorXd>> path;
  path.reserve(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l)
    path.emplace_back(levels[l], positions[l].row(static_cast<Eigen::Index>(topic)));
  return path;
}

TrajectorySet build_trajectories(const std::vector<PositionMatrix>& aligned,
                                 const RotationMatrix& rotation) {
  if (aligned.empty()) throw std::invalid_argument("no aligned matrices");
  std::vector<const PositionMatrix*> ordered;
  ordered.reserve(aligned.size());
  for (const auto& m : aligned) ordered.push_back(&m);
  std::sort(ordered.begin(), ordered.end(),
            [](const PositionMatrix* a, const PositionMatrix* b) { return a->level > b->level; });

  TrajectorySet set;
  const auto P = ordered.front()->coords.rows();
  const auto d = ordered.front()->coords.cols();
  if (rotation.values.rows() != d || rotation.values.cols() != d)
    throw std::invalid_argument("rotation matrix dimension mismatch");
  for (const auto* m : ordered) {
    if (m->coords.rows() != P || m->coords.cols() != d)
      throw std::invalid_argument("position matrices do not share a shape");
    set.levels.push_back(m->level);
    set.positions.push_back(m->coords * rotation.values);
  }
  return set;
}

void save_rotation_matrix(const std::filesystem::path& path, const RotationMatrix& rotation) {
  CsvTable table;
  for (Eigen::Index c = 0; c < rotation.values.cols(); ++c)
    table.header.push_back("r_" + std::to_string(c + 1));
  for (Eigen::Index r = 0; r < rotation.values.rows(); ++r) {
    std::vector<std::string> row;
    for (Eigen::Index c = 0; c < rotation.values.cols(); ++c)
      row.push_back(format_double(rotation.values(r, c)));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

RotationMatrix load_rotation_matrix(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  RotationMatrix rotation;
  rotation.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                         static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t c = 0; c < table.header.size(); ++c)
      rotation.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double(table.rows[r][c]);
  return rotation;
}

void save_trajectories(const std::filesystem::path& path, const TrajectorySet& trajectories) {
  CsvTable table;
  table.header = {"topic", "level", "x", "y"};
  for (std::size_t t = 0; t < trajectories.topic_count(); ++t) {
    for (std::size_t l = 0; l < trajectories.levels.size(); ++l) {
      const auto row = trajectories.positions[l].row(static_cast<Eigen::Index>(t));
      table.rows.push_back({std::to_string(t + 1), std::to_string(trajectories.levels[l]),
                            format_double(row(0)), format_double(row(1))});
    }
  }
  write_csv(path, table);
}

TrajectorySet load_trajectories(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  std::map<int, std::map<std::size_t, Eigen::RowVector2d>, std::greater<>> by_level;
  for (const auto& row : table.rows) {
    const auto topic = static_cast<std::size_t>(std::stoull(row[0]) - 1);
    const int level = std::stoi(row[1]);
    by_level[level][topic] = Eigen::RowVector2d(parse_double(row[2]), parse_double(row[3]));
  }
  TrajectorySet set;
  for (const auto& [level, topics] : by_level) {
    Eigen::MatrixXd coords(static_cast<Eigen::Index>(topics.size()), 2);
    for (const auto& [topic, xy] : topics) coords.row(static_cast<Eigen::Index>(topic)) = xy;
    set.levels.push_back(level);
    set.positions.push_back(std::move(coords));
  }
  return set;
}

}  // namespace topictraj
