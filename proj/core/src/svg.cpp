#include "topictraj/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "topictraj/csv.hpp"

namespace topictraj {

namespace {

std::string fmt(double v, int decimals = 2) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  // Avoid the "-0.00" artifact so equal inputs render identically.
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

constexpr const char* kPalette[20] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39",
    "#7b4173", "#3182bd", "#e6550d", "#31a354", "#756bb1", "#636363"};

struct LinearScale {
  double domain_lo, domain_hi, range_lo, range_hi;
  double operator()(double v) const {
    const double span = domain_hi - domain_lo;
    const double t = span != 0.0 ? (v - domain_lo) / span : 0.5;
    return range_lo + t * (range_hi - range_lo);
  }
};

}  // namespace

std::string render_distance_plot(const std::vector<std::pair<int, double>>& level_distances,
                                 int baseline_level) {
  if (level_distances.empty()) throw std::invalid_argument("no levels to plot");
  auto sorted = level_distances;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double width = 640, height = 420, margin = 56;
  double lo_level = sorted.back().first, hi_level = sorted.front().first;
  double lo = sorted.front().second, hi = sorted.front().second;
  for (const auto& [level, dist] : sorted) {
    lo = std::min(lo, dist);
    hi = std::max(hi, dist);
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  // Levels run left to right from the highest word percentage downward.
  const LinearScale sx{hi_level, lo_level, margin, width - margin};
  const LinearScale sy{lo, hi, height - margin, margin};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<line x1=\"" << fmt(margin) << "\" y1=\"" << fmt(height - margin) << "\" x2=\""
      << fmt(width - margin) << "\" y2=\"" << fmt(height - margin)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fmt(margin) << "\" y1=\"" << fmt(margin) << "\" x2=\"" << fmt(margin)
      << "\" y2=\"" << fmt(height - margin) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << fmt(width / 2) << "\" y=\"" << fmt(height - 16)
      << "\" text-anchor=\"middle\">word level (%)</text>\n";
  svg << "<text x=\"18\" y=\"" << fmt(height / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << fmt(height / 2)
      << ")\">mean origin distance</text>\n";

  std::ostringstream points;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) points << ' ';
    points << fmt(sx(sorted[i].first)) << ',' << fmt(sy(sorted[i].second));
  }
  svg << "<polyline fill=\"none\" stroke=\"" << kPalette[0] << "\" stroke-width=\"1.5\" points=\""
      << points.str() << "\"/>\n";
  for (const auto& [level, dist] : sorted) {
    const bool is_baseline = level == baseline_level;
    svg << "<circle cx=\"" << fmt(sx(level)) << "\" cy=\"" << fmt(sy(dist)) << "\" r=\""
        << (is_baseline ? "5" : "3") << "\" fill=\""
        << (is_baseline ? kPalette[3] : kPalette[0]) << "\"/>\n";
    svg << "<text x=\"" << fmt(sx(level)) << "\" y=\"" << fmt(height - margin + 16)
        << "\" text-anchor=\"middle\" font-size=\"9\">" << level << "</text>\n";
  }
  svg << "<text x=\"" << fmt(sx(baseline_level)) << "\" y=\"" << fmt(margin - 8)
      << "\" text-anchor=\"middle\" fill=\"" << kPalette[3] << "\">baseline "
      << baseline_level << "%</text>\n";
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string render_trajectory_plot(const TrajectorySet& trajectories,
                                   const std::vector<std::string>& labels) {
  if (trajectories.positions.empty()) throw std::invalid_argument("no trajectories to plot");
  const std::size_t topics = trajectories.topic_count();

  double extent = 0.0;
  for (const auto& m : trajectories.positions)
    extent = std::max(extent, m.cwiseAbs().maxCoeff());
  if (extent == 0.0) extent = 1.0;
  extent *= 1.15;

  const double size = 760, margin = 40;
  const LinearScale sx{-extent, extent, margin, size - margin};
  const LinearScale sy{-extent, extent, size - margin, margin};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n"
      << "<defs>\n";
  for (std::size_t t = 0; t < topics; ++t) {
    svg << "<marker id=\"arrow" << t
        << "\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"7\" markerHeight=\"7\""
        << " orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\""
        << kPalette[t % 20] << "\"/></marker>\n";
  }
  svg << "</defs>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<line x1=\"" << fmt(sx(-extent)) << "\" y1=\"" << fmt(sy(0.0)) << "\" x2=\""
      << fmt(sx(extent)) << "\" y2=\"" << fmt(sy(0.0))
      << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  svg << "<line x1=\"" << fmt(sx(0.0)) << "\" y1=\"" << fmt(sy(-extent)) << "\" x2=\""
      << fmt(sx(0.0)) << "\" y2=\"" << fmt(sy(extent))
      << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";

  for (std::size_t t = 0; t < topics; ++t) {
    std::ostringstream points;
    for (std::size_t l = 0; l < trajectories.levels.size(); ++l) {
      const auto row = trajectories.positions[l].row(static_cast<Eigen::Index>(t));
      if (l) points << ' ';
      points << fmt(sx(row(0))) << ',' << fmt(sy(row(1)));
    }
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[t % 20]
        << "\" stroke-width=\"1.5\" marker-end=\"url(#arrow" << t << ")\" points=\""
        << points.str() << "\"/>\n";
    const auto last =
        trajectories.positions.back().row(static_cast<Eigen::Index>(t));
    const std::string label =
        t < labels.size() && !labels[t].empty() ? labels[t] : std::to_string(t + 1);
    svg << "<text x=\"" << fmt(sx(last(0)) + 6) << "\" y=\"" << fmt(sy(last(1)) - 4)
        << "\" fill=\"" << kPalette[t % 20] << "\">" << label << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string render_report(const TopicWordMatrix& matrix, const TopicDistribution& theta,
                          std::size_t k) {
  if (static_cast<std::size_t>(theta.theta.size()) != matrix.topic_count())
    throw std::invalid_argument("theta length does not match topic count");
  const auto top = list_top_words(matrix, k);
  std::ostringstream out;
  out << "topic,theta,rank,word,probability\n";
  for (std::size_t z = 0; z < top.size(); ++z) {
    for (std::size_t r = 0; r < top[z].size(); ++r) {
      const auto w = top[z][r];
      out << (z + 1) << ',' << format_double(theta.theta(static_cast<Eigen::Index>(z))) << ','
          << (r + 1) << ',' << matrix.words[w] << ','
          << format_double(matrix.values(w, static_cast<Eigen::Index>(z))) << '\n';
    }
  }
  return out.str();
}

}  // namespace topictraj
