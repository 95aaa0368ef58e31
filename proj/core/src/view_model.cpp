#include "revisit/view_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "revisit/errors.hpp"
#include "revisit/geometry.hpp"

namespace revisit {
namespace {

enum class BeamKind { kReturn, kMaxRange };

struct BeamGroup {
  BeamKind kind;
  std::size_t begin;  // into the active beam list
  std::size_t end;    // one past the last
  std::size_t size() const { return end - begin; }
};

struct Point {
  double x;
  double y;
};

std::vector<BeamGroup> segment_beams(const std::vector<std::size_t>& active,
                                     const std::vector<BeamKind>& kinds,
                                     const std::vector<double>& ranges, double gap_threshold) {
  std::vector<BeamGroup> groups;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t beam = active[k];
    bool split = groups.empty() || kinds[beam] != groups.back().kind;
    if (!split && kinds[beam] == BeamKind::kReturn) {
      const std::size_t prev = active[k - 1];
      split = std::abs(ranges[beam] - ranges[prev]) >= gap_threshold;
    }
    if (split) {
      groups.push_back(BeamGroup{kinds[beam], k, k + 1});
    } else {
      groups.back().end = k + 1;
    }
  }
  return groups;
}

// Distance from p to the line through a and b, measured from the chord
// midpoint so that reversing or mirroring the point order gives bitwise
// identical values.
double chord_deviation(const Point& a, const Point& b, const Point& p) {
  const double mx = 0.5 * (a.x + b.x);
  const double my = 0.5 * (a.y + b.y);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len = std::hypot(dx, dy);
  if (len == 0.0) {
    return std::hypot(p.x - mx, p.y - my);
  }
  return std::abs(dx * (p.y - my) - dy * (p.x - mx)) / len;
}

// Douglas-Peucker split of points[first..last]; appends interior breakpoints.
void split_polyline(const std::vector<Point>& points, std::size_t first, std::size_t last,
                    double tolerance, std::vector<std::size_t>& breaks) {
  if (last <= first + 1) {
    return;
  }
  double worst = -1.0;
  std::size_t worst_index = first;
  const double middle = 0.5 * static_cast<double>(first + last);
  for (std::size_t k = first + 1; k < last; ++k) {
    const double d = chord_deviation(points[first], points[last], points[k]);
    // Ties go to the point nearest the middle of the chord.
    if (d > worst || (d == worst && std::abs(static_cast<double>(k) - middle) <
                                        std::abs(static_cast<double>(worst_index) - middle))) {
      worst = d;
      worst_index = k;
    }
  }
  if (worst <= tolerance) {
    return;
  }
  split_polyline(points, first, worst_index, tolerance, breaks);
  breaks.push_back(worst_index);
  split_polyline(points, worst_index, last, tolerance, breaks);
}

double direction_change(const Point& a, const Point& b, const Point& c) {
  const double ux = b.x - a.x;
  const double uy = b.y - a.y;
  const double vx = c.x - b.x;
  const double vy = c.y - b.y;
  const double norms = std::hypot(ux, uy) * std::hypot(vx, vy);
  if (norms == 0.0) {
    return 0.0;
  }
  const double cosine = std::clamp((ux * vx + uy * vy) / norms, -1.0, 1.0);
  return std::acos(cosine);
}

// Symbols for one run of returns: "w", or "wcw..." at sharp bends.
void emit_wall_run(const std::vector<Point>& points, const ExtractionParams& params,
                   std::string& out) {
  out.push_back('w');
  if (points.size() < 3) {
    return;
  }
  std::vector<std::size_t> vertices{0};
  split_polyline(points, 0, points.size() - 1, params.line_fit_tolerance, vertices);
  vertices.push_back(points.size() - 1);

  for (std::size_t k = 1; k + 1 < vertices.size(); ++k) {
    const std::size_t before = vertices[k] - vertices[k - 1] + 1;
    const std::size_t after = vertices[k + 1] - vertices[k] + 1;
    if (before < params.min_group_beams || after < params.min_group_beams) {
      continue;
    }
    const Point& a = points[vertices[k - 1]];
    const Point& b = points[vertices[k]];
    const Point& c = points[vertices[k + 1]];
    if (std::hypot(b.x - a.x, b.y - a.y) < params.min_corner_leg ||
        std::hypot(c.x - b.x, c.y - b.y) < params.min_corner_leg) {
      continue;
    }
    const double bend =
        direction_change(points[vertices[k - 1]], points[vertices[k]], points[vertices[k + 1]]);
    if (bend > params.corner_angle_threshold) {
      out.append("cw");
    }
  }
}

std::uint64_t fnv1a(std::uint64_t hash, std::string_view bytes) {
  for (unsigned char ch : bytes) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace

void RangeScan::validate() const {
  if (angles.size() != ranges.size()) {
    throw DomainError("scan has " + std::to_string(angles.size()) + " angles but " +
                      std::to_string(ranges.size()) + " ranges");
  }
  if (!(max_range > 0.0) || !std::isfinite(max_range)) {
    throw DomainError("scan max_range must be positive");
  }
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    if (!(ranges[k] > 0.0) || ranges[k] > max_range) {
      throw DomainError("scan range " + std::to_string(k) + " outside (0, max_range]");
    }
    if (k > 0 && !(angles[k] > angles[k - 1])) {
      throw DomainError("scan angles must be strictly increasing");
    }
  }
}

std::vector<double> uniform_bearings(std::size_t count, double fov) {
  std::vector<double> bearings(count);
  if (count == 0) {
    return bearings;
  }
  if (count == 1) {
    bearings[0] = 0.0;
    return bearings;
  }
  const bool full_circle = fov >= 2.0 * kPi - 1e-12;
  const double step = full_circle ? fov / static_cast<double>(count)
                                  : fov / static_cast<double>(count - 1);
  const double start = -0.5 * fov;
  for (std::size_t k = 0; k < count; ++k) {
    bearings[k] = start + step * static_cast<double>(k);
  }
  return bearings;
}

ScanString::ScanString(std::string symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) {
    throw DomainError("scan string must not be empty");
  }
  for (char ch : symbols_) {
    if (ch != 'w' && ch != 'g' && ch != 'm' && ch != 'c') {
      throw DomainError(std::string("illegal scan string symbol '") + ch + "'");
    }
  }
}

void ExtractionParams::validate() const {
  if (!(gap_threshold > 0.0) || !(max_range_margin > 0.0) || !(corner_angle_threshold > 0.0) ||
      !(line_fit_tolerance > 0.0) || min_group_beams == 0 || !(min_corner_leg >= 0.0)) {
    throw DomainError("extraction parameters must be strictly positive");
  }
}

ScanString extract_scan_string(const RangeScan& scan, const ExtractionParams& params) {
  params.validate();
  if (scan.size() < 3) {
    throw DomainError("scan needs at least 3 beams for view extraction");
  }
  scan.validate();

  const std::size_t n = scan.size();
  std::vector<BeamKind> kinds(n);
  for (std::size_t k = 0; k < n; ++k) {
    kinds[k] = scan.ranges[k] >= scan.max_range - params.max_range_margin ? BeamKind::kMaxRange
                                                                          : BeamKind::kReturn;
  }

  std::vector<std::size_t> active(n);
  for (std::size_t k = 0; k < n; ++k) {
    active[k] = k;
  }

  // Fold groups that are too small into their neighbours until stable.
  std::vector<BeamGroup> groups = segment_beams(active, kinds, scan.ranges, params.gap_threshold);
  while (groups.size() > 1) {
    const bool any_tiny = std::any_of(groups.begin(), groups.end(), [&](const BeamGroup& g) {
      return g.size() < params.min_group_beams;
    });
    const bool all_tiny = std::all_of(groups.begin(), groups.end(), [&](const BeamGroup& g) {
      return g.size() < params.min_group_beams;
    });
    if (!any_tiny || all_tiny) {
      break;
    }
    std::vector<std::size_t> kept;
    kept.reserve(active.size());
    for (const auto& g : groups) {
      if (g.size() >= params.min_group_beams) {
        kept.insert(kept.end(), active.begin() + static_cast<std::ptrdiff_t>(g.begin),
                    active.begin() + static_cast<std::ptrdiff_t>(g.end));
      }
    }
    active = std::move(kept);
    groups = segment_beams(active, kinds, scan.ranges, params.gap_threshold);
  }

  std::string symbols;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const BeamGroup& g = groups[gi];
    if (g.kind == BeamKind::kMaxRange) {
      symbols.push_back('m');
      continue;
    }
    if (gi > 0 && groups[gi - 1].kind == BeamKind::kReturn) {
      symbols.push_back('g');
    }
    std::vector<Point> points;
    points.reserve(g.size());
    for (std::size_t k = g.begin; k < g.end; ++k) {
      const std::size_t beam = active[k];
      points.push_back(Point{scan.ranges[beam] * std::cos(scan.angles[beam]),
                             scan.ranges[beam] * std::sin(scan.angles[beam])});
    }
    emit_wall_run(points, params, symbols);
  }
  return ScanString(std::move(symbols));
}

ScanString reversed(const ScanString& s) {
  return ScanString(std::string(s.str().rbegin(), s.str().rend()));
}

ScanString canonicalize(const ScanString& s) {
  ScanString r = reversed(s);
  return r.str() < s.str() ? r : s;
}

ViewAlphabet ViewAlphabet::from_entries(std::vector<std::string> entries) {
  ViewAlphabet alphabet;
  for (auto& e : entries) {
    if (e == kOther) {
      throw DomainError("alphabet entries must not contain the reserved OTHER view");
    }
    const ScanString canonical = canonicalize(ScanString(e));
    if (canonical.str() != e) {
      throw DomainError("alphabet entry '" + e + "' is not canonical");
    }
    if (!alphabet.index_.emplace(e, alphabet.entries_.size()).second) {
      throw DomainError("duplicate alphabet entry '" + e + "'");
    }
    alphabet.entries_.push_back(std::move(e));
  }
  alphabet.entries_.emplace_back(kOther);
  return alphabet;
}

const std::string& ViewAlphabet::entry(ViewId id) const {
  if (id.index >= entries_.size()) {
    throw DomainError("view id out of range");
  }
  return entries_[id.index];
}

ViewId ViewAlphabet::lookup(const ScanString& s) const {
  const auto it = index_.find(canonicalize(s).str());
  return it == index_.end() ? other() : ViewId{it->second};
}

std::uint64_t ViewAlphabet::fingerprint() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const auto& e : entries_) {
    hash = fnv1a(hash, e);
    hash = fnv1a(hash, std::string_view("\n", 1));
  }
  return hash;
}

ViewAlphabet alphabet_build(std::span<const ScanString> strings, std::size_t max_views) {
  if (strings.empty()) {
    throw DomainError("cannot build a view alphabet from no scan strings");
  }
  if (max_views < 2) {
    throw DomainError("alphabet needs room for at least one view plus OTHER");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& s : strings) {
    ++counts[canonicalize(s).str()];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> kept;
  for (const auto& [s, count] : ranked) {
    if (kept.size() + 1 >= max_views) {
      break;
    }
    kept.push_back(s);
  }
  return ViewAlphabet::from_entries(std::move(kept));
}

ViewId view_of(const ViewAlphabet& alphabet, const ScanString& s) { return alphabet.lookup(s); }

ViewId classify_scan(const RangeScan& scan, const ViewAlphabet& alphabet,
                     const ExtractionParams& params) {
  return alphabet.lookup(extract_scan_string(scan, params));
}

ObservationModel ObservationModel::from_matrix(SquareMatrix<double> matrix,
                                               bool require_positive) {
  const std::size_t nu = matrix.size();
  for (std::size_t j = 0; j < nu; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < nu; ++i) {
      const double p = matrix(i, j);
      if (!std::isfinite(p) || p < 0.0 || (require_positive && p <= 0.0)) {
        throw DomainError("observation model entry (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") is not a valid probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw DomainError("observation model column " + std::to_string(j) + " sums to " +
                        std::to_string(sum));
    }
  }
  ObservationModel model;
  model.matrix_ = std::move(matrix);
  return model;
}

ObservationModel ObservationModel::identity(std::size_t nu) {
  SquareMatrix<double> m(nu, 0.0);
  for (std::size_t i = 0; i < nu; ++i) {
    m(i, i) = 1.0;
  }
  return from_matrix(std::move(m), false);
}

double ObservationModel::likelihood(ViewId z, ViewId v) const {
  if (z.index >= size() || v.index >= size()) {
    throw DomainError("view id out of range in observation model");
  }
  return matrix_(z.index, v.index);
}

double observation_likelihood(const ObservationModel& model, ViewId z, ViewId v) {
  return model.likelihood(z, v);
}

ObservationModel observation_model_from_counts(const HyperMatrix& prior,
                                               const CountMatrix& confusion) {
  if (prior.size() != confusion.size()) {
    throw DomainError("prior and confusion counts differ in size");
  }
  const std::size_t nu = prior.size();
  SquareMatrix<double> m(nu, 0.0);
  for (std::size_t j = 0; j < nu; ++j) {
    const auto col = predictive_column(prior, confusion, ViewId{j});
    for (std::size_t i = 0; i < nu; ++i) {
      m(i, j) = col[i];
    }
  }
  return ObservationModel::from_matrix(std::move(m));
}

ObservationModel learn_observation_model(std::span<const std::vector<LabeledView>> environments,
                                         std::size_t nu, const MapEstimateOptions& options) {
  if (environments.empty()) {
    throw DomainError("observation model needs at least one environment");
  }
  TrainingDataset data;
  CountMatrix pooled(nu);
  for (const auto& env : environments) {
    if (env.empty()) {
      throw DomainError("observation model environment has no labeled views");
    }
    CountMatrix confusion(nu);
    for (const auto& label : env) {
      confusion.increment(label.truth, label.observed);
    }
    pooled += confusion;
    data.environments.push_back(std::move(confusion));
  }
  const HyperMatrix prior = map_estimate(data, HyperMatrix(nu, 1.0), options);
  return observation_model_from_counts(prior, pooled);
}

}  // namespace revisit
