#pragma once

// Discrete views extracted from planar range scans, and the learned
// observation model p(z | v) over them.
//
// A scan is read beam by beam in counterclockwise order and summarized as a
// string over four symbols:
//   w  a run of returns that fit straight line segments,
//   g  a range discontinuity between two adjacent returns,
//   m  a run of max-range readings (no return),
//   c  a bend between two fitted line segments inside one w run.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "revisit/dirichlet.hpp"
#include "revisit/square_matrix.hpp"
#include "revisit/view_id.hpp"

namespace revisit {

struct RangeScan {
  std::vector<double> angles;  // robot frame, strictly increasing
  std::vector<double> ranges;
  double max_range = 0.0;

  std::size_t size() const noexcept { return ranges.size(); }
  // Throws DomainError when the invariants do not hold.
  void validate() const;

  bool operator==(const RangeScan&) const = default;
};

// `count` bearings spread over `fov` and centered on the robot heading. A full
// circle excludes the duplicate end bearing.
std::vector<double> uniform_bearings(std::size_t count, double fov);

class ScanString {
 public:
  explicit ScanString(std::string symbols);

  const std::string& str() const noexcept { return symbols_; }
  std::size_t size() const noexcept { return symbols_.size(); }

  auto operator<=>(const ScanString&) const = default;

 private:
  std::string symbols_;
};

struct ExtractionParams {
  double gap_threshold = 1.0;           // m
  double max_range_margin = 0.2;        // m
  double corner_angle_threshold = 0.6;  // rad
  double line_fit_tolerance = 0.1;      // m
  std::size_t min_group_beams = 4;
  double min_corner_leg = 0.3;  // m, both walls meeting at a corner

  void validate() const;

  bool operator==(const ExtractionParams&) const = default;
};

ScanString extract_scan_string(const RangeScan& scan, const ExtractionParams& params = {});

ScanString reversed(const ScanString& s);

// Lexicographic minimum of s and its reversal; merges mirror-symmetric views.
ScanString canonicalize(const ScanString& s);

class ViewAlphabet {
 public:
  static constexpr std::string_view kOther = "OTHER";

  ViewAlphabet() = default;

  // `entries` are canonical strings, most frequent first, without OTHER.
  static ViewAlphabet from_entries(std::vector<std::string> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& entry(ViewId id) const;
  const std::vector<std::string>& entries() const noexcept { return entries_; }
  ViewId other() const { return ViewId{entries_.size() - 1}; }

  // Canonicalizes s and returns its slot, or OTHER when unseen.
  ViewId lookup(const ScanString& s) const;

  // Stable 64-bit hash of the ordered entries (FNV-1a), used to refuse
  // mixing model files built over different alphabets.
  std::uint64_t fingerprint() const;

  bool operator==(const ViewAlphabet& other) const { return entries_ == other.entries_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Frequency-ranked alphabet keeping at most max_views - 1 strings plus OTHER.
ViewAlphabet alphabet_build(std::span<const ScanString> strings, std::size_t max_views);

ViewId view_of(const ViewAlphabet& alphabet, const ScanString& s);

// Extract, canonicalize and look up in one go.
ViewId classify_scan(const RangeScan& scan, const ViewAlphabet& alphabet,
                     const ExtractionParams& params);

class ObservationModel {
 public:
  ObservationModel() = default;

  // Column j must be a distribution over observed views given true view j.
  // With `require_positive`, zero entries are rejected.
  static ObservationModel from_matrix(SquareMatrix<double> matrix, bool require_positive = true);

  // Unsmoothed perfect-recognition model.
  static ObservationModel identity(std::size_t nu);

  std::size_t size() const noexcept { return matrix_.size(); }
  double likelihood(ViewId z, ViewId v) const;
  const SquareMatrix<double>& matrix() const noexcept { return matrix_; }

 private:
  SquareMatrix<double> matrix_;
};

double observation_likelihood(const ObservationModel& model, ViewId z, ViewId v);

struct LabeledView {
  ViewId truth;
  ViewId observed;
};

// Smooths confusion counts (entry (i, j): observed i while the true view was
// j) with a fixed Dirichlet prior: column j is the posterior predictive.
ObservationModel observation_model_from_counts(const HyperMatrix& prior,
                                               const CountMatrix& confusion);

// Per-environment confusion counts -> MAP prior across environments ->
// predictive of the pooled counts under that prior.
ObservationModel learn_observation_model(std::span<const std::vector<LabeledView>> environments,
                                         std::size_t nu, const MapEstimateOptions& options = {});

}  // namespace revisit
