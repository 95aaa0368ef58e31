#pragma once

#include <optional>
#include <vector>

#include "revisit/dirichlet.hpp"
#include "revisit/view_model.hpp"

namespace revisit {

// Everything needed to turn raw scans into view ids and score them.
struct ViewModel {
  ViewAlphabet alphabet;
  ExtractionParams extraction;
  ObservationModel observation;

  std::size_t size() const noexcept { return alphabet.size(); }
  ViewId classify(const RangeScan& scan) const {
    return classify_scan(scan, alphabet, extraction);
  }
};

// Structural prior learned from previously explored environments.
struct StructurePrior {
  ViewModel views;
  HyperMatrix alpha;
  std::vector<double> marginals;     // training view frequencies
  std::optional<CountMatrix> counts;  // pooled training transitions, informational

  // Throws DomainError unless every component agrees on nu.
  void validate() const;
};

}  // namespace revisit
