#pragma once

#include <compare>
#include <cstddef>

namespace revisit {

/// Index of a discrete view within a ViewAlphabet.
struct ViewId {
  std::size_t index = 0;

  auto operator<=>(const ViewId&) const = default;
};

}  // namespace revisit
