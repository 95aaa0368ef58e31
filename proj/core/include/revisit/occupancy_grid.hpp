#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revisit {

enum class Cell : std::uint8_t { kFree, kOccupied, kUnknown };

struct CellIndex {
  long col = 0;
  long row = 0;

  bool operator==(const CellIndex&) const = default;
};

struct Extent {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(double x, double y) const {
    return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
  }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

// Rectangular grid of FREE / OCCUPIED / UNKNOWN cells. Cell (0, 0) has its
// lower-left corner at the origin; rows grow along +y.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(std::size_t width, std::size_t height, double resolution, double origin_x,
                double origin_y, Cell fill = Cell::kUnknown);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  double resolution() const noexcept { return resolution_; }
  double origin_x() const noexcept { return origin_x_; }
  double origin_y() const noexcept { return origin_y_; }

  bool in_bounds(long col, long row) const noexcept {
    return col >= 0 && row >= 0 && static_cast<std::size_t>(col) < width_ &&
           static_cast<std::size_t>(row) < height_;
  }
  Cell at(long col, long row) const { return cells_[flat(col, row)]; }
  void set(long col, long row, Cell value) { cells_[flat(col, row)] = value; }

  std::size_t flat(long col, long row) const noexcept {
    return static_cast<std::size_t>(row) * width_ + static_cast<std::size_t>(col);
  }

  // Cell containing world point (x, y); nullopt off-grid.
  std::optional<CellIndex> cell_of(double x, double y) const;
  double center_x(long col) const { return origin_x_ + (static_cast<double>(col) + 0.5) * resolution_; }
  double center_y(long row) const { return origin_y_ + (static_cast<double>(row) + 0.5) * resolution_; }

  std::size_t count(Cell value) const;
  double area(Cell value) const { return static_cast<double>(count(value)) * resolution_ * resolution_; }

  // World bounds of the whole grid, and of its non-UNKNOWN cells.
  Extent bounds() const;
  std::optional<Extent> known_extent() const;

  const std::vector<Cell>& cells() const noexcept { return cells_; }

  bool operator==(const OccupancyGrid&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double resolution_ = 1.0;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  std::vector<Cell> cells_;
};

// Map text: `resolution <m>`, `origin <x> <y>`, then one line per grid row
// from the top (highest row index) down, using '#' OCCUPIED, '.' FREE and
// '?' UNKNOWN. Errors carry the offending line number.
OccupancyGrid load_map(std::string_view text);
std::string save_map(const OccupancyGrid& grid);

OccupancyGrid load_map_file(const std::string& path);
void save_map_file(const std::string& path, const OccupancyGrid& grid);

}  // namespace revisit
