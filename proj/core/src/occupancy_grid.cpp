#include "revisit/occupancy_grid.hpp"

#include <algorithm>
#include <cmath>

#include "revisit/errors.hpp"
#include "revisit/text_format.hpp"

namespace revisit {

OccupancyGrid::OccupancyGrid(std::size_t width, std::size_t height, double resolution,
                             double origin_x, double origin_y, Cell fill)
    : width_(width),
      height_(height),
      resolution_(resolution),
      origin_x_(origin_x),
      origin_y_(origin_y),
      cells_(width * height, fill) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw DomainError("grid resolution must be positive");
  }
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
    throw DomainError("grid origin must be finite");
  }
}

std::optional<CellIndex> OccupancyGrid::cell_of(double x, double y) const {
  const double gx = std::floor((x - origin_x_) / resolution_);
  const double gy = std::floor((y - origin_y_) / resolution_);
  if (!(gx >= 0.0) || !(gy >= 0.0) || gx >= static_cast<double>(width_) ||
      gy >= static_cast<double>(height_)) {
    return std::nullopt;
  }
  return CellIndex{static_cast<long>(gx), static_cast<long>(gy)};
}

std::size_t OccupancyGrid::count(Cell value) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), value));
}

Extent OccupancyGrid::bounds() const {
  return Extent{origin_x_, origin_y_, origin_x_ + static_cast<double>(width_) * resolution_,
                origin_y_ + static_cast<double>(height_) * resolution_};
}

std::optional<Extent> OccupancyGrid::known_extent() const {
  long min_col = -1;
  long max_col = -1;
  long min_row = -1;
  long max_row = -1;
  for (std::size_t r = 0; r < height_; ++r) {
    for (std::size_t c = 0; c < width_; ++c) {
      if (cells_[r * width_ + c] == Cell::kUnknown) {
        continue;
      }
      const auto col = static_cast<long>(c);
      const auto row = static_cast<long>(r);
      if (min_col < 0) {
        min_col = max_col = col;
        min_row = max_row = row;
      }
      min_col = std::min(min_col, col);
      max_col = std::max(max_col, col);
      min_row = std::min(min_row, row);
      max_row = std::max(max_row, row);
    }
  }
  if (min_col < 0) {
    return std::nullopt;
  }
  return Extent{origin_x_ + static_cast<double>(min_col) * resolution_,
                origin_y_ + static_cast<double>(min_row) * resolution_,
                origin_x_ + static_cast<double>(max_col + 1) * resolution_,
                origin_y_ + static_cast<double>(max_row + 1) * resolution_};
}

OccupancyGrid load_map(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) {
    throw ParseError("missing 'resolution' header", 1);
  }
  const auto res_tokens = split_whitespace(lines[0]);
  if (res_tokens.size() != 2 || res_tokens[0] != "resolution") {
    throw ParseError("expected 'resolution <meters>' header", 1);
  }
  const double resolution = parse_double(res_tokens[1], 1);
  if (!(resolution > 0.0)) {
    throw ParseError("resolution must be positive", 1);
  }
  if (lines.size() < 2) {
    throw ParseError("missing 'origin' header", 2);
  }
  const auto origin_tokens = split_whitespace(lines[1]);
  if (origin_tokens.size() != 3 || origin_tokens[0] != "origin") {
    throw ParseError("expected 'origin <x> <y>' header", 2);
  }
  const double ox = parse_double(origin_tokens[1], 2);
  const double oy = parse_double(origin_tokens[2], 2);

  std::vector<std::string_view> rows(lines.begin() + 2, lines.end());
  // A single trailing newline leaves no extra line; tolerate one final empty line.
  if (!rows.empty() && rows.back().empty()) {
    rows.pop_back();
  }
  if (rows.empty()) {
    throw ParseError("map has no grid rows", 3);
  }
  const std::size_t width = rows.front().size();
  if (width == 0) {
    throw ParseError("empty grid row", 3);
  }
  const std::size_t height = rows.size();
  OccupancyGrid grid(width, height, resolution, ox, oy);
  for (std::size_t k = 0; k < height; ++k) {
    const std::size_t line_no = k + 3;
    if (rows[k].size() != width) {
      throw ParseError("ragged grid row: expected " + std::to_string(width) + " cells, got " +
                           std::to_string(rows[k].size()),
                       line_no);
    }
    const auto row = static_cast<long>(height - 1 - k);
    for (std::size_t c = 0; c < width; ++c) {
      Cell cell;
      switch (rows[k][c]) {
        case '#':
          cell = Cell::kOccupied;
          break;
        case '.':
          cell = Cell::kFree;
          break;
        case '?':
          cell = Cell::kUnknown;
          break;
        default:
          throw ParseError(std::string("unknown map character '") + rows[k][c] + "'", line_no);
      }
      grid.set(static_cast<long>(c), row, cell);
    }
  }
  return grid;
}

std::string save_map(const OccupancyGrid& grid) {
  std::string out;
  out.reserve((grid.width() + 1) * grid.height() + 64);
  out += "resolution " + format_double(grid.resolution()) + "\n";
  out += "origin " + format_double(grid.origin_x()) + " " + format_double(grid.origin_y()) + "\n";
  for (std::size_t k = 0; k < grid.height(); ++k) {
    const auto row = static_cast<long>(grid.height() - 1 - k);
    for (std::size_t c = 0; c < grid.width(); ++c) {
      switch (grid.at(static_cast<long>(c), row)) {
        case Cell::kOccupied:
          out.push_back('#');
          break;
        case Cell::kFree:
          out.push_back('.');
          break;
        case Cell::kUnknown:
          out.push_back('?');
          break;
      }
    }
    out.push_back('\n');
  }
  return out;
}

OccupancyGrid load_map_file(const std::string& path) { return load_map(read_file(path)); }

void save_map_file(const std::string& path, const OccupancyGrid& grid) {
  write_file(path, save_map(grid));
}

}  // namespace revisit
