#include "gridloc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gridloc {

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

ActionOffset action_offset(Action a) {
  switch (a) {
    case Action::Stay:
      return {0, 0};
    case Action::North:
      return {1, 0};
    case Action::South:
      return {-1, 0};
    case Action::West:
      return {0, -1};
    case Action::East:
      return {0, 1};
    case Action::NorthWest:
      return {1, -1};
    case Action::NorthEast:
      return {1, 1};
    case Action::SouthWest:
      return {-1, -1};
    case Action::SouthEast:
      return {-1, 1};
  }
  throw std::invalid_argument("unknown action");
}

const char* action_name(Action a) {
  switch (a) {
    case Action::Stay:
      return "stay";
    case Action::North:
      return "n";
    case Action::South:
      return "s";
    case Action::West:
      return "w";
    case Action::East:
      return "e";
    case Action::NorthWest:
      return "nw";
    case Action::NorthEast:
      return "ne";
    case Action::SouthWest:
      return "sw";
    case Action::SouthEast:
      return "se";
  }
  return "?";
}

int ActionSet::size() const {
  int n = 0;
  for (std::uint16_t b = bits_; b != 0; b >>= 1) n += b & 1;
  return n;
}

std::vector<Action> ActionSet::to_vector() const {
  std::vector<Action> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int i = 0; i < kActionCount; ++i) {
    const auto a = static_cast<Action>(i);
    if (contains(a)) out.push_back(a);
  }
  return out;
}

GridMap::GridMap(int rows, int cols, double cell_size_m, Position origin)
    : rows_(rows), cols_(cols), cell_size_(cell_size_m), origin_(origin) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("grid must have at least one row and column");
  if (!(cell_size_m > 0.0))
    throw std::invalid_argument("cell size must be positive");
}

CellIndex GridMap::cell(int row, int col) const {
  if (!contains(row, col))
    throw std::out_of_range("cell (" + std::to_string(row) + "," +
                            std::to_string(col) + ") outside " +
                            std::to_string(rows_) + "x" +
                            std::to_string(cols_) + " grid");
  return CellIndex(row, col);
}

CellIndex GridMap::cell_from_id(int id) const {
  if (id < 0 || id >= cell_count())
    throw std::out_of_range("cell id outside grid");
  return CellIndex(id / cols_, id % cols_);
}

Position GridMap::cell_center(CellIndex c) const {
  return {origin_.x + (c.col() + 0.5) * cell_size_,
          origin_.y + (c.row() + 0.5) * cell_size_};
}

CellIndex GridMap::nearest_cell(Position pos) const {
  const int col = static_cast<int>(std::floor((pos.x - origin_.x) / cell_size_));
  const int row = static_cast<int>(std::floor((pos.y - origin_.y) / cell_size_));
  return CellIndex(std::clamp(row, 0, rows_ - 1), std::clamp(col, 0, cols_ - 1));
}

CellIndex GridMap::apply_action(CellIndex c, Action a) const {
  const ActionOffset off = action_offset(a);
  const int row = c.row() + off.drow;
  const int col = c.col() + off.dcol;
  if (!contains(row, col)) throw std::invalid_argument("action leaves grid");
  return CellIndex(row, col);
}

ActionSet GridMap::available_actions(CellIndex c) const {
  ActionSet set;
  for (int i = 0; i < kActionCount; ++i) {
    const auto a = static_cast<Action>(i);
    const ActionOffset off = action_offset(a);
    if (contains(c.row() + off.drow, c.col() + off.dcol)) set.insert(a);
  }
  return set;
}

std::vector<Gateway> gateway_grid_layout(int gw_rows, int gw_cols,
                                         double spacing_east_m,
                                         double spacing_north_m,
                                         Position origin) {
  if (gw_rows < 1 || gw_cols < 1)
    throw std::invalid_argument("gateway layout must be at least 1x1");
  std::vector<Gateway> gws;
  gws.reserve(static_cast<std::size_t>(gw_rows) * gw_cols);
  int id = 1;
  for (int r = 0; r < gw_rows; ++r)
    for (int c = 0; c < gw_cols; ++c)
      gws.push_back({id++, {origin.x + c * spacing_east_m,
                            origin.y + r * spacing_north_m}});
  return gws;
}

}  // namespace gridloc
