#pragma once

#include <cstdint>
#include <vector>

namespace gridloc {

struct Position {
  double x = 0.0;  // meters east
  double y = 0.0;  // meters north

  bool operator==(const Position&) const = default;
};

double distance(const Position& a, const Position& b);

// The nine movement actions. Row index grows northward and column index
// grows eastward, so North = +row and East = +col.
enum class Action : int {
  Stay = 0,
  North,
  South,
  West,
  East,
  NorthWest,
  NorthEast,
  SouthWest,
  SouthEast,
};

inline constexpr int kActionCount = 9;

struct ActionOffset {
  int drow = 0;
  int dcol = 0;
};

ActionOffset action_offset(Action a);
const char* action_name(Action a);

// Fixed-capacity set over the nine actions.
class ActionSet {
 public:
  bool contains(Action a) const { return (bits_ & bit(a)) != 0; }
  void insert(Action a) { bits_ |= bit(a); }
  int size() const;
  bool empty() const { return bits_ == 0; }

  // Members in enum order.
  std::vector<Action> to_vector() const;

  bool operator==(const ActionSet&) const = default;

 private:
  static std::uint16_t bit(Action a) {
    return static_cast<std::uint16_t>(1u << static_cast<int>(a));
  }
  std::uint16_t bits_ = 0;
};

class GridMap;

// Agent cell coordinates. Instances are only created by a GridMap, so a
// CellIndex is always within the bounds of the map that produced it.
class CellIndex {
 public:
  int row() const { return row_; }
  int col() const { return col_; }

  bool operator==(const CellIndex&) const = default;

 private:
  friend class GridMap;
  CellIndex(int row, int col) : row_(row), col_(col) {}

  int row_;
  int col_;
};

// Rectangular grid of square cells. origin is the southwest corner of
// cell (0, 0).
class GridMap {
 public:
  GridMap(int rows, int cols, double cell_size_m, Position origin = {});

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_size() const { return cell_size_; }
  Position origin() const { return origin_; }
  int cell_count() const { return rows_ * cols_; }

  bool contains(int row, int col) const {
    return row >= 0 && row < rows_ && col >= 0 && col < cols_;
  }

  // Throws std::out_of_range for coordinates outside the grid.
  CellIndex cell(int row, int col) const;

  // Row-major cell id in [0, cell_count).
  int cell_id(CellIndex c) const { return c.row() * cols_ + c.col(); }
  CellIndex cell_from_id(int id) const;

  Position cell_center(CellIndex c) const;

  // Cell whose center is closest to pos; positions outside the grid clamp
  // to the nearest boundary cell.
  CellIndex nearest_cell(Position pos) const;

  // Throws std::invalid_argument("action leaves grid") when the offset
  // would exit the grid.
  CellIndex apply_action(CellIndex c, Action a) const;

  // Exactly the actions whose result stays in bounds; always contains Stay.
  ActionSet available_actions(CellIndex c) const;

 private:
  int rows_;
  int cols_;
  double cell_size_;
  Position origin_;
};

struct Gateway {
  int id = 0;  // 1-based
  Position position;
};

// Row-major grid of gw_rows x gw_cols gateways with ids 1..N, spaced
// spacing_east_m along +x and spacing_north_m along +y from origin.
std::vector<Gateway> gateway_grid_layout(int gw_rows, int gw_cols,
                                         double spacing_east_m,
                                         double spacing_north_m,
                                         Position origin = {});

}  // namespace gridloc
