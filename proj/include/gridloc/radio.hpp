#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gridloc/grid.hpp"
#include "gridloc/rng.hpp"

namespace gridloc {

// Log-distance path-loss model: rss(d) = ref_rss_dbm - 10*exponent*log10(d)
// with d in meters; ref_rss_dbm is the RSS at the 1 m reference distance.
struct PathLossParams {
  double exponent = 2.0;       // n
  double ref_rss_dbm = -50.0;  // b

  bool operator==(const PathLossParams&) const = default;
};

// Inverts the path-loss model: d = 10^((rss - b) / (-10 n)).
double rss_to_distance(double rss_dbm, const PathLossParams& p);

// Forward model; throws std::invalid_argument("non-positive distance") for
// d <= 0. Exact inverse of rss_to_distance up to floating round-off.
double distance_to_rss(double distance_m, const PathLossParams& p);

inline constexpr double kDefaultSensitivityFloorDbm = -100.0;

// Per-gateway RSS measurement in dBm, aligned to a gateway list by index.
// Entries below the receiver sensitivity floor are missing.
class RssVector {
 public:
  RssVector() = default;
  explicit RssVector(std::size_t gateway_count);

  std::size_t size() const { return values_.size(); }
  bool present(std::size_t i) const;
  // dBm value; NaN when missing.
  double at(std::size_t i) const { return values_[i]; }
  void set(std::size_t i, double dbm);
  void clear(std::size_t i);

  const std::vector<double>& values() const { return values_; }

  // Missing entries compare equal to each other.
  bool operator==(const RssVector& other) const;

 private:
  std::vector<double> values_;
};

// Zero-mean Gaussian shadowing added to model RSS.
struct NoiseModel {
  double sigma_db = 4.0;
};

// Forward-simulated measurement at pos: per gateway,
// distance_to_rss(max(1 m, range)) + N(0, sigma); entries below floor_dbm
// become missing. per_gw_params must align with gws.
RssVector simulate_rss(const Position& pos, const std::vector<Gateway>& gws,
                       const std::vector<PathLossParams>& per_gw_params,
                       const NoiseModel& noise, double floor_dbm, Rng& rng);

RssVector simulate_rss(const Position& pos, const std::vector<Gateway>& gws,
                       const PathLossParams& params, const NoiseModel& noise,
                       double floor_dbm, Rng& rng);

// Independent uniform draw of per-gateway true model parameters, used to
// reproduce the model-mismatch condition between simulation and the
// experience values assumed by ranging.
std::vector<PathLossParams> perturbed_params(std::size_t count,
                                             double exponent_lo,
                                             double exponent_hi,
                                             double ref_rss_lo_dbm,
                                             double ref_rss_hi_dbm, Rng& rng);

// Per-cell, per-gateway pools of recorded RSS samples.
class RssDatabase {
 public:
  RssDatabase(int rows, int cols, std::size_t gateway_count,
              std::size_t samples_per_pool);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t gateway_count() const { return gateway_count_; }
  std::size_t samples_per_pool() const { return samples_per_pool_; }

  std::span<double> pool(int row, int col, std::size_t gw);
  std::span<const double> pool(int row, int col, std::size_t gw) const;

  // Flat storage, cell row-major, then gateway, then sample. NaN = missing.
  const std::vector<double>& raw() const { return samples_; }
  std::vector<double>& raw() { return samples_; }

 private:
  int rows_;
  int cols_;
  std::size_t gateway_count_;
  std::size_t samples_per_pool_;
  std::vector<double> samples_;
};

// samples_per_pool simulate_rss calls at every cell center.
RssDatabase build_rss_database(const GridMap& map,
                               const std::vector<Gateway>& gws,
                               const std::vector<PathLossParams>& per_gw_params,
                               const NoiseModel& noise, double floor_dbm,
                               std::size_t samples_per_pool, Rng& rng);

// One value drawn uniformly and independently from each gateway pool.
// Throws std::runtime_error("no samples for cell") on an empty pool.
RssVector sample_rss_from_db(const RssDatabase& db, CellIndex cell, Rng& rng);

// Entry i becomes v_i - v_datum; missing entries stay missing. Throws
// std::invalid_argument("datum unavailable") when the datum entry is missing.
RssVector differential_rss(const RssVector& v, std::size_t datum_index);

// Index of the strongest entry exceeding threshold_dbm, or nullopt when no
// entry exceeds it. Exact ties break toward the lowest index.
std::optional<std::size_t> detect_near_field(const RssVector& v,
                                             double threshold_dbm);

}  // namespace gridloc
