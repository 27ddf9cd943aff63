#include "gridloc/radio.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridloc {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

double rss_to_distance(double rss_dbm, const PathLossParams& p) {
  return std::pow(10.0, (rss_dbm - p.ref_rss_dbm) / (-10.0 * p.exponent));
}

double distance_to_rss(double distance_m, const PathLossParams& p) {
  if (!(distance_m > 0.0))
    throw std::invalid_argument("non-positive distance");
  return p.ref_rss_dbm - 10.0 * p.exponent * std::log10(distance_m);
}

RssVector::RssVector(std::size_t gateway_count)
    : values_(gateway_count, kMissing) {}

bool RssVector::present(std::size_t i) const { return !std::isnan(values_[i]); }

void RssVector::set(std::size_t i, double dbm) {
  if (!std::isfinite(dbm))
    throw std::invalid_argument("RSS value must be finite");
  values_[i] = dbm;
}

void RssVector::clear(std::size_t i) { values_[i] = kMissing; }

bool RssVector::operator==(const RssVector& other) const {
  if (values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (present(i) != other.present(i)) return false;
    if (present(i) && values_[i] != other.values_[i]) return false;
  }
  return true;
}

RssVector simulate_rss(const Position& pos, const std::vector<Gateway>& gws,
                       const std::vector<PathLossParams>& per_gw_params,
                       const NoiseModel& noise, double floor_dbm, Rng& rng) {
  if (per_gw_params.size() != gws.size())
    throw std::invalid_argument("one path-loss parameter set per gateway");
  RssVector out(gws.size());
  for (std::size_t i = 0; i < gws.size(); ++i) {
    // Clamp at the 1 m reference distance where the model is anchored.
    const double d = std::max(1.0, distance(pos, gws[i].position));
    double rss = distance_to_rss(d, per_gw_params[i]);
    if (noise.sigma_db > 0.0) rss += rng.normal(0.0, noise.sigma_db);
    if (rss >= floor_dbm) out.set(i, rss);
  }
  return out;
}

RssVector simulate_rss(const Position& pos, const std::vector<Gateway>& gws,
                       const PathLossParams& params, const NoiseModel& noise,
                       double floor_dbm, Rng& rng) {
  return simulate_rss(pos, gws,
                      std::vector<PathLossParams>(gws.size(), params), noise,
                      floor_dbm, rng);
}

std::vector<PathLossParams> perturbed_params(std::size_t count,
                                             double exponent_lo,
                                             double exponent_hi,
                                             double ref_rss_lo_dbm,
                                             double ref_rss_hi_dbm, Rng& rng) {
  std::vector<PathLossParams> params(count);
  for (auto& p : params) {
    p.exponent = rng.uniform(exponent_lo, exponent_hi);
    p.ref_rss_dbm = rng.uniform(ref_rss_lo_dbm, ref_rss_hi_dbm);
  }
  return params;
}

RssDatabase::RssDatabase(int rows, int cols, std::size_t gateway_count,
                         std::size_t samples_per_pool)
    : rows_(rows),
      cols_(cols),
      gateway_count_(gateway_count),
      samples_per_pool_(samples_per_pool),
      samples_(static_cast<std::size_t>(rows) * cols * gateway_count *
                   samples_per_pool,
               kMissing) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("empty grid");
  if (samples_per_pool < 1)
    throw std::invalid_argument("pools need at least one sample");
}

std::span<double> RssDatabase::pool(int row, int col, std::size_t gw) {
  const std::size_t offset =
      ((static_cast<std::size_t>(row) * cols_ + col) * gateway_count_ + gw) *
      samples_per_pool_;
  return {samples_.data() + offset, samples_per_pool_};
}

std::span<const double> RssDatabase::pool(int row, int col,
                                          std::size_t gw) const {
  const std::size_t offset =
      ((static_cast<std::size_t>(row) * cols_ + col) * gateway_count_ + gw) *
      samples_per_pool_;
  return {samples_.data() + offset, samples_per_pool_};
}

RssDatabase build_rss_database(const GridMap& map,
                               const std::vector<Gateway>& gws,
                               const std::vector<PathLossParams>& per_gw_params,
                               const NoiseModel& noise, double floor_dbm,
                               std::size_t samples_per_pool, Rng& rng) {
  RssDatabase db(map.rows(), map.cols(), gws.size(), samples_per_pool);
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      const Position center = map.cell_center(map.cell(r, c));
      for (std::size_t s = 0; s < samples_per_pool; ++s) {
        const RssVector v =
            simulate_rss(center, gws, per_gw_params, noise, floor_dbm, rng);
        for (std::size_t g = 0; g < gws.size(); ++g)
          db.pool(r, c, g)[s] = v.at(g);
      }
    }
  }
  return db;
}

RssVector sample_rss_from_db(const RssDatabase& db, CellIndex cell, Rng& rng) {
  if (db.samples_per_pool() == 0)
    throw std::runtime_error("no samples for cell");
  RssVector out(db.gateway_count());
  for (std::size_t g = 0; g < db.gateway_count(); ++g) {
    const auto pool = db.pool(cell.row(), cell.col(), g);
    const double v = pool[rng.below(pool.size())];
    if (!std::isnan(v)) out.set(g, v);
  }
  return out;
}

RssVector differential_rss(const RssVector& v, std::size_t datum_index) {
  if (datum_index >= v.size() || !v.present(datum_index))
    throw std::invalid_argument("datum unavailable");
  const double datum = v.at(datum_index);
  RssVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.present(i)) out.set(i, v.at(i) - datum);
  return out;
}

std::optional<std::size_t> detect_near_field(const RssVector& v,
                                             double threshold_dbm) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v.present(i) || !(v.at(i) > threshold_dbm)) continue;
    if (!best || v.at(i) > v.at(*best)) best = i;
  }
  return best;
}

}  // namespace gridloc
