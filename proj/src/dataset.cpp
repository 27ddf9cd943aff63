#include "gridloc/dataset.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "gridloc/errors.hpp"

namespace gridloc {

namespace {

constexpr char kMagic[5] = "GLDS";

void write_trajectory(std::ostream& out, const Trajectory& traj,
                      std::size_t gw_count) {
  io::write_raw<std::uint64_t>(out, traj.seed);
  for (const CellIndex& c : traj.true_cells) {
    io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(c.row()));
    io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(c.col()));
  }
  for (const RssVector& v : traj.rss_seq)
    for (std::size_t g = 0; g < gw_count; ++g)
      io::write_raw<double>(out, v.at(g));
}

Trajectory read_trajectory(std::istream& in, const GridMap& map,
                           std::size_t steps, std::size_t gw_count) {
  Trajectory traj;
  traj.seed = io::read_raw<std::uint64_t>(in);
  traj.true_cells.reserve(steps);
  traj.rss_seq.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto row = io::read_raw<std::uint32_t>(in);
    const auto col = io::read_raw<std::uint32_t>(in);
    if (!map.contains(static_cast<int>(row), static_cast<int>(col)))
      throw DataError("trajectory cell outside grid");
    traj.true_cells.push_back(map.cell(static_cast<int>(row),
                                       static_cast<int>(col)));
  }
  for (std::size_t t = 0; t < steps; ++t) {
    RssVector v(gw_count);
    for (std::size_t g = 0; g < gw_count; ++g) {
      const double dbm = io::read_raw<double>(in);
      if (!std::isnan(dbm)) v.set(g, dbm);
    }
    traj.rss_seq.push_back(std::move(v));
  }
  return traj;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file " + path.string());

  io::write_magic(out, kMagic);
  io::write_raw<std::uint32_t>(out, kDatasetFormatVersion);
  io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ds.map.rows()));
  io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ds.map.cols()));
  io::write_raw<double>(out, ds.map.cell_size());
  io::write_raw<double>(out, ds.map.origin().x);
  io::write_raw<double>(out, ds.map.origin().y);
  io::write_raw<std::uint32_t>(out,
                               static_cast<std::uint32_t>(ds.gateways.size()));
  io::write_raw<std::uint32_t>(out,
                               static_cast<std::uint32_t>(ds.db.samples_per_pool()));
  io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ds.train.size()));
  io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ds.test.size()));
  const std::uint32_t steps =
      ds.train.empty() ? (ds.test.empty()
                              ? 0u
                              : static_cast<std::uint32_t>(ds.test[0].rss_seq.size()))
                       : static_cast<std::uint32_t>(ds.train[0].rss_seq.size());
  io::write_raw<std::uint32_t>(out, steps);
  io::write_raw<double>(out, ds.noise_sigma_db);
  io::write_raw<double>(out, ds.sensitivity_floor_dbm);
  io::write_raw<std::uint64_t>(out, ds.master_seed);

  if (ds.gateway_params.size() != ds.gateways.size())
    throw DataError("one parameter set per gateway required");
  for (std::size_t i = 0; i < ds.gateways.size(); ++i) {
    io::write_raw<std::uint32_t>(out,
                                 static_cast<std::uint32_t>(ds.gateways[i].id));
    io::write_raw<double>(out, ds.gateways[i].position.x);
    io::write_raw<double>(out, ds.gateways[i].position.y);
    io::write_raw<double>(out, ds.gateway_params[i].exponent);
    io::write_raw<double>(out, ds.gateway_params[i].ref_rss_dbm);
  }

  for (double v : ds.db.raw()) io::write_raw<double>(out, v);

  for (const Trajectory& traj : ds.train) {
    if (traj.rss_seq.size() != steps)
      throw DataError("trajectories must share one length");
    write_trajectory(out, traj, ds.gateways.size());
  }
  for (const Trajectory& traj : ds.test) {
    if (traj.rss_seq.size() != steps)
      throw DataError("trajectories must share one length");
    write_trajectory(out, traj, ds.gateways.size());
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file " + path.string());

  io::expect_magic(in, kMagic, "dataset");
  const auto version = io::read_raw<std::uint32_t>(in);
  if (version != kDatasetFormatVersion)
    throw DataError("unsupported dataset format version " +
                    std::to_string(version));

  const auto rows = io::read_raw<std::uint32_t>(in);
  const auto cols = io::read_raw<std::uint32_t>(in);
  const double cell_size = io::read_raw<double>(in);
  const double origin_x = io::read_raw<double>(in);
  const double origin_y = io::read_raw<double>(in);
  const auto gw_count = io::read_raw<std::uint32_t>(in);
  const auto samples_per_pool = io::read_raw<std::uint32_t>(in);
  const auto train_count = io::read_raw<std::uint32_t>(in);
  const auto test_count = io::read_raw<std::uint32_t>(in);
  const auto steps = io::read_raw<std::uint32_t>(in);
  const double sigma = io::read_raw<double>(in);
  const double floor = io::read_raw<double>(in);
  const auto master_seed = io::read_raw<std::uint64_t>(in);

  GridMap map(static_cast<int>(rows), static_cast<int>(cols), cell_size,
              {origin_x, origin_y});

  std::vector<Gateway> gws;
  std::vector<PathLossParams> params;
  for (std::uint32_t i = 0; i < gw_count; ++i) {
    Gateway gw;
    gw.id = static_cast<int>(io::read_raw<std::uint32_t>(in));
    gw.position.x = io::read_raw<double>(in);
    gw.position.y = io::read_raw<double>(in);
    PathLossParams p;
    p.exponent = io::read_raw<double>(in);
    p.ref_rss_dbm = io::read_raw<double>(in);
    gws.push_back(gw);
    params.push_back(p);
  }

  RssDatabase db(static_cast<int>(rows), static_cast<int>(cols), gw_count,
                 samples_per_pool);
  for (double& v : db.raw()) v = io::read_raw<double>(in);

  Dataset ds{std::move(map), std::move(gws),   std::move(params), sigma,
             floor,          master_seed,      std::move(db),     {},
             {}};
  ds.train.reserve(train_count);
  for (std::uint32_t i = 0; i < train_count; ++i)
    ds.train.push_back(read_trajectory(in, ds.map, steps, gw_count));
  ds.test.reserve(test_count);
  for (std::uint32_t i = 0; i < test_count; ++i)
    ds.test.push_back(read_trajectory(in, ds.map, steps, gw_count));
  return ds;
}

}  // namespace gridloc
