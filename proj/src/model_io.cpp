#include "gridloc/model_io.hpp"

#include <fstream>

#include "binary_io.hpp"
#include "gridloc/errors.hpp"

namespace gridloc {

namespace {

constexpr char kMagic[5] = "GLNN";
constexpr std::uint8_t kActivationRelu = 0;

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      io::write_raw<double>(out, m(i, j));
}

void read_matrix(std::istream& in, Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = io::read_raw<double>(in);
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) io::write_raw<double>(out, v(i));
}

void read_vector(std::istream& in, Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = io::read_raw<double>(in);
}

}  // namespace

void write_model(const Mlp& net, const ModelHeader& header,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());

  io::write_magic(out, kMagic);
  io::write_raw<std::uint32_t>(out, kModelFormatVersion);
  io::write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(header.kind));
  io::write_raw<std::uint8_t>(out, kActivationRelu);
  io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(header.grid_rows));
  io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(header.grid_cols));
  io::write_raw<double>(out, header.features.norm.rss_min_dbm);
  io::write_raw<double>(out, header.features.norm.rss_max_dbm);
  io::write_raw<std::uint8_t>(out, header.features.differential ? 1 : 0);
  io::write_raw<std::uint32_t>(out,
                               static_cast<std::uint32_t>(header.features.datum_index));

  const MlpDims& dims = net.dims();
  io::write_raw<std::uint32_t>(out,
                               static_cast<std::uint32_t>(dims.hidden.size() + 2));
  io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(dims.input));
  for (int h : dims.hidden)
    io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(h));
  io::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(dims.output));

  for (std::size_t b = 0; b < net.block_count(); ++b) {
    const HiddenBlock& block = net.block(b);
    write_matrix(out, block.dense.weights);
    write_vector(out, block.dense.biases);
    write_vector(out, block.norm.gamma);
    write_vector(out, block.norm.beta);
    write_vector(out, block.norm.running_mean);
    write_vector(out, block.norm.running_var);
    io::write_raw<double>(out, block.norm.momentum);
    io::write_raw<double>(out, block.norm.epsilon);
  }
  write_matrix(out, net.output_layer().weights);
  write_vector(out, net.output_layer().biases);
  if (!out) throw DataError("write failed for " + path.string());
}

std::pair<Mlp, ModelHeader> read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());

  io::expect_magic(in, kMagic, "model");
  const auto version = io::read_raw<std::uint32_t>(in);
  if (version != kModelFormatVersion)
    throw DataError("unsupported model format version " +
                    std::to_string(version));

  ModelHeader header;
  const auto kind = io::read_raw<std::uint8_t>(in);
  if (kind > 1) throw DataError("unknown model kind");
  header.kind = static_cast<ModelKind>(kind);
  const auto activation = io::read_raw<std::uint8_t>(in);
  if (activation != kActivationRelu)
    throw DataError("unknown activation tag");
  header.grid_rows = static_cast<int>(io::read_raw<std::uint32_t>(in));
  header.grid_cols = static_cast<int>(io::read_raw<std::uint32_t>(in));
  header.features.norm.rss_min_dbm = io::read_raw<double>(in);
  header.features.norm.rss_max_dbm = io::read_raw<double>(in);
  header.features.differential = io::read_raw<std::uint8_t>(in) != 0;
  header.features.datum_index = io::read_raw<std::uint32_t>(in);

  const auto ndims = io::read_raw<std::uint32_t>(in);
  if (ndims < 2) throw DataError("model needs at least input and output dims");
  MlpDims dims;
  dims.input = static_cast<int>(io::read_raw<std::uint32_t>(in));
  for (std::uint32_t i = 0; i + 2 < ndims; ++i)
    dims.hidden.push_back(static_cast<int>(io::read_raw<std::uint32_t>(in)));
  dims.output = static_cast<int>(io::read_raw<std::uint32_t>(in));

  // Materialize with the right shapes, then overwrite every parameter.
  Rng scratch(0);
  Mlp net = Mlp::init(dims, scratch);
  for (std::size_t b = 0; b < net.block_count(); ++b) {
    HiddenBlock& block = net.block(b);
    read_matrix(in, block.dense.weights);
    read_vector(in, block.dense.biases);
    read_vector(in, block.norm.gamma);
    read_vector(in, block.norm.beta);
    read_vector(in, block.norm.running_mean);
    read_vector(in, block.norm.running_var);
    block.norm.momentum = io::read_raw<double>(in);
    block.norm.epsilon = io::read_raw<double>(in);
  }
  read_matrix(in, net.output_layer().weights);
  read_vector(in, net.output_layer().biases);
  return {std::move(net), header};
}

}  // namespace gridloc
