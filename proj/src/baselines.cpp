#include "gridloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gridloc {

namespace {

struct UsableGateway {
  Position position;
  double range_m;
  double rss_dbm;
};

std::vector<UsableGateway> usable_gateways(const RssVector& rss,
                                           const std::vector<Gateway>& gws,
                                           const MlatConfig& cfg) {
  if (rss.size() != gws.size())
    throw std::invalid_argument("measurement width does not match gateways");
  std::vector<UsableGateway> usable;
  for (std::size_t i = 0; i < gws.size(); ++i) {
    if (!rss.present(i) || !(rss.at(i) > cfg.rss_floor_dbm)) continue;
    usable.push_back(
        {gws[i].position, rss_to_distance(rss.at(i), cfg.assumed), rss.at(i)});
  }
  return usable;
}

double residual_norm2(const Position& p,
                      const std::vector<UsableGateway>& usable,
                      const MlatConfig& cfg) {
  double sum = 0.0;
  for (const auto& g : usable) {
    const double r =
        std::max(cfg.min_distance_m, distance(p, g.position)) - g.range_m;
    sum += r * r;
  }
  return sum;
}

}  // namespace

double multilateration_residual(const Position& p, const RssVector& rss,
                                const std::vector<Gateway>& gws,
                                const MlatConfig& cfg) {
  return std::sqrt(residual_norm2(p, usable_gateways(rss, gws, cfg), cfg));
}

Position multilaterate(const RssVector& rss, const std::vector<Gateway>& gws,
                       const MlatConfig& cfg) {
  const auto usable = usable_gateways(rss, gws, cfg);
  if (usable.size() < cfg.min_gateways)
    throw std::runtime_error("insufficient gateways");

  // Initial guess: centroid weighted by linear-domain power.
  double wsum = 0.0;
  Position p{0.0, 0.0};
  for (const auto& g : usable) {
    const double w = std::pow(10.0, g.rss_dbm / 10.0);
    p.x += w * g.position.x;
    p.y += w * g.position.y;
    wsum += w;
  }
  p.x /= wsum;
  p.y /= wsum;

  double damping = cfg.initial_damping;
  double cost = residual_norm2(p, usable, cfg);
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    // Normal equations of the clamped-range residuals. Terms inside the
    // clamp radius are locally constant and contribute no Jacobian row.
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
    for (const auto& g : usable) {
      const double dist_raw = distance(p, g.position);
      if (dist_raw <= cfg.min_distance_m) continue;
      const double r = dist_raw - g.range_m;
      const double jx = (p.x - g.position.x) / dist_raw;
      const double jy = (p.y - g.position.y) / dist_raw;
      jtj00 += jx * jx;
      jtj01 += jx * jy;
      jtj11 += jy * jy;
      jtr0 += jx * r;
      jtr1 += jy * r;
    }

    bool stepped = false;
    while (damping < 1e12) {
      const double a00 = jtj00 + damping;
      const double a11 = jtj11 + damping;
      const double det = a00 * a11 - jtj01 * jtj01;
      if (std::abs(det) < 1e-300 || !std::isfinite(det)) {
        damping *= 10.0;
        continue;
      }
      const double dx = -(a11 * jtr0 - jtj01 * jtr1) / det;
      const double dy = -(a00 * jtr1 - jtj01 * jtr0) / det;
      const Position candidate{p.x + dx, p.y + dy};
      const double candidate_cost = residual_norm2(candidate, usable, cfg);
      if (candidate_cost < cost) {
        p = candidate;
        cost = candidate_cost;
        damping = std::max(damping / 10.0, 1e-12);
        stepped = true;
        if (std::hypot(dx, dy) < cfg.tolerance_m) return p;
        break;
      }
      damping *= 10.0;
    }
    if (!stepped) {
      // Damping escalation exhausted. A healthy normal matrix means an
      // ordinary minimum; a singular one means the geometry (e.g. collinear
      // gateways) does not constrain the fix.
      const double scale = jtj00 + jtj11;
      if (jtj00 * jtj11 - jtj01 * jtj01 < 1e-12 * std::max(1e-12, scale * scale))
        throw std::runtime_error("degenerate geometry");
      return p;
    }
  }
  return p;
}

void validate(const FingerprintTrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0))
    throw std::invalid_argument("fingerprint.learning_rate must be positive");
  if (cfg.minibatch < 2)
    throw std::invalid_argument("fingerprint.minibatch must be >= 2");
  if (cfg.epochs < 1)
    throw std::invalid_argument("fingerprint.epochs must be >= 1");
  if (cfg.holdout_fraction < 0.0 || cfg.holdout_fraction >= 1.0)
    throw std::invalid_argument("fingerprint.holdout_fraction must be in [0, 1)");
  if (cfg.hidden_dims.empty())
    throw std::invalid_argument("fingerprint.hidden_dims must not be empty");
}

FingerprintTrainResult train_fingerprint(const std::vector<LabeledRss>& labeled,
                                         const GridMap& map,
                                         const FeatureConfig& features,
                                         const FingerprintTrainConfig& cfg,
                                         std::uint64_t seed) {
  if (labeled.empty()) throw std::invalid_argument("empty training data");
  validate(cfg);

  Rng rng(seed);
  const auto width = static_cast<int>(labeled[0].rss.size());
  MlpDims dims{width, cfg.hidden_dims, map.cell_count()};

  FingerprintModel model{Mlp::init(dims, rng), features, map.rows(),
                         map.cols()};

  // One shuffle fixes the holdout split; training reshuffles per epoch.
  std::vector<std::size_t> order(labeled.size());
  std::iota(order.begin(), order.end(), 0);
  auto shuffle = [&rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[rng.below(i)]);
  };
  shuffle(order);

  const auto holdout_count = static_cast<std::size_t>(
      static_cast<double>(labeled.size()) * cfg.holdout_fraction);
  const std::size_t train_count = labeled.size() - holdout_count;
  if (train_count < cfg.minibatch)
    throw std::invalid_argument("not enough samples for one minibatch");

  auto feature_row = [&](const LabeledRss& s) {
    std::vector<double> f =
        features.differential
            ? normalize_rss_features(
                  differential_rss(s.rss, features.datum_index), features.norm)
            : normalize_rss_features(s.rss, features.norm);
    return Eigen::Map<const Eigen::RowVectorXd>(f.data(),
                                                static_cast<Eigen::Index>(f.size()))
        .eval();
  };

  std::vector<std::size_t> train_order(order.begin(),
                                       order.begin() + train_count);
  Eigen::MatrixXd batch(static_cast<Eigen::Index>(cfg.minibatch), width);
  std::vector<int> labels(cfg.minibatch);

  FingerprintTrainReport report;
  report.train_samples = train_count;
  report.holdout_samples = holdout_count;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(train_order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start + cfg.minibatch <= train_count;
         start += cfg.minibatch) {
      for (std::size_t j = 0; j < cfg.minibatch; ++j) {
        const LabeledRss& s = labeled[train_order[start + j]];
        batch.row(static_cast<Eigen::Index>(j)) = feature_row(s);
        labels[j] = map.cell_id(s.cell);
      }
      const LossResult result =
          softmax_ce_loss_and_grad(model.net, batch, labels);
      if (!std::isfinite(result.loss))
        throw std::runtime_error("training diverged");
      sgd_update(model.net, result.grads, SgdConfig{cfg.learning_rate});
      epoch_loss += result.loss;
      ++batches;
    }
    report.final_epoch_loss = batches > 0 ? epoch_loss / batches : 0.0;
  }

  std::size_t correct = 0;
  for (std::size_t k = train_count; k < labeled.size(); ++k) {
    const LabeledRss& s = labeled[order[k]];
    if (predict_fingerprint(model, s.rss, map) == s.cell) ++correct;
  }
  report.holdout_accuracy =
      holdout_count > 0 ? static_cast<double>(correct) / holdout_count : 0.0;

  return {std::move(model), report};
}

Eigen::VectorXd fingerprint_scores(const FingerprintModel& model,
                                   const RssVector& rss) {
  std::vector<double> f =
      model.features.differential
          ? normalize_rss_features(
                differential_rss(rss, model.features.datum_index),
                model.features.norm)
          : normalize_rss_features(rss, model.features.norm);
  if (static_cast<int>(f.size()) != model.net.dims().input)
    throw std::invalid_argument("measurement width does not match model input");
  const Eigen::MatrixXd scores = model.net.infer(
      Eigen::Map<const Eigen::RowVectorXd>(f.data(),
                                           static_cast<Eigen::Index>(f.size())));
  return scores.row(0).transpose();
}

CellIndex predict_fingerprint(const FingerprintModel& model,
                              const RssVector& rss, const GridMap& map) {
  if (map.rows() != model.grid_rows || map.cols() != model.grid_cols)
    throw std::invalid_argument("grid does not match fingerprint model");
  const Eigen::VectorXd scores = fingerprint_scores(model, rss);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores(i) > scores(best)) best = i;
  return map.cell_from_id(static_cast<int>(best));
}

}  // namespace gridloc
