#include "femgraph/metrics.hpp"

#include <cmath>
#include <string>

#include "femgraph/error.hpp"

namespace femgraph {
namespace {

void check(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw DataError("length mismatch: " + std::to_string(pred.size()) + " predictions vs " +
                    std::to_string(truth.size()) + " targets");
  }
  if (pred.empty()) throw DataError("metrics need at least one value");
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> truth) {
  check(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = truth[i] - pred[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

double mape(std::span<const double> pred, std::span<const double> truth, double eps) {
  check(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(truth[i] - pred[i]) / (truth[i] + eps);
  return 100.0 * sum / static_cast<double>(pred.size());
}

MetricReport outlier_report(std::span<const double> pred, std::span<const double> truth, double eps) {
  MetricReport r;
  r.mse = mse(pred, truth);
  r.mape = mape(pred, truth, eps);
  r.count = pred.size();
  std::size_t outliers = 0;
  double conditional = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double err = std::abs(truth[i] - pred[i]);
    if (err > eps) ++outliers;
    if (truth[i] > eps) {
      conditional += err / (truth[i] + eps);
      ++r.conditional_count;
    }
  }
  r.outlier_fraction = 100.0 * static_cast<double>(outliers) / static_cast<double>(pred.size());
  if (r.conditional_count > 0) r.conditional_mape = 100.0 * conditional / static_cast<double>(r.conditional_count);
  return r;
}

}  // namespace femgraph
