#pragma once

#include <span>

namespace femgraph {

inline constexpr double kMapeEpsilon = 0.01;

// All functions throw DataError on length mismatch or empty input.

// (1/n) sum (truth - pred)^2
double mse(std::span<const double> pred, std::span<const double> truth);

// (100/n) sum |truth - pred| / (truth + eps), in percent.
double mape(std::span<const double> pred, std::span<const double> truth, double eps = kMapeEpsilon);

struct MetricReport {
  double mse = 0.0;
  double mape = 0.0;               // percent
  double outlier_fraction = 0.0;   // percent of entries with |error| > eps
  double conditional_mape = 0.0;   // percent, over entries with truth > eps; 0 if none
  std::size_t conditional_count = 0;
  std::size_t count = 0;
};

MetricReport outlier_report(std::span<const double> pred, std::span<const double> truth,
                            double eps = kMapeEpsilon);

}  // namespace femgraph
