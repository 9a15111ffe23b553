#include "femgraph/simp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "femgraph/text_io.hpp"

namespace femgraph {
namespace {

std::size_t at(Eigen::Index i) { return static_cast<std::size_t>(i); }

}  // namespace

void SimpConfig::validate() const {
  if (!(volume_fraction > 0.0 && volume_fraction < 1.0)) {
    throw OptimizerError("volume_fraction must lie in (0, 1)");
  }
  if (!(penalty >= 1.0)) throw OptimizerError("penalty must be >= 1");
  if (!(z_min > 0.0 && z_min < 1.0)) throw OptimizerError("z_min must lie in (0, 1)");
  if (z_min > volume_fraction) throw OptimizerError("z_min exceeds volume_fraction");
  if (max_cycles < 1) throw OptimizerError("max_cycles must be >= 1");
  if (!(filter_radius >= 0.0)) throw OptimizerError("filter_radius must be >= 0");
  if (!(move_limit > 0.0 && move_limit <= 1.0)) throw OptimizerError("move_limit must lie in (0, 1]");
  if (!(damping > 0.0 && damping <= 1.0)) throw OptimizerError("damping must lie in (0, 1]");
  if (!(change_tolerance >= 0.0)) throw OptimizerError("change_tolerance must be >= 0");
}

Eigen::VectorXd element_areas(const TriMesh& mesh) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(mesh.elements.size()));
  for (Eigen::Index e = 0; e < a.size(); ++e) a(e) = mesh.element_area(at(e));
  return a;
}

double volume_fraction(const TriMesh& mesh, const Eigen::VectorXd& z) {
  const Eigen::VectorXd a = element_areas(mesh);
  if (z.size() != a.size()) throw OptimizerError("density length does not match element count");
  return z.dot(a) / a.sum();
}

ComplianceResult compliance(const FeaProblem& problem, const Eigen::VectorXd& z, double penalty) {
  const TriMesh& mesh = problem.mesh;
  const auto m = static_cast<Eigen::Index>(mesh.elements.size());
  if (z.size() != m) throw OptimizerError("density length does not match element count");
  if ((z.array() <= 0.0).any() || (z.array() > 1.0).any()) {
    throw OptimizerError("densities must lie in (0, 1]");
  }
  const Eigen::VectorXd scale = z.array().pow(penalty);

  ComplianceResult r;
  r.solution = solve(problem, std::span<const double>(scale.data(), at(m)));
  const Matrix3<double> c = elasticity_matrix<double>(problem.material);
  r.sensitivities.resize(m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto& el = mesh.elements[at(e)];
    Eigen::Matrix<double, 6, 1> ue;
    for (int k = 0; k < 3; ++k) {
      ue(2 * k) = r.solution.displacements(2 * el[static_cast<std::size_t>(k)]);
      ue(2 * k + 1) = r.solution.displacements(2 * el[static_cast<std::size_t>(k)] + 1);
    }
    const Matrix6<double> ke = element_stiffness<double>(mesh.element_coords(at(e)), c, problem.material.thickness);
    const double energy = ue.dot(ke * ue);
    r.compliance += scale(e) * energy;
    r.sensitivities(e) = -penalty * std::pow(z(e), penalty - 1.0) * energy;
  }
  return r;
}

Eigen::VectorXd oc_update(const Eigen::VectorXd& z, const Eigen::VectorXd& sensitivities,
                          const Eigen::VectorXd& areas, const SimpConfig& config) {
  config.validate();
  if (sensitivities.size() != z.size() || areas.size() != z.size()) {
    throw OptimizerError("oc_update: length mismatch");
  }
  const double total_area = areas.sum();
  const double target = config.volume_fraction;
  const Eigen::ArrayXd lower = (z.array() - config.move_limit).max(config.z_min);
  const Eigen::ArrayXd upper = (z.array() + config.move_limit).min(1.0);
  const Eigen::ArrayXd drive = (-sensitivities.array()).max(0.0) / areas.array();

  auto update = [&](double lambda) -> Eigen::VectorXd {
    const Eigen::ArrayXd trial = z.array() * (drive / lambda).pow(config.damping);
    return trial.max(lower).min(upper).matrix();
  };
  auto volume = [&](const Eigen::VectorXd& zz) { return zz.dot(areas) / total_area; };

  // volume(lambda) is non-increasing; bracket, then bisect geometrically.
  double hi = 1.0;
  int guard = 0;
  while (volume(update(hi)) > target) {
    hi *= 10.0;
    if (++guard > 700) throw OptimizerError("oc_update: cannot bracket the Lagrange multiplier");
  }
  double lo = hi;
  guard = 0;
  while (volume(update(lo)) <= target) {
    lo /= 10.0;
    if (++guard > 700 || lo == 0.0) {
      const Eigen::VectorXd best = update(std::max(lo, 1e-300));
      if (target - volume(best) <= 1e-5) return best;
      throw OptimizerError("oc_update: volume target unreachable within the move limit");
    }
  }
  Eigen::VectorXd feasible = update(hi);
  for (int iter = 0; iter < 200; ++iter) {
    if (target - volume(feasible) <= 1e-5) return feasible;
    const double mid = std::sqrt(lo * hi);
    const Eigen::VectorXd trial = update(mid);
    if (volume(trial) <= target) {
      hi = mid;
      feasible = trial;
    } else {
      lo = mid;
    }
  }
  if (target - volume(feasible) <= 1e-4) return feasible;
  throw OptimizerError("oc_update: bisection did not converge in 200 iterations");
}

SensitivityFilter::SensitivityFilter(const TriMesh& mesh, double radius) {
  if (!(radius >= 0.0)) throw OptimizerError("filter radius must be >= 0");
  const std::size_t m = mesh.elements.size();
  rows_.resize(m);
  if (radius == 0.0) {
    for (std::size_t e = 0; e < m; ++e) rows_[e].push_back({static_cast<int>(e), 1.0});
    return;
  }
  std::vector<Vec2> c(m);
  std::vector<double> area(m);
  for (std::size_t e = 0; e < m; ++e) {
    c[e] = mesh.centroid(e);
    area[e] = mesh.element_area(e);
  }
  auto cell = [radius](const Vec2& p) {
    return std::pair<long long, long long>{static_cast<long long>(std::floor(p.x() / radius)),
                                           static_cast<long long>(std::floor(p.y() / radius))};
  };
  auto key = [](long long ix, long long iy) { return ix * 73856093LL ^ iy * 19349663LL; };
  std::unordered_map<long long, std::vector<int>> grid;
  for (std::size_t e = 0; e < m; ++e) {
    const auto [ix, iy] = cell(c[e]);
    grid[key(ix, iy)].push_back(static_cast<int>(e));
  }
  for (std::size_t e = 0; e < m; ++e) {
    const auto [ix, iy] = cell(c[e]);
    auto& row = rows_[e];
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find(key(ix + dx, iy + dy));
        if (it == grid.end()) continue;
        for (int f : it->second) {
          const double d = (c[e] - c[static_cast<std::size_t>(f)]).norm();
          if (d < radius) row.push_back({f, (radius - d) * area[static_cast<std::size_t>(f)]});
        }
      }
    }
    std::sort(row.begin(), row.end(), [](const Weight& a, const Weight& b) { return a.element < b.element; });
    row.erase(std::unique(row.begin(), row.end(),
                          [](const Weight& a, const Weight& b) { return a.element == b.element; }),
              row.end());
  }
}

Eigen::VectorXd SensitivityFilter::apply(const Eigen::VectorXd& s) const {
  if (at(s.size()) != rows_.size()) throw OptimizerError("sensitivity length does not match element count");
  Eigen::VectorXd out(s.size());
  for (std::size_t e = 0; e < rows_.size(); ++e) {
    double num = 0.0, den = 0.0;
    for (const Weight& w : rows_[e]) {
      num += w.w * s(w.element);
      den += w.w;
    }
    out(static_cast<Eigen::Index>(e)) = num / den;
  }
  return out;
}

Eigen::VectorXd sensitivity_filter(const TriMesh& mesh, const Eigen::VectorXd& sensitivities, double radius) {
  return SensitivityFilter(mesh, radius).apply(sensitivities);
}

DensityField optimize(const FeaProblem& problem, const SimpConfig& config) {
  config.validate();
  const TriMesh& mesh = problem.mesh;
  const Eigen::VectorXd areas = element_areas(mesh);
  const SensitivityFilter filter(mesh, config.filter_radius);

  DensityField field;
  field.densities = Eigen::VectorXd::Constant(areas.size(), config.volume_fraction);
  for (int cycle = 1; cycle <= config.max_cycles; ++cycle) {
    const ComplianceResult r = compliance(problem, field.densities, config.penalty);
    field.compliance_history.push_back(r.compliance);
    const Eigen::VectorXd next = oc_update(field.densities, filter.apply(r.sensitivities), areas, config);
    const double change = (next - field.densities).cwiseAbs().maxCoeff();
    field.densities = next;
    field.cycles = cycle;
    if (change < config.change_tolerance) break;
  }
  field.compliance_history.push_back(compliance(problem, field.densities, config.penalty).compliance);
  return field;
}

void write_density(std::ostream& out, const DensityField& field) {
  out << field.densities.size() << ' ' << field.compliance_history.size() << ' ' << field.cycles << '\n';
  for (Eigen::Index e = 0; e < field.densities.size(); ++e) out << format_double(field.densities(e)) << '\n';
  for (double c : field.compliance_history) out << format_double(c) << '\n';
}

DensityField read_density(std::istream& in) {
  DensityField field;
  const long long m = read_int(in, "element count");
  const long long h = read_int(in, "history length");
  if (m < 0 || h < 0) throw DataError("negative count in density header");
  field.cycles = static_cast<int>(read_int(in, "cycle count"));
  field.densities.resize(m);
  for (long long e = 0; e < m; ++e) field.densities(e) = read_double(in, "density");
  field.compliance_history.resize(static_cast<std::size_t>(h));
  for (double& c : field.compliance_history) c = read_double(in, "compliance");
  return field;
}

}  // namespace femgraph
