#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "femgraph/beamgen.hpp"
#include "femgraph/simp.hpp"
#include "support.hpp"

using namespace femgraph;
namespace ft = femgraph::testing;

namespace {

// 5 x 5 cells, 50 elements.
FeaProblem small_problem() {
  return cantilever_problem(ft::grid_mesh(10, 5, 5, 5), Material{}, Vec2(0, -100));
}

Eigen::VectorXd random_density(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = u(rng);
  return z;
}

}  // namespace

TEST(Simp, SensitivitiesMatchCentralDifferences) {
  const FeaProblem prob = small_problem();
  ASSERT_EQ(prob.mesh.elements.size(), 50u);
  const Eigen::VectorXd z = random_density(50, 4);
  const ComplianceResult r = compliance(prob, z, 3.0);
  for (Eigen::Index e = 0; e < z.size(); ++e) {
    const double h = 1e-5 * z(e);
    Eigen::VectorXd zp = z, zm = z;
    zp(e) += h;
    zm(e) -= h;
    const double fd = (compliance(prob, zp, 3.0).compliance - compliance(prob, zm, 3.0).compliance) / (2 * h);
    EXPECT_NEAR(r.sensitivities(e), fd, 1e-4 * std::abs(fd)) << e;
    EXPECT_LT(r.sensitivities(e), 0.0);
  }
}

TEST(Simp, ComplianceEqualsExternalWork) {
  const FeaProblem prob = small_problem();
  const Eigen::VectorXd z = random_density(50, 5);
  const ComplianceResult r = compliance(prob, z, 3.0);
  const double work = load_vector(prob).dot(r.solution.displacements);
  EXPECT_NEAR(r.compliance, work, 1e-10 * work);
}

TEST(Simp, OcUpdateIsFeasibleBoundedAndMoveLimited) {
  const FeaProblem prob = small_problem();
  const SimpConfig cfg;
  const Eigen::VectorXd areas = element_areas(prob.mesh);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Eigen::VectorXd z = random_density(50, seed);
    z *= cfg.volume_fraction / volume_fraction(prob.mesh, z);
    z = z.cwiseMax(cfg.z_min).cwiseMin(1.0);
    const Eigen::VectorXd sens = compliance(prob, z, cfg.penalty).sensitivities;
    const Eigen::VectorXd next = oc_update(z, sens, areas, cfg);
    const double vf = next.dot(areas) / areas.sum();
    EXPECT_LE(vf, cfg.volume_fraction);
    EXPECT_GE(vf, cfg.volume_fraction - 1e-5);
    EXPECT_GE(next.minCoeff(), cfg.z_min);
    EXPECT_LE(next.maxCoeff(), 1.0);
    EXPECT_LE((next - z).cwiseAbs().maxCoeff(), cfg.move_limit + 1e-15);
  }
}

TEST(Simp, OcUpdateOrdersDensitiesBySensitivity) {
  SimpConfig cfg;
  cfg.volume_fraction = 0.5;
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(4, 0.5);
  const Eigen::VectorXd areas = Eigen::VectorXd::Ones(4);
  const Eigen::VectorXd flat = oc_update(z, Eigen::VectorXd::Constant(4, -2.0), areas, cfg);
  EXPECT_LE(flat.mean(), 0.5);
  EXPECT_GE(flat.mean(), 0.5 - 1e-5);
  EXPECT_NEAR(flat.maxCoeff() - flat.minCoeff(), 0.0, 1e-15);

  Eigen::VectorXd sens(4);
  sens << -1, -2, -4, -8;
  const Eigen::VectorXd next = oc_update(z, sens, areas, cfg);
  for (int i = 0; i + 1 < 4; ++i) EXPECT_LE(next(i), next(i + 1));
}

TEST(Simp, FilterMatchesBruteForceWeights) {
  const TriMesh mesh = ft::grid_mesh(8, 4, 8, 4);
  const double r = 1.5;
  const Eigen::VectorXd s = random_density(mesh.elements.size(), 6);
  const Eigen::VectorXd got = sensitivity_filter(mesh, s, r);
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    double num = 0, den = 0;
    for (std::size_t f = 0; f < mesh.elements.size(); ++f) {
      const double d = (mesh.centroid(e) - mesh.centroid(f)).norm();
      if (d >= r) continue;
      const double w = (r - d) * mesh.element_area(f);
      num += w * s(static_cast<Eigen::Index>(f));
      den += w;
    }
    EXPECT_NEAR(got(static_cast<Eigen::Index>(e)), num / den, 1e-12);
  }
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(s.size(), -3.0);
  EXPECT_LE((sensitivity_filter(mesh, flat, r) - flat).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((sensitivity_filter(mesh, s, 0.1) - s).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Simp, OptimizeReducesComplianceAtTargetVolume) {
  const BeamDesign d = ft::rectangle_design(60, 10);
  const TriMesh mesh = triangulate(design_to_polygon(d), 1.0);
  const FeaProblem prob = cantilever_problem(mesh, Material{}, d.load.vector());
  const SimpConfig cfg;
  const DensityField field = optimize(prob, cfg);
  EXPECT_LE(field.cycles, 25);
  EXPECT_EQ(field.compliance_history.size(), static_cast<std::size_t>(field.cycles) + 1);
  const double vf = volume_fraction(mesh, field.densities);
  EXPECT_GT(vf, 0.29);
  EXPECT_LE(vf, 0.3);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(field.densities.size(), cfg.volume_fraction);
  const double baseline = compliance(prob, uniform, cfg.penalty).compliance;
  EXPECT_NEAR(field.compliance_history.front(), baseline, 1e-9 * baseline);
  EXPECT_LE(field.compliance_history.back(), baseline);
  EXPECT_NEAR(field.compliance_history.back(), compliance(prob, field.densities, cfg.penalty).compliance,
              1e-9 * baseline);
  EXPECT_GE(field.densities.minCoeff(), cfg.z_min);
  EXPECT_LE(field.densities.maxCoeff(), 1.0);
}

TEST(Simp, OptimizeIsDeterministic) {
  const FeaProblem prob = small_problem();
  const DensityField a = optimize(prob);
  const DensityField b = optimize(prob);
  EXPECT_EQ(a.densities, b.densities);
  EXPECT_EQ(a.compliance_history, b.compliance_history);
}

TEST(Simp, ConfigValidation) {
  const auto bad = [](auto mutate) {
    SimpConfig c;
    mutate(c);
    return c;
  };
  EXPECT_NO_THROW(SimpConfig{}.validate());
  EXPECT_THROW(bad([](SimpConfig& c) { c.volume_fraction = 0.0; }).validate(), OptimizerError);
  EXPECT_THROW(bad([](SimpConfig& c) { c.volume_fraction = 1.5; }).validate(), OptimizerError);
  EXPECT_THROW(bad([](SimpConfig& c) { c.penalty = 0.5; }).validate(), OptimizerError);
  EXPECT_THROW(bad([](SimpConfig& c) { c.z_min = 0.0; }).validate(), OptimizerError);
  EXPECT_THROW(bad([](SimpConfig& c) { c.max_cycles = 0; }).validate(), OptimizerError);
  EXPECT_THROW(bad([](SimpConfig& c) { c.move_limit = 0.0; }).validate(), OptimizerError);
  EXPECT_THROW(bad([](SimpConfig& c) { c.filter_radius = -1.0; }).validate(), OptimizerError);
}

TEST(Simp, DensityRoundTripsThroughText) {
  DensityField f;
  f.densities = random_density(7, 8);
  f.compliance_history = {12.5, 11.0, 10.25};
  f.cycles = 2;
  std::ostringstream out;
  write_density(out, f);
  std::istringstream in(out.str());
  const DensityField back = read_density(in);
  EXPECT_EQ(back.densities, f.densities);
  EXPECT_EQ(back.compliance_history, f.compliance_history);
  EXPECT_EQ(back.cycles, f.cycles);
}
