#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "femgraph/fea.hpp"

namespace femgraph {

struct SimpConfig {
  double volume_fraction = 0.3;
  double penalty = 3.0;
  int max_cycles = 25;
  double z_min = 0.001;
  double filter_radius = 1.5;  // mm
  double move_limit = 0.2;
  double damping = 0.5;            // OC exponent eta
  double change_tolerance = 0.01;  // stop once max |dz| falls below

  // Throws OptimizerError on values outside their valid ranges.
  void validate() const;
};

struct DensityField {
  Eigen::VectorXd densities;                // z_min <= z_e <= 1
  std::vector<double> compliance_history;  // one entry per solve, final design last
  int cycles = 0;
};

// Area-weighted volume fraction sum(z_e A_e) / sum(A_e).
double volume_fraction(const TriMesh& mesh, const Eigen::VectorXd& z);

Eigen::VectorXd element_areas(const TriMesh& mesh);

struct ComplianceResult {
  double compliance = 0.0;        // sum z_e^p u_e^T k_e u_e
  Eigen::VectorXd sensitivities;  // -p z_e^(p-1) u_e^T k_e u_e
  FeaSolution solution;
};

ComplianceResult compliance(const FeaProblem& problem, const Eigen::VectorXd& z, double penalty);

// Optimality-criteria step. The multiplier is bisected so the result sits
// on the feasible side of the volume target, within 1e-5 of it.
Eigen::VectorXd oc_update(const Eigen::VectorXd& z, const Eigen::VectorXd& sensitivities,
                          const Eigen::VectorXd& areas, const SimpConfig& config);

// Linear-hat weights (r - d) times neighbour area over centroids closer
// than `radius`. Built once per mesh.
class SensitivityFilter {
 public:
  SensitivityFilter(const TriMesh& mesh, double radius);

  Eigen::VectorXd apply(const Eigen::VectorXd& sensitivities) const;

 private:
  struct Weight {
    int element;
    double w;
  };
  std::vector<std::vector<Weight>> rows_;
};

Eigen::VectorXd sensitivity_filter(const TriMesh& mesh, const Eigen::VectorXd& sensitivities,
                                   double radius);

// Starts from uniform z = volume_fraction; stops after max_cycles or when
// the largest density change drops below change_tolerance.
DensityField optimize(const FeaProblem& problem, const SimpConfig& config = {});

// Plain-text density format:
//   <elements> <history length> <cycles>
//   z                one line per element
//   compliance       one line per history entry
void write_density(std::ostream& out, const DensityField& field);
DensityField read_density(std::istream& in);

}  // namespace femgraph
