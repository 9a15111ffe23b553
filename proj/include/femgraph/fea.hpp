#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <set>
#include <span>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "femgraph/error.hpp"
#include "femgraph/mesher.hpp"

namespace femgraph {

enum class Idealization { PlaneStress, PlaneStrain };

// Units: mm, N, MPa.
struct Material {
  double youngs_modulus = 200000.0;
  double poisson_ratio = 0.32;
  double thickness = 1.0;
  Idealization idealization = Idealization::PlaneStress;

  void validate() const;
};

template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;
template <typename Scalar>
using ElementCoords = Eigen::Matrix<Scalar, 3, 2>;

// Constitutive matrix mapping engineering strain (ex, ey, gxy) to stress
// (sx, sy, txy).
template <typename Scalar = double>
Matrix3<Scalar> elasticity_matrix(const Material& m) {
  m.validate();
  const Scalar e = static_cast<Scalar>(m.youngs_modulus);
  const Scalar nu = static_cast<Scalar>(m.poisson_ratio);
  Matrix3<Scalar> c = Matrix3<Scalar>::Zero();
  if (m.idealization == Idealization::PlaneStress) {
    const Scalar f = e / (Scalar(1) - nu * nu);
    c(0, 0) = c(1, 1) = f;
    c(0, 1) = c(1, 0) = f * nu;
    c(2, 2) = f * (Scalar(1) - nu) / Scalar(2);
  } else {
    const Scalar f = e / ((Scalar(1) + nu) * (Scalar(1) - Scalar(2) * nu));
    c(0, 0) = c(1, 1) = f * (Scalar(1) - nu);
    c(0, 1) = c(1, 0) = f * nu;
    c(2, 2) = f * (Scalar(1) - Scalar(2) * nu) / Scalar(2);
  }
  return c;
}

template <typename Scalar>
struct StrainDisplacement {
  Eigen::Matrix<Scalar, 3, 6> b;
  Scalar area;
};

// Constant-strain triangle B matrix; dof order (u1, v1, u2, v2, u3, v3).
template <typename Scalar>
StrainDisplacement<Scalar> strain_displacement(const ElementCoords<Scalar>& xy) {
  const Scalar x1 = xy(0, 0), y1 = xy(0, 1);
  const Scalar x2 = xy(1, 0), y2 = xy(1, 1);
  const Scalar x3 = xy(2, 0), y3 = xy(2, 1);
  const Scalar twice_area = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
  if (!(twice_area > Scalar(0))) {
    throw SolverError("degenerate element: non-positive area");
  }
  const Scalar b1 = y2 - y3, b2 = y3 - y1, b3 = y1 - y2;
  const Scalar c1 = x3 - x2, c2 = x1 - x3, c3 = x2 - x1;
  StrainDisplacement<Scalar> out;
  out.b << b1, 0, b2, 0, b3, 0,
           0, c1, 0, c2, 0, c3,
           c1, b1, c2, b2, c3, b3;
  out.b /= twice_area;
  out.area = twice_area / Scalar(2);
  return out;
}

// k_e = t * A * B^T C B, exactly symmetric.
template <typename Scalar>
Matrix6<Scalar> element_stiffness(const ElementCoords<Scalar>& xy, const Matrix3<Scalar>& c,
                                  Scalar thickness) {
  const StrainDisplacement<Scalar> sd = strain_displacement(xy);
  const Matrix6<Scalar> k = thickness * sd.area * sd.b.transpose() * c * sd.b;
  return (k + k.transpose()) / Scalar(2);
}

template <typename Scalar>
Scalar von_mises(const Eigen::Matrix<Scalar, 3, 1>& s) {
  using std::sqrt;
  const Scalar v = s(0) * s(0) + s(1) * s(1) - s(0) * s(1) + Scalar(3) * s(2) * s(2);
  return sqrt(v > Scalar(0) ? v : Scalar(0));
}

struct Dof {
  int node = 0;
  int axis = 0;  // 0 = x, 1 = y

  int index() const { return 2 * node + axis; }
  auto operator<=>(const Dof&) const = default;
};

struct FeaProblem {
  TriMesh mesh;
  Material material;
  std::set<Dof> fixed_dofs;
  std::map<int, Vec2> nodal_loads;  // node -> (Fx, Fy) in N

  // Throws SolverError when constraints are empty, leave rigid modes, or a
  // load refers to a missing node.
  void validate() const;
};

// Clamps both dofs of every node on a fixture-tagged edge and applies
// `load` at mesh.load_node.
FeaProblem cantilever_problem(TriMesh mesh, const Material& material, const Vec2& load);

Eigen::VectorXd load_vector(const FeaProblem& problem);

// Global stiffness (2N x 2N) before constraints. `element_scale`, when
// given, multiplies each element's contribution.
Eigen::SparseMatrix<double> assemble(const FeaProblem& problem,
                                     std::span<const double> element_scale = {});

struct SolverOptions {
  Eigen::Index direct_dof_limit = 400000;  // above this, Jacobi-preconditioned CG
  double cg_tolerance = 1e-13;
};

struct FeaSolution {
  Eigen::VectorXd displacements;                   // (ux, uy) per node, interleaved
  Eigen::Matrix<double, Eigen::Dynamic, 3> stress;  // (sx, sy, txy) per element
  Eigen::VectorXd von_mises;                       // per element
  Eigen::VectorXd reactions;                       // nonzero only at fixed dofs
  double residual_norm = 0.0;                      // ||K_ff U_f - F_f||

  Vec2 displacement(int node) const {
    return {displacements(2 * node), displacements(2 * node + 1)};
  }
};

FeaSolution solve(const FeaProblem& problem, std::span<const double> element_scale = {},
                  const SolverOptions& options = {});

// Plain-text solution format:
//   <nodes> <elements> <residual norm>
//   ux uy              one line per node
//   sx sy txy svm      one line per element
void write_solution(std::ostream& out, const FeaSolution& solution);
FeaSolution read_solution(std::istream& in);

}  // namespace femgraph
