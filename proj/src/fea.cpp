#include "femgraph/fea.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <istream>
#include <numeric>
#include <ostream>
#include <vector>

#include "femgraph/text_io.hpp"

namespace femgraph {
namespace {

std::size_t at(int i) { return static_cast<std::size_t>(i); }

// Edge-connected element components; a single shared node acts as a hinge
// and does not transmit rotation.
std::vector<int> element_components(const TriMesh& mesh, int& count) {
  const std::size_t m = mesh.elements.size();
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int x) {
    while (parent[at(x)] != x) x = parent[at(x)] = parent[at(parent[at(x)])];
    return x;
  };
  std::map<EdgeKey, int> first_owner;
  for (std::size_t e = 0; e < m; ++e) {
    const auto& el = mesh.elements[e];
    for (int k = 0; k < 3; ++k) {
      const EdgeKey key = make_edge(el[at(k)], el[at((k + 1) % 3)]);
      auto [it, inserted] = first_owner.emplace(key, static_cast<int>(e));
      if (!inserted) parent[at(find(static_cast<int>(e)))] = find(it->second);
    }
  }
  std::map<int, int> label;
  std::vector<int> comp(m);
  for (std::size_t e = 0; e < m; ++e) {
    const int root = find(static_cast<int>(e));
    comp[e] = label.emplace(root, static_cast<int>(label.size())).first->second;
  }
  count = static_cast<int>(label.size());
  return comp;
}

}  // namespace

void Material::validate() const {
  if (!(youngs_modulus > 0.0)) throw SolverError("Young's modulus must be positive");
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) {
    throw SolverError("Poisson's ratio must lie in [0, 0.5)");
  }
  if (!(thickness > 0.0)) throw SolverError("thickness must be positive");
}

void FeaProblem::validate() const {
  material.validate();
  const int n = static_cast<int>(mesh.nodes.size());
  if (fixed_dofs.empty()) throw SolverError("no fixed dofs: rigid-body motion is unconstrained");
  for (const Dof& d : fixed_dofs) {
    if (d.node < 0 || d.node >= n || (d.axis != 0 && d.axis != 1)) {
      throw SolverError("fixed dof refers to a missing node");
    }
  }
  for (const auto& [node, f] : nodal_loads) {
    if (node < 0 || node >= n) throw SolverError("load applied to missing node " + std::to_string(node));
    if (!f.allFinite()) throw SolverError("non-finite load at node " + std::to_string(node));
  }

  std::vector<char> used(at(n), 0);
  for (const auto& el : mesh.elements) {
    for (int v : el) used[at(v)] = 1;
  }
  for (int v = 0; v < n; ++v) {
    if (!used[at(v)] && !(fixed_dofs.count({v, 0}) && fixed_dofs.count({v, 1}))) {
      throw SolverError("node " + std::to_string(v) + " belongs to no element and is not fixed");
    }
  }

  // Each rigid component needs constraints spanning translation x/y and rotation.
  int ncomp = 0;
  const std::vector<int> comp = element_components(mesh, ncomp);
  std::vector<std::set<int>> comp_nodes(at(ncomp));
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    for (int v : mesh.elements[e]) comp_nodes[at(comp[e])].insert(v);
  }
  for (int c = 0; c < ncomp; ++c) {
    std::vector<Eigen::RowVector3d> rows;
    for (const Dof& d : fixed_dofs) {
      if (!comp_nodes[at(c)].count(d.node)) continue;
      const Vec2& p = mesh.nodes[at(d.node)];
      rows.push_back(d.axis == 0 ? Eigen::RowVector3d(1.0, 0.0, -p.y())
                                 : Eigen::RowVector3d(0.0, 1.0, p.x()));
    }
    Eigen::MatrixX3d modes(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t r = 0; r < rows.size(); ++r) modes.row(static_cast<Eigen::Index>(r)) = rows[r];
    Eigen::ColPivHouseholderQR<Eigen::MatrixX3d> qr(modes);
    qr.setThreshold(1e-12);
    if (rows.size() < 3 || qr.rank() < 3) {
      throw SolverError("singular system: constraints leave a rigid-body mode in component " +
                        std::to_string(c));
    }
  }
}

FeaProblem cantilever_problem(TriMesh mesh, const Material& material, const Vec2& load) {
  FeaProblem p;
  for (const auto& [edge, tag] : mesh.edge_tags) {
    if (tag != EdgeTag::Fixture) continue;
    for (int v : {edge.first, edge.second}) {
      p.fixed_dofs.insert({v, 0});
      p.fixed_dofs.insert({v, 1});
    }
  }
  if (mesh.load_node >= 0) p.nodal_loads[mesh.load_node] = load;
  p.mesh = std::move(mesh);
  p.material = material;
  return p;
}

Eigen::VectorXd load_vector(const FeaProblem& problem) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(problem.mesh.nodes.size()));
  for (const auto& [node, load] : problem.nodal_loads) {
    f(2 * node) += load.x();
    f(2 * node + 1) += load.y();
  }
  return f;
}

Eigen::SparseMatrix<double> assemble(const FeaProblem& problem, std::span<const double> element_scale) {
  const TriMesh& mesh = problem.mesh;
  if (!element_scale.empty() && element_scale.size() != mesh.elements.size()) {
    throw SolverError("element scale length does not match element count");
  }
  const Matrix3<double> c = elasticity_matrix<double>(problem.material);
  const auto ndof = 2 * static_cast<Eigen::Index>(mesh.nodes.size());

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.elements.size() * 36);
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    Matrix6<double> ke = element_stiffness<double>(mesh.element_coords(e), c, problem.material.thickness);
    if (!element_scale.empty()) ke *= element_scale[e];
    const auto& el = mesh.elements[e];
    for (int a = 0; a < 6; ++a) {
      const int ga = 2 * el[at(a / 2)] + a % 2;
      for (int b = 0; b < 6; ++b) {
        const int gb = 2 * el[at(b / 2)] + b % 2;
        triplets.emplace_back(ga, gb, ke(a, b));
      }
    }
  }
  Eigen::SparseMatrix<double> k(ndof, ndof);
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

FeaSolution solve(const FeaProblem& problem, std::span<const double> element_scale,
                  const SolverOptions& options) {
  problem.validate();
  const TriMesh& mesh = problem.mesh;
  const Eigen::SparseMatrix<double> k = assemble(problem, element_scale);
  const Eigen::VectorXd f = load_vector(problem);
  const Eigen::Index ndof = k.rows();

  std::vector<Eigen::Index> free_index(static_cast<std::size_t>(ndof), -1);
  std::vector<Eigen::Index> free_dofs;
  for (Eigen::Index d = 0; d < ndof; ++d) {
    const Dof dof{static_cast<int>(d / 2), static_cast<int>(d % 2)};
    if (!problem.fixed_dofs.count(dof)) {
      free_index[static_cast<std::size_t>(d)] = static_cast<Eigen::Index>(free_dofs.size());
      free_dofs.push_back(d);
    }
  }
  const auto nfree = static_cast<Eigen::Index>(free_dofs.size());

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(k.nonZeros()));
  for (Eigen::Index col = 0; col < k.outerSize(); ++col) {
    const Eigen::Index fc = free_index[static_cast<std::size_t>(col)];
    if (fc < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
      const Eigen::Index fr = free_index[static_cast<std::size_t>(it.row())];
      if (fr >= 0) triplets.emplace_back(fr, fc, it.value());
    }
  }
  Eigen::SparseMatrix<double> kff(nfree, nfree);
  kff.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd ff(nfree);
  for (Eigen::Index i = 0; i < nfree; ++i) ff(i) = f(free_dofs[static_cast<std::size_t>(i)]);

  Eigen::VectorXd uf;
  if (nfree <= options.direct_dof_limit) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(kff);
    if (llt.info() != Eigen::Success) {
      throw SolverError("singular system: stiffness is not positive definite after constraints");
    }
    uf = llt.solve(ff);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg(kff);
    cg.setTolerance(options.cg_tolerance);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * nfree));
    uf = cg.solve(ff);
    if (cg.info() != Eigen::Success) throw SolverError("conjugate gradient did not converge");
  }
  if (!uf.allFinite()) throw SolverError("singular system: non-finite displacements");

  FeaSolution sol;
  sol.residual_norm = (kff * uf - ff).norm();
  sol.displacements = Eigen::VectorXd::Zero(ndof);
  for (Eigen::Index i = 0; i < nfree; ++i) sol.displacements(free_dofs[static_cast<std::size_t>(i)]) = uf(i);

  sol.reactions = Eigen::VectorXd::Zero(ndof);
  const Eigen::VectorXd internal = k * sol.displacements;
  for (const Dof& d : problem.fixed_dofs) sol.reactions(d.index()) = internal(d.index()) - f(d.index());

  const Matrix3<double> c = elasticity_matrix<double>(problem.material);
  const auto m = static_cast<Eigen::Index>(mesh.elements.size());
  sol.stress.resize(m, 3);
  sol.von_mises.resize(m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto& el = mesh.elements[static_cast<std::size_t>(e)];
    Eigen::Matrix<double, 6, 1> ue;
    for (int a = 0; a < 3; ++a) {
      ue(2 * a) = sol.displacements(2 * el[at(a)]);
      ue(2 * a + 1) = sol.displacements(2 * el[at(a)] + 1);
    }
    const auto sd = strain_displacement<double>(mesh.element_coords(static_cast<std::size_t>(e)));
    Eigen::Vector3d s = c * sd.b * ue;
    if (!element_scale.empty()) s *= element_scale[static_cast<std::size_t>(e)];
    sol.stress.row(e) = s.transpose();
    sol.von_mises(e) = von_mises<double>(s);
  }
  return sol;
}

void write_solution(std::ostream& out, const FeaSolution& sol) {
  const Eigen::Index n = sol.displacements.size() / 2;
  const Eigen::Index m = sol.von_mises.size();
  out << n << ' ' << m << ' ' << format_double(sol.residual_norm) << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    out << format_double(sol.displacements(2 * i)) << ' ' << format_double(sol.displacements(2 * i + 1))
        << '\n';
  }
  for (Eigen::Index e = 0; e < m; ++e) {
    out << format_double(sol.stress(e, 0)) << ' ' << format_double(sol.stress(e, 1)) << ' '
        << format_double(sol.stress(e, 2)) << ' ' << format_double(sol.von_mises(e)) << '\n';
  }
}

FeaSolution read_solution(std::istream& in) {
  FeaSolution sol;
  const long long n = read_int(in, "node count");
  const long long m = read_int(in, "element count");
  if (n < 0 || m < 0) throw DataError("negative count in solution header");
  sol.residual_norm = read_double(in, "residual norm");
  sol.displacements.resize(2 * n);
  for (long long i = 0; i < 2 * n; ++i) sol.displacements(i) = read_double(in, "displacement");
  sol.stress.resize(m, 3);
  sol.von_mises.resize(m);
  for (long long e = 0; e < m; ++e) {
    for (int k = 0; k < 3; ++k) sol.stress(e, k) = read_double(in, "stress");
    sol.von_mises(e) = read_double(in, "von Mises stress");
  }
  sol.reactions = Eigen::VectorXd::Zero(2 * n);
  return sol;
}

}  // namespace femgraph
