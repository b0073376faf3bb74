#pragma once

// Finite fiber bundles: the discrete counterpart of a measure space (X, m)
// carrying a measurable field of Hilbert spaces (H_x) and a gradient
// operator f -> (d_x f).
//
// A model owns a set of degrees of freedom (dofs) and a list of fibers. Fiber
// x has dimension dim(H_x), a measure weight m_x and a linear gradient map
// from dof values to R^dim(H_x). All fiber gradients are stacked into one
// sparse matrix whose rows [offset_x, offset_x + dim_x) belong to fiber x.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace fracvar {

/// Real values indexed by the dofs of a model.
using DiscreteFunction = Eigen::VectorXd;

/// One vector per fiber, flattened in fiber order (see Fiber::offset).
using FiberVectorField = Eigen::VectorXd;

using GradientMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class ModelKind {
  sierpinski,            // gasket with Kusuoka measure
  interval,              // classical Dirichlet integral on (0, 1)
  square,                // classical Dirichlet integral on (-1, 1)^2
  degenerate_square,     // x_2-derivative switched off below the axis
  superposition_square,  // area form plus a line form on {x_2 = 0}
  product,               // gasket x [0, 1]
};

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

inline constexpr int kMaxModelLevel = 9;
inline constexpr int kMaxGridCells = 512;

struct ModelSpec {
  ModelKind kind = ModelKind::interval;
  int level = 3;   // gasket refinement level (sierpinski, product)
  int cells = 16;  // interval cells, grid side N, or time cells (product)
  bool probability_measure = false;  // rescale the Kusuoka measure to mass 1
};

struct Fiber {
  int id = 0;
  int dim = 1;
  double weight = 0.0;  // m_x
  int offset = 0;       // first gradient row
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::MatrixXd frame;  // columns form an orthonormal basis of R^dim
};

/// Free dofs of a Dirichlet problem: the discrete Omega. Dofs outside the
/// region keep their boundary datum.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<bool> mask);

  bool contains(int dof) const { return mask_[static_cast<std::size_t>(dof)]; }
  const std::vector<bool>& mask() const { return mask_; }
  std::vector<int> dofs() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool subset_of(const Region& other) const;

 private:
  std::vector<bool> mask_;
};

class EnergyModel {
 public:
  const ModelSpec& spec() const { return spec_; }
  std::string name() const;

  Eigen::Index dof_count() const { return static_cast<Eigen::Index>(coordinates_.size()); }
  Eigen::Index fiber_count() const { return static_cast<Eigen::Index>(fibers_.size()); }
  Eigen::Index component_count() const { return gradient_.rows(); }

  const std::vector<Eigen::Vector3d>& coordinates() const { return coordinates_; }
  const std::vector<bool>& boundary_mask() const { return boundary_; }
  bool is_boundary(int dof) const { return boundary_[static_cast<std::size_t>(dof)]; }

  const std::vector<Fiber>& fibers() const { return fibers_; }
  /// Throws InputError for an unknown id.
  const Fiber& fiber(int id) const;

  const GradientMatrix& gradient_matrix() const { return gradient_; }
  /// m_x repeated once per gradient row of fiber x.
  const Eigen::VectorXd& component_weights() const { return component_weights_; }
  /// Lumped dof measure: each fiber spreads m_x evenly over the dofs its
  /// gradient map touches. Used for L^p norms of functions.
  const Eigen::VectorXd& dof_mass() const { return dof_mass_; }
  double total_mass() const { return total_mass_; }

  /// Sorted dof ids touched by the gradient map of a fiber.
  const std::vector<int>& fiber_dofs(int id) const;

  const std::map<std::string, std::vector<bool>>& labels() const { return labels_; }

  /// All non-boundary dofs.
  Region interior() const;
  /// Non-boundary dofs carrying the given label; throws InputError if unknown.
  Region region(std::string_view label) const;
  /// Non-boundary dofs whose coordinates satisfy the predicate.
  Region region_where(const std::function<bool(const Eigen::Vector3d&)>& predicate) const;

 private:
  friend class ModelBuilder;
  EnergyModel() = default;

  ModelSpec spec_;
  std::vector<Eigen::Vector3d> coordinates_;
  std::vector<bool> boundary_;
  std::vector<Fiber> fibers_;
  std::vector<std::vector<int>> fiber_dofs_;
  GradientMatrix gradient_;
  Eigen::VectorXd component_weights_;
  Eigen::VectorXd dof_mass_;
  double total_mass_ = 0.0;
  std::map<std::string, std::vector<bool>> labels_;
};

/// Assembles an EnergyModel and checks its invariants on finish().
class ModelBuilder {
 public:
  struct Entry {
    int row;  // 0 <= row < dim
    int dof;
    double value;
  };

  explicit ModelBuilder(ModelSpec spec);

  int add_dof(const Eigen::Vector3d& position, bool boundary);
  /// An empty frame means the standard basis.
  int add_fiber(int dim, double weight, const Eigen::Vector3d& center, std::span<const Entry> entries,
                Eigen::MatrixXd frame = {});
  void add_label(const std::string& name, int dof);

  /// Throws InputError if an invariant fails: positive weights, gradient maps
  /// annihilating constants, orthonormal frames, every dof either touched by
  /// a fiber or flagged boundary.
  EnergyModel finish() &&;

 private:
  EnergyModel model_;
  std::vector<Eigen::Triplet<double>> triplets_;
  int rows_ = 0;
};

/// Builds one of the built-in instances. Throws InputError for parameters
/// outside their documented ranges (level <= 9, cells <= 512).
EnergyModel build_model(const ModelSpec& spec);

}  // namespace fracvar
