#pragma once

#include "nplap/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nplap {

enum class NodeClass : std::uint8_t { Interior, Boundary, Exterior };

const char* to_string(NodeClass c);

struct Ball {
  Vec center;
  double radius = 1.0;
};

using Index = std::array<int, kMaxDim>;

/// Uniform Cartesian lattice over the bounding box of a ball.
///
/// A node is Interior when every node of its 3^n neighbourhood lies in the
/// closed ball, so gradient and Hessian stencils never touch Exterior values.
/// Boundary nodes are the non-Interior nodes within h*sqrt(n) of the sphere.
/// Storage is flat row-major (last axis fastest).
class Grid {
 public:
  int dim() const { return dim_; }
  double spacing() const { return h_; }
  const Ball& domain() const { return ball_; }
  const Vec& origin() const { return origin_; }
  int extent(int axis) const { return extent_[axis]; }
  std::ptrdiff_t stride(int axis) const { return stride_[axis]; }
  std::size_t node_count() const { return classes_.size(); }

  NodeClass node_class(std::size_t node) const { return classes_[node]; }
  bool is_interior(std::size_t node) const { return classes_[node] == NodeClass::Interior; }

  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }

  Vec position(std::size_t node) const;
  Index multi_index(std::size_t node) const;
  std::size_t flat_index(const Index& idx) const;
  bool in_range(const Index& idx) const;

  /// Radial projection of a node onto the domain sphere; the center maps to +e_1.
  Vec project_to_sphere(std::size_t node) const;

  /// Structural equality (same lattice and same domain).
  bool operator==(const Grid& other) const;

  /// Offsets of the full 3^n neighbourhood (excluding the node itself).
  const std::vector<std::ptrdiff_t>& neighbourhood_offsets() const { return neighbourhood_; }

  friend std::shared_ptr<const Grid> build_grid(int dim, double h, const Vec& center, double radius);
  friend std::shared_ptr<const Grid> grid_from_layout(int dim, double h, const Vec& origin,
                                                      const std::vector<int>& extent,
                                                      const Ball& ball);

 private:
  Grid() = default;
  void classify();

  int dim_ = 0;
  double h_ = 0.0;
  Ball ball_;
  Vec origin_;
  std::array<int, kMaxDim> extent_{};
  std::array<std::ptrdiff_t, kMaxDim> stride_{};
  std::vector<NodeClass> classes_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  std::vector<std::ptrdiff_t> neighbourhood_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds the lattice centered on the ball center with spacing h.
/// Throws InvalidArgument when dim is out of range or h > R/2.
GridPtr build_grid(int dim, double h, const Vec& center, double radius);

/// Rebuilds a grid from stored layout metadata (used when reloading artifacts).
GridPtr grid_from_layout(int dim, double h, const Vec& origin, const std::vector<int>& extent,
                         const Ball& ball);

class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridPtr grid, double fill = 0.0, std::string tag = {});
  ScalarField(GridPtr grid, std::vector<double> values, std::string tag = {});

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  const std::string& tag() const { return tag_; }
  void set_tag(std::string tag) { tag_ = std::move(tag); }

  /// Max |value| over non-Exterior nodes.
  double sup_norm() const;
  /// Throws NumericalError naming the first non-finite node.
  void check_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
  std::string tag_;
};

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  Vec at(std::size_t node) const;
  void set(std::size_t node, const Vec& v);
  /// Max Euclidean norm over non-Exterior nodes.
  double sup_norm() const;

 private:
  GridPtr grid_;
  int dim_ = 0;
  std::vector<double> values_;  // node-major, dim components per node
};

/// Nodal evaluation over non-Exterior nodes (Exterior nodes hold 0).
/// A non-finite value raises NumericalError naming the node.
ScalarField sample(const ScalarFn& fn, const GridPtr& grid, std::string tag = {});
VectorField sample_vector(const VectorFn& fn, const GridPtr& grid);

/// Max nodal value over non-Exterior nodes with |x - x0| <= r.
double sup_over_ball(const ScalarField& u, const Vec& x0, double r);

/// Max nodal value over non-Exterior nodes in the shell |(|x - x0| - r)| <= h*sqrt(n).
double sup_over_sphere(const ScalarField& u, const Vec& x0, double r);

/// Non-Exterior nodes with |x - x0| <= r, in storage order.
std::vector<std::size_t> nodes_in_ball(const Grid& g, const Vec& x0, double r);

/// Multilinear interpolation; the enclosing cell must not touch Exterior nodes.
double interpolate(const ScalarField& u, const Vec& x);
/// As interpolate, but empty instead of throwing.
std::optional<double> try_interpolate(const ScalarField& u, const Vec& x);

}  // namespace nplap
