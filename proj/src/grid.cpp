#include "nplap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nplap {

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Interior:
      return "interior";
    case NodeClass::Boundary:
      return "boundary";
    case NodeClass::Exterior:
      return "exterior";
  }
  return "?";
}

namespace {

std::string describe(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

// Visits every lattice index inside the axis-aligned box [lo, hi] (clamped to the grid).
template <class Fn>
void for_each_in_box(const Grid& g, const Vec& lo, const Vec& hi, Fn&& fn) {
  const int n = g.dim();
  Index first{}, last{};
  for (int a = 0; a < n; ++a) {
    first[a] = std::max(0, static_cast<int>(std::floor((lo[a] - g.origin()[a]) / g.spacing())));
    last[a] = std::min(g.extent(a) - 1,
                       static_cast<int>(std::ceil((hi[a] - g.origin()[a]) / g.spacing())));
    if (first[a] > last[a]) return;
  }
  Index idx = first;
  while (true) {
    fn(g.flat_index(idx));
    int a = n - 1;
    while (a >= 0) {
      if (++idx[a] <= last[a]) break;
      idx[a] = first[a];
      --a;
    }
    if (a < 0) break;
  }
}

}  // namespace

Vec Grid::position(std::size_t node) const {
  const Index idx = multi_index(node);
  Vec x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = origin_[a] + h_ * idx[a];
  return x;
}

Index Grid::multi_index(std::size_t node) const {
  Index idx{};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = static_cast<int>(node / static_cast<std::size_t>(stride_[a]));
    node %= static_cast<std::size_t>(stride_[a]);
  }
  return idx;
}

std::size_t Grid::flat_index(const Index& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat += static_cast<std::size_t>(idx[a]) * stride_[a];
  return flat;
}

bool Grid::in_range(const Index& idx) const {
  for (int a = 0; a < dim_; ++a)
    if (idx[a] < 0 || idx[a] >= extent_[a]) return false;
  return true;
}

Vec Grid::project_to_sphere(std::size_t node) const {
  const Vec d = position(node) - ball_.center;
  const double len = d.norm();
  if (len == 0.0) {
    Vec e = Vec::Zero(dim_);
    e[0] = ball_.radius;
    return ball_.center + e;
  }
  return ball_.center + (ball_.radius / len) * d;
}

bool Grid::operator==(const Grid& o) const {
  if (this == &o) return true;
  if (dim_ != o.dim_ || h_ != o.h_ || ball_.radius != o.ball_.radius) return false;
  for (int a = 0; a < dim_; ++a)
    if (extent_[a] != o.extent_[a] || origin_[a] != o.origin_[a] ||
        ball_.center[a] != o.ball_.center[a])
      return false;
  return true;
}

void Grid::classify() {
  std::size_t total = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    stride_[a] = static_cast<std::ptrdiff_t>(total);
    total *= static_cast<std::size_t>(extent_[a]);
  }
  classes_.assign(total, NodeClass::Exterior);
  interior_.clear();
  boundary_.clear();

  const double R = ball_.radius;
  const double band = h_ * std::sqrt(static_cast<double>(dim_));
  const double slack = 1e-12 * R * R;
  for (std::size_t node = 0; node < total; ++node) {
    const Index idx = multi_index(node);
    bool stencil_fits = true;
    double dist2 = 0.0;
    double corner2 = 0.0;  // farthest corner of the 3^n neighbourhood
    for (int a = 0; a < dim_; ++a) {
      if (idx[a] == 0 || idx[a] == extent_[a] - 1) stencil_fits = false;
      const double d = std::abs(origin_[a] + h_ * idx[a] - ball_.center[a]);
      dist2 += d * d;
      corner2 += (d + h_) * (d + h_);
    }
    if (stencil_fits && corner2 <= R * R + slack) {
      classes_[node] = NodeClass::Interior;
      interior_.push_back(node);
    } else if (std::abs(std::sqrt(dist2) - R) <= band * (1.0 + 1e-12)) {
      classes_[node] = NodeClass::Boundary;
      boundary_.push_back(node);
    }
  }

  neighbourhood_.clear();
  Index d{};
  for (int a = 0; a < dim_; ++a) d[a] = -1;
  while (true) {
    std::ptrdiff_t off = 0;
    bool zero = true;
    for (int a = 0; a < dim_; ++a) {
      off += d[a] * stride_[a];
      zero = zero && d[a] == 0;
    }
    if (!zero) neighbourhood_.push_back(off);
    int a = dim_ - 1;
    while (a >= 0) {
      if (++d[a] <= 1) break;
      d[a] = -1;
      --a;
    }
    if (a < 0) break;
  }
}

GridPtr build_grid(int dim, double h, const Vec& center, double radius) {
  if (dim < 1 || dim > kMaxDim)
    throw InvalidArgument("build_grid: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (center.size() != dim) throw InvalidArgument("build_grid: center has wrong dimension");
  if (!(radius > 0.0)) throw InvalidArgument("build_grid: radius must be positive");
  if (!(h > 0.0) || h > radius / 2.0)
    throw InvalidArgument("build_grid: spacing must satisfy 0 < h <= R/2");

  auto g = std::shared_ptr<Grid>(new Grid());
  g->dim_ = dim;
  g->h_ = h;
  g->ball_ = Ball{center, radius};
  const int half = static_cast<int>(std::ceil((radius + h * std::sqrt(double(dim))) / h - 1e-9));
  g->origin_ = center - Vec::Constant(dim, half * h);
  for (int a = 0; a < dim; ++a) g->extent_[a] = 2 * half + 1;
  g->classify();
  return g;
}

GridPtr grid_from_layout(int dim, double h, const Vec& origin, const std::vector<int>& extent,
                         const Ball& ball) {
  if (dim < 1 || dim > kMaxDim || static_cast<int>(extent.size()) != dim ||
      origin.size() != dim || ball.center.size() != dim)
    throw InvalidArgument("grid_from_layout: inconsistent layout");
  if (!(h > 0.0) || !(ball.radius > 0.0)) throw InvalidArgument("grid_from_layout: bad spacing");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->dim_ = dim;
  g->h_ = h;
  g->ball_ = ball;
  g->origin_ = origin;
  for (int a = 0; a < dim; ++a) {
    if (extent[a] < 3) throw InvalidArgument("grid_from_layout: extent < 3");
    g->extent_[a] = extent[a];
  }
  g->classify();
  return g;
}

ScalarField::ScalarField(GridPtr grid, double fill, std::string tag)
    : grid_(std::move(grid)), values_(grid_->node_count(), fill), tag_(std::move(tag)) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values, std::string tag)
    : grid_(std::move(grid)), values_(std::move(values)), tag_(std::move(tag)) {
  if (values_.size() != grid_->node_count())
    throw InvalidArgument("ScalarField: value count does not match node count");
}

double ScalarField::sup_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (grid_->node_class(i) != NodeClass::Exterior) m = std::max(m, std::abs(values_[i]));
  return m;
}

void ScalarField::check_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw NumericalError("non-finite value at node " + std::to_string(i) + " " +
                           describe(grid_->position(i)));
}

VectorField::VectorField(GridPtr grid)
    : grid_(std::move(grid)), dim_(grid_->dim()), values_(grid_->node_count() * dim_, 0.0) {}

Vec VectorField::at(std::size_t node) const {
  Vec v(dim_);
  for (int a = 0; a < dim_; ++a) v[a] = values_[node * dim_ + a];
  return v;
}

void VectorField::set(std::size_t node, const Vec& v) {
  for (int a = 0; a < dim_; ++a) values_[node * dim_ + a] = v[a];
}

double VectorField::sup_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid_->node_count(); ++i)
    if (grid_->node_class(i) != NodeClass::Exterior) m = std::max(m, at(i).norm());
  return m;
}

ScalarField sample(const ScalarFn& fn, const GridPtr& grid, std::string tag) {
  ScalarField u(grid, 0.0, std::move(tag));
  for (std::size_t i = 0; i < grid->node_count(); ++i) {
    if (grid->node_class(i) == NodeClass::Exterior) continue;
    const Vec x = grid->position(i);
    const double v = fn(x);
    if (!std::isfinite(v))
      throw NumericalError("sample: non-finite value at node " + std::to_string(i) + " " +
                           describe(x));
    u[i] = v;
  }
  return u;
}

VectorField sample_vector(const VectorFn& fn, const GridPtr& grid) {
  VectorField b(grid);
  for (std::size_t i = 0; i < grid->node_count(); ++i) {
    if (grid->node_class(i) == NodeClass::Exterior) continue;
    const Vec x = grid->position(i);
    const Vec v = fn(x);
    if (v.size() != grid->dim())
      throw InvalidArgument("sample_vector: function returned wrong dimension");
    if (!v.allFinite())
      throw NumericalError("sample_vector: non-finite value at node " + std::to_string(i) + " " +
                           describe(x));
    b.set(i, v);
  }
  return b;
}

double sup_over_ball(const ScalarField& u, const Vec& x0, double r) {
  const Grid& g = u.grid();
  if (x0.size() != g.dim()) throw InvalidArgument("sup_over_ball: point has wrong dimension");
  const double r2 = r * r * (1.0 + 1e-12);
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  const Vec pad = Vec::Constant(g.dim(), r);
  for_each_in_box(g, x0 - pad, x0 + pad, [&](std::size_t node) {
    if (g.node_class(node) == NodeClass::Exterior) return;
    if ((g.position(node) - x0).squaredNorm() > r2) return;
    any = true;
    best = std::max(best, u[node]);
  });
  if (!any) throw NumericalError("sup_over_ball: ball contains no grid nodes");
  return best;
}

double sup_over_sphere(const ScalarField& u, const Vec& x0, double r) {
  const Grid& g = u.grid();
  if (x0.size() != g.dim()) throw InvalidArgument("sup_over_sphere: point has wrong dimension");
  const double band = g.spacing() * std::sqrt(static_cast<double>(g.dim()));
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  const Vec pad = Vec::Constant(g.dim(), r + band);
  for_each_in_box(g, x0 - pad, x0 + pad, [&](std::size_t node) {
    if (g.node_class(node) == NodeClass::Exterior) return;
    const double d = (g.position(node) - x0).norm();
    if (std::abs(d - r) > band) return;
    any = true;
    best = std::max(best, u[node]);
  });
  if (!any) throw NumericalError("sup_over_sphere: shell contains no grid nodes");
  return best;
}

std::vector<std::size_t> nodes_in_ball(const Grid& g, const Vec& x0, double r) {
  if (x0.size() != g.dim()) throw InvalidArgument("nodes_in_ball: point has wrong dimension");
  std::vector<std::size_t> out;
  const double r2 = r * r * (1.0 + 1e-12);
  const Vec pad = Vec::Constant(g.dim(), r);
  for_each_in_box(g, x0 - pad, x0 + pad, [&](std::size_t node) {
    if (g.node_class(node) == NodeClass::Exterior) return;
    if ((g.position(node) - x0).squaredNorm() > r2) return;
    out.push_back(node);
  });
  return out;
}

namespace {

enum class InterpStatus { Ok, Outside, Exterior };

InterpStatus interpolate_impl(const ScalarField& u, const Vec& x, double* value) {
  const Grid& g = u.grid();
  const int n = g.dim();
  Index base{};
  std::array<double, kMaxDim> t{};
  for (int a = 0; a < n; ++a) {
    const double s = (x[a] - g.origin()[a]) / g.spacing();
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, g.extent(a) - 2);
    base[a] = i;
    t[a] = s - i;
    if (t[a] < -1e-9 || t[a] > 1.0 + 1e-9) return InterpStatus::Outside;
  }
  double acc = 0.0;
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    Index idx = base;
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const bool up = (c >> a) & 1;
      idx[a] += up ? 1 : 0;
      w *= up ? t[a] : 1.0 - t[a];
    }
    if (w == 0.0) continue;
    const std::size_t node = g.flat_index(idx);
    if (g.node_class(node) == NodeClass::Exterior) return InterpStatus::Exterior;
    acc += w * u[node];
  }
  *value = acc;
  return InterpStatus::Ok;
}

}  // namespace

std::optional<double> try_interpolate(const ScalarField& u, const Vec& x) {
  if (x.size() != u.grid().dim()) return std::nullopt;
  double v = 0.0;
  if (interpolate_impl(u, x, &v) != InterpStatus::Ok) return std::nullopt;
  return v;
}

double interpolate(const ScalarField& u, const Vec& x) {
  if (x.size() != u.grid().dim()) throw InvalidArgument("interpolate: point has wrong dimension");
  double v = 0.0;
  switch (interpolate_impl(u, x, &v)) {
    case InterpStatus::Outside:
      throw InvalidArgument("interpolate: point " + describe(x) + " outside the lattice");
    case InterpStatus::Exterior:
      throw InvalidArgument("interpolate: cell at " + describe(x) + " touches exterior nodes");
    case InterpStatus::Ok:
      break;
  }
  return v;
}

}  // namespace nplap
