#pragma once

// Uniform P1 simplicial meshes in 1D and 2D with a Gamma1 / Gamma2 boundary
// partition. Gamma1 carries the homogeneous Dirichlet condition, Gamma2 the
// nonsmooth boundary potential.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dpobs/errors.hpp"

namespace dpobs {

using Index = std::int64_t;
using Point = std::array<double, 2>;

enum class BoundaryTag { gamma1, gamma2 };

inline const char* to_string(BoundaryTag tag) { return tag == BoundaryTag::gamma1 ? "Gamma1" : "Gamma2"; }

/// Axis-aligned bounding box of the domain, handed to partition predicates.
struct Box {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 0.0;
};

enum class Side { left, right, bottom, top };

inline bool on_side(const Point& mid, const Box& box, Side side) {
  const double tol = 1e-12 * std::max({1.0, box.xmax - box.xmin, box.ymax - box.ymin});
  switch (side) {
    case Side::left: return std::abs(mid[0] - box.xmin) <= tol;
    case Side::right: return std::abs(mid[0] - box.xmax) <= tol;
    case Side::bottom: return std::abs(mid[1] - box.ymin) <= tol;
    case Side::top: return std::abs(mid[1] - box.ymax) <= tol;
  }
  return false;
}

/// Assigns each boundary face to Gamma1 or Gamma2 by evaluating a predicate at the face midpoint.
struct BoundaryPartitionSpec {
  std::function<BoundaryTag(const Point& midpoint, const Box& box)> classify;

  static BoundaryPartitionSpec all_gamma1() {
    return {[](const Point&, const Box&) { return BoundaryTag::gamma1; }};
  }

  /// Faces on any of the listed sides go to Gamma2, the rest to Gamma1.
  static BoundaryPartitionSpec gamma2_on(std::vector<Side> sides) {
    return {[sides = std::move(sides)](const Point& mid, const Box& box) {
      for (Side s : sides) {
        if (on_side(mid, box, s)) return BoundaryTag::gamma2;
      }
      return BoundaryTag::gamma1;
    }};
  }
};

struct BoundaryFace {
  std::array<Index, 2> nodes{};
  int n_nodes = 1;  // 1 in 1D (a point), 2 in 2D (an edge)
  BoundaryTag tag = BoundaryTag::gamma1;
  double measure = 1.0;
};

/// Row c, column k: d(phi_k)/d(x_c) on the element. Unused entries stay zero.
using GradientMap = std::array<std::array<double, 3>, 2>;

struct Mesh {
  int dim = 1;
  std::vector<Point> nodes;
  std::vector<std::array<Index, 3>> elements;
  std::vector<BoundaryFace> boundary_faces;
  std::vector<double> element_volumes;
  std::vector<GradientMap> gradient_maps;
  Box box;

  int nodes_per_element() const { return dim + 1; }
  Index num_nodes() const { return static_cast<Index>(nodes.size()); }
  Index num_elements() const { return static_cast<Index>(elements.size()); }

  Point barycenter(Index e) const {
    Point c{0.0, 0.0};
    const int m = nodes_per_element();
    for (int k = 0; k < m; ++k) {
      const Point& x = nodes[static_cast<std::size_t>(elements[e][k])];
      c[0] += x[0] / m;
      c[1] += x[1] / m;
    }
    return c;
  }

  /// Constant gradient of the P1 interpolant of `values` on element e.
  Eigen::Vector2d element_gradient(Index e, const Eigen::VectorXd& values) const {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    const auto& G = gradient_maps[static_cast<std::size_t>(e)];
    for (int k = 0; k < nodes_per_element(); ++k) {
      const double v = values[elements[e][k]];
      for (int c = 0; c < dim; ++c) g[c] += G[c][k] * v;
    }
    return g;
  }

  /// Vertex-lumped volume weights: each element gives |e|/(dim+1) to each of its nodes.
  Eigen::VectorXd lumped_weights() const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(num_nodes());
    for (Index e = 0; e < num_elements(); ++e) {
      const double share = element_volumes[e] / nodes_per_element();
      for (int k = 0; k < nodes_per_element(); ++k) w[elements[e][k]] += share;
    }
    return w;
  }

  /// True at every node touched by a Gamma1 face.
  std::vector<bool> dirichlet_mask() const {
    std::vector<bool> mask(nodes.size(), false);
    for (const auto& f : boundary_faces) {
      if (f.tag != BoundaryTag::gamma1) continue;
      for (int k = 0; k < f.n_nodes; ++k) mask[static_cast<std::size_t>(f.nodes[k])] = true;
    }
    return mask;
  }

  bool has_gamma2() const {
    for (const auto& f : boundary_faces) {
      if (f.tag == BoundaryTag::gamma2) return true;
    }
    return false;
  }

  double measure() const {
    double m = 0.0;
    for (double v : element_volumes) m += v;
    return m;
  }
};

namespace detail {

inline GradientMap simplex_gradient_map(const Mesh& mesh, const std::array<Index, 3>& el, double& volume) {
  GradientMap G{};
  if (mesh.dim == 1) {
    const double h = mesh.nodes[el[1]][0] - mesh.nodes[el[0]][0];
    volume = std::abs(h);
    G[0][0] = -1.0 / h;
    G[0][1] = 1.0 / h;
    return G;
  }
  const Point& a = mesh.nodes[el[0]];
  const Point& b = mesh.nodes[el[1]];
  const Point& c = mesh.nodes[el[2]];
  const double j00 = b[0] - a[0], j01 = c[0] - a[0];
  const double j10 = b[1] - a[1], j11 = c[1] - a[1];
  const double det = j00 * j11 - j01 * j10;
  volume = 0.5 * std::abs(det);
  // Rows of J^{-1} are the reference-to-physical gradients of phi_1 and phi_2.
  const double i00 = j11 / det, i01 = -j01 / det;
  const double i10 = -j10 / det, i11 = j00 / det;
  G[0][1] = i00;
  G[1][1] = i01;
  G[0][2] = i10;
  G[1][2] = i11;
  G[0][0] = -(i00 + i10);
  G[1][0] = -(i01 + i11);
  return G;
}

inline void finalize_geometry(Mesh& mesh) {
  mesh.element_volumes.resize(mesh.elements.size());
  mesh.gradient_maps.resize(mesh.elements.size());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    double vol = 0.0;
    mesh.gradient_maps[e] = simplex_gradient_map(mesh, mesh.elements[e], vol);
    mesh.element_volumes[e] = vol;
    if (!(vol > 0.0)) throw ConfigurationError("degenerate element " + std::to_string(e));
  }
}

inline void require_gamma1(const Mesh& mesh) {
  for (const auto& f : mesh.boundary_faces) {
    if (f.tag == BoundaryTag::gamma1) return;
  }
  throw ConfigurationError("boundary partition leaves Gamma1 empty; a Dirichlet part of positive measure is required");
}

}  // namespace detail

inline Mesh build_interval_mesh(double a, double b, Index n_elements, const BoundaryPartitionSpec& partition) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ConfigurationError("interval mesh requires a < b");
  }
  if (n_elements < 1) throw ConfigurationError("interval mesh requires at least one element");
  Mesh mesh;
  mesh.dim = 1;
  mesh.box = Box{a, b, 0.0, 0.0};
  const double h = (b - a) / static_cast<double>(n_elements);
  mesh.nodes.resize(static_cast<std::size_t>(n_elements + 1));
  for (Index i = 0; i <= n_elements; ++i) {
    mesh.nodes[static_cast<std::size_t>(i)] = {i == n_elements ? b : a + h * static_cast<double>(i), 0.0};
  }
  for (Index e = 0; e < n_elements; ++e) mesh.elements.push_back({e, e + 1, 0});
  for (Index node : {Index{0}, n_elements}) {
    BoundaryFace f;
    f.nodes = {node, 0};
    f.n_nodes = 1;
    f.measure = 1.0;
    f.tag = partition.classify(mesh.nodes[static_cast<std::size_t>(node)], mesh.box);
    mesh.boundary_faces.push_back(f);
  }
  detail::finalize_geometry(mesh);
  detail::require_gamma1(mesh);
  return mesh;
}

/// Structured triangulation of [0,lx]x[0,ly]; the cell diagonal alternates in a checkerboard pattern.
inline Mesh build_rect_mesh(double lx, double ly, Index nx, Index ny, const BoundaryPartitionSpec& partition) {
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw ConfigurationError("rectangle mesh requires positive extents");
  }
  if (nx < 1 || ny < 1) throw ConfigurationError("rectangle mesh requires positive cell counts");
  Mesh mesh;
  mesh.dim = 2;
  mesh.box = Box{0.0, lx, 0.0, ly};
  const auto id = [nx](Index i, Index j) { return j * (nx + 1) + i; };
  for (Index j = 0; j <= ny; ++j) {
    for (Index i = 0; i <= nx; ++i) {
      const double x = i == nx ? lx : lx * static_cast<double>(i) / static_cast<double>(nx);
      const double y = j == ny ? ly : ly * static_cast<double>(j) / static_cast<double>(ny);
      mesh.nodes.push_back({x, y});
    }
  }
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      const Index n00 = id(i, j), n10 = id(i + 1, j), n01 = id(i, j + 1), n11 = id(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.elements.push_back({n00, n10, n11});
        mesh.elements.push_back({n00, n11, n01});
      } else {
        mesh.elements.push_back({n00, n10, n01});
        mesh.elements.push_back({n10, n11, n01});
      }
    }
  }
  const auto add_edge = [&](Index p, Index q) {
    BoundaryFace f;
    f.nodes = {p, q};
    f.n_nodes = 2;
    const Point& a = mesh.nodes[static_cast<std::size_t>(p)];
    const Point& b = mesh.nodes[static_cast<std::size_t>(q)];
    f.measure = std::hypot(b[0] - a[0], b[1] - a[1]);
    f.tag = partition.classify(Point{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])}, mesh.box);
    mesh.boundary_faces.push_back(f);
  };
  for (Index i = 0; i < nx; ++i) add_edge(id(i, 0), id(i + 1, 0));
  for (Index j = 0; j < ny; ++j) add_edge(id(nx, j), id(nx, j + 1));
  for (Index i = nx; i > 0; --i) add_edge(id(i, ny), id(i - 1, ny));
  for (Index j = ny; j > 0; --j) add_edge(id(0, j), id(0, j - 1));
  detail::finalize_geometry(mesh);
  detail::require_gamma1(mesh);
  return mesh;
}

/// Vertex-lumped surface measure of the faces carrying `tag`; zero at nodes off those faces.
inline Eigen::VectorXd boundary_lumped_weights(const Mesh& mesh, BoundaryTag tag = BoundaryTag::gamma2) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (const auto& f : mesh.boundary_faces) {
    if (f.tag != tag) continue;
    for (int k = 0; k < f.n_nodes; ++k) w[f.nodes[k]] += f.measure / f.n_nodes;
  }
  return w;
}

/// Re-checks the stored geometry against the node coordinates. Throws ConfigurationError on mismatch.
inline void validate(const Mesh& mesh, double tol = 1e-14) {
  if (mesh.elements.size() != mesh.element_volumes.size() || mesh.elements.size() != mesh.gradient_maps.size()) {
    throw ConfigurationError("mesh geometry arrays out of sync with elements");
  }
  detail::require_gamma1(mesh);
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    double vol = 0.0;
    const GradientMap G = detail::simplex_gradient_map(mesh, mesh.elements[e], vol);
    if (!(mesh.element_volumes[e] > 0.0) || std::abs(vol - mesh.element_volumes[e]) > tol * std::max(1.0, vol)) {
      throw ConfigurationError("element volume mismatch at element " + std::to_string(e));
    }
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < 3; ++k) {
        if (std::abs(G[c][k] - mesh.gradient_maps[e][c][k]) > tol * std::max(1.0, std::abs(G[c][k]))) {
          throw ConfigurationError("gradient map mismatch at element " + std::to_string(e));
        }
      }
    }
  }
}

/// Node adjacency lists (each node's neighbours through shared elements, itself excluded).
inline std::vector<std::vector<Index>> node_adjacency(const Mesh& mesh) {
  std::vector<std::vector<Index>> adj(mesh.nodes.size());
  for (const auto& el : mesh.elements) {
    for (int a = 0; a < mesh.nodes_per_element(); ++a) {
      for (int b = 0; b < mesh.nodes_per_element(); ++b) {
        if (a != b) adj[static_cast<std::size_t>(el[a])].push_back(el[b]);
      }
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

}  // namespace dpobs
