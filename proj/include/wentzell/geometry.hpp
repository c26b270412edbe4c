#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <utility>
#include <vector>

#include "wentzell/errors.hpp"

namespace wentzell {

enum class GeometryKind { Interval, PeriodicSlab };

/// Desk-scale computational geometries: a 1-D interval whose boundary is the
/// two endpoints (counting measure, no surface Laplacian), and a 2-D slab
/// (0,L) x circle(ell_x) whose boundary is two circles.
struct GeometrySpec {
  GeometryKind kind = GeometryKind::Interval;
  double length = 1.0;         // interval extent / slab thickness
  double circumference = 1.0;  // periodic direction (slab only)
  int bulk_elements = 64;      // transverse P1 elements
  int periodic_points = 16;    // slab only; power of two
};

enum class Region { Bulk, Boundary };

/// Quadrature rule plus the evaluation operator from nodal coefficients to
/// point values. `interp` has one row per quadrature point.
struct QuadratureRule {
  Eigen::VectorXd weights;
  Eigen::MatrixX2d points;
  Eigen::SparseMatrix<double> interp;
};

struct Mesh {
  GeometryKind kind = GeometryKind::Interval;
  Eigen::MatrixX2d nodes;                 // coordinates (x, y); interval uses x only
  std::vector<std::array<int, 4>> cells;  // interval cells store {a, b, -1, -1}
  std::vector<int> boundary_nodes;        // trace map: bulk index of each boundary node
  QuadratureRule bulk_quad;
  QuadratureRule boundary_quad;           // interp acts on boundary-indexed fields
  double volume = 0.0;                    // |Omega|
  double surface = 0.0;                   // |Gamma|
  int nx = 0;                             // slab: periodic points per circle
  int ny = 0;                             // slab: transverse elements

  int node_count() const { return static_cast<int>(nodes.rows()); }
  int boundary_count() const { return static_cast<int>(boundary_nodes.size()); }

  /// Restrict a bulk nodal field to the boundary node set.
  Eigen::VectorXd trace(const Eigen::VectorXd& bulk_field) const;
  /// Zero-extend a boundary field to the bulk index set.
  Eigen::VectorXd lift(const Eigen::VectorXd& boundary_field) const;
};

Mesh build_geometry(const GeometrySpec& spec);

/// Recompute (|Omega|, |Gamma|) by summing quadrature weights.
std::pair<double, double> compute_measures(const Mesh& mesh);

double quadrature_integrate(const Mesh& mesh, const Eigen::VectorXd& nodal_field,
                            Region region);

}  // namespace wentzell
