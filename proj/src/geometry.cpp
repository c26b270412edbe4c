#include "wentzell/geometry.hpp"

#include <cmath>
#include <string>

namespace wentzell {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void validate(const GeometrySpec& spec) {
  if (!(spec.length > 0.0))
    throw config_error("geometry.length must be positive (got " +
                       std::to_string(spec.length) + ")");
  if (spec.bulk_elements < 2)
    throw config_error("geometry.bulk_elements must be >= 2 (got " +
                       std::to_string(spec.bulk_elements) + ")");
  if (spec.kind == GeometryKind::PeriodicSlab) {
    if (!(spec.circumference > 0.0))
      throw config_error("geometry.circumference must be positive (got " +
                         std::to_string(spec.circumference) + ")");
    if (spec.periodic_points < 4 || !is_power_of_two(spec.periodic_points))
      throw config_error(
          "geometry.periodic_points must be a power of two >= 4 (got " +
          std::to_string(spec.periodic_points) + ")");
  }
}

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)

Mesh build_interval(const GeometrySpec& spec) {
  Mesh mesh;
  mesh.kind = GeometryKind::Interval;
  const int ne = spec.bulk_elements;
  const int nn = ne + 1;
  const double h = spec.length / ne;

  mesh.nodes.resize(nn, 2);
  for (int i = 0; i < nn; ++i) {
    mesh.nodes(i, 0) = i * h;
    mesh.nodes(i, 1) = 0.0;
  }
  mesh.cells.reserve(ne);
  for (int e = 0; e < ne; ++e) mesh.cells.push_back({e, e + 1, -1, -1});

  mesh.boundary_nodes = {0, nn - 1};
  mesh.volume = spec.length;
  mesh.surface = 2.0;  // counting measure on the endpoints

  // Two-point Gauss per element; exact for the quadratic P1 integrands.
  mesh.bulk_quad.weights.resize(2 * ne);
  mesh.bulk_quad.points.resize(2 * ne, 2);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * ne);
  for (int e = 0; e < ne; ++e) {
    const double xc = (e + 0.5) * h;
    for (int g = 0; g < 2; ++g) {
      const double xi = (g == 0 ? -kGauss : kGauss);
      const int q = 2 * e + g;
      mesh.bulk_quad.weights(q) = 0.5 * h;
      mesh.bulk_quad.points(q, 0) = xc + 0.5 * h * xi;
      mesh.bulk_quad.points(q, 1) = 0.0;
      trips.emplace_back(q, e, 0.5 * (1.0 - xi));
      trips.emplace_back(q, e + 1, 0.5 * (1.0 + xi));
    }
  }
  mesh.bulk_quad.interp.resize(2 * ne, nn);
  mesh.bulk_quad.interp.setFromTriplets(trips.begin(), trips.end());

  // Boundary quadrature: unit weight at each endpoint, fields indexed by
  // boundary node order {0, nn-1}.
  mesh.boundary_quad.weights = Eigen::VectorXd::Ones(2);
  mesh.boundary_quad.points.resize(2, 2);
  mesh.boundary_quad.points << 0.0, 0.0, spec.length, 0.0;
  mesh.boundary_quad.interp.resize(2, 2);
  mesh.boundary_quad.interp.setIdentity();
  return mesh;
}

Mesh build_slab(const GeometrySpec& spec) {
  Mesh mesh;
  mesh.kind = GeometryKind::PeriodicSlab;
  const int nx = spec.periodic_points;
  const int ny = spec.bulk_elements;
  const int nn = nx * (ny + 1);
  const double hx = spec.circumference / nx;
  const double hy = spec.length / ny;
  mesh.nx = nx;
  mesh.ny = ny;

  // Node (i, j) -> index j*nx + i; layer j=0 and j=ny are the two circles.
  mesh.nodes.resize(nn, 2);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      mesh.nodes(j * nx + i, 0) = i * hx;
      mesh.nodes(j * nx + i, 1) = j * hy;
    }
  mesh.cells.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int ip = (i + 1) % nx;
      mesh.cells.push_back({j * nx + i, j * nx + ip, (j + 1) * nx + i, (j + 1) * nx + ip});
    }

  mesh.boundary_nodes.reserve(2 * nx);
  for (int i = 0; i < nx; ++i) mesh.boundary_nodes.push_back(i);
  for (int i = 0; i < nx; ++i) mesh.boundary_nodes.push_back(ny * nx + i);

  mesh.volume = spec.length * spec.circumference;
  mesh.surface = 2.0 * spec.circumference;

  // 2x2 Gauss per cell, bilinear interpolation.
  const int nq = 4 * nx * ny;
  mesh.bulk_quad.weights.resize(nq);
  mesh.bulk_quad.points.resize(nq, 2);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(4) * nq);
  int q = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int ip = (i + 1) % nx;
      const int n00 = j * nx + i, n10 = j * nx + ip;
      const int n01 = (j + 1) * nx + i, n11 = (j + 1) * nx + ip;
      for (int gy = 0; gy < 2; ++gy)
        for (int gx = 0; gx < 2; ++gx) {
          const double xi = (gx == 0 ? -kGauss : kGauss);
          const double eta = (gy == 0 ? -kGauss : kGauss);
          mesh.bulk_quad.weights(q) = 0.25 * hx * hy;
          mesh.bulk_quad.points(q, 0) = (i + 0.5 * (1.0 + xi)) * hx;
          mesh.bulk_quad.points(q, 1) = (j + 0.5 * (1.0 + eta)) * hy;
          trips.emplace_back(q, n00, 0.25 * (1 - xi) * (1 - eta));
          trips.emplace_back(q, n10, 0.25 * (1 + xi) * (1 - eta));
          trips.emplace_back(q, n01, 0.25 * (1 - xi) * (1 + eta));
          trips.emplace_back(q, n11, 0.25 * (1 + xi) * (1 + eta));
          ++q;
        }
    }
  mesh.bulk_quad.interp.resize(nq, nn);
  mesh.bulk_quad.interp.setFromTriplets(trips.begin(), trips.end());

  // Boundary: two circles of nx segments each, 2-point Gauss per segment.
  // Boundary field index: 0..nx-1 bottom circle, nx..2nx-1 top circle.
  const int nbq = 2 * 2 * nx;
  mesh.boundary_quad.weights.resize(nbq);
  mesh.boundary_quad.points.resize(nbq, 2);
  std::vector<Eigen::Triplet<double>> btrips;
  btrips.reserve(static_cast<size_t>(2) * nbq);
  int bq = 0;
  for (int side = 0; side < 2; ++side) {
    const double y = (side == 0 ? 0.0 : spec.length);
    const int base = side * nx;
    for (int i = 0; i < nx; ++i) {
      const int ip = (i + 1) % nx;
      for (int g = 0; g < 2; ++g) {
        const double xi = (g == 0 ? -kGauss : kGauss);
        mesh.boundary_quad.weights(bq) = 0.5 * hx;
        mesh.boundary_quad.points(bq, 0) = (i + 0.5 * (1.0 + xi)) * hx;
        mesh.boundary_quad.points(bq, 1) = y;
        btrips.emplace_back(bq, base + i, 0.5 * (1.0 - xi));
        btrips.emplace_back(bq, base + ip, 0.5 * (1.0 + xi));
        ++bq;
      }
    }
  }
  mesh.boundary_quad.interp.resize(nbq, 2 * nx);
  mesh.boundary_quad.interp.setFromTriplets(btrips.begin(), btrips.end());
  return mesh;
}

}  // namespace

Eigen::VectorXd Mesh::trace(const Eigen::VectorXd& bulk_field) const {
  if (bulk_field.size() != node_count())
    throw dimension_error("trace: field length " + std::to_string(bulk_field.size()) +
                          " does not match node count " + std::to_string(node_count()));
  Eigen::VectorXd out(boundary_count());
  for (int k = 0; k < boundary_count(); ++k) out(k) = bulk_field(boundary_nodes[k]);
  return out;
}

Eigen::VectorXd Mesh::lift(const Eigen::VectorXd& boundary_field) const {
  if (boundary_field.size() != boundary_count())
    throw dimension_error("lift: field length " + std::to_string(boundary_field.size()) +
                          " does not match boundary node count " +
                          std::to_string(boundary_count()));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(node_count());
  for (int k = 0; k < boundary_count(); ++k) out(boundary_nodes[k]) = boundary_field(k);
  return out;
}

Mesh build_geometry(const GeometrySpec& spec) {
  validate(spec);
  return spec.kind == GeometryKind::Interval ? build_interval(spec) : build_slab(spec);
}

std::pair<double, double> compute_measures(const Mesh& mesh) {
  return {mesh.bulk_quad.weights.sum(), mesh.boundary_quad.weights.sum()};
}

double quadrature_integrate(const Mesh& mesh, const Eigen::VectorXd& nodal_field,
                            Region region) {
  const QuadratureRule& rule =
      (region == Region::Bulk) ? mesh.bulk_quad : mesh.boundary_quad;
  if (nodal_field.size() != rule.interp.cols())
    throw dimension_error("quadrature_integrate: field length " +
                          std::to_string(nodal_field.size()) + ", expected " +
                          std::to_string(rule.interp.cols()));
  return rule.weights.dot(rule.interp * nodal_field);
}

}  // namespace wentzell
