#include "ipdg/mesh.hpp"

#include <cmath>
#include <functional>

namespace ipdg {

namespace {

Vec3 axis_unit(int axis) {
  Vec3 v = Vec3::Zero();
  v[axis] = 1.0;
  return v;
}

// Builds element and face lists for an arbitrary labeling of the grid.
// label(i,j,l) must be a bijection onto [0, m^3).
CartesianMesh build_with_labels(int m,
                                const std::function<int(int, int, int)> &label) {
  if (m < 1)
    throw InvalidParameter("build_mesh: m must be >= 1, got " +
                           std::to_string(m));
  CartesianMesh mesh;
  mesh.m = m;
  mesh.h = 1.0 / m;
  const double h = mesh.h;
  mesh.elements.resize(static_cast<std::size_t>(m) * m * m);
  for (int l = 0; l < m; ++l)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        Element e;
        e.i = i;
        e.j = j;
        e.l = l;
        e.center = Vec3((i + 0.5) * h, (j + 0.5) * h, (l + 0.5) * h);
        mesh.elements[label(i, j, l)] = e;
      }

  // Interior faces: axis-major, lexicographic over the lower element.
  for (int axis = 0; axis < 3; ++axis) {
    for (int l = 0; l < m; ++l)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
          int ii = i, jj = j, ll = l;
          (axis == 0 ? ii : axis == 1 ? jj : ll) += 1;
          if (ii >= m || jj >= m || ll >= m)
            continue;
          int lo = label(i, j, l);
          int hi = label(ii, jj, ll);
          Face f;
          f.axis = axis;
          f.kind = FaceKind::Interior;
          f.h_f = h;
          // Owner is the larger label; its outward normal points toward the
          // neighbor.
          if (hi > lo) {
            f.owner = hi;
            f.neighbor = lo;
            f.normal = -axis_unit(axis);
          } else {
            f.owner = lo;
            f.neighbor = hi;
            f.normal = axis_unit(axis);
          }
          f.center = mesh.elements[lo].center + 0.5 * h * axis_unit(axis);
          mesh.interior_faces.push_back(f);
        }
  }

  // Boundary faces: low side then high side per axis.
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
          // (a,b) run over the two in-plane grid directions.
          int coords[3];
          coords[axis] = side == 0 ? 0 : m - 1;
          coords[(axis + 1) % 3] = a;
          coords[(axis + 2) % 3] = b;
          Face f;
          f.axis = axis;
          f.kind = FaceKind::Boundary;
          f.owner = label(coords[0], coords[1], coords[2]);
          f.neighbor = -1;
          f.normal = (side == 0 ? -1.0 : 1.0) * axis_unit(axis);
          f.h_f = h;
          f.center = mesh.elements[f.owner].center +
                     0.5 * h * (side == 0 ? -1.0 : 1.0) * axis_unit(axis);
          mesh.boundary_faces.push_back(f);
        }
    }
  }
  return mesh;
}

} // namespace

CartesianMesh build_mesh(int m) {
  return build_with_labels(
      m, [m](int i, int j, int l) { return i + j * m + l * m * m; });
}

CartesianMesh relabel_reversed(const CartesianMesh &mesh) {
  const int m = mesh.m;
  const int n = m * m * m;
  return build_with_labels(m, [m, n](int i, int j, int l) {
    return n - 1 - (i + j * m + l * m * m);
  });
}

MeshDiagnostics validate_mesh(const CartesianMesh &mesh) {
  MeshDiagnostics d;
  const int m = mesh.m;
  const double h = mesh.h;
  auto fail = [&d](const std::string &msg) {
    if (d.detail.empty())
      d.detail = msg;
  };

  d.counts_ok = static_cast<int>(mesh.elements.size()) == m * m * m &&
                static_cast<int>(mesh.interior_faces.size()) ==
                    3 * m * m * (m - 1) &&
                static_cast<int>(mesh.boundary_faces.size()) == 6 * m * m;
  if (!d.counts_ok)
    fail("element/face counts do not match m");

  d.incidence_ok = true;
  d.orientation_ok = true;
  d.planes_ok = true;
  const int ne = static_cast<int>(mesh.elements.size());
  for (const Face &f : mesh.interior_faces) {
    if (f.owner < 0 || f.owner >= ne || f.neighbor < 0 || f.neighbor >= ne ||
        f.owner == f.neighbor) {
      d.incidence_ok = false;
      fail("interior face with bad incidence");
      continue;
    }
    if (f.owner < f.neighbor) {
      d.orientation_ok = false;
      fail("interior face owner label not the larger one");
    }
    const Vec3 &co = mesh.elements[f.owner].center;
    const Vec3 &cn = mesh.elements[f.neighbor].center;
    // Owner outward normal points from owner toward neighbor.
    if (f.normal.dot(cn - co) <= 0) {
      d.orientation_ok = false;
      fail("interior face normal does not point out of the owner");
    }
    // Both elements must see the face at distance h/2 along the face axis
    // and share the in-plane center coordinates.
    for (int c = 0; c < 3; ++c) {
      double to = std::abs(f.center[c] - co[c]);
      double tn = std::abs(f.center[c] - cn[c]);
      double expect = (c == f.axis) ? 0.5 * h : 0.0;
      if (std::abs(to - expect) > 1e-12 || std::abs(tn - expect) > 1e-12) {
        d.planes_ok = false;
        fail("incident elements disagree on the face plane");
      }
    }
  }
  for (const Face &f : mesh.boundary_faces) {
    if (f.owner < 0 || f.owner >= ne || f.neighbor != -1) {
      d.incidence_ok = false;
      fail("boundary face with bad incidence");
      continue;
    }
    const Vec3 &co = mesh.elements[f.owner].center;
    if (f.normal.dot(f.center - co) <= 0) {
      d.orientation_ok = false;
      fail("boundary face normal does not point outward");
    }
    for (int c = 0; c < 3; ++c) {
      double expect = (c == f.axis) ? 0.5 * h : 0.0;
      if (std::abs(std::abs(f.center[c] - co[c]) - expect) > 1e-12) {
        d.planes_ok = false;
        fail("boundary face center off the owner surface");
      }
    }
    double plane = f.center[f.axis];
    if (std::abs(plane) > 1e-12 && std::abs(plane - 1.0) > 1e-12) {
      d.planes_ok = false;
      fail("boundary face not on the domain boundary");
    }
  }

  // Closed-surface identity: the six outward face normals of each element,
  // weighted by area, sum to zero.
  std::vector<Vec3> sums(mesh.elements.size(), Vec3::Zero());
  const double area = h * h;
  for (const Face &f : mesh.interior_faces) {
    sums[f.owner] += area * f.normal;
    sums[f.neighbor] -= area * f.normal;
  }
  for (const Face &f : mesh.boundary_faces)
    sums[f.owner] += area * f.normal;
  d.max_normal_sum = 0.0;
  for (const Vec3 &s : sums)
    d.max_normal_sum = std::max(d.max_normal_sum, s.norm());
  d.closure_ok = d.max_normal_sum <= 1e-15 * 6.0 * area * std::max(1, m);
  if (!d.closure_ok)
    fail("per-element normal closure violated");

  return d;
}

} // namespace ipdg
