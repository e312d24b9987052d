#pragma once

#include <string>
#include <vector>

#include "ipdg/common.hpp"

namespace ipdg {

enum class FaceKind { Interior, Boundary };

struct Element {
  int i = 0, j = 0, l = 0; // grid coordinates in [0,m)^3
  Vec3 center;
};

/// Axis-aligned square face of the Cartesian mesh. For interior faces the
/// owner is the element with the larger global label and `normal` is the
/// owner's outward normal; for boundary faces `normal` is the outward normal
/// of the domain and `neighbor` is -1.
struct Face {
  int axis = 0; // 0=x, 1=y, 2=z
  FaceKind kind = FaceKind::Interior;
  int owner = -1;
  int neighbor = -1;
  Vec3 normal;
  Vec3 center;
  double h_f = 0.0;
};

/// Uniform m x m x m partition of the unit cube. Element label = position in
/// `elements`. Immutable after construction; safe for concurrent reads.
struct CartesianMesh {
  int m = 0;
  double h = 0.0;
  std::vector<Element> elements;
  std::vector<Face> interior_faces;
  std::vector<Face> boundary_faces;

  int element_count() const { return m * m * m; }
  /// Lexicographic linear index e = i + j*m + l*m^2 (the standard labeling).
  int linear_index(int i, int j, int l) const { return i + j * m + l * m * m; }
};

/// Builds the standard mesh with lexicographic element labels.
/// Throws InvalidParameter for m < 1.
CartesianMesh build_mesh(int m);

/// Same geometry with reversed element labels e -> m^3-1-e; faces are rebuilt
/// so the owner convention holds under the new labels (every interior normal
/// flips). Used by the assembly labeling-invariance check.
CartesianMesh relabel_reversed(const CartesianMesh &mesh);

struct MeshDiagnostics {
  bool counts_ok = false;        // element/face counts match m
  bool incidence_ok = false;     // interior faces reference two distinct
                                 // elements, boundary faces one
  bool orientation_ok = false;   // normals honor the owner convention
  bool planes_ok = false;        // both incident elements agree on the face
                                 // plane
  bool closure_ok = false;       // per-element sum of signed normal*area = 0
  double max_normal_sum = 0.0;   // worst element closure defect
  std::string detail;            // first failure description, empty when clean

  bool pass() const {
    return counts_ok && incidence_ok && orientation_ok && planes_ok &&
           closure_ok;
  }
};

/// Diagnostics only; never throws.
MeshDiagnostics validate_mesh(const CartesianMesh &mesh);

} // namespace ipdg
