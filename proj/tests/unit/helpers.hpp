#pragma once

#include "stdg/io.hpp"

#include <random>
#include <sstream>

namespace stdg::test {

/// Unit square split by the diagonal (1,0)-(0,1).
inline PrimalMesh two_triangle_square(bool periodic = false) {
  std::istringstream in(periodic ? "NODES 4\n0 0\n1 0\n1 1\n0 1\nTRIANGLES 2\n0 1 3 0\n1 2 3 0\nPERIODIC BOX 0 1 0 1\n"
                                 : "NODES 4\n0 0\n1 0\n1 1\n0 1\nTRIANGLES 2\n0 1 3 0\n1 2 3 0\n");
  return parse_native_mesh(in);
}

/// Periodic perturbed box of 2 n^2 triangles on [-1.5, 1.5]^2.
inline PrimalMesh periodic_box(int n, double perturbation = 0.1, unsigned seed = 3) {
  return structured_box_mesh(-1.5, 1.5, -1.5, 1.5, n, n, perturbation, seed, true);
}

inline MaterialField uniform_material(const Discretization& disc, IsotropicMaterial m = {2.0, 1.0, 1.0}) {
  return build_material_field(disc, {{0, m}});
}

inline Vector random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = u(gen);
  return v;
}

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace stdg::test
