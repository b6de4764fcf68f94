#pragma once

#include "stdg/common.hpp"

#include <map>
#include <vector>

namespace stdg {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

struct IsotropicMaterial {
  double lambda = 0.0;
  double mu = 0.0;
  double rho = 0.0;

  static IsotropicMaterial from_speeds(double cp, double cs, double rho);
  /// Throws ConfigError unless mu > 0, rho > 0 and lambda + mu > 0.
  void validate() const;
  bool operator==(const IsotropicMaterial&) const = default;
};

/// Plane-strain stiffness acting on (exx, eyy, exy) and producing
/// (sxx, syy, sxy); the shear slot carries 2 mu.
struct Stiffness2D {
  Mat3 E;
  Mat3 E_inv;
};

Stiffness2D stiffness_from_lame(const IsotropicMaterial& m);

struct WaveSpeeds {
  double cp;
  double cs;
};
WaveSpeeds wave_speeds(const IsotropicMaterial& m);

/// Weight restoring the tensor double contraction from Voigt vectors.
inline const Mat3& voigt_weight() {
  static const Mat3 w = Vec3(1.0, 1.0, 2.0).asDiagonal();
  return w;
}

/// sigma : E^{-1} sigma for a Voigt stress vector.
double strain_energy_density(const Vec3& sigma, const Stiffness2D& s);

/// Piecewise-constant materials: rho per primal element, stiffness per dual cell.
struct MaterialField {
  std::vector<IsotropicMaterial> element;
  std::vector<IsotropicMaterial> cell;
  std::vector<Stiffness2D> cell_stiffness;
};

/// Looks up each element's region and each cell's region in `table`.
/// Throws ConfigError for a region without a material.
MaterialField make_material_field(const std::vector<int>& element_region, const std::vector<int>& cell_region,
                                  const std::map<int, IsotropicMaterial>& table);

}  // namespace stdg
