#include "stdg/material.hpp"

#include <cmath>

namespace stdg {

IsotropicMaterial IsotropicMaterial::from_speeds(double cp, double cs, double rho) {
  IsotropicMaterial m;
  m.rho = rho;
  m.mu = rho * cs * cs;
  m.lambda = rho * cp * cp - 2.0 * m.mu;
  return m;
}

void IsotropicMaterial::validate() const {
  if (!(mu > 0.0) || !(rho > 0.0) || !(lambda + mu > 0.0))
    throw ConfigError("inadmissible material (lambda=" + std::to_string(lambda) + ", mu=" + std::to_string(mu) +
                      ", rho=" + std::to_string(rho) + "): need mu > 0, rho > 0, lambda + mu > 0");
}

Stiffness2D stiffness_from_lame(const IsotropicMaterial& m) {
  m.validate();
  const double l = m.lambda, mu = m.mu;
  Stiffness2D s;
  s.E << l + 2 * mu, l, 0, l, l + 2 * mu, 0, 0, 0, 2 * mu;
  // 2x2 normal block [[a, b], [b, a]] has determinant 4 mu (lambda + mu)
  const double a = l + 2 * mu, det = a * a - l * l;
  s.E_inv << a / det, -l / det, 0, -l / det, a / det, 0, 0, 0, 1.0 / (2 * mu);
  return s;
}

WaveSpeeds wave_speeds(const IsotropicMaterial& m) {
  m.validate();
  return {std::sqrt((m.lambda + 2 * m.mu) / m.rho), std::sqrt(m.mu / m.rho)};
}

double strain_energy_density(const Vec3& sigma, const Stiffness2D& s) {
  const Vec3 eps = s.E_inv * sigma;
  return sigma[0] * eps[0] + sigma[1] * eps[1] + 2.0 * sigma[2] * eps[2];
}

MaterialField make_material_field(const std::vector<int>& element_region, const std::vector<int>& cell_region,
                                  const std::map<int, IsotropicMaterial>& table) {
  auto lookup = [&](int region) {
    const auto it = table.find(region);
    if (it == table.end()) throw ConfigError("no material given for region " + std::to_string(region));
    return it->second;
  };
  MaterialField field;
  for (int r : element_region) field.element.push_back(lookup(r));
  for (int r : cell_region) {
    field.cell.push_back(lookup(r));
    field.cell_stiffness.push_back(stiffness_from_lame(field.cell.back()));
  }
  return field;
}

}  // namespace stdg
