#pragma once

// Piecewise-constant material data: anisotropic permittivity tensor and
// scalar permeability per element, plus the face-wise wave speeds and
// impedances the numerical flux needs.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dgtd/errors.hpp"
#include "dgtd/mesh.hpp"

namespace dgtd {

struct PermittivityTensor {
  double xx = 1.0;
  double xy = 0.0;
  double yx = 0.0;
  double yy = 1.0;

  static PermittivityTensor isotropic(double eps) { return {eps, 0.0, 0.0, eps}; }

  double det() const { return xx * yy - xy * yx; }

  /// n^T eps n
  double quadratic_form(Point2 n) const { return n.x * (xx * n.x + xy * n.y) + n.y * (yx * n.x + yy * n.y); }

  bool is_symmetric(double tol = 1e-14) const { return std::abs(xy - yx) <= tol * std::max(1.0, std::abs(xy)); }
  bool is_positive_definite() const { return xx > 0.0 && det() > 0.0; }

  PermittivityTensor inverse() const {
    const double d = det();
    return {yy / d, -xy / d, -yx / d, xx / d};
  }

  /// Extreme eigenvalues of the symmetric 2x2 tensor.
  std::pair<double, double> eigen_range() const {
    const double mean = 0.5 * (xx + yy);
    const double radius = std::hypot(0.5 * (xx - yy), xy);
    return {mean - radius, mean + radius};
  }
};

inline void validate(const PermittivityTensor& eps) {
  if (!std::isfinite(eps.xx) || !std::isfinite(eps.xy) || !std::isfinite(eps.yx) || !std::isfinite(eps.yy)) {
    throw MaterialError("permittivity tensor has non-finite entries");
  }
  if (!eps.is_symmetric()) throw MaterialError("permittivity tensor is not symmetric");
  if (!eps.is_positive_definite()) throw MaterialError("permittivity tensor is not positive definite");
}

/// det(eps) / (n^T eps n)
inline double effective_permittivity(const PermittivityTensor& eps, Point2 n) {
  validate(eps);
  return eps.det() / eps.quadratic_form(n);
}

/// Speed of a wave travelling along n: sqrt(n^T eps n / (mu det eps)).
inline double wave_speed(const PermittivityTensor& eps, double mu, Point2 n) {
  if (!(mu > 0.0)) throw MaterialError("permeability must be positive");
  return 1.0 / std::sqrt(mu * effective_permittivity(eps, n));
}

inline double impedance(const PermittivityTensor& eps, double mu, Point2 n) { return mu * wave_speed(eps, mu, n); }

class MaterialMap {
 public:
  MaterialMap() = default;

  MaterialMap(std::vector<PermittivityTensor> eps, std::vector<double> mu) : eps_(std::move(eps)), mu_(std::move(mu)) {
    if (eps_.size() != mu_.size()) throw MaterialError("permittivity and permeability tables differ in length");
    if (eps_.empty()) throw MaterialError("material map is empty");
    eps_inv_.reserve(eps_.size());
    eps_lower_ = mu_lower_ = std::numeric_limits<double>::infinity();
    eps_upper_ = mu_upper_ = 0.0;
    for (std::size_t k = 0; k < eps_.size(); ++k) {
      try {
        validate(eps_[k]);
      } catch (const MaterialError& e) {
        throw MaterialError("element " + std::to_string(k) + ": " + e.what());
      }
      if (!(mu_[k] > 0.0) || !std::isfinite(mu_[k])) {
        throw MaterialError("element " + std::to_string(k) + ": permeability must be positive");
      }
      eps_inv_.push_back(eps_[k].inverse());
      const auto [lo, hi] = eps_[k].eigen_range();
      eps_lower_ = std::min(eps_lower_, lo);
      eps_upper_ = std::max(eps_upper_, hi);
      mu_lower_ = std::min(mu_lower_, mu_[k]);
      mu_upper_ = std::max(mu_upper_, mu_[k]);
    }
  }

  static MaterialMap uniform(int element_count, const PermittivityTensor& eps, double mu) {
    return {std::vector<PermittivityTensor>(element_count, eps), std::vector<double>(element_count, mu)};
  }

  int size() const { return static_cast<int>(eps_.size()); }
  const PermittivityTensor& eps(int k) const { return eps_[k]; }
  const PermittivityTensor& eps_inv(int k) const { return eps_inv_[k]; }
  double mu(int k) const { return mu_[k]; }

  double eps_lower() const { return eps_lower_; }
  double eps_upper() const { return eps_upper_; }
  double mu_lower() const { return mu_lower_; }
  double mu_upper() const { return mu_upper_; }

 private:
  std::vector<PermittivityTensor> eps_;
  std::vector<PermittivityTensor> eps_inv_;
  std::vector<double> mu_;
  double eps_lower_ = 0.0, eps_upper_ = 0.0, mu_lower_ = 0.0, mu_upper_ = 0.0;
};

/// Per-element material table: one line per element,
/// `k eps_xx eps_xy eps_yx eps_yy mu`. Blank lines and `#` comments are skipped.
inline MaterialMap load_material_table(const std::filesystem::path& path, int element_count) {
  std::ifstream in(path);
  if (!in) throw MaterialError("cannot open material table: " + path.string());
  std::vector<PermittivityTensor> eps(element_count);
  std::vector<double> mu(element_count);
  std::vector<bool> seen(element_count, false);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    int k = 0;
    if (!(fields >> k)) continue;
    PermittivityTensor e;
    double m = 0.0;
    if (!(fields >> e.xx >> e.xy >> e.yx >> e.yy >> m)) {
      throw MaterialError(path.string() + ":" + std::to_string(line_no) + ": expected 'k exx exy eyx eyy mu'");
    }
    if (k < 0 || k >= element_count) {
      throw MaterialError(path.string() + ":" + std::to_string(line_no) + ": element index " + std::to_string(k) +
                          " out of range");
    }
    eps[k] = e;
    mu[k] = m;
    seen[k] = true;
  }
  for (int k = 0; k < element_count; ++k) {
    if (!seen[k]) throw MaterialError(path.string() + ": no entry for element " + std::to_string(k));
  }
  return {std::move(eps), std::move(mu)};
}

/// Wave speed, impedance and conductance on both sides of one face.
/// "minus" is the owning element, "plus" the neighbour.
struct FaceImpedance {
  double c_minus = 0.0, c_plus = 0.0;
  double z_minus = 0.0, z_plus = 0.0;
  double y_minus = 0.0, y_plus = 0.0;
};

/// Impedances for every (element, face). Boundary faces copy the interior
/// side to the exterior (Z+ = Z-).
inline std::vector<std::array<FaceImpedance, 3>> face_impedances(const MaterialMap& materials, const Mesh2D& mesh) {
  if (materials.size() != mesh.element_count()) {
    throw MaterialError("material map has " + std::to_string(materials.size()) + " entries for " +
                        std::to_string(mesh.element_count()) + " elements");
  }
  std::vector<std::array<FaceImpedance, 3>> table(mesh.element_count());
  for (int k = 0; k < mesh.element_count(); ++k) {
    for (int f = 0; f < 3; ++f) {
      const Point2 n = mesh.normals[k][f];
      FaceImpedance& fi = table[k][f];
      fi.c_minus = wave_speed(materials.eps(k), materials.mu(k), n);
      fi.z_minus = materials.mu(k) * fi.c_minus;
      const FaceRef nb = mesh.neighbor[k][f];
      if (nb.element == kBoundary) {
        fi.c_plus = fi.c_minus;
        fi.z_plus = fi.z_minus;
      } else {
        fi.c_plus = wave_speed(materials.eps(nb.element), materials.mu(nb.element), n);
        fi.z_plus = materials.mu(nb.element) * fi.c_plus;
      }
      fi.y_minus = 1.0 / fi.z_minus;
      fi.y_plus = 1.0 / fi.z_plus;
    }
  }
  return table;
}

/// Smallest impedance and conductance over all element/face pairs.
struct ImpedanceBounds {
  double z_min = 0.0;
  double y_min = 0.0;
};

inline ImpedanceBounds impedance_bounds(const std::vector<std::array<FaceImpedance, 3>>& table) {
  ImpedanceBounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (const auto& faces : table) {
    for (const FaceImpedance& fi : faces) {
      b.z_min = std::min(b.z_min, fi.z_minus);
      b.y_min = std::min(b.y_min, fi.y_minus);
    }
  }
  return b;
}

}  // namespace dgtd
