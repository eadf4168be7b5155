#pragma once

// Semi-discrete nodal DG operator for the 2D TE Maxwell system
//
//   eps dE/dt = (d_y Hz, -d_x Hz),   mu dHz/dt = d_y Ex - d_x Ey,
//
// with the alpha-weighted impedance flux (alpha = 0 central, alpha = 1 upwind)
// and PEC / PMC / Silver-Muller boundary treatment.

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "dgtd/errors.hpp"
#include "dgtd/materials.hpp"
#include "dgtd/mesh.hpp"
#include "dgtd/parallel.hpp"
#include "dgtd/reference_element.hpp"

namespace dgtd {

enum class BoundaryCondition { kPec, kPmc, kSilverMuller };

inline std::string_view to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::kPec:
      return "pec";
    case BoundaryCondition::kPmc:
      return "pmc";
    case BoundaryCondition::kSilverMuller:
      return "sm";
  }
  return "?";
}

inline BoundaryCondition parse_boundary_condition(std::string_view name) {
  if (name == "pec" || name == "PEC") return BoundaryCondition::kPec;
  if (name == "pmc" || name == "PMC") return BoundaryCondition::kPmc;
  if (name == "sm" || name == "SM" || name == "silver-muller" || name == "silver_muller") {
    return BoundaryCondition::kSilverMuller;
  }
  throw ConfigError("unknown boundary condition '" + std::string(name) + "' (expected pec, pmc or sm)");
}

struct FluxParams {
  double alpha = 0.0;
  BoundaryCondition bc = BoundaryCondition::kPec;
};

inline void validate(const FluxParams& p) {
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) {
    throw ConfigError("flux parameter alpha=" + std::to_string(p.alpha) + " outside [0, 1]");
  }
}

/// Staggered solution: E at t = step*dt, Hz at t = (step + 1/2)*dt.
/// Each field is Np x K, one column per element.
struct FieldState {
  Matrix ex;
  Matrix ey;
  Matrix hz;
  long long step = 0;
  double dt = 0.0;

  static FieldState zero(int np, int k, double dt = 0.0) {
    return {Matrix::Zero(np, k), Matrix::Zero(np, k), Matrix::Zero(np, k), 0, dt};
  }

  double time_e() const { return static_cast<double>(step) * dt; }
  double time_h() const { return (static_cast<double>(step) + 0.5) * dt; }

  bool all_finite() const { return ex.allFinite() && ey.allFinite() && hz.allFinite(); }
};

struct Jumps {
  double ex = 0.0;
  double ey = 0.0;
  double hz = 0.0;
};

struct TraceValues {
  double ex = 0.0;
  double ey = 0.0;
  double hz = 0.0;
};

struct FluxValues {
  double ex = 0.0;
  double ey = 0.0;
  double hz = 0.0;
};

struct BoundaryGhost {
  TraceValues exterior;
  Jumps jumps;
  double alpha_face = 0.0;
};

/// Exterior state on a boundary face. Silver-Muller uses a zero exterior state
/// together with the upwind weight alpha_face = 1 whatever the interior alpha.
inline BoundaryGhost boundary_ghost(BoundaryCondition bc, double alpha, TraceValues in) {
  BoundaryGhost g;
  switch (bc) {
    case BoundaryCondition::kPec:
      g.exterior = {-in.ex, -in.ey, in.hz};
      g.alpha_face = alpha;
      break;
    case BoundaryCondition::kPmc:
      g.exterior = {in.ex, in.ey, -in.hz};
      g.alpha_face = alpha;
      break;
    case BoundaryCondition::kSilverMuller:
      g.exterior = {0.0, 0.0, 0.0};
      g.alpha_face = 1.0;
      break;
  }
  g.jumps = {in.ex - g.exterior.ex, in.ey - g.exterior.ey, in.hz - g.exterior.hz};
  return g;
}

/// n . (F - F*) for the three equations, given jumps [q] = q- - q+.
inline FluxValues numerical_flux(const Jumps& j, Point2 n, double z_minus, double z_plus, double y_minus,
                                 double y_plus, double alpha_face) {
  const double tangential_e = n.x * j.ey - n.y * j.ex;
  const double e_term = (z_plus * j.hz - alpha_face * tangential_e) / (z_plus + z_minus);
  return {-n.y * e_term, n.x * e_term, (y_plus * tangential_e - alpha_face * j.hz) / (y_plus + y_minus)};
}

inline FluxValues numerical_flux(const Jumps& j, Point2 n, const FaceImpedance& fi, double alpha_face) {
  return numerical_flux(j, n, fi.z_minus, fi.z_plus, fi.y_minus, fi.y_plus, alpha_face);
}

/// Interior and exterior traces on the three faces of one element. Row
/// f*Nfp + j is node j of face f (reference face-node order).
struct TraceData {
  Matrix minus;  // 3*Nfp x 3 columns (Ex, Ey, Hz)
  Matrix plus;
  std::array<double, 3> alpha_face{};

  Jumps jump(int row) const {
    return {minus(row, 0) - plus(row, 0), minus(row, 1) - plus(row, 1), minus(row, 2) - plus(row, 2)};
  }
};

struct SpatialRhs {
  Matrix ex;
  Matrix ey;
  Matrix hz;
};

/// Precomputed operator for one (reference element, mesh, materials, flux)
/// combination. Immutable after construction; evaluation is a pure function
/// of the state and can be shared between threads.
class DgOperator {
 public:
  DgOperator(const ReferenceElement& ref, const Mesh2D& mesh, const MaterialMap& materials, FluxParams flux,
             int threads = 1)
      : ref_(&ref), mesh_(&mesh), materials_(&materials), flux_(flux), threads_(std::max(1, threads)) {
    validate(flux_);
    if (materials.size() != mesh.element_count()) {
      throw MaterialError("material map size does not match the mesh");
    }
    impedance_ = face_impedances(materials, mesh);
    build_node_coordinates();
    build_face_maps();
  }

  const ReferenceElement& reference() const { return *ref_; }
  const Mesh2D& mesh() const { return *mesh_; }
  const MaterialMap& materials() const { return *materials_; }
  const FluxParams& flux() const { return flux_; }
  const std::vector<std::array<FaceImpedance, 3>>& impedances() const { return impedance_; }
  int node_count() const { return ref_->node_count(); }
  int element_count() const { return mesh_->element_count(); }
  int threads() const { return threads_; }

  /// Physical node coordinates, Np x K each.
  const Matrix& x() const { return x_; }
  const Matrix& y() const { return y_; }

  /// Exterior trace location of (element, face, face node): element and
  /// volume node index, or element == kBoundary.
  struct NodeRef {
    int element = kBoundary;
    int node = -1;
  };
  NodeRef exterior_node(int k, int f, int j) const { return plus_map_[k][f * ref_->face_node_count() + j]; }

  TraceData gather_traces(const FieldState& state, int k) const {
    const int nfp = ref_->face_node_count();
    TraceData t;
    t.minus.resize(3 * nfp, 3);
    t.plus.resize(3 * nfp, 3);
    for (int f = 0; f < 3; ++f) {
      const bool boundary = mesh_->neighbor[k][f].element == kBoundary;
      t.alpha_face[f] = flux_.alpha;
      for (int j = 0; j < nfp; ++j) {
        const int row = f * nfp + j;
        const int vm = ref_->face_nodes()[f][j];
        const TraceValues in{state.ex(vm, k), state.ey(vm, k), state.hz(vm, k)};
        t.minus.row(row) << in.ex, in.ey, in.hz;
        if (boundary) {
          const BoundaryGhost g = boundary_ghost(flux_.bc, flux_.alpha, in);
          t.plus.row(row) << g.exterior.ex, g.exterior.ey, g.exterior.hz;
          t.alpha_face[f] = g.alpha_face;
        } else {
          const NodeRef p = plus_map_[k][row];
          t.plus.row(row) << state.ex(p.node, p.element), state.ey(p.node, p.element), state.hz(p.node, p.element);
        }
      }
    }
    return t;
  }

  /// Right-hand side of the electric equations: dE/dt from (E, Hz).
  void rhs_e(const FieldState& state, Matrix& out_ex, Matrix& out_ey) const {
    out_ex.resize(node_count(), element_count());
    out_ey.resize(node_count(), element_count());
    parallel_for_ranges(element_count(), threads_, [&](int k0, int k1) { rhs_e_range(state, k0, k1, out_ex, out_ey); });
  }

  /// Right-hand side of the magnetic equation: dHz/dt from (E, Hz).
  void rhs_h(const FieldState& state, Matrix& out_hz) const {
    out_hz.resize(node_count(), element_count());
    parallel_for_ranges(element_count(), threads_, [&](int k0, int k1) { rhs_h_range(state, k0, k1, out_hz); });
  }

  SpatialRhs spatial_rhs(const FieldState& state) const {
    SpatialRhs r;
    rhs_e(state, r.ex, r.ey);
    rhs_h(state, r.hz);
    return r;
  }

  /// sum_k int_{T_k} (E . eps E + mu Hz^2), evaluated exactly with the mass matrix.
  double discrete_energy(const FieldState& state) const {
    const Matrix& m = ref_->mass();
    double total = 0.0;
    for (int k = 0; k < element_count(); ++k) {
      const PermittivityTensor& e = materials_->eps(k);
      const auto ex = state.ex.col(k);
      const auto ey = state.ey.col(k);
      const auto hz = state.hz.col(k);
      const Vector mex = m * ex;
      const Vector mey = m * ey;
      const double local = e.xx * ex.dot(mex) + (e.xy + e.yx) * ey.dot(mex) + e.yy * ey.dot(mey) +
                           materials_->mu(k) * hz.dot(m * hz);
      total += mesh_->jacobian[k].det * local;
    }
    return total;
  }

  /// Samples f(x, y) at every node.
  template <typename Fn>
  Matrix sample(Fn&& fn) const {
    Matrix out(node_count(), element_count());
    for (int k = 0; k < element_count(); ++k) {
      for (int i = 0; i < node_count(); ++i) out(i, k) = fn(x_(i, k), y_(i, k));
    }
    return out;
  }

 private:
  void build_node_coordinates() {
    const int np = ref_->node_count(), nk = mesh_->element_count();
    x_.resize(np, nk);
    y_.resize(np, nk);
    for (int k = 0; k < nk; ++k) {
      for (int i = 0; i < np; ++i) {
        const Point2 p = mesh_->map_to_physical(k, ref_->node(i));
        x_(i, k) = p.x;
        y_(i, k) = p.y;
      }
    }
  }

  void build_face_maps() {
    const int nfp = ref_->face_node_count(), nk = mesh_->element_count();
    const auto& fnodes = ref_->face_nodes();
    plus_map_.assign(nk, std::vector<NodeRef>(3 * nfp));
    fscale_.resize(3, nk);
    for (int k = 0; k < nk; ++k) {
      for (int f = 0; f < 3; ++f) {
        fscale_(f, k) = mesh_->edge_length[k][f] / mesh_->area[k];
        const FaceRef nb = mesh_->neighbor[k][f];
        if (nb.element == kBoundary) continue;
        const double tol = 1e-9 * mesh_->edge_length[k][f];
        for (int j = 0; j < nfp; ++j) {
          const int vm = fnodes[f][j];
          int match = -1;
          for (int jj = 0; jj < nfp; ++jj) {
            const int vp = fnodes[nb.face][jj];
            if (std::hypot(x_(vm, k) - x_(vp, nb.element), y_(vm, k) - y_(vp, nb.element)) < tol) {
              match = vp;
              break;
            }
          }
          if (match < 0) {
            throw MeshError("face nodes of triangle " + std::to_string(k) + " face " + std::to_string(f) +
                            " do not match neighbour " + std::to_string(nb.element));
          }
          plus_map_[k][f * nfp + j] = {nb.element, match};
        }
      }
    }
  }

  // Face fluxes (3*Nfp x 3) of one element, already scaled by |f| / |T_k|.
  Matrix scaled_face_flux(const FieldState& state, int k) const {
    const int nfp = ref_->face_node_count();
    const TraceData t = gather_traces(state, k);
    Matrix flux(3 * nfp, 3);
    for (int f = 0; f < 3; ++f) {
      const Point2 n = mesh_->normals[k][f];
      const FaceImpedance& fi = impedance_[k][f];
      for (int j = 0; j < nfp; ++j) {
        const int row = f * nfp + j;
        const FluxValues fv = numerical_flux(t.jump(row), n, fi, t.alpha_face[f]);
        flux.row(row) << fv.ex * fscale_(f, k), fv.ey * fscale_(f, k), fv.hz * fscale_(f, k);
      }
    }
    return flux;
  }

  void rhs_e_range(const FieldState& state, int k0, int k1, Matrix& out_ex, Matrix& out_ey) const {
    const Matrix& dr = ref_->diff_r();
    const Matrix& ds = ref_->diff_s();
    const Matrix& lift = ref_->lift();
    for (int k = k0; k < k1; ++k) {
      const JacobianFactors& jf = mesh_->jacobian[k];
      const Vector hr = dr * state.hz.col(k);
      const Vector hs = ds * state.hz.col(k);
      const Matrix flux = scaled_face_flux(state, k);
      const Vector tx = jf.ry * hr + jf.sy * hs + lift * flux.col(0);
      const Vector ty = -(jf.rx * hr + jf.sx * hs) + lift * flux.col(1);
      const PermittivityTensor& inv = materials_->eps_inv(k);
      out_ex.col(k) = inv.xx * tx + inv.xy * ty;
      out_ey.col(k) = inv.yx * tx + inv.yy * ty;
    }
  }

  void rhs_h_range(const FieldState& state, int k0, int k1, Matrix& out_hz) const {
    const Matrix& dr = ref_->diff_r();
    const Matrix& ds = ref_->diff_s();
    const Matrix& lift = ref_->lift();
    for (int k = k0; k < k1; ++k) {
      const JacobianFactors& jf = mesh_->jacobian[k];
      const Vector exr = dr * state.ex.col(k), exs = ds * state.ex.col(k);
      const Vector eyr = dr * state.ey.col(k), eys = ds * state.ey.col(k);
      const Vector curl = (jf.ry * exr + jf.sy * exs) - (jf.rx * eyr + jf.sx * eys);
      const Matrix flux = scaled_face_flux(state, k);
      out_hz.col(k) = (curl + lift * flux.col(2)) / materials_->mu(k);
    }
  }

  const ReferenceElement* ref_;
  const Mesh2D* mesh_;
  const MaterialMap* materials_;
  FluxParams flux_;
  int threads_;
  std::vector<std::array<FaceImpedance, 3>> impedance_;
  Matrix x_, y_;
  std::vector<std::vector<NodeRef>> plus_map_;
  Matrix fscale_;  // 3 x K
};

}  // namespace dgtd
