#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "dgtd/experiments.hpp"
#include "dgtd/stability.hpp"
#include "oracles.hpp"

using namespace dgtd;

namespace {

BoundInputs sample_inputs() {
  BoundInputs in;
  in.order = 2;
  in.h_min = 0.3;
  in.eps_lower = 2.0;
  in.mu_lower = 1.0;
  in.z_min = 0.5;
  in.y_min = 1.5;
  in.alpha = 0.0;
  in.bc = BoundaryCondition::kPec;
  in.c_inv = 9.0;
  in.c_tau = 2.2;
  return in;
}

}  // namespace

TEST(TraceConstant, ClosedForm) {
  EXPECT_NEAR(trace_constant_exact(1, 2.0, 2.0, 2), std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(trace_constant_exact(1, 1.0, 1.0, 3), std::sqrt(8.0 / 3.0), 1e-14);
  EXPECT_THROW(trace_constant_exact(1, 1.0, 1.0, 4), DomainError);
  EXPECT_THROW(trace_constant_exact(1, 0.0, 1.0, 2), DomainError);
}

TEST(TraceConstant, SharpOnEdgesOfReferenceTriangle) {
  // max over P_N of ||u||_f^2 / ||u||_T^2 by a dense eigenproblem equals the closed form squared
  for (int n = 1; n <= 4; ++n) {
    const ReferenceElement ref(n);
    for (int f = 0; f < 3; ++f) {
      const double face_len = f == 1 ? 2.0 * std::sqrt(2.0) : 2.0;
      // face mass in volume nodes, scaled from edge coordinates to arc length
      Matrix fm = Matrix::Zero(ref.node_count(), ref.node_count());
      const auto& idx = ref.face_nodes()[f];
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) fm(idx[i], idx[j]) = ref.face_mass_1d(f)(i, j) * face_len / 2.0;
      }
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(fm, ref.mass(), Eigen::EigenvaluesOnly);
      const double want = trace_constant_exact(n, face_len, 2.0, 2);
      EXPECT_NEAR(std::sqrt(eig.eigenvalues().maxCoeff()), want, 1e-9) << n << " face " << f;
    }
  }
}

TEST(TraceConstant, CalibratedCtauRightTriangle) {
  const Mesh2D m = make_mesh({{0, 0}, {2, 0}, {0, 2}}, {{0, 1, 2}});
  EXPECT_NEAR(calibrate_c_tau(m), std::sqrt(2.0 * std::sqrt(2.0) * (4.0 + 2.0 * std::sqrt(2.0)) / 4.0), 1e-13);
  EXPECT_NEAR(calibrate_c_tau(m), 2.19737, 1e-5);
}

TEST(TraceConstant, CtauIndependentOfRefinement) {
  const double c5 = calibrate_c_tau(structured_square_mesh(5, -1, 1, -1, 1, Diagonal::kSouthEastNorthWest));
  for (int n : {10, 20, 40}) {
    EXPECT_NEAR(calibrate_c_tau(structured_square_mesh(n, -1, 1, -1, 1, Diagonal::kSouthEastNorthWest)), c5, 1e-12);
  }
}

TEST(TraceConstant, TraceInequalityHoldsForRandomPolynomials) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  const Mesh2D mesh = structured_square_mesh(2, -1, 1, -1, 1, Diagonal::kSouthEastNorthWest);
  const double ctau = calibrate_c_tau(mesh);
  for (int n = 1; n <= 4; ++n) {
    const ReferenceElement ref(n);
    const MaterialMap mat = MaterialMap::uniform(mesh.element_count(), PermittivityTensor::isotropic(1.0), 1.0);
    const DgOperator op(ref, mesh, mat, {0.0, BoundaryCondition::kPec});
    for (int k = 0; k < mesh.element_count(); ++k) {
      const oracle::ElementPolys p = oracle::element_polys(op, k);
      const auto quad = oracle::triangle_quadrature(mesh.vertex(k, 0), mesh.vertex(k, 1), mesh.vertex(k, 2), n + 2);
      const auto [gx, gw] = oracle::gauss_legendre(n + 2);
      for (int t = 0; t < 50; ++t) {
        Vector u(ref.node_count());
        for (int i = 0; i < u.size(); ++i) u(i) = g(rng);
        double vol = 0.0, bnd = 0.0;
        for (const auto& q : quad) vol += q.w * std::pow(p.eval(u, q.x, q.y), 2);
        for (int f = 0; f < 3; ++f) {
          const Point2 a = mesh.vertex(k, f), b = mesh.vertex(k, (f + 1) % 3);
          for (std::size_t i = 0; i < gx.size(); ++i) {
            const double s = 0.5 * (gx[i] + 1.0);
            bnd += 0.5 * gw[i] * mesh.edge_length[k][f] * std::pow(p.eval(u, a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)), 2);
          }
        }
        EXPECT_LE(std::sqrt(bnd), ctau * std::sqrt((n + 1.0) * (n + 2.0) / mesh.h[k] * vol) * (1 + 1e-12));
      }
    }
  }
}

TEST(InverseConstant, LinearCaseMatchesMonomialOracle) {
  // reference triangle, P1 in monomials {1, r, s}: mass and H1 forms by quadrature
  oracle::MonomialSpace space(1, 0.0, 0.0, 1.0);
  Matrix m = Matrix::Zero(3, 3), a = Matrix::Zero(3, 3);
  for (const auto& q : oracle::triangle_quadrature({-1, -1}, {1, -1}, {-1, 1}, 4)) {
    const Vector v = space.values(q.x, q.y), dx = space.dx(q.x, q.y), dy = space.dy(q.x, q.y);
    m += q.w * v * v.transpose();
    a += q.w * (v * v.transpose() + dx * dx.transpose() + dy * dy.transpose());
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(a, m, Eigen::EigenvaluesOnly);
  const double want = 2.0 * std::sqrt(2.0) * std::sqrt(eig.eigenvalues().maxCoeff());
  EXPECT_NEAR(calibrate_c_inv(1).per_order[0], want, 1e-10);
}

TEST(InverseConstant, BoundedAcrossOrders) {
  const InverseConstants c = calibrate_c_inv(8);
  ASSERT_EQ(c.per_order.size(), 8u);
  for (std::size_t i = 0; i < c.per_order.size(); ++i) {
    EXPECT_GT(c.per_order[i], 0.0);
    EXPECT_LT(c.per_order[i], 20.0);
    if (i > 0) EXPECT_LE(c.per_order[i], c.per_order[i - 1] * 1.0001) << "N=" << i + 1;
  }
  EXPECT_DOUBLE_EQ(c.value, c.per_order[0]);
  EXPECT_THROW(calibrate_c_inv(0), DomainError);
}

TEST(InverseConstant, InverseInequalityHoldsForRandomPolynomials) {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g;
  const Mesh2D mesh = structured_square_mesh(2, -1, 1, -1, 1, Diagonal::kSouthEastNorthWest);
  const double cinv = calibrate_c_inv(mesh, 4).value;
  for (int n = 1; n <= 4; ++n) {
    const ReferenceElement ref(n);
    const MaterialMap mat = MaterialMap::uniform(mesh.element_count(), PermittivityTensor::isotropic(1.0), 1.0);
    const DgOperator op(ref, mesh, mat, {0.0, BoundaryCondition::kPec});
    for (int k = 0; k < mesh.element_count(); ++k) {
      const oracle::ElementPolys p = oracle::element_polys(op, k);
      const auto quad = oracle::triangle_quadrature(mesh.vertex(k, 0), mesh.vertex(k, 1), mesh.vertex(k, 2), n + 2);
      for (int t = 0; t < 50; ++t) {
        Vector u(ref.node_count());
        for (int i = 0; i < u.size(); ++i) u(i) = g(rng);
        double l2 = 0.0, h1 = 0.0;
        for (const auto& q : quad) {
          const double v = p.eval(u, q.x, q.y), dx = p.eval_dx(u, q.x, q.y), dy = p.eval_dy(u, q.x, q.y);
          l2 += q.w * v * v;
          h1 += q.w * (v * v + dx * dx + dy * dy);
        }
        EXPECT_LE(std::sqrt(h1), cinv * n * n / mesh.h[k] * std::sqrt(l2) * (1 + 1e-12));
      }
    }
  }
}

TEST(Beta, TableValues) {
  const BetaParams pec = beta_params(BoundaryCondition::kPec, 1.0);
  EXPECT_EQ(pec.beta1, 1.0);
  EXPECT_EQ(pec.beta2, 0.0);
  EXPECT_EQ(pec.beta3, 0.0);
  const BetaParams pmc = beta_params(BoundaryCondition::kPmc, 0.0);
  EXPECT_EQ(pmc.beta1, 0.0);
  EXPECT_EQ(pmc.beta2, 1.0);
  EXPECT_EQ(pmc.beta3, 0.0);
  const BetaParams sm = beta_params(BoundaryCondition::kSilverMuller, 0.0);
  EXPECT_EQ(sm.beta1, 0.5);
  EXPECT_EQ(sm.beta2, 0.5);
  EXPECT_EQ(sm.beta3, 1.0);
}

TEST(Bound2d, FormulaByHand) {
  BoundInputs in = sample_inputs();
  in.alpha = 0.5;
  in.bc = BoundaryCondition::kPmc;
  const StabilityConstants c = stability_bound_2d(in);
  const double inv = 0.5 * 9.0 * 4.0, tr = 2.2 * 2.2 * 12.0;
  EXPECT_NEAR(c.c_e, inv + tr * (2.0 + 1.0 + (1.0 + 0.0) / 1.0), 1e-12);
  EXPECT_NEAR(c.c_h, inv + tr * (2.0 + 1.0 + (0.5 + 0.5) / 1.5), 1e-12);
  EXPECT_NEAR(c.dt_bound, 1.0 * 0.3 / std::max(c.c_e, c.c_h), 1e-15);
}

TEST(Bound2d, Monotonicity) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.2, 3.0), a(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    BoundInputs in = sample_inputs();
    in.order = 1 + t % 5;
    in.h_min = u(rng), in.eps_lower = u(rng), in.mu_lower = u(rng), in.z_min = u(rng), in.y_min = u(rng);
    in.c_inv = 5 * u(rng), in.c_tau = u(rng), in.alpha = a(rng);
    in.bc = t % 3 == 0 ? BoundaryCondition::kPec : t % 3 == 1 ? BoundaryCondition::kPmc : BoundaryCondition::kSilverMuller;
    const double base = stability_bound_2d(in).dt_bound;
    auto with = [&](auto edit) {
      BoundInputs m = in;
      edit(m);
      return stability_bound_2d(m).dt_bound;
    };
    EXPECT_LE(with([](BoundInputs& m) { m.alpha = std::min(1.0, m.alpha + 0.2); }), base * (1 + 1e-14));
    EXPECT_LT(with([](BoundInputs& m) { m.order += 1; }), base);
    EXPECT_LT(with([](BoundInputs& m) { m.c_inv *= 1.5; }), base);
    EXPECT_GE(with([](BoundInputs& m) { m.eps_lower *= 1.5; }), base);
    EXPECT_GE(with([](BoundInputs& m) { m.mu_lower *= 1.5; }), base);
    EXPECT_GT(with([](BoundInputs& m) { m.h_min *= 1.5; }), base);
    EXPECT_NEAR(with([](BoundInputs& m) { m.h_min *= 0.5; }), 0.5 * base, 1e-15 * base);
  }
}

TEST(Bound2d, CentralAllowsLargerStepThanUpwind) {
  BoundInputs in = sample_inputs();
  const double central = stability_bound_2d(in).dt_bound;
  in.alpha = 1.0;
  EXPECT_GT(central, stability_bound_2d(in).dt_bound);
}

TEST(Bound2d, RejectsNonPositiveInputs) {
  BoundInputs in = sample_inputs();
  in.h_min = 0.0;
  EXPECT_THROW(stability_bound_2d(in), DomainError);
  in = sample_inputs();
  in.c_tau = -1.0;
  EXPECT_THROW(stability_bound_3d(in), DomainError);
  in = sample_inputs();
  in.alpha = 1.5;
  EXPECT_THROW(stability_bound_2d(in), DomainError);
  in = sample_inputs();
  in.order = 0;
  EXPECT_THROW(stability_bound_2d(in), DomainError);
}

TEST(Bound3d, TraceFactorRatio) {
  BoundInputs in = sample_inputs();
  in.c_inv = 1e-300;  // isolates the trace part
  for (int n = 1; n <= 5; ++n) {
    in.order = n;
    const StabilityConstants c2 = stability_bound_2d(in), c3 = stability_bound_3d(in);
    // PEC alpha = 0: 2D bracket 2, 3D bracket 3
    EXPECT_NEAR(c3.c_e / c2.c_e, (n + 3.0) / (n + 2.0) * 3.0 / 2.0, 1e-12);
  }
  in = sample_inputs();
  BoundInputs up = in;
  up.alpha = 1.0;
  EXPECT_GT(stability_bound_3d(in).dt_bound, stability_bound_3d(up).dt_bound);
}

TEST(Bound, PinnedCavityValues) {
  // 5x5 structured mesh on [-1,1]^2, eps = [[5,1],[1,3]], mu = 1, PEC, central flux
  StabilityCase c;
  c.order = 1;
  const CaseContext ctx(c);
  const BoundInputs in = bound_inputs(ctx.op());
  EXPECT_NEAR(in.h_min, 0.565685424949, 1e-11);
  EXPECT_NEAR(in.eps_lower, 4.0 - std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(in.c_tau, 2.19736822694, 1e-10);
  EXPECT_NEAR(in.c_inv, 8.94427191, 1e-8);
  const StabilityConstants b2 = stability_bound_2d(in);
  EXPECT_NEAR(b2.c_e, 62.413261452, 1e-8);
  EXPECT_NEAR(b2.c_h, 62.413261452, 1e-8);
  EXPECT_NEAR(b2.dt_bound, 0.00906354533939, 1e-13);
  const StabilityConstants b3 = stability_bound_3d(in);
  EXPECT_NEAR(b3.dt_bound, 0.00470016456641, 1e-13);
}
