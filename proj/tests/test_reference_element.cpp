#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dgtd/reference_element.hpp"
#include "oracles.hpp"

using namespace dgtd;

namespace {

// Integral over the reference triangle of r^p s^q, by an independent rule.
double reference_monomial_integral(int p, int q) {
  double sum = 0.0;
  for (const auto& pt : oracle::triangle_quadrature({-1, -1}, {1, -1}, {-1, 1}, 12)) {
    sum += pt.w * std::pow(pt.x, p) * std::pow(pt.y, q);
  }
  return sum;
}

}  // namespace

TEST(ReferenceElement, NodeCountsFollowTriangularNumbers) {
  for (int n = 1; n <= kMaxOrder; ++n) {
    const ReferenceElement ref(n);
    EXPECT_EQ(ref.node_count(), (n + 1) * (n + 2) / 2);
    EXPECT_EQ(ref.face_node_count(), n + 1);
  }
}

TEST(ReferenceElement, LinearNodesAreTheVertices) {
  const ReferenceElement ref(1);
  ASSERT_EQ(ref.node_count(), 3);
  const RefPoint expected[] = {{-1, -1}, {1, -1}, {-1, 1}};
  for (const RefPoint& v : expected) {
    bool found = false;
    for (int i = 0; i < 3; ++i) {
      if (std::abs(ref.node(i).r - v.r) < 1e-12 && std::abs(ref.node(i).s - v.s) < 1e-12) found = true;
    }
    EXPECT_TRUE(found) << v.r << "," << v.s;
  }
}

TEST(ReferenceElement, NodesInsideAndDistinct) {
  for (int n = 1; n <= 8; ++n) {
    const ReferenceElement ref(n);
    for (int i = 0; i < ref.node_count(); ++i) {
      EXPECT_TRUE(inside_reference_triangle(ref.node(i), 1e-12));
      for (int j = 0; j < i; ++j) {
        EXPECT_GT(std::hypot(ref.r()(i) - ref.r()(j), ref.s()(i) - ref.s()(j)), 1e-6);
      }
    }
  }
}

TEST(ReferenceElement, OperatorInvariants) {
  for (int n = 1; n <= 8; ++n) {
    const ReferenceElement ref(n);
    const int np = ref.node_count();
    const Matrix id = Matrix::Identity(np, np);
    // Lagrange property through the Vandermonde pair
    EXPECT_LT((ref.vandermonde() * ref.inv_vandermonde() - id).cwiseAbs().maxCoeff(), 1e-10) << n;
    // mass is symmetric positive definite and integrates 1 to the area 2
    EXPECT_LT((ref.mass() - ref.mass().transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(Eigen::LLT<Matrix>(ref.mass()).info(), Eigen::Success);
    EXPECT_NEAR(Vector::Ones(np).dot(ref.mass() * Vector::Ones(np)), 2.0, 1e-11) << n;
    EXPECT_LT((ref.mass() * ref.inv_mass() - id).cwiseAbs().maxCoeff(), 1e-9) << n;
    // derivatives annihilate constants
    EXPECT_LT((ref.diff_r() * Vector::Ones(np)).cwiseAbs().maxCoeff(), 1e-10) << n;
    EXPECT_LT((ref.diff_s() * Vector::Ones(np)).cwiseAbs().maxCoeff(), 1e-10) << n;
    // lift of a unit face trace integrates to the edge length
    for (int f = 0; f < kFaces; ++f) {
      Vector trace = Vector::Zero(kFaces * ref.face_node_count());
      trace.segment(f * ref.face_node_count(), ref.face_node_count()).setOnes();
      // face masses are in edge coordinates, so every edge has length 2
      EXPECT_NEAR(Vector::Ones(np).dot(ref.mass() * ref.lift() * trace), 2.0, 1e-10) << n << " face " << f;
    }
  }
}

TEST(ReferenceElement, DerivativesExactForPolynomialsOfDegreeN) {
  const ReferenceElement ref(3);
  const Vector& r = ref.r();
  const Vector& s = ref.s();
  // u = r^3 + 2 r s^2 - s + 1
  const Vector u = r.array().cube() + 2.0 * r.array() * s.array().square() - s.array() + 1.0;
  const Vector ur = 3.0 * r.array().square() + 2.0 * s.array().square();
  const Vector us = 4.0 * r.array() * s.array() - 1.0;
  EXPECT_LE((ref.diff_r() * u - ur).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((ref.diff_s() * u - us).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ReferenceElement, InterpolationReproducesPolynomials) {
  for (int n = 1; n <= 6; ++n) {
    const ReferenceElement ref(n);
    auto f = [n](double r, double s) { return std::pow(r, n) - 0.5 * std::pow(s, n - 1) * r + 0.25; };
    Vector nodal(ref.node_count());
    for (int i = 0; i < ref.node_count(); ++i) nodal(i) = f(ref.r()(i), ref.s()(i));
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      const double a = u(rng), b = u(rng) * (1.0 - a);
      const RefPoint p{-1.0 + 2.0 * a, -1.0 + 2.0 * b};
      EXPECT_NEAR(ref.interpolate(nodal, p), f(p.r, p.s), 1e-11) << n;
    }
  }
}

TEST(ReferenceElement, InterpolationAtNodesIsIdentity) {
  const ReferenceElement ref(4);
  const Vector nodal = Vector::LinSpaced(ref.node_count(), -1.0, 2.0);
  for (int i = 0; i < ref.node_count(); ++i) EXPECT_NEAR(ref.interpolate(nodal, ref.node(i)), nodal(i), 1e-12);
}

TEST(ReferenceElement, InterpolateOutsideThrows) {
  const ReferenceElement ref(2);
  const Vector nodal = Vector::Ones(ref.node_count());
  EXPECT_THROW(ref.interpolate(nodal, {0.5, 0.5}), DomainError);
  EXPECT_THROW(ref.interpolate(nodal, {-1.1, 0.0}), DomainError);
  EXPECT_NO_THROW(ref.interpolate(nodal, {0.0, 0.0}));
}

TEST(ReferenceElement, MassIntegratesProductsExactly) {
  // u^T M v = integral of u v for u = r^a s^b, v = r^c s^d, a+b, c+d <= N.
  for (int n = 1; n <= 5; ++n) {
    const ReferenceElement ref(n);
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; a + b <= n; ++b) {
        const Vector u = ref.r().array().pow(a) * ref.s().array().pow(b);
        for (int c = 0; c <= n; ++c) {
          const int d = n - c;
          const Vector v = ref.r().array().pow(c) * ref.s().array().pow(d);
          EXPECT_NEAR(u.dot(ref.mass() * v), reference_monomial_integral(a + c, b + d), 1e-10)
              << "N=" << n << " r^" << a << "s^" << b << " r^" << c << "s^" << d;
        }
      }
    }
  }
}

TEST(ReferenceElement, FaceNodesLieOnTheirEdges) {
  for (int n = 1; n <= 8; ++n) {
    const ReferenceElement ref(n);
    for (int f = 0; f < kFaces; ++f) {
      ASSERT_EQ(static_cast<int>(ref.face_nodes()[f].size()), n + 1);
      for (int i : ref.face_nodes()[f]) {
        const double r = ref.r()(i), s = ref.s()(i);
        const double dist = f == 0 ? std::abs(s + 1.0) : f == 1 ? std::abs(r + s) : std::abs(r + 1.0);
        EXPECT_LT(dist, 1e-12);
      }
    }
  }
}

TEST(ReferenceElement, FaceMassIntegratesOnEdge) {
  const ReferenceElement ref(4);
  for (int f = 0; f < kFaces; ++f) {
    const Vector& t = ref.face_coord()[f];
    const Vector t2 = t.array().square();
    // integral over [-1,1] of t^2 = 2/3
    EXPECT_NEAR(Vector::Ones(t.size()).dot(ref.face_mass_1d(f) * t2), 2.0 / 3.0, 1e-12);
  }
}

TEST(ReferenceElement, RejectsUnsupportedOrders) {
  EXPECT_THROW(ReferenceElement(0), InvalidOrderError);
  EXPECT_THROW(ReferenceElement(-2), InvalidOrderError);
  EXPECT_THROW(ReferenceElement(kMaxOrder + 1), InvalidOrderError);
  EXPECT_NO_THROW(build_reference_element(kMaxOrder));
}
