#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "nodal_lab/analytic.hpp"
#include "nodal_lab/errors.hpp"
#include "nodal_lab/mesh.hpp"

using namespace nodal_lab;
using std::numbers::pi;

TEST_CASE("legendre_p matches the closed forms of low degrees") {
  for (double x : {-1.0, -0.7, -0.2, 0.0, 0.3, 0.9, 1.0}) {
    CHECK(legendre_p(0, x) == 1.0);
    CHECK(legendre_p(1, x) == x);
    CHECK(legendre_p(2, x) == doctest::Approx(0.5 * (3 * x * x - 1)).epsilon(1e-14));
    CHECK(legendre_p(3, x) ==
          doctest::Approx(0.5 * (5 * x * x * x - 3 * x)).epsilon(1e-14));
  }
  // P_l(1) = 1 and P_l(-1) = (-1)^l for all degrees.
  for (int l : {4, 7, 12, 25}) {
    CHECK(legendre_p(l, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(legendre_p(l, -1.0) ==
          doctest::Approx(l % 2 == 0 ? 1.0 : -1.0).epsilon(1e-13));
  }
  CHECK_THROWS_AS(legendre_p(-1, 0.5), InvalidArgument);
}

TEST_CASE("legendre_p_derivative agrees with finite differences") {
  CHECK(legendre_p_derivative(2, 0.4) == doctest::Approx(3 * 0.4).epsilon(1e-13));
  double h = 1e-6;
  for (int l : {3, 5, 8}) {
    for (double x : {-0.8, -0.3, 0.1, 0.6, 0.95}) {
      double fd = (legendre_p(l, x + h) - legendre_p(l, x - h)) / (2 * h);
      CHECK(legendre_p_derivative(l, x) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("legendre_zeros reproduces the Gauss nodes of degree five") {
  auto z = legendre_zeros(5);
  REQUIRE(z.size() == 5);
  CHECK(z[0] == doctest::Approx(-0.9061798459386640).epsilon(1e-13));
  CHECK(z[1] == doctest::Approx(-0.5384693101056831).epsilon(1e-13));
  CHECK(std::abs(z[2]) < 1e-13);
  CHECK(z[3] == doctest::Approx(0.5384693101056831).epsilon(1e-13));
  CHECK(z[4] == doctest::Approx(0.9061798459386640).epsilon(1e-13));

  auto z2 = legendre_zeros(2);
  CHECK(z2[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(z2[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(legendre_zeros(1).at(0) == doctest::Approx(0.0));

  // Every root evaluates to ~0 and they interlace with degree l-1.
  for (int l : {6, 9, 16}) {
    auto zeros = legendre_zeros(l);
    REQUIRE(static_cast<int>(zeros.size()) == l);
    auto prev = legendre_zeros(l - 1);
    for (int i = 0; i < l; ++i) {
      CHECK(std::abs(legendre_p(l, zeros[i])) < 1e-12);
      if (i > 0) CHECK(zeros[i] > zeros[i - 1]);
      if (i > 0 && i < l - 1) {
        CHECK(prev[i - 1] > zeros[i - 1]);
        CHECK(prev[i - 1] < zeros[i]);
      }
    }
  }
  CHECK_THROWS_AS(legendre_zeros(0), InvalidArgument);
  CHECK_THROWS_AS(legendre_zeros(200), ResourceLimit);
}

TEST_CASE("associated_legendre keeps the Condon-Shortley phase") {
  double x = 0.3, s = std::sqrt(1 - x * x);
  CHECK(associated_legendre(1, 1, x) == doctest::Approx(-s).epsilon(1e-14));
  CHECK(associated_legendre(2, 1, x) ==
        doctest::Approx(-3 * x * s).epsilon(1e-14));
  CHECK(associated_legendre(2, 2, x) ==
        doctest::Approx(3 * (1 - x * x)).epsilon(1e-14));
  for (double t : {-0.9, -0.2, 0.5, 0.8})
    CHECK(associated_legendre(4, 0, t) ==
          doctest::Approx(legendre_p(4, t)).epsilon(1e-13));
  CHECK_THROWS_AS(associated_legendre(2, 3, 0.1), InvalidArgument);
  CHECK_THROWS_AS(associated_legendre(2, -1, 0.1), InvalidArgument);
}

TEST_CASE("zonal nodal latitudes are the arccos of the Legendre roots") {
  auto l1 = zonal_nodal_latitudes(1);
  REQUIRE(l1.size() == 1);
  CHECK(l1[0] == doctest::Approx(pi / 2).epsilon(1e-13));

  auto l2 = zonal_nodal_latitudes(2);
  CHECK(l2[0] == doctest::Approx(0.9553166181245092).epsilon(1e-12));
  CHECK(l2[1] == doctest::Approx(pi - 0.9553166181245092).epsilon(1e-12));

  for (int l : {3, 5, 8}) {
    auto lats = zonal_nodal_latitudes(l);
    REQUIRE(static_cast<int>(lats.size()) == l);
    for (int i = 0; i < l; ++i) {
      if (i > 0) CHECK(lats[i] > lats[i - 1]);
      // symmetric about the equator
      CHECK(lats[i] + lats[l - 1 - i] == doctest::Approx(pi).epsilon(1e-12));
    }
  }
}

TEST_CASE("mode parsing round-trips and carries the right eigenvalue") {
  auto s = AnalyticMode::parse("sphere:l=5,m=0");
  CHECK(s.lambda == doctest::Approx(30.0));
  CHECK(s.name() == "sphere:l=5,m=0");
  CHECK(AnalyticMode::parse(s.name()).lambda == s.lambda);
  CHECK(AnalyticMode::parse("sphere:l=8").lambda == doctest::Approx(72.0));

  auto t = AnalyticMode::parse("torus:kx=2,ky=0");
  CHECK(t.lambda == doctest::Approx(16 * pi * pi).epsilon(1e-14));
  CHECK(AnalyticMode::parse(t.name()).lambda == t.lambda);
  CHECK(AnalyticMode::parse("torus:kx=1,ky=1").lambda ==
        doctest::Approx(8 * pi * pi).epsilon(1e-14));
  // rectangle periods rescale the frequency
  CHECK(AnalyticMode::parse("torus:kx=1,ky=0,lx=2").lambda ==
        doctest::Approx(pi * pi).epsilon(1e-14));

  CHECK_THROWS_AS(AnalyticMode::parse("sphere:l=2,k=1"), InvalidArgument);
  CHECK_THROWS_AS(AnalyticMode::parse("torus:kx=1,radius=2"), InvalidArgument);
  CHECK_THROWS_AS(AnalyticMode::parse("klein:kx=1"), InvalidArgument);
  CHECK_THROWS_AS(AnalyticMode::parse("sphere:l=1,m=3"), InvalidArgument);
  CHECK_THROWS_AS(AnalyticMode::sphere_harmonic(200, 0), ResourceLimit);
  CHECK_THROWS_AS(AnalyticMode::torus_wave(1, 0, 0.0, -1.0), InvalidArgument);
}

TEST_CASE("evaluate produces orthonormal harmonics and plain cosines") {
  auto t = AnalyticMode::torus_wave(2, 1, 0.7);
  for (double x : {0.0, 0.3, 0.81}) {
    for (double y : {0.1, 0.62}) {
      double expect = std::cos(2 * pi * (2 * x + y) + 0.7);
      CHECK(t.evaluate({x, y, 0}) == doctest::Approx(expect).epsilon(1e-14));
    }
  }

  CHECK(AnalyticMode::sphere_harmonic(0, 0).evaluate({0, 0, 1}) ==
        doctest::Approx(1.0 / std::sqrt(4 * pi)).epsilon(1e-14));
  auto y10 = AnalyticMode::sphere_harmonic(1, 0);
  CHECK(y10.evaluate({0, 0, 1}) ==
        doctest::Approx(std::sqrt(3 / (4 * pi))).epsilon(1e-14));
  CHECK(y10.evaluate({1, 0, 0}) == doctest::Approx(0.0));

  // Midpoint quadrature of Y_l^m^2 over the sphere comes out to 1.
  const int nt = 2000, np = 720;
  for (auto [l, m] : std::vector<std::pair<int, int>>{
           {1, 0}, {3, 0}, {2, 1}, {2, -1}, {3, 2}}) {
    auto mode = AnalyticMode::sphere_harmonic(l, m);
    double total = 0.0;
    for (int i = 0; i < nt; ++i) {
      double th = (i + 0.5) * pi / nt;
      double band = std::sin(th) * (pi / nt) * (2 * pi / np);
      for (int j = 0; j < np; ++j) {
        double ph = (j + 0.5) * 2 * pi / np;
        double v = mode.evaluate({std::sin(th) * std::cos(ph),
                                  std::sin(th) * std::sin(ph), std::cos(th)});
        total += v * v * band;
      }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
  }

  // Distinct zonal degrees are orthogonal.
  auto a = AnalyticMode::sphere_harmonic(2, 0);
  auto b = AnalyticMode::sphere_harmonic(4, 0);
  double inner = 0.0;
  const int nc = 200000;
  for (int i = 0; i < nc; ++i) {
    double c = -1.0 + (i + 0.5) * 2.0 / nc;
    double sn = std::sqrt(std::max(0.0, 1 - c * c));
    inner += a.evaluate({sn, 0, c}) * b.evaluate({sn, 0, c}) * (2.0 / nc);
  }
  CHECK(std::abs(2 * pi * inner) < 1e-6);
}

TEST_CASE("sample rejects meshes with the wrong geometry") {
  TriMesh sphere = generate_icosphere(2);
  TriMesh torus = generate_flat_torus(8, 8);
  auto wave = AnalyticMode::torus_wave(1, 0);
  auto harm = AnalyticMode::sphere_harmonic(2, 0);

  Eigen::VectorXd f = sample(wave, torus);
  REQUIRE(f.size() == torus.vertex_count());
  for (int v = 0; v < torus.vertex_count(); ++v)
    CHECK(f[v] == std::cos(2 * pi * torus.vertices[v].x()));

  CHECK_THROWS_AS(sample(wave, sphere), GeometryMismatch);
  CHECK_THROWS_AS(sample(harm, torus), GeometryMismatch);
  auto wide = AnalyticMode::torus_wave(1, 0, 0.0, 2.0, 1.0);
  CHECK_THROWS_AS(sample(wide, torus), GeometryMismatch);
}

TEST_CASE("torus tube oracle is the sawtooth complement") {
  auto curve = tube_complement_oracle(AnalyticMode::torus_wave(1, 0));
  CHECK(curve.lambda == doctest::Approx(4 * pi * pi).epsilon(1e-14));
  CHECK(curve.mu(0.0) == doctest::Approx(1.0));
  CHECK(curve.mu(0.2) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(curve.mu(0.25) == doctest::Approx(0.0));
  CHECK(curve.mu(0.4) == 0.0);

  auto k3 = tube_complement_oracle(AnalyticMode::torus_wave(3, 0));
  CHECK(k3.mu(0.05) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(k3.mu(1.0 / 12) == doctest::Approx(0.0).epsilon(1e-12));

  // y-directed waves and rectangle periods reuse the same formula.
  auto ky = tube_complement_oracle(AnalyticMode::torus_wave(0, 2));
  CHECK(ky.mu(0.1) == doctest::Approx(0.2).epsilon(1e-12));
  auto wide = tube_complement_oracle(AnalyticMode::torus_wave(1, 0, 0.0, 2.0));
  CHECK(wide.mu(0.25) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(tube_complement_oracle(AnalyticMode::torus_wave(1, 1)),
                  UnsupportedOracle);
  CHECK_THROWS_AS(tube_complement_oracle(AnalyticMode::torus_wave(0, 0)),
                  UnsupportedOracle);
}

TEST_CASE("zonal tube oracle matches quadrature of the band complement") {
  auto l1 = tube_complement_oracle(AnalyticMode::sphere_harmonic(1, 0));
  CHECK(l1.lambda == doctest::Approx(2.0));
  CHECK(l1.mu(0.0) == doctest::Approx(1.0));
  CHECK(l1.mu(1.0) == doctest::Approx(0.1585290151921035).epsilon(1e-13));
  CHECK(l1.mu(pi / 2) == doctest::Approx(0.0));
  CHECK(l1.mu(2.0) == 0.0);

  // Independent check: midpoint quadrature of the polar-angle indicator.
  auto lats = zonal_nodal_latitudes(3);
  auto l3 = tube_complement_oracle(AnalyticMode::sphere_harmonic(3, 0));
  const int n = 1000000;
  for (double r : {0.05, 0.1, 0.2, 0.4}) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double th = (i + 0.5) * pi / n;
      double d = pi;
      for (double lat : lats) d = std::min(d, std::abs(th - lat));
      if (d > r) total += 0.5 * std::sin(th) * (pi / n);
    }
    CHECK(l3.mu(r) == doctest::Approx(total).epsilon(2e-5));
  }

  // mu(0) = 1 and the curve never increases.
  for (int l : {2, 5, 8}) {
    auto curve = tube_complement_oracle(AnalyticMode::sphere_harmonic(l, 0));
    CHECK(curve.mu(0.0) == doctest::Approx(1.0).epsilon(1e-13));
    double prev = 1.0 + 1e-15;
    for (int i = 1; i <= 60; ++i) {
      double mu = curve.mu(i * pi / 120);
      CHECK(mu <= prev);
      CHECK(mu >= 0.0);
      prev = mu;
    }
  }

  CHECK_THROWS_AS(tube_complement_oracle(AnalyticMode::sphere_harmonic(3, 1)),
                  UnsupportedOracle);
  CHECK_THROWS_AS(tube_complement_oracle(AnalyticMode::sphere_harmonic(0, 0)),
                  UnsupportedOracle);
}

TEST_CASE("boundary oracles carry the model eigenvalues and exact curves") {
  auto disk = boundary_oracle(BoundaryShape::parse("disk:r=1"));
  CHECK(disk.lambda == doctest::Approx(5.783185962946785).epsilon(1e-13));
  CHECK(disk.mu(0.0) == doctest::Approx(1.0));
  CHECK(disk.mu(0.5) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(disk.mu(1.0) == 0.0);
  CHECK(disk.mu(1.3) == 0.0);

  auto big = boundary_oracle(BoundaryShape::parse("disk:r=2"));
  CHECK(big.lambda == doctest::Approx(5.783185962946785 / 4).epsilon(1e-13));
  CHECK(big.mu(1.0) == doctest::Approx(0.25).epsilon(1e-14));

  auto square = boundary_oracle(BoundaryShape::parse("square:l=1"));
  CHECK(square.lambda == doctest::Approx(2 * pi * pi).epsilon(1e-14));
  CHECK(square.mu(0.3) == doctest::Approx(0.16).epsilon(1e-12));
  CHECK(square.mu(0.5) == 0.0);

  auto strip = boundary_oracle(BoundaryShape::parse("strip:w=1"));
  CHECK(strip.lambda == doctest::Approx(pi * pi).epsilon(1e-14));
  CHECK(strip.mu(0.25) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(strip.mu(0.5) == 0.0);

  CHECK(BoundaryShape::parse("square:l=0.5").name() == "square:l=0.5");
  CHECK_THROWS_AS(BoundaryShape::parse("hexagon:r=1"), UnsupportedOracle);
  CHECK_THROWS_AS(BoundaryShape::parse("disk:w=1"), InvalidArgument);
  CHECK_THROWS_AS(BoundaryShape::parse("strip:w=-2"), InvalidArgument);
}

TEST_CASE("max_nodal_distance gives the density radius in closed form") {
  CHECK(max_nodal_distance(AnalyticMode::torus_wave(1, 0)) ==
        doctest::Approx(0.25).epsilon(1e-14));
  CHECK(max_nodal_distance(AnalyticMode::torus_wave(2, 0)) ==
        doctest::Approx(0.125).epsilon(1e-14));
  CHECK(max_nodal_distance(AnalyticMode::torus_wave(0, 5)) ==
        doctest::Approx(0.05).epsilon(1e-14));
  CHECK(max_nodal_distance(AnalyticMode::torus_wave(1, 0, 0.0, 2.0)) ==
        doctest::Approx(0.5).epsilon(1e-14));

  // sqrt(lambda) * radius is pi/2 for every single-frequency wave.
  for (int k : {1, 2, 3, 5}) {
    auto mode = AnalyticMode::torus_wave(k, 0);
    CHECK(std::sqrt(mode.lambda) * max_nodal_distance(mode) ==
          doctest::Approx(pi / 2).epsilon(1e-14));
  }

  CHECK(max_nodal_distance(AnalyticMode::sphere_harmonic(1, 0)) ==
        doctest::Approx(pi / 2).epsilon(1e-13));
  // l = 2: the polar cap above the first circle is the widest gap.
  CHECK(max_nodal_distance(AnalyticMode::sphere_harmonic(2, 0)) ==
        doctest::Approx(0.9553166181245092).epsilon(1e-12));
  CHECK(max_nodal_distance(AnalyticMode::sphere_harmonic(3, 0)) ==
        doctest::Approx(0.6847192030022828).epsilon(1e-12));

  CHECK_THROWS_AS(max_nodal_distance(AnalyticMode::torus_wave(2, 3)),
                  UnsupportedOracle);
  CHECK_THROWS_AS(max_nodal_distance(AnalyticMode::sphere_harmonic(4, 2)),
                  UnsupportedOracle);
}
