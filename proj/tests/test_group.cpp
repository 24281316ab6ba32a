#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "heisen/error.hpp"
#include "heisen/field.hpp"
#include "heisen/group.hpp"

using namespace heisen;

namespace {

constexpr double kPi = std::numbers::pi;

GroupPoint random_point(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<cplx> z(d);
  for (auto& v : z) v = cplx(n(rng), n(rng));
  return GroupPoint(z, n(rng));
}

bool close(const GroupPoint& a, const GroupPoint& b, double tol) {
  if (a.dim() != b.dim()) return false;
  for (int j = 0; j < a.dim(); ++j)
    if (std::abs(a.z[j] - b.z[j]) > tol) return false;
  return std::abs(a.s - b.s) <= tol;
}

double rel_l2(const SampledField& a, const SampledField& b) {
  return lp_norm(combine(1.0, a, -1.0, b), 2.0) / lp_norm(b, 2.0);
}

}  // namespace

TEST_CASE("group law anchors") {
  GroupPoint e = GroupPoint::identity(1);
  GroupPoint w(cplx(0.3, -1.2), 0.7);
  CHECK(close(group_mul(e, w), w, 0.0));
  GroupPoint p = group_mul(GroupPoint(cplx(1, 0), 0.0), GroupPoint(cplx(0, 1), 0.0));
  CHECK(p.z[0] == cplx(1, 1));
  CHECK(p.s == -2.0);
  GroupPoint minus(cplx(-0.3, 1.2), -0.7);
  CHECK(close(group_mul(w, minus), e, 1e-15));
  CHECK_THROWS_AS(group_mul(GroupPoint::identity(1), GroupPoint::identity(2)), DomainError);
}

TEST_CASE("inverse") {
  CHECK(close(group_inv(GroupPoint::identity(2)), GroupPoint::identity(2), 0.0));
  GroupPoint q = group_inv(GroupPoint(cplx(1, 1), 3.0));
  CHECK(q.z[0] == cplx(-1, -1));
  CHECK(q.s == -3.0);
  std::mt19937_64 rng(3);
  for (int d : {1, 2, 4})
    for (int rep = 0; rep < 50; ++rep) {
      auto a = random_point(rng, d);
      CHECK(close(group_mul(a, group_inv(a)), GroupPoint::identity(d), 1e-14));
    }
}

TEST_CASE("dilations and gauge") {
  GroupPoint w(cplx(1, 0), 1.0);
  CHECK(close(dilate(1.0, w), w, 0.0));
  GroupPoint w2 = dilate(2.0, w);
  CHECK(w2.z[0] == cplx(2, 0));
  CHECK(w2.s == 4.0);
  CHECK_THROWS_AS(dilate(0.0, w), DomainError);
  CHECK_THROWS_AS(dilate(-1.0, w), DomainError);
  CHECK(gauge(GroupPoint::identity(3)) == 0.0);
  CHECK(gauge(GroupPoint(cplx(1, 0), 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("algebraic properties on random samples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ua(0.1, 5.0);
  for (int d : {1, 2, 3})
    for (int rep = 0; rep < 100; ++rep) {
      auto a = random_point(rng, d), b = random_point(rng, d), c = random_point(rng, d);
      CHECK(close(group_mul(group_mul(a, b), c), group_mul(a, group_mul(b, c)), 1e-12));
      double s = ua(rng), t = ua(rng);
      CHECK(close(dilate(s, dilate(t, a)), dilate(s * t, a), 1e-12));
      CHECK(close(group_mul(dilate(s, a), dilate(s, b)), dilate(s, group_mul(a, b)), 1e-11));
      CHECK(gauge(dilate(s, a)) == doctest::Approx(s * gauge(a)).epsilon(1e-12));
      // left invariance of the distance
      CHECK(gauge_distance(group_mul(c, a), group_mul(c, b)) == doctest::Approx(gauge_distance(a, b)).epsilon(1e-10));
    }
}

TEST_CASE("haar integral") {
  GridSpec g = GridSpec::cube(41, 12.0, 64, 12.0);
  auto zero = SampledField(g);
  CHECK(haar_integral(zero) == cplx(0.0));
  // unit-mass separable Gaussian
  auto gauss = SampledField::sample(g, [](double x, double y, double s) {
    return std::exp(-(x * x + y * y) - s * s) / std::pow(kPi, 1.5);
  });
  CHECK(std::abs(haar_integral(gauss) - 1.0) <= 1e-6);
  // dilation Jacobian a^N
  const double a = 1.5;
  auto f = [](double x, double y, double s) { return cplx(std::exp(-(x * x + y * y) * 0.8 - 0.6 * s * s) * (1 + 0.2 * x)); };
  auto fd = SampledField::sample(g, [&](double x, double y, double s) { return std::pow(a, 4) * f(a * x, a * y, a * a * s); });
  auto f0 = SampledField::sample(g, f);
  CHECK(std::abs(haar_integral(fd) - haar_integral(f0)) <= 1e-6 * std::abs(haar_integral(f0)));
}

TEST_CASE("lp norms") {
  GridSpec g = GridSpec::cube(41, 8.0, 40, 8.0);
  CHECK(lp_norm(SampledField(g), 2.0) == 0.0);
  CHECK(lp_norm(SampledField(g), INFINITY) == 0.0);
  CHECK_THROWS_AS(lp_norm(SampledField(g), 0.5), DomainError);
  // smooth plateau: box [-2,2]^2 x [-2,2) of volume 64
  auto box = SampledField::sample(g, [](double x, double y, double s) {
    return (std::abs(x) <= 2.0 && std::abs(y) <= 2.0 && s >= -2.0 && s < 2.0) ? cplx(1.0) : cplx(0.0);
  });
  CHECK(lp_norm(box, 2.0) == doctest::Approx(8.0).epsilon(0.05));
  const double a = 2.0;
  GridSpec gw = GridSpec::cube(81, 16.0, 512, 32.0);
  auto f = [](double x, double y, double s) { return cplx(std::exp(-(x * x + y * y) - s * s)); };
  auto f0 = SampledField::sample(gw, f);
  auto fa = SampledField::sample(gw, [&](double x, double y, double s) { return f(a * x, a * y, a * a * s); });
  for (double p : {1.0, 2.0, 3.0})
    CHECK(lp_norm(fa, p) == doctest::Approx(std::pow(a, -4.0 / p) * lp_norm(f0, p)).epsilon(1e-6));
}

TEST_CASE("vector fields") {
  GridSpec g = GridSpec::cube(33, 4.0, 32, 2.0 * kPi);
  auto c = SampledField::sample(g, [](double, double, double) { return cplx(2.5, -1.0); });
  for (auto k : {FieldKind::Z, FieldKind::Zbar, FieldKind::S}) CHECK(lp_norm(apply_field(k, c), INFINITY) <= 1e-12);
  CHECK_THROWS_AS(apply_field(FieldKind::S, SampledField(GridSpec{2, 5, 5, 1, 1, 1})), DomainError);

  // S on a lattice plane wave
  const double lam = 3.0;
  auto pw = SampledField::sample(g, [&](double x, double y, double s) {
    return std::exp(-cplx(0, lam * s)) * std::exp(-(x * x + y * y));
  });
  auto spw = apply_field(FieldKind::S, pw);
  auto expect = combine(cplx(0, -lam), pw, 0.0, pw);
  double hs = g.hs();
  double err = rel_l2(spw, expect);
  CHECK(err <= lam * lam * hs * hs / 6.0 * 1.01);
  CHECK(err >= lam * lam * hs * hs / 6.0 * 0.9);
}

TEST_CASE("commutator of Z and Zbar") {
  auto f = [](double x, double y, double s) {
    return cplx(std::exp(-(x * x + 0.7 * y * y) - 0.2 * x * y) * std::cos(s) * (1 + 0.3 * x),
                0.2 * std::sin(2 * s) * std::exp(-(x * x + y * y)));
  };
  std::vector<double> errs;
  for (int n : {17, 33, 65}) {
    GridSpec g = GridSpec::cube(n, 8.0, n - 1, 2.0 * kPi);
    auto u = SampledField::sample(g, f);
    auto zzb = apply_field(FieldKind::Z, apply_field(FieldKind::Zbar, u));
    auto zbz = apply_field(FieldKind::Zbar, apply_field(FieldKind::Z, u));
    auto lhs = combine(1.0, zbz, -1.0, zzb);
    auto rhs = combine(cplx(0, 2), apply_field(FieldKind::S, u), 0.0, u);
    errs.push_back(rel_l2(lhs, rhs));
  }
  CHECK(errs[2] < 0.05);
  CHECK(errs[0] / errs[1] > 3.0);
  CHECK(errs[1] / errs[2] > 3.0);
}

TEST_CASE("sub-Laplacian stencil") {
  GridSpec g = GridSpec::cube(33, 6.0, 32, 2.0 * kPi);
  auto c = SampledField::sample(g, [](double, double, double) { return cplx(1.0); });
  CHECK(lp_norm(sublaplacian_fd(c), INFINITY) <= 1e-10);

  // mass neutrality for a decaying bump
  GridSpec gb = GridSpec::cube(49, 14.0, 64, 12.0);
  auto bump = SampledField::sample(gb, [](double x, double y, double s) {
    return cplx(std::exp(-(x * x + y * y) - 0.5 * s * s));
  });
  CHECK(std::abs(haar_integral(sublaplacian_fd(bump))) <= 1e-8 * lp_norm(bump, 1.0));

  // agreement with the composed form at second order
  auto f = [](double x, double y, double s) {
    return cplx(std::exp(-(x * x + y * y)) * std::cos(s + 0.3 * x), 0.0);
  };
  std::vector<double> errs;
  for (int n : {33, 65}) {
    GridSpec gg = GridSpec::cube(n, 6.0, n - 1, 2.0 * kPi);
    auto u = SampledField::sample(gg, f);
    errs.push_back(rel_l2(sublaplacian_fd(u), sublaplacian_composed(u)));
  }
  CHECK(errs[1] < errs[0] / 3.0);
}

TEST_CASE("convolution") {
  GridSpec g = GridSpec::cube(17, 6.0, 16, 6.0);
  auto f = SampledField::sample(g, [](double x, double y, double s) {
    return cplx(std::exp(-(x * x + y * y) - 0.4 * s * s) * (1 + 0.5 * x));
  });
  // normalized spike at the origin
  SampledField spike(g);
  spike.at(8, 8, 8) = 1.0 / g.cell_volume(8, 8);
  auto fs = convolve(f, spike);
  CHECK(rel_l2(fs, f) <= 1e-12);

  auto gfun = SampledField::sample(g, [](double x, double y, double s) {
    return cplx(std::exp(-2 * (x - 0.5) * (x - 0.5) - 2 * y * y - s * s) * (1 + 0.4 * y));
  });
  auto fg = convolve(f, gfun);
  auto gf = convolve(gfun, f);
  CHECK(lp_norm(combine(1.0, fg, -1.0, gf), 2.0) > 1e-3 * lp_norm(fg, 2.0));
  CHECK(lp_norm(fg, 1.0) <= 1.02 * lp_norm(f, 1.0) * lp_norm(gfun, 1.0));
  CHECK_THROWS_AS(convolve(f, SampledField(GridSpec::cube(9, 6.0, 16, 6.0))), DomainError);
}

TEST_CASE("Young inequality and left invariance") {
  GridSpec g = GridSpec::cube(17, 7.0, 16, 8.0);
  auto f = SampledField::sample(g, [](double x, double y, double s) {
    return cplx(std::exp(-(x * x + y * y) - 0.3 * s * s) * (1 + 0.5 * x));
  });
  auto h = SampledField::sample(g, [](double x, double y, double s) {
    return cplx(std::exp(-1.5 * (x * x + y * y) - 0.5 * s * s));
  });
  auto fh = convolve(f, h);
  for (auto [p, q] : {std::pair{1.0, 1.0}, {2.0, 1.0}, {1.5, 1.5}}) {
    double r = 1.0 / (1.0 / p + 1.0 / q - 1.0);
    CHECK(lp_norm(fh, r) <= 1.02 * lp_norm(f, p) * lp_norm(h, q));
  }
  // P(f * g) = f * Pg, measured on the inner half of the grid
  for (auto k : {FieldKind::Z, FieldKind::S}) {
    auto lhs = apply_field(k, fh);
    auto rhs = convolve(f, apply_field(k, h));
    double num = 0.0, den = 0.0;
    for (int i = 4; i < 13; ++i)
      for (int j = 4; j < 13; ++j)
        for (int kk = 0; kk < g.ns; ++kk) {
          num += std::norm(lhs.at(i, j, kk) - rhs.at(i, j, kk));
          den += std::norm(rhs.at(i, j, kk));
        }
    CHECK(std::sqrt(num / den) < 0.1);
  }
}

TEST_CASE("Schwartz seminorms") {
  GridSpec g = GridSpec::cube(33, 6.0, 32, 8.0);
  CHECK(schwartz_seminorm(SampledField(g), 1) == 0.0);
  auto gauss = [](double x, double y, double s) { return cplx(std::exp(-(x * x + y * y) - s * s)); };
  CHECK(schwartz_seminorm(SampledField::sample(g, gauss), 0) == doctest::Approx(1.0));
  double coarse = schwartz_seminorm(SampledField::sample(GridSpec::cube(61, 10.0, 72, 12.0), gauss), 1);
  double fine = schwartz_seminorm(SampledField::sample(GridSpec::cube(121, 10.0, 144, 12.0), gauss), 1);
  CHECK(std::isfinite(fine));
  CHECK(std::abs(coarse - fine) <= 0.05 * fine);
  CHECK_THROWS_AS(schwartz_seminorm(SampledField::sample(g, gauss), 3), DomainError);
}

TEST_CASE("field csv round trip") {
  GridSpec g{4, 3, 5, 2.0, 1.5, 3.0};
  auto f = SampledField::sample(g, [](double x, double y, double s) { return cplx(x + 0.1 * y, s * 1.0 / 3.0); });
  std::stringstream ss;
  write_field_csv(ss, f);
  std::string text = ss.str();
  CHECK(text.rfind("# grid d=1 nx=4 ny=3 ns=5 lx=2 ly=1.5 ls=3\n", 0) == 0);
  auto back = read_field_csv(ss);
  CHECK(back.grid == g);
  CHECK(back.values == f.values);
}
