#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "heisen/error.hpp"
#include "heisen/field.hpp"
#include "heisen/laguerre.hpp"
#include "heisen/spectral.hpp"

using namespace heisen;

namespace {

constexpr double kPi = std::numbers::pi;

RadialProfile profile_from(const GridPtr& g, const std::function<cplx(int, double)>& f) {
  Eigen::MatrixXcd v(g->m_max() + 1, g->size());
  for (int m = 0; m <= g->m_max(); ++m)
    for (size_t k = 0; k < g->size(); ++k) v(m, k) = f(m, g->lambda(k));
  return RadialProfile(g, v);
}

// Gaussian bump in lambda, cut to exact zero far out.
double gauss_bump(double lam, double center, double width) {
  const double x = (lam - center) / width;
  return std::abs(x) > 6.0 ? 0.0 : std::exp(-x * x);
}

// Bump concentrated near |lambda| = center whose s-transform decays like
// (1 + (s center / a)^2)^{-(a+1)/2}; zero where it drops below 1e-18.
double dyadic_bump(double lam, double center, double a) {
  const double x = std::abs(lam) / center;
  const double v = std::exp(a * (std::log(x) - x + 1.0));
  return v < 1e-18 ? 0.0 : v;
}

double rel_profile_err(const RadialProfile& a, const RadialProfile& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff() / b.values().cwiseAbs().maxCoeff();
}

// Independent L2 norm of a d = 1 radial function by a fine 2D trapezoid.
double l2_reference(const std::function<double(double, double)>& f, double r_max, double s_max) {
  const int nr = 4000, ns = 4000;
  const double hr = r_max / nr, hs = 2 * s_max / ns;
  double total = 0.0;
  for (int i = 1; i <= nr; ++i) {
    const double r = i * hr;
    double row = 0.0;
    for (int l = 0; l <= ns; ++l) {
      const double v = f(r, -s_max + l * hs);
      row += (l == 0 || l == ns ? 0.5 : 1.0) * v * v;
    }
    total += (i == nr ? 0.5 : 1.0) * 2 * kPi * r * row * hs * hr;
  }
  return std::sqrt(total);
}

}  // namespace

TEST_CASE("spectral grid layout") {
  auto g = SpectralGrid::make({1, 8, 0x1p-4, 0x1p4, 8});
  CHECK(g->panels() == 8);
  CHECK(g->size() == 128);
  for (size_t k = 0; k < g->size(); ++k) {
    CHECK(g->lambda(g->mirror(k)) == -g->lambda(k));
    CHECK(g->weight(k) > 0.0);
    if (k > 0) CHECK(g->lambda(k) > g->lambda(k - 1));
  }
  double total = 0.0;
  for (double w : g->weights()) total += w;
  CHECK(total == doctest::Approx(2 * (16.0 - 1.0 / 16)));
  auto sh = g->shifted(g->index(+1, 2, 3), 2);
  REQUIRE(sh);
  CHECK(g->lambda(*sh) == doctest::Approx(4 * g->lambda(g->index(+1, 2, 3))));
  CHECK_FALSE(g->shifted(g->index(-1, 7, 0), 1));
  CHECK_THROWS_AS(SpectralGrid({1, 8, 0.1, 1.0, 8}), DomainError);
  CHECK_THROWS_AS(SpectralGrid({1, 8, 0.0, 1.0, 8}), DomainError);
}

TEST_CASE("zero profile and zero function") {
  auto g = SpectralGrid::make({1, 8, 0x1p-6, 0x1p6, 8});
  RadialProfile z(g);
  CHECK(plancherel_norm(z) == 0.0);
  auto q = make_quadrature(1, 4.0, 8, 16, 10.0, 101);
  auto f = inverse_transform(z, q);
  CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
  auto back = forward_transform(f, g);
  CHECK(back.is_zero());
  CHECK(summability(z, 3.0).measured == 0.0);
}

TEST_CASE("plancherel norm of a single mode") {
  for (int d : {1, 2, 3}) {
    auto g = SpectralGrid::make({d, 4, 0x1p-8, 0x1p8, 16});
    auto p = profile_from(g, [](int m, double lam) { return m == 0 ? cplx(std::exp(-lam * lam)) : cplx(0.0); });
    // int |g|^2 |lambda|^d over R = Gamma((d+1)/2) / 2^{(d+1)/2}
    const double lmin = 0x1p-8;
    const double integral = std::tgamma(0.5 * (d + 1)) / std::pow(2.0, 0.5 * (d + 1)) - 2 * std::pow(lmin, d + 1) / (d + 1);
    CHECK(plancherel_norm(p) == doctest::Approx(std::sqrt(plancherel_constant(d) * integral)).epsilon(1e-10));
  }
}

TEST_CASE("inverse of a single gaussian mode") {
  auto g = SpectralGrid::make({1, 4, 0x1p-10, 0x1p6, 16});
  auto p = profile_from(g, [](int m, double lam) { return m == 0 ? cplx(std::exp(-lam * lam)) : cplx(0.0); });
  std::vector<double> r{0.0, 0.4, 1.1}, s{0.0, 0.8, -2.5};
  auto f = synthesize(p, r, s);
  const double K = plancherel_constant(1);
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t l = 0; l < s.size(); ++l) {
      // K * 2 int_0^inf cos(lambda s) e^{-lambda^2 - lambda r^2} lambda dlambda
      const int n = 200000;
      const double h = 12.0 / n;
      double acc = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double lam = k * h;
        acc += (k == n ? 0.5 : 1.0) * std::cos(lam * s[l]) * std::exp(-lam * lam - lam * r[i] * r[i]) * lam;
      }
      const double expect = 2 * K * acc * h;
      CHECK(std::abs(f(i, l) - expect) <= 1e-5 * K);
    }
}

TEST_CASE("round trip on band-limited profiles") {
  for (int d : {1, 2}) {
    auto g = SpectralGrid::make({d, 12, 0x1p-10, 0x1p10, 32});
    auto p = profile_from(g, [](int m, double lam) {
      if (m > 6) return cplx(0.0);
      const double c = 1.0 + 0.02 * m;
      return lam > 0 ? cplx(dyadic_bump(lam, c, 40) * (1.0 + 0.1 * m)) : cplx(0.0, 0.2 * dyadic_bump(lam, c, 40));
    });
    QuadratureHints h;
    h.s_extent = 10.0;
    auto q = quadrature_for(p, h);
    auto f = inverse_transform(p, q);
    ForwardOptions fo;
    fo.decay_floor = 1e-8;
    auto back = forward_transform(f, g, fo);
    CHECK(rel_profile_err(back, p) <= 1e-6);
  }
}

TEST_CASE("plancherel identity on gaussian-type functions") {
  auto g = SpectralGrid::make({1, 128, 0x1p-12, 0x1p12, 16});
  struct Fn {
    double a, b, lam0;
    int poly;
  };
  const Fn family[] = {{12, 1, 12, 0}, {10, 1, 12, 1}, {14, 1.2, 13, 0}, {12, 0.8, 11, 2}};
  for (const auto& fn : family) {
    auto f = [&](double r, double s) {
      const double r2 = r * r;
      const double poly = fn.poly == 0 ? 1.0 : fn.poly == 1 ? 1.0 + r2 : r2 * (2.0 - r2);
      return poly * std::exp(-fn.a * r2 - fn.b * s * s) * std::cos(fn.lam0 * s);
    };
    auto q = make_quadrature(1, 2.6, 26, 16, 7.0, 449);
    auto rf = RadialFunction::sample(q, [&](double r, double s) { return cplx(f(r, s)); });
    ForwardOptions fo;
    fo.lambda_eval = 32.0;
    auto P = forward_transform(rf, g, fo);
    const double ref = l2_reference(f, 2.6, 7.0);
    CHECK(radial_lp_norm(rf, 2.0) == doctest::Approx(ref).epsilon(1e-6));
    CHECK(std::abs(plancherel_norm(P) - ref) <= 1e-4 * ref);
  }
}

TEST_CASE("hermitian symmetry for real input") {
  auto g = SpectralGrid::make({1, 16, 0x1p-8, 0x1p8, 16});
  auto q = make_quadrature(1, 4.0, 12, 16, 12.0, 385);
  auto rf = RadialFunction::sample(q, [](double r, double s) {
    return cplx(std::exp(-r * r - 0.5 * (s - 0.7) * (s - 0.7)) * (1 + 0.3 * r * r));
  });
  ForwardOptions fo;
  fo.lambda_eval = 8.0;
  auto P = forward_transform(rf, g, fo);
  double worst = 0.0;
  for (int m = 0; m <= 16; ++m)
    for (size_t k = 0; k < g->size(); ++k) worst = std::max(worst, std::abs(P(m, g->mirror(k)) - std::conj(P(m, k))));
  CHECK(worst <= 1e-12 * P.values().cwiseAbs().maxCoeff());
}

TEST_CASE("forward transform rejects non-decaying input") {
  auto g = SpectralGrid::make({1, 8, 0x1p-8, 0x1p8, 16});
  auto q = make_quadrature(1, 3.0, 8, 16, 5.0, 101);
  auto slow = RadialFunction::sample(q, [](double r, double s) { return cplx(std::exp(-0.1 * r * r - 0.01 * s * s)); });
  CHECK_THROWS_AS(forward_transform(slow, g), DomainError);
  // s-sampling too coarse for the oscillation
  auto alias = RadialFunction::sample(q, [](double r, double s) {
    return cplx(std::exp(-r * r * 8 - s * s) * std::cos(28.0 * s));
  });
  CHECK_THROWS_AS(forward_transform(alias, g), DomainError);
}

TEST_CASE("multipliers") {
  auto g = SpectralGrid::make({1, 8, 0x1p-8, 0x1p8, 16});
  auto p = profile_from(g, [](int m, double lam) { return m <= 3 ? cplx(gauss_bump(lam, 1.0, 0.3)) : cplx(0.0); });
  CHECK(rel_profile_err(multiplier(p, [](int, double) { return cplx(1.0); }), p) == 0.0);
  const double rho = 1.3;
  auto up = multiplier(p, [&](int m, double lam) { return cplx(std::pow(eigenvalue(m, lam, 1), rho)); });
  auto down = multiplier(up, [&](int m, double lam) { return cplx(std::pow(eigenvalue(m, lam, 1), -rho)); });
  CHECK(rel_profile_err(down, p) <= 1e-14);
  CHECK(eigenvalue(2, 1.0, 1) == 20.0);
  const size_t k = g->index(+1, 8, 7);
  Eigen::MatrixXcd one = Eigen::MatrixXcd::Zero(9, g->size());
  one(2, k) = 1.0;
  auto scaled = multiplier(RadialProfile(g, one), [](int m, double lam) { return cplx(eigenvalue(m, lam, 1)); });
  CHECK(scaled(2, k).real() == doctest::Approx(4 * g->lambda(k) * 5));
  CHECK_THROWS_AS(multiplier(p, [](int, double) { return cplx(NAN); }), DomainError);
}

TEST_CASE("dilation of profiles") {
  auto g = SpectralGrid::make({1, 4, 0x1p-8, 0x1p8, 16});
  auto p = profile_from(g, [](int m, double lam) { return m == 0 ? cplx(gauss_bump(lam, 1.0, 0.2)) : cplx(0.0); });
  auto d1 = dilate_profile(p, 1);
  const size_t k = g->index(+1, 8, 5);
  CHECK(d1(0, *g->shifted(k, 2)) == p(0, k) / 16.0);
  CHECK(plancherel_norm(d1) == doctest::Approx(plancherel_norm(p) / 4.0).epsilon(1e-6));
  CHECK(rel_profile_err(dilate_profile(d1, -1), p) == 0.0);
  CHECK_THROWS_AS(dilate_profile(p, 6), DomainError);
}

TEST_CASE("dilation matches physical-space scaling") {
  auto g = SpectralGrid::make({1, 6, 0x1p-10, 0x1p10, 16});
  auto p = profile_from(g, [](int m, double lam) { return m <= 2 ? cplx(gauss_bump(lam, 1.0, 0.25)) : cplx(0.0); });
  auto d1 = dilate_profile(p, 1);
  std::vector<double> r{0.0, 0.3, 0.9}, s{0.0, 0.5, -1.4};
  std::vector<double> r2, s2;
  for (double v : r) r2.push_back(2 * v);
  for (double v : s) s2.push_back(4 * v);
  auto a = synthesize(d1, r, s);
  auto b = synthesize(p, r2, s2);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());
}

TEST_CASE("lemma 4.1 identity") {
  auto g = SpectralGrid::make({1, 12, 0x1p-10, 0x1p10, 16});
  RadialFunction zero;
  zero.quad = make_quadrature(1, 3.0, 8, 16, 8.0, 201);
  zero.values = Eigen::MatrixXcd::Zero(zero.quad.r.size(), zero.quad.s.size());
  auto rz = check_weight_identity(zero, g, 4);
  CHECK(rz.measured == 0.0);

  // refinement study: one smooth function, successively finer check grids
  auto fine = SpectralGrid::make({1, 12, 0x1p-10, 0x1p10, 32});
  auto p = profile_from(fine, [](int m, double lam) {
    return m <= 4 ? cplx(dyadic_bump(lam, 1.0 + 0.02 * m, 40)) : cplx(0.0);
  });
  QuadratureHints h;
  h.s_extent = 10.0;
  auto f = inverse_transform(p, quadrature_for(p, h));
  ForwardOptions fo;
  fo.decay_floor = 1e-8;
  fo.lambda_eval = 2.0;
  std::vector<double> disc;
  for (int order : {6, 10, 16}) {
    auto gg = SpectralGrid::make({1, 12, 0x1p-10, 0x1p10, order});
    disc.push_back(check_weight_identity(f, gg, 3, fo).measured);
  }
  CHECK(disc[1] < disc[0]);
  CHECK(disc[2] < disc[1]);
  CHECK(disc[2] <= 1e-6);
}

TEST_CASE("summability") {
  // heat profile: stable under doubling m_max and Lambda
  auto heat = [](const GridPtr& g) {
    return profile_from(g, [&](int m, double lam) { return cplx(std::exp(-eigenvalue(m, lam, 1))); });
  };
  auto g1 = SpectralGrid::make({1, 64, 0x1p-12, 0x1p6, 16});
  auto g2 = SpectralGrid::make({1, 128, 0x1p-12, 0x1p7, 16});
  auto s1 = summability(heat(g1), 3.0);
  auto s2 = summability(heat(g2), 3.0);
  CHECK(s1.pass);
  CHECK(std::abs(s1.measured - s2.measured) <= 0.02 * s2.measured);
  // closed form: sum_m 2 / (4(2m+1))^2 over all m is pi^2 / 64
  CHECK(s2.measured == doctest::Approx(kPi * kPi / 64).epsilon(0.01));

  // mu^{-rho} bump with rho = N/2 + 1 against direct summation
  const double rho = 3.0;
  auto g = SpectralGrid::make({1, 8, 0x1p-10, 0x1p10, 16});
  auto p = profile_from(g, [&](int m, double lam) {
    return m <= 5 ? cplx(std::pow(eigenvalue(m, lam, 1), -rho) * gauss_bump(lam, 2.0, 0.3)) : cplx(0.0);
  });
  double direct = 0.0;
  const int n = 200000;
  for (int m = 0; m <= 5; ++m)
    for (int i = 0; i <= n; ++i) {
      const double lam = 0.1 + 3.8 * i / n;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      direct += w * (3.8 / n) * lam * std::pow(eigenvalue(m, lam, 1), -rho) * gauss_bump(lam, 2.0, 0.3);
    }
  auto rep = summability(p, rho);
  CHECK(rep.measured == doctest::Approx(direct).epsilon(1e-6));
  CHECK(rep.pass);
}

TEST_CASE("profile csv round trip") {
  auto g = SpectralGrid::make({2, 3, 0x1p-5, 0x1p3, 6});
  auto p = profile_from(g, [](int m, double lam) { return cplx(m + lam, -lam * lam); });
  std::stringstream ss;
  write_profile_csv(ss, p);
  CHECK(ss.str().rfind("# profile d=2 mmax=3 nodes=96\n", 0) == 0);
  auto back = read_profile_csv(ss);
  CHECK(back.grid().same_as(*g));
  CHECK(back.values() == p.values());
}

TEST_CASE("convolution theorem on a sampled grid") {
  // radial Gaussians in (x, y, s); product of profiles vs transform of f * g
  GridSpec G = GridSpec::cube(25, 8.0, 48, 16.0);
  auto f = SampledField::sample(G, [](double x, double y, double s) { return cplx(std::exp(-(x * x + y * y) - 0.5 * s * s)); });
  auto h = SampledField::sample(G, [](double x, double y, double s) {
    return cplx(std::exp(-1.5 * (x * x + y * y) - 0.8 * s * s));
  });
  auto fh = convolve(f, h);
  auto g = SpectralGrid::make({1, 4, 0x1p-8, 0x1p2, 16});
  auto Pf = forward_transform_sampled(f, g, 2, 1.5);
  auto Ph = forward_transform_sampled(h, g, 2, 1.5);
  auto Pfh = forward_transform_sampled(fh, g, 2, 1.5);
  double err = 0.0, scale = 0.0;
  for (int m = 0; m <= 2; ++m)
    for (size_t k = 0; k < g->size(); ++k) {
      const cplx prod = Pf(m, k) * Ph(m, k);
      err = std::max(err, std::abs(Pfh(m, k) - prod));
      scale = std::max(scale, std::abs(prod));
    }
  CHECK(scale > 0.0);
  CHECK(err <= 2e-2 * scale);
}

TEST_CASE("laguerre modes are eigenfunctions of the finite-difference sub-Laplacian") {
  for (double lam : {1.0, -1.0})
    for (int m : {0, 1}) {
      std::vector<double> errs;
      for (int n : {33, 65}) {
        GridSpec G = GridSpec::cube(n, 3.6, 2 * (n - 1), 2 * kPi);
        auto u = SampledField::sample(G, [&](double x, double y, double s) {
          return std::polar(1.0, -lam * s) * weighted_laguerre(m, 0, 2 * std::abs(lam) * (x * x + y * y));
        });
        auto fd = sublaplacian_fd(u);
        const double mu = eigenvalue(m, lam, 1);
        double num = 0.0, den = 0.0;
        for (int i = 2; i < n - 2; ++i)
          for (int j = 2; j < n - 2; ++j)
            for (int k = 0; k < G.ns; ++k) {
              num += std::norm(-fd.at(i, j, k) - mu * u.at(i, j, k));
              den += std::norm(mu * u.at(i, j, k));
            }
        errs.push_back(std::sqrt(num / den));
      }
      CHECK(errs[0] <= 2e-2);
      CHECK(errs[1] <= errs[0] / 3.0);
    }
}
