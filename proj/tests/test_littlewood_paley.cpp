#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "heisen/error.hpp"
#include "heisen/field.hpp"
#include "heisen/group.hpp"
#include "heisen/littlewood_paley.hpp"

using namespace heisen;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GridPtr lp_grid(int m_max = 8) { return SpectralGrid::make({1, m_max, 0x1p-10, 0x1p10, 16}); }

double rel_err(const RadialProfile& a, const RadialProfile& b) {
  const double scale = b.values().cwiseAbs().maxCoeff();
  return (a.values() - b.values()).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

// Broad compact profile over several blocks, modes m <= 2.
RadialProfile broad_profile(const GridPtr& g) {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(g->m_max() + 1, g->size());
  for (int m = 0; m <= 2; ++m)
    for (size_t k = 0; k < g->size(); ++k) {
      const double x = std::log2(std::abs(g->lambda(k)));
      if (x <= -3.0 || x >= 5.0) continue;
      const double u = (x - 1.0) / 4.0;
      v(m, k) = std::exp(1.0 - 1.0 / (1.0 - u * u)) * (1.0 + 0.2 * m) * (g->lambda(k) > 0 ? 1.0 : 0.6);
    }
  return RadialProfile(g, v);
}

}  // namespace

TEST_CASE("partition profile values") {
  auto part = build_partition(1, -4, 12);
  CHECK(part.chi(0.5) == 1.0);
  CHECK(part.chi(-1.0) == 1.0);
  CHECK(part.chi(1.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(part.chi(2.0) == 0.0);
  CHECK(part.rstar(0.99) == 0.0);
  CHECK(part.rstar(3.0) == 1.0);
  CHECK(part.rstar(2.0) == 1.0);
  CHECK(part.rstar(4.0) == 1.0);
  CHECK(part.rstar(6.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(part.rstar(8.0) == 0.0);
  CHECK(part.block(2, 48.0) == 1.0);
  for (int i = 0; i <= 2000; ++i) {
    const double tau = 10.0 * i / 2000;
    CHECK(part.rstar(tau) >= 0.0);
    CHECK(part.rstar(tau) <= 1.0);
    CHECK(part.chi(tau) == part.chi(-tau));
  }
}

TEST_CASE("partition of unity") {
  for (int k : {1, 2}) {
    auto part = build_partition(k, -4, 12);
    CHECK(part.residual() <= 1e-12);
    CHECK(low_pass_residual(part) <= 1e-12);
    CHECK(block_sum_residual(part) <= 1e-12);
  }
  auto part = build_partition(1, -4, 12);
  // tau = 0.5: only the low-pass part is nonzero
  double sum = part.low(0.5);
  for (int j = 0; j <= 12; ++j) sum += part.block(j, 0.5);
  CHECK(part.low(0.5) == 1.0);
  CHECK(sum == 1.0);
  double big = 0.0;
  for (int j = -4; j <= 12; ++j) big += part.block(j, 1e6);
  CHECK(std::abs(big - 1.0) <= 1e-12);
  CHECK_THROWS_AS(build_partition(0, 0, 1), DomainError);
  CHECK_THROWS_AS(build_partition(1, 3, 1), DomainError);
}

TEST_CASE("block supports") {
  auto part = build_partition(1, -4, 12);
  // supports 4^j [1, 8] and 4^{j+2} [1, 8] = 4^j [16, 128] are separated
  for (int j = -3; j <= 6; ++j) {
    CHECK(8.0 * std::ldexp(1.0, 2 * j) < 16.0 * std::ldexp(1.0, 2 * j));
    for (int i = 0; i <= 20000; ++i) {
      const double tau = std::ldexp(1.0, 2 * j) * 200.0 * i / 20000;
      CHECK(part.block(j, tau) * part.block(j + 2, tau) == 0.0);
    }
  }
  // adjacent blocks do overlap
  CHECK(part.block(0, 6.0) * part.block(1, 6.0) > 0.0);
}

TEST_CASE("partition csv export") {
  auto part = build_partition(1, 0, 2);
  std::stringstream ss;
  part.write_csv(ss, 17);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "tau,chi,rstar");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 17);
}

TEST_CASE("block projections") {
  auto g = lp_grid();
  auto part = build_partition(1, -6, 8);
  auto P = broad_profile(g);

  RadialProfile sum(g);
  for (int j = part.j_min(); j <= part.j_max(); ++j) sum = sum + project_block(P, j, part);
  CHECK(rel_err(sum, P) <= 1e-10);

  for (int j = -1; j <= 2; ++j) {
    RadialProfile rest = low_pass(P, j, part);
    for (int q = j; q <= part.j_max(); ++q) rest = rest + project_block(P, q, part);
    CHECK(rel_err(rest, P) <= 1e-10);
  }

  for (int p = -2; p <= 3; ++p)
    for (int q = p + 2; q <= 5; ++q) CHECK(project_block(project_block(P, p, part), q, part).is_zero());

  // plateau: tau in [2, 4] at block j is returned unchanged
  auto plateau = make_localized(g, 1, {4.0, 16.0}, ring_bump({4.0, 16.0}), {1.0, 0.5});
  CHECK(rel_err(project_block(plateau, 1, part), plateau) == 0.0);

  // low-pass of a profile above 2 * 4^j vanishes; below 4^j it is unchanged
  auto high = make_localized(g, 3, {1.0, 4.0}, ring_bump({1.0, 4.0}), {1.0});
  CHECK(low_pass(high, 2, part).is_zero());
  auto low = make_localized(g, -1, {0.25, 0.9}, ring_bump({0.25, 0.9}), {1.0, 1.0});
  CHECK(rel_err(low_pass(low, 0, part), low) == 0.0);
}

TEST_CASE("localized profiles") {
  auto g = lp_grid();
  auto shape = ring_bump({1.0, 4.0});
  auto u = make_localized(g, 0, {1.0, 4.0}, shape, {1.0});
  auto [lo, hi] = u.lambda_range();
  CHECK(lo >= 1.0);
  CHECK(hi <= 2.0);
  CHECK(u.top_mode() == 0);
  auto u1 = make_localized(g, 1, {1.0, 4.0}, shape, {1.0});
  auto [lo1, hi1] = u1.lambda_range();
  CHECK(lo1 == 4.0 * lo);
  CHECK(hi1 == 4.0 * hi);
  for (size_t k = 0; k < g->size(); ++k)
    if (auto t = g->shifted(k, 2)) CHECK(u1(0, *t) == u(0, k));

  // eigenvalues 4|lambda|(2m+d) land in 4^{j+1} [sqrt r1, sqrt r2]
  auto multi = make_localized(g, 2, {1.0, 4.0}, shape, {1.0, 1.0, 1.0});
  auto [mu_lo, mu_hi] = multi.spectrum_range();
  CHECK(mu_lo >= 64.0 * 1.0);
  CHECK(mu_hi <= 64.0 * 2.0);

  CHECK_THROWS_AS(make_localized(g, 0, {1.0, 4.0}, ring_bump({1.0, 9.0})), DomainError);
  CHECK_THROWS_AS(make_localized(g, 0, {2.0, 1.0}, shape), DomainError);
  CHECK_THROWS_AS(make_localized(g, 6, {1.0, 4.0}, shape, {1.0}), DomainError);
  CHECK_THROWS_AS(ring_bump({1.0, 4.0}, 0.2, 0.9), DomainError);
}

TEST_CASE("besov norm") {
  auto g = lp_grid();
  auto part = build_partition(1, -6, 8);
  CHECK(besov_norm(RadialProfile(g), {1.0, 2.0, 2.0}, part) == 0.0);

  // one block: the plateau of block 0 meets no other block
  auto one = make_localized(g, 0, {4.0, 16.0}, ring_bump({4.0, 16.0}), {1.0, 0.3});
  const double w2 = plancherel_norm(one);
  for (double s : {-1.0, 0.0, 0.5, 2.0})
    for (double r : {1.0, 2.0, kInf}) CHECK(besov_norm(one, {s, 2.0, r}, part) == doctest::Approx(w2).epsilon(1e-14));
  const double winf = profile_norm(one, kInf);
  CHECK(besov_norm(one, {1.0, kInf, 2.0}, part) == doctest::Approx(winf).epsilon(1e-12));

  // dilation covariance: u o delta_2 shifts blocks by one
  auto P = broad_profile(g);
  const int N = homogeneous_dim(1);
  for (double s : {-1.0, 0.5, 1.0})
    for (double r : {1.0, 2.0, kInf}) {
      const double a = besov_norm(P, {s, 2.0, r}, part);
      const double b = besov_norm(dilate_profile(P, 1), {s, 2.0, r}, part);
      CHECK(b == doctest::Approx(std::pow(2.0, s - N / 2.0) * a).epsilon(1e-12));
    }
  const double ainf = besov_norm(P, {0.5, kInf, kInf}, part);
  const double binf = besov_norm(dilate_profile(P, 1), {0.5, kInf, kInf}, part);
  CHECK(binf == doctest::Approx(std::pow(2.0, 0.5) * ainf).epsilon(1e-6));

  // content outside the block range is rejected
  auto narrow = build_partition(1, 0, 1);
  CHECK_THROWS_AS(besov_norm(P, {0.0, 2.0, 2.0}, narrow), DomainError);
}

TEST_CASE("sobolev norm") {
  auto g = lp_grid();
  auto P = broad_profile(g);
  CHECK(sobolev_norm(P, 0.0, 2.0) == plancherel_norm(P));

  // one mode m0 = 2 near lambda0: s = 2 scales by 4 lambda (2 m0 + 1)
  auto one = make_localized(g, 2, {1.0, 1.1}, ring_bump({1.0, 1.1}), {0.0, 0.0, 1.0});
  auto [lo, hi] = one.lambda_range();
  const double ratio = sobolev_norm(one, 2.0, 2.0) / plancherel_norm(one);
  CHECK(ratio >= eigenvalue(2, lo, 1) * (1 - 1e-12));
  CHECK(ratio <= eigenvalue(2, hi, 1) * (1 + 1e-12));
  CHECK(hi / lo <= 1.05);

  // Hs against B^s_{2,2}: bounded ratio, dilation invariant
  auto part = build_partition(1, -6, 8);
  const double r0 = besov_norm(P, {1.0, 2.0, 2.0}, part) / sobolev_norm(P, 1.0, 2.0);
  const double r1 = besov_norm(dilate_profile(P, 1), {1.0, 2.0, 2.0}, part) / sobolev_norm(dilate_profile(P, 1), 1.0, 2.0);
  CHECK(r0 > 0.1);
  CHECK(r0 < 1.0);
  CHECK(r1 == doctest::Approx(r0).epsilon(1e-10));

  Eigen::MatrixXcd touch = P.values();
  touch(0, g->index(+1, 0, 3)) = 1.0;
  CHECK_THROWS_AS(sobolev_norm(RadialProfile(g, touch), -1.0, 2.0), DomainError);
  CHECK(sobolev_norm(P, -1.0, 2.0) > 0.0);
  auto away = make_localized(g, 0, {1.0, 4.0}, ring_bump({1.0, 4.0}), {1.0});
  CHECK(sobolev_norm(away, -1.0, 2.0) > 0.0);
}

TEST_CASE("sobolev s = 2 against the finite-difference sub-Laplacian") {
  auto g = lp_grid();
  auto u = make_localized(g, 0, {1.0, 4.0}, ring_bump({1.0, 4.0}), {1.0, 0.5});
  auto lu = multiplier(u, [](int m, double lam) { return cplx(eigenvalue(m, lam, 1)); });
  std::vector<double> errs;
  for (int n : {33, 65}) {
    GridSpec G = GridSpec::cube(n, 6.0, 2 * (n - 1), 12.0);
    auto sample = [&](const RadialProfile& q) {
      SampledField out(G);
      std::vector<double> svals(G.ns);
      for (int k = 0; k < G.ns; ++k) svals[k] = G.s(k);
      for (int i = 0; i < G.nx; ++i)
        for (int j = 0; j < G.ny; ++j) {
          auto row = synthesize(q, {std::hypot(G.x(i), G.y(j))}, svals);
          for (int k = 0; k < G.ns; ++k) out.at(i, j, k) = row(0, k);
        }
      return out;
    };
    auto fu = sample(u), flu = sample(lu);
    auto fd = sublaplacian_fd(fu);
    // interior only: away from the x, y edges and from the s seam
    double num = 0.0, den = 0.0;
    for (int i = 2; i < n - 2; ++i)
      for (int j = 2; j < n - 2; ++j)
        for (int k = 2; k < G.ns - 2; ++k) {
          num += std::norm(-fd.at(i, j, k) - flu.at(i, j, k));
          den += std::norm(flu.at(i, j, k));
        }
    errs.push_back(std::sqrt(num / den));
  }
  CHECK(errs[0] <= 5e-2);
  CHECK(errs[1] <= errs[0] / 3.0);
}

TEST_CASE("uniform boundedness of block projections") {
  auto g = lp_grid();
  auto part = build_partition(1, -6, 8);
  auto P = broad_profile(g);
  const double n2 = plancherel_norm(P), ninf = profile_norm(P, kInf);
  double worst2 = 0.0, worst_inf = 0.0;
  for (int j = -3; j <= 3; ++j) {
    auto b = project_block(P, j, part);
    worst2 = std::max(worst2, plancherel_norm(b) / n2);
    worst_inf = std::max(worst_inf, profile_norm(b, kInf) / ninf);
  }
  CHECK(worst2 <= 1.0);
  CHECK(worst_inf <= 2.0);
}

TEST_CASE("bernstein") {
  auto g = lp_grid();
  BernsteinOptions opt;
  auto family = ring_family(opt.ring, 4, 3, 7);
  auto zero = bernstein_check(g, 0.0, 2.0, family, opt);
  CHECK(zero.fitted_c == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(zero.fitted_C == doctest::Approx(1.0).epsilon(1e-14));

  // one mode at p = 2: ratio = 4 tau with tau in the ring
  std::vector<LocalizedSpec> single{{ring_bump(opt.ring), {1.0}}};
  auto one = bernstein_check(g, 2.0, 2.0, single, opt);
  CHECK(one.fitted_c >= 4.0 * std::sqrt(opt.ring.r1));
  CHECK(one.fitted_C <= 4.0 * std::sqrt(opt.ring.r2));
  CHECK(one.measured == doctest::Approx(1.0).epsilon(1e-10));

  for (double rho : {1.0, 2.0})
    for (double p : {2.0, kInf}) {
      auto rep = bernstein_check(g, rho, p, family, opt);
      CHECK(rep.pass);
      CHECK(rep.measured <= 1.5);
    }
}
