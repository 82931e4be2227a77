#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "pendulon/reductions.hpp"

using namespace pendulon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ChainParams continuum_chain(double M, double m, double R, double r, double Ks) {
  return ChainParams::from_continuum(M, m, R, r, 0.0, Ks, 9.81, 1.0, ConfiningPotential::quadratic(1.0));
}

// Selected speed 5 m/s, mu_star = -0.04.
ChainParams stiff_chain() {
  ChainParams p = continuum_chain(0.008, 0.002, 0.08, 0.02, 0.01);
  p.delta = 0.005;
  p.kappa_s = 0.01 / (p.delta * p.delta);
  p.h = ConfiningPotential::tangent_barrier(1.0, 1.0);
  return p;
}

std::vector<double> kink_psi(const std::vector<double>& z, double k) {
  std::vector<double> psi(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) psi[j] = 4.0 * std::atan(std::exp(k * z[j]));
  return psi;
}

double max_abs(const std::vector<double>& v, std::size_t skip = 0) {
  double m = 0.0;
  for (std::size_t j = skip; j + skip < v.size(); ++j) m = std::max(m, std::abs(v[j]));
  return m;
}

}  // namespace

TEST_CASE("compatibility value of mu") {
  CHECK_THAT(compatibility_mu(continuum_chain(1, 1, 3, 1, 1)), WithinAbs(-3.0, 1e-15));
  CHECK(compatibility_mu(continuum_chain(1, 1, 3, 1, 0)) == 0.0);
  const double a = compatibility_mu(continuum_chain(1, 1, 1.5, 0.4, 2.0));
  const double b = compatibility_mu(continuum_chain(1, 1, 3.0, 0.4, 2.0));
  CHECK_THAT(b, WithinRel(2.0 * a, 1e-15));
  CHECK_THROWS_AS(compatibility_mu(continuum_chain(1, 1, 3, 0, 1)), DomainError);
}

TEST_CASE("selected speed") {
  const SpeedSelection s = selected_speed(continuum_chain(1, 1, 3, 1, 1));
  CHECK_THAT(s.v_star, WithinAbs(2.0, 1e-15));
  CHECK_THAT(s.mu_star, WithinAbs(-3.0, 1e-15));

  ChainParams flat = continuum_chain(1, 0.5, 0, 1, 2.0);
  const SpeedSelection f = selected_speed(flat);
  CHECK_THAT(f.v_star, WithinRel(std::sqrt(2.0 / 0.5), 1e-15));
  CHECK(f.mu_star == 0.0);

  const double v1 = selected_speed(continuum_chain(1, 0.3, 2, 0.5, 1.2)).v_star;
  const double v4 = selected_speed(continuum_chain(1, 1.2, 2, 0.5, 1.2)).v_star;
  CHECK_THAT(v4, WithinRel(0.5 * v1, 1e-15));

  CHECK_THROWS_AS(selected_speed(continuum_chain(1, 1, 3, 0, 1)), DomainError);
  ChainParams nom = continuum_chain(1, 1, 3, 1, 1);
  nom.m = 0.0;
  CHECK_THROWS_AS(selected_speed(nom), DomainError);

  const SpeedSelection st = selected_speed(stiff_chain());
  CHECK_THAT(st.v_star, WithinRel(5.0, 1e-14));
  CHECK_THAT(st.mu_star, WithinRel(-0.04, 1e-14));
}

TEST_CASE("speed selection invariant over random chains") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const ChainParams p = continuum_chain(u(rng), u(rng), u(rng), u(rng), u(rng));
    const SpeedSelection s = selected_speed(p);
    const double mu = p.Ks() - p.m * s.v_star * s.v_star;
    REQUIRE_THAT(mu, WithinAbs(s.mu_star, 1e-12 * std::max(1.0, std::abs(s.mu_star))));
    REQUIRE_THAT(s.mu_star, WithinRel(compatibility_mu(p), 1e-15));
  }
}

TEST_CASE("reduced equations are the travelling-wave equations at phi = 0") {
  const ChainParams p = stiff_chain();
  const double v = 3.7;
  const auto z = make_z_grid(200, 1.0);
  std::vector<double> psi(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) psi[j] = 1.1 * std::sin(3.0 * z[j]) + 0.4 * z[j];
  const TWResidual red = reduced_equations_residual(z, psi, p, v);

  TWProfile prof = profile_from(z, TWParams::make(v, p), [](double) { return ProfileSample{}; });
  for (std::size_t j = 0; j < z.size(); ++j) prof.theta[j] = psi[j] + std::numbers::pi;
  const TWResidual full = tw_residual(prof, p);
  for (std::size_t j = 0; j < z.size(); ++j) {
    CHECK_THAT(red.res1[j], WithinAbs(full.res1[j], 1e-9 * max_abs(full.res1)));
    CHECK_THAT(red.res2[j], WithinAbs(full.res2[j], 1e-9 * max_abs(full.res2)));
  }

  ChainParams r0 = p;
  r0.r = 0.0;
  for (double x : reduced_equations_residual(z, psi, r0, v).res2) CHECK(x == 0.0);

  ChainParams kt = p;
  kt.kappa_t = 1.0;
  CHECK_THROWS_AS(reduced_equations_residual(z, psi, kt, v), DomainError);
}

TEST_CASE("kink at the selected speed solves both reduced equations") {
  const ChainParams p = stiff_chain();
  const double vs = selected_speed(p).v_star;
  const double k = reduced_kink_k(p, vs);
  CHECK_THAT(k * k, WithinRel(p.g * p.m * p.r / (p.Ks() * p.R * (p.r + p.R)), 1e-13));
  // both reduced equations and the frozen-phi travelling wave share the width
  CHECK_THAT(frozen_kink(p, vs).k, WithinRel(k, 1e-12));
  CHECK(frozen_kink(p, vs).inverted);

  const auto z = make_z_grid(1000, 20.0 / k);
  const auto psi = kink_psi(z, k);
  const TWResidual r = reduced_equations_residual(z, psi, p, vs);
  CHECK(max_abs(r.res1, 1) < 1e-8);
  CHECK(max_abs(r.res2, 1) < 1e-8);
  CHECK(proportionality_mismatch(psi, p, vs) < 1e-10);

  // negative control: same profile, other speed
  const TWResidual off = reduced_equations_residual(z, psi, p, 1.2 * vs);
  CHECK(max_abs(off.res2, 1) > 1e-5);
  CHECK(proportionality_mismatch(psi, p, 1.2 * vs) > 1e-2);
}

TEST_CASE("stiff confinement") {
  const ChainParams p = stiff_chain();
  const double vs = selected_speed(p).v_star;
  const double unit = (p.M + p.m) * p.g;
  const auto z = stiff_z_grid(p, 600);

  SECTION("at the selected speed phi stays zero") {
    for (double h2 : {10.0 * unit, 1000.0 * unit}) {
      const StiffCell c = stiff_cell(p, h2, vs, z);
      REQUIRE(c.converged);
      CHECK(c.max_abs_phi < 1e-3 * p.h.phi0);
      CHECK(c.residual < 1e-9);
      CHECK(c.frozen_residual < 1e-7);
    }
  }

  SECTION("off the selected speed phi falls with stiffness but the frozen residual does not") {
    std::vector<StiffCell> cells;
    for (double h2 : {0.1 * unit, 1.0 * unit, 10.0 * unit, 100.0 * unit}) cells.push_back(stiff_cell(p, h2, 1.2 * vs, z));
    for (const StiffCell& c : cells) REQUIRE(c.converged);
    for (std::size_t i = 1; i < cells.size(); ++i) CHECK(cells[i].max_abs_phi < cells[i - 1].max_abs_phi);
    CHECK(cells.back().frozen_residual > 0.5 * cells.front().frozen_residual);
    CHECK(cells.back().frozen_residual > 1e-6);
  }

  SECTION("no inverted kink far below the selected speed") {
    const StiffCell c = stiff_cell(p, 10.0 * unit, 0.1 * vs, z);
    CHECK_FALSE(c.converged);
    CHECK_FALSE(c.message.empty());
  }

  SECTION("experiment validation") {
    CHECK_THROWS_AS(stiff_limit_experiment(p, {10.0, 5.0}, {vs}), DomainError);
    CHECK_THROWS_AS(stiff_limit_experiment(p, {}, {vs}), DomainError);
    const StiffReport rep = stiff_limit_experiment(p, {100.0 * unit}, {0.9 * vs, vs}, 400);
    CHECK(rep.cells.size() == 2);
    CHECK(rep.window.size() == 1);
  }
}

TEST_CASE("success windows") {
  auto cell = [](double v, bool ok, double phi) {
    StiffCell c;
    c.v = v;
    c.converged = ok;
    c.max_abs_phi = phi;
    return c;
  };
  const std::vector<StiffCell> cells{cell(1, true, 0.5), cell(2, true, 0.05), cell(3, true, 0.01),
                                     cell(4, false, 0.0), cell(1, true, 0.2), cell(2, true, 0.2),
                                     cell(3, true, 0.01), cell(4, true, 0.2)};
  const auto w = stiff_windows(cells, 2, 1.0);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 0.0);
  CHECK_THROWS_AS(stiff_windows(cells, 3, 1.0), DomainError);
}
