#include "catch_amalgamated.hpp"

#include <cmath>

#include "pendulon/lagexp.hpp"

using namespace pendulon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// L_tw of the rebuilt chain at eps with the series fields, plain doubles
double direct_lagrangian(const ExpansionParams& q, const ExpansionPoint& x, double e) {
  auto series = [e](const std::array<double, 3>& a) { return a[0] + e * a[1] + e * e * a[2]; };
  const ChainParams p = q.to_chain_params(e);
  return tw_lagrangian_density(series(x.th), series(x.ph), series(x.th_z), series(x.ph_z),
                               TWParams::make(q.speed(e), p), p);
}

}  // namespace

TEST_CASE("zero fields") {
  const ExpansionParams q;
  ExpandedLagrangianSample s;
  s.params = q;
  s.z = {0.0};
  s.pts.resize(1);
  const LagrangianOrders L = eval_L0_L1_L2(s);
  CHECK_THAT(L.L0[0], WithinRel(q.A * q.g * q.Mhat - q.h.h(0.0), 1e-15));
  CHECK_THAT(L.L0[0], WithinRel(lagrangian_series(q, s.pts[0])[0], 1e-15));
  CHECK(auxiliary_check(s, 0) == 0.0);
}

TEST_CASE("closed forms match the eps-expansion of the travelling-wave Lagrangian") {
  const ExpansionParams q;
  const ExpandedLagrangianSample s = random_sample(q, 100, 1);
  const ExpansionCheck c = check_expansion(s);
  for (int k = 0; k < 3; ++k) {
    CHECK(c.L_rel[k] < 1e-6);
    CHECK(c.aux[k] < 1e-10);
  }
  CHECK(c.aux_control > 1e-6);
  CHECK(c.E10_E21 < 1e-14);
  CHECK(c.E10_rel < 1e-6);
  CHECK(c.E20_rel < 1e-6);

  ExpansionParams b = q;
  b.h = ConfiningPotential::tangent_barrier(0.02, 0.8, 0.1);
  const ExpansionCheck cb = check_expansion(random_sample(b, 100, 7));
  for (int k = 0; k < 3; ++k) {
    CHECK(cb.L_rel[k] < 1e-6);
    CHECK(cb.aux[k] < 1e-10);
  }
  CHECK(cb.E20_rel < 1e-6);
}

TEST_CASE("the series oracle agrees with finite differences in eps") {
  const ExpansionParams q;
  const ExpandedLagrangianSample s = random_sample(q, 20, 3);
  const double e = 1e-3;
  for (const ExpansionPoint& x : s.pts) {
    const auto t = lagrangian_series(q, x);
    const double lp = direct_lagrangian(q, x, e), l0 = direct_lagrangian(q, x, 0.0),
                 lm = direct_lagrangian(q, x, -e);
    CHECK_THAT(t[0], WithinAbs(l0, 1e-15 * std::abs(l0) + 1e-18));
    CHECK_THAT(t[1], WithinAbs((lp - lm) / (2 * e), 1e-5 * (std::abs(t[1]) + std::abs(l0))));
    CHECK_THAT(t[2], WithinAbs((lp - 2 * l0 + lm) / (2 * e * e), 1e-4 * (std::abs(t[2]) + std::abs(l0))));
  }
}

TEST_CASE("L1 without order-1 driving keeps only the theta0-theta1 cross terms") {
  ExpansionParams q;
  q.r1 = q.k1 = q.v1 = 0.0;
  ExpandedLagrangianSample s = random_sample(q, 50, 11);
  for (auto& x : s.pts) x.ph[0] = x.ph_z[0] = 0.0;
  const LagrangianOrders L = eval_L0_L1_L2(s);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const ExpansionPoint& x = s.pts[j];
    const double cross = q.A * q.A * mu_hat(q) * x.th_z[0] * x.th_z[1] -
                         q.A * q.Mhat * q.g * std::sin(x.th[0]) * x.th[1];
    CHECK_THAT(L.L1[j], WithinAbs(cross, 1e-14));
  }
}

TEST_CASE("the phi1' and phi2' directions are auxiliary; phi0' is not") {
  const ExpansionParams q;
  const ExpandedLagrangianSample s = random_sample(q, 30, 5);
  CHECK(auxiliary_check(s, 1) == 0.0);
  CHECK(auxiliary_check(s, 2) == 0.0);
  CHECK(lagrangian_slope(s, 2, 0) > 1e-6);
  CHECK(lagrangian_slope(s, 1, 0) > 1e-6);
}

TEST_CASE("slaving relations from the identities match the perturbative formulas") {
  for (const ConfiningPotential& h :
       {ConfiningPotential::quadratic(0.01), ConfiningPotential::tangent_barrier(0.01, 1.0, 0.05)}) {
    ExpansionParams q;
    q.h = h;
    const auto z = kink_z_grid(q, 1201);
    const SlavingReport r = slaving_consistency(q, z);
    for (double a : r.A_k) CHECK(a == 0.0);
    CHECK(r.phi1_rel < 1e-10);
    CHECK(r.phi2_rel < 1e-6);
  }
}

TEST_CASE("phi1 from E10 is the closed form") {
  // with phi0 = 0, E10 = A K r1 theta0'' - h'' phi1, so phi1 = A K r1 theta0'' / h''
  const ExpansionParams q;
  const auto z = kink_z_grid(q, 401);
  const auto phi1 = order1_phi(q, z);
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double t0zz = sg_kink(z[j], q).theta_zz;
    CHECK_THAT(phi1[j], WithinAbs(q.A * q.Khat * q.r1 * t0zz / q.h.d2h(0.0), 1e-10 * std::abs(q.r1)));
  }
}

TEST_CASE("random samples are reproducible") {
  const ExpansionParams q;
  const auto a = random_sample(q, 10, 42), b = random_sample(q, 10, 42), c = random_sample(q, 10, 43);
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a.pts[j].th == b.pts[j].th);
    CHECK(a.pts[j].ph_zz == b.pts[j].ph_zz);
    CHECK(std::abs(a.pts[j].ph[0]) < 0.5 * q.h.phi0);
  }
  CHECK(a.pts[0].th != c.pts[0].th);
}
