#include "unimax/certifier.hpp"
#include "unimax/family.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace unimax;

namespace {

UniqueMaxCertificate as_cert(const CertifyOutcome& o) {
  EXPECT_TRUE(std::holds_alternative<UniqueMaxCertificate>(o)) << "outcome index " << o.index();
  static const UniqueMaxCertificate empty{};
  const auto* c = std::get_if<UniqueMaxCertificate>(&o);
  return c ? *c : empty;
}

FunctionFamily csv_t_t2(std::size_t resolution) {
  std::stringstream ss;
  ss << "t,g1,g2\n";
  for (std::size_t i = 0; i < resolution; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(resolution - 1);
    ss << detail::format_number(t) << ',' << detail::format_number(t) << ',' << detail::format_number(t * t) << '\n';
  }
  return load_family_csv(ss);
}

}  // namespace

TEST(BruteForce, SortedDescendingWithIndexTieBreak) {
  // Tabulated values with a tie between indices 2 and 5.
  const std::vector<double> table{0.1, 0.3, 0.9, 0.2, -1.0, 0.9, 0.5};
  FunctionFamily f("tab", {"f"}, SampledDomain::interval(0.0, 1.0, table.size()), table);
  const auto top = brute_force_argmax(f, Vector{1.0}, 4);
  ASSERT_EQ(top.size(), 4u);
  EXPECT_EQ(top[0].index, 2u);
  EXPECT_EQ(top[1].index, 5u);
  EXPECT_EQ(top[2].index, 6u);
  EXPECT_EQ(top[3].index, 1u);
  EXPECT_EQ(brute_force_argmax(f, Vector{1.0}, 100).size(), table.size());
  EXPECT_THROW(brute_force_argmax(f, Vector{1.0}, 0), InvalidCount);
  EXPECT_THROW(brute_force_argmax(f, Vector{0.0}), ZeroCombination);
}

TEST(BruteForce, CircleQuarterTurn) {
  const auto f = make_circle_family(4096);
  const auto top = brute_force_argmax(f, Vector{1.0, 0.0});
  EXPECT_NEAR(*top[0].point.parameter, std::numbers::pi / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(top[0].value, 1.0);
}

TEST(BruteForce, SphereSampleNearestTheCoefficientDirection) {
  const auto f = make_sphere_projection_family(2, 1000, SphereScheme::random_uniform, 4);
  std::size_t oracle = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.domain().point(i)[1] > f.domain().point(oracle)[1]) oracle = i;
  }
  EXPECT_EQ(brute_force_argmax(f, Vector{0.0, 1.0})[0].index, oracle);
}

TEST(BruteForce, IndependentOfThreadCount) {
  const auto f = make_real_line_family(20001);
  const Vector c{0.3, -0.7};
  const auto a = brute_force_argmax(f, c, 10, Parallelism{1});
  const auto b = brute_force_argmax(f, c, 10, Parallelism{4});
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].index, b[i].index);
    EXPECT_EQ(a[i].value, b[i].value);
  }
}

TEST(Refine, CircleGoldenSection) {
  const auto f = make_circle_family(4096);
  const Vector c{1.0, 1.0};
  const auto seed = brute_force_argmax(f, c)[0];
  const auto r = refine_local(f, c, seed.index, 2.0 * 2.0 * std::numbers::pi / 4096.0);
  EXPECT_NEAR(*r.point.parameter, std::numbers::pi / 4.0, 1e-8);
  EXPECT_NEAR(r.value, std::sqrt(2.0), 1e-10);
  EXPECT_GE(r.value, seed.value);
}

TEST(Refine, RealLineHitsTanPiOverEight) {
  const auto f = make_real_line_family(20001);
  const Vector c{0.0, 1.0};
  const auto seed = brute_force_argmax(f, c)[0];
  const auto r = refine_local(f, c, seed.index, 4.0 / 20002.0);
  EXPECT_NEAR(r.point.coords[0], std::sqrt(2.0) - 1.0, 1e-6);
  EXPECT_GE(r.value, seed.value);
}

TEST(Refine, PlateauAndDegenerateRadiusReturnTheSeed) {
  const auto f = make_polynomial_family({{1.0}, {0.0, 1.0}}, 101);
  const Vector c{1.0, 0.0};
  const auto r = refine_local(f, c, 40, 0.05);
  EXPECT_EQ(r.point.index, std::optional<std::size_t>(40));
  EXPECT_EQ(r.value, 1.0);
  const auto g = make_circle_family(64);
  const auto z = refine_local(g, Vector{1.0, 1.0}, 8, 0.0);
  EXPECT_EQ(*z.point.parameter, g.domain().parameter(8));
}

TEST(Refine, NeverWorseThanTheSeed) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  const auto sphere = make_sphere_projection_family(4, 2000);
  const auto line = make_real_line_family(501);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector c4{g(rng), g(rng), g(rng), g(rng)};
    const auto s = brute_force_argmax(sphere, c4)[0];
    const auto rs = refine_local(sphere, c4, s.index, 0.2);
    EXPECT_GE(rs.value, s.value);
    EXPECT_NEAR(norm2(rs.point.coords), 1.0, 1e-12);
    const Vector c2{g(rng), g(rng)};
    const auto l = brute_force_argmax(line, c2)[0];
    EXPECT_GE(refine_local(line, c2, l.index, 0.01).value, l.value);
  }
}

TEST(Certify, SphereOneTwoTwo) {
  const auto f = make_sphere_projection_family(3, 20000);
  const auto c = as_cert(certify_unique_max(f, Vector{1.0, 2.0, 2.0}));
  EXPECT_NEAR(distance(c.location.coords, Vector{1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0}), 0.0, 1e-6);
  EXPECT_NEAR(c.value, 3.0, 1e-10);
  EXPECT_GT(c.margin, 0.0);
}

TEST(Certify, CsvQuadraticTiesAtBothEndpoints) {
  const auto f = csv_t_t2(1001);
  const auto o = certify_unique_max(f, Vector{-1.0, 1.0});
  ASSERT_TRUE(std::holds_alternative<NonUniqueWitness>(o));
  const auto& w = std::get<NonUniqueWitness>(o);
  ASSERT_EQ(w.locations.size(), 2u);
  EXPECT_EQ(w.locations[0].coords[0], 0.0);
  EXPECT_EQ(w.locations[1].coords[0], 1.0);
  EXPECT_EQ(w.values[0], 0.0);
  EXPECT_EQ(w.values[1], 0.0);
  EXPECT_NEAR(w.separation, 1.0, 1e-15);
  EXPECT_FALSE(w.truncated);
}

// The runner-up outside the ball is the best sample with |theta - pi/2| > r.
TEST(Certify, CircleMarginMatchesOracle) {
  const auto f = make_circle_family(4096);
  const Vector c{1.0, 0.0};
  const auto cert = as_cert(certify_unique_max(f, c));
  const double r = cert.exclusion_radius;
  double best_outside = -2.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double th = f.domain().parameter(i);
    if (std::abs(th - *cert.location.parameter) > r) best_outside = std::max(best_outside, std::sin(th));
  }
  EXPECT_NEAR(cert.margin, cert.value - best_outside, 1e-15);
  const double h = 2.0 * std::numbers::pi / 4096.0;
  // The nearest sample outside the ball lies within one step of its boundary.
  EXPECT_GE(cert.margin, 1.0 - std::cos(r));
  EXPECT_LE(cert.margin, 1.0 - std::cos(r + h) + 1e-12);
  EXPECT_NEAR(*cert.location.parameter, std::numbers::pi / 2.0, 1e-8);
}

TEST(Certify, DefaultsAreReported) {
  const auto f = make_circle_family(4096);
  const auto cert = as_cert(certify_unique_max(f, Vector{2.0, 0.0}));
  EXPECT_NEAR(cert.exclusion_radius, 20.0 * std::numbers::pi / 4096.0, 1e-12);
  EXPECT_NEAR(cert.tie_tolerance, 2e-9, 1e-24);
  EXPECT_EQ(cert.resolution, 4096u);
}

TEST(Certify, PositiveScalingInvariance) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const auto f = make_real_line_family(4001);
  for (int trial = 0; trial < 40; ++trial) {
    const Vector c{g(rng), g(rng)};
    const double lambda = 0.01 + std::abs(g(rng)) * 10.0;
    const Vector cl{lambda * c[0], lambda * c[1]};
    const auto a = certify_unique_max(f, c);
    const auto b = certify_unique_max(f, cl);
    ASSERT_EQ(a.index(), b.index());
    if (const auto* ca = std::get_if<UniqueMaxCertificate>(&a)) {
      const auto& cb = std::get<UniqueMaxCertificate>(b);
      EXPECT_NEAR(*ca->location.parameter, *cb.location.parameter, 1e-7);
      EXPECT_NEAR(cb.value, lambda * ca->value, 1e-9 * lambda);
      EXPECT_NEAR(cb.margin, lambda * ca->margin, 1e-7 * lambda);
    }
  }
}

TEST(Certify, SphereNegationGivesTheAntipode) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  const auto f = make_sphere_projection_family(3, 4000);
  for (int trial = 0; trial < 30; ++trial) {
    const Vector c{g(rng), g(rng), g(rng)};
    const Vector m{-c[0], -c[1], -c[2]};
    const auto a = as_cert(certify_unique_max(f, c));
    const auto b = as_cert(certify_unique_max(f, m));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.location.coords[k], -b.location.coords[k], 1e-7);
  }
}

TEST(Certify, CertificateAndWitnessSoundness) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vector> gens(2, Vector(4));
    for (auto& p : gens) {
      for (double& x : p) x = g(rng);
    }
    const auto f = make_polynomial_family(gens, 2001);
    const Vector c{g(rng), g(rng)};
    const auto o = certify_unique_max(f, c);
    if (const auto* cert = std::get_if<UniqueMaxCertificate>(&o)) {
      EXPECT_GT(cert->margin, 0.0);
      for (std::size_t i = 0; i < f.size(); ++i) ASSERT_LE(f.evaluate(c, i), cert->value + 1e-12);
    } else if (const auto* w = std::get_if<NonUniqueWitness>(&o)) {
      for (std::size_t a = 0; a < w->locations.size(); ++a) {
        EXPECT_GE(f.evaluate(c, *w->locations[a].index), w->sampled_max - w->tie_tolerance);
        for (std::size_t b = 0; b < a; ++b) {
          EXPECT_GT(f.domain().distance(*w->locations[a].index, *w->locations[b].index), w->exclusion_radius);
        }
      }
    }
  }
}

TEST(Certify, NoSamplesOutsideTheBallIsInconclusive) {
  const auto f = make_circle_family(256);
  CertifyOptions o;
  o.exclusion_radius = 100.0;
  const auto out = certify_unique_max(f, Vector{1.0, 0.0}, o);
  ASSERT_TRUE(std::holds_alternative<InconclusiveMargin>(out));
  EXPECT_FALSE(std::get<InconclusiveMargin>(out).reason.empty());
}

TEST(Certify, RejectsBadArguments) {
  const auto f = make_circle_family(64);
  EXPECT_THROW(certify_unique_max(f, Vector{0.0, 0.0}), ZeroCombination);
  EXPECT_THROW(certify_unique_max(f, Vector{1.0}), DimensionMismatch);
  CertifyOptions neg;
  neg.exclusion_radius = -1.0;
  EXPECT_THROW(certify_unique_max(f, Vector{1.0, 0.0}, neg), MalformedInput);
  CertifyOptions tie;
  tie.tie_tolerance = -1.0;
  EXPECT_THROW(certify_unique_max(f, Vector{1.0, 0.0}, tie), MalformedInput);
}

TEST(Certify, ManyTiedClustersAreCapped) {
  std::vector<double> table(2000, 0.0);
  for (std::size_t i = 0; i < 100; ++i) table[10 + 20 * i] = 1.0;
  FunctionFamily f("spikes", {"f"}, SampledDomain::interval(0.0, 1.0, table.size()), table);
  const auto o = certify_unique_max(f, Vector{1.0});
  ASSERT_TRUE(std::holds_alternative<NonUniqueWitness>(o));
  const auto& w = std::get<NonUniqueWitness>(o);
  EXPECT_TRUE(w.truncated);
  EXPECT_EQ(w.locations.size(), kMaxWitnessClusters);
  EXPECT_EQ(*w.locations.front().index, 10u);
}

TEST(Certify, IndependentOfThreadCount) {
  const auto f = make_sphere_projection_family(4, 20000);
  const Vector c{0.1, -0.4, 0.8, 0.2};
  CertifyOptions one, four;
  four.parallel.threads = 4;
  const auto a = as_cert(certify_unique_max(f, c, one));
  const auto b = as_cert(certify_unique_max(f, c, four));
  EXPECT_EQ(a.location.coords, b.location.coords);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.margin, b.margin);
}

TEST(ClosedForm, Examples) {
  const auto [z, v] = closed_form_sphere_argmax(Vector{3.0, 4.0});
  EXPECT_DOUBLE_EQ(z[0], 0.6);
  EXPECT_DOUBLE_EQ(z[1], 0.8);
  EXPECT_DOUBLE_EQ(v, 5.0);
  const auto [e, ev] = closed_form_sphere_argmax(Vector{0.0, 0.0, 0.0, 1.0});
  EXPECT_EQ(e.vector(), (Vector{0.0, 0.0, 0.0, 1.0}));
  EXPECT_EQ(ev, 1.0);
  const auto [zl, vl] = closed_form_sphere_argmax(Vector{7.5, 10.0});
  EXPECT_NEAR(zl[0], 0.6, 1e-16);
  EXPECT_DOUBLE_EQ(vl, 12.5);
  EXPECT_THROW(closed_form_sphere_argmax(Vector{0.0, 0.0}), ZeroVector);
}
