#include "unimax/gdelta.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace unimax;

namespace {

double sin_pi(double t) { return std::sin(std::numbers::pi * t); }
double quartic(double t) { return -std::pow(t - 0.25, 2) * std::pow(t - 0.75, 2); }

// O(R^2) reference straight from the definition, using |t_j - t_i| >= 1/n on
// integer offsets: n |j - i| >= R - 1.
std::optional<std::size_t> membership_oracle(const SampledFunction01& f, std::size_t n) {
  const std::size_t r = f.resolution();
  for (std::size_t i = 0; i < r; ++i) {
    bool any = false;
    bool beats = true;
    for (std::size_t j = 0; j < r; ++j) {
      const std::size_t d = j > i ? j - i : i - j;
      if (n * d < r - 1) continue;
      any = true;
      if (!(f[i] > f[j])) beats = false;
    }
    if (any && beats) return i;
  }
  return std::nullopt;
}

SampledFunction01 random_trig(std::mt19937_64& rng, std::size_t r) {
  std::normal_distribution<double> g;
  std::vector<double> a(4), b(4);
  for (auto& x : a) x = g(rng);
  for (auto& x : b) x = g(rng);
  return SampledFunction01::from_function(
      [&](double t) {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
          s += a[k] * std::cos(std::numbers::pi * (k + 1) * t) + b[k] * std::sin(std::numbers::pi * (k + 1) * t);
        }
        return s;
      },
      r);
}

}  // namespace

TEST(Sampled, Construction) {
  EXPECT_THROW(SampledFunction01(std::vector<double>(16, 0.0)), ResolutionTooSmall);
  std::vector<double> bad(20, 0.0);
  bad[3] = std::nan("");
  EXPECT_THROW(SampledFunction01{bad}, MalformedInput);
  const auto f = SampledFunction01::from_function(sin_pi, 101);
  EXPECT_EQ(f.resolution(), 101u);
  EXPECT_DOUBLE_EQ(f.step(), 0.01);
  EXPECT_EQ(f.t(0), 0.0);
  EXPECT_EQ(f.t(100), 1.0);
  EXPECT_EQ(f.first_argmax(), 50u);
}

TEST(Sampled, CsvRoundTrip) {
  const auto f = SampledFunction01::from_function(quartic, 257);
  std::stringstream ss;
  write_sampled_csv(f, ss);
  EXPECT_EQ(ss.str().substr(0, 8), "t,value\n");
  EXPECT_EQ(read_sampled_csv(ss), f);
}

TEST(Sampled, CsvRejectsBadInput) {
  std::istringstream no_header("0,1\n1,2\n");
  EXPECT_THROW(read_sampled_csv(no_header), MalformedInput);
  std::ostringstream os;
  os << "t,value\n";
  for (int i = 0; i < 20; ++i) os << (i == 7 ? 0.5 : i / 19.0) << ",0\n";
  std::istringstream off_grid(os.str());
  EXPECT_THROW(read_sampled_csv(off_grid), MalformedInput);
  std::istringstream short_file("t,value\n0,1\n1,1\n");
  EXPECT_THROW(read_sampled_csv(short_file), ResolutionTooSmall);
  std::istringstream junk("t,value\n0,abc\n");
  EXPECT_THROW(read_sampled_csv(junk), MalformedInput);
}

TEST(Un, SineHalfPeriod) {
  const auto m = un_membership(SampledFunction01::from_function(sin_pi, 1001), 2);
  ASSERT_TRUE(m.member);
  EXPECT_EQ(*m.witness, 0.5);
  EXPECT_EQ(*m.witness_index, 500u);
  // The far set of t = 0.5 at n = 2 is {0, 1}.
  EXPECT_NEAR(m.gap, 1.0, 1e-15);
}

TEST(Un, TwoEqualMaximaBlockEachOther) {
  const auto m = un_membership(SampledFunction01::from_function(quartic, 1001), 4);
  EXPECT_FALSE(m.member);
  EXPECT_FALSE(m.witness);
}

TEST(Un, ConstantIsNeverAMember) {
  const SampledFunction01 c(std::vector<double>(129, 3.5));
  for (std::size_t n = 1; n <= 64; ++n) EXPECT_FALSE(un_membership(c, n).member) << n;
}

TEST(Un, CoarsenessPrecondition) {
  const SampledFunction01 f(std::vector<double>(17, 0.0));
  EXPECT_NO_THROW(un_membership(f, 8));
  EXPECT_THROW(un_membership(f, 9), ResolutionTooCoarse);
  EXPECT_THROW(un_membership(f, 0), MalformedInput);
  EXPECT_THROW(bump_into_un(f, 0.1, 9), ResolutionTooCoarse);
  EXPECT_THROW(intersection_consistency(f, 9), ResolutionTooCoarse);
}

TEST(Un, MatchesTheQuadraticOracle) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> level(0, 3);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t r = 17 + static_cast<std::size_t>(trial) * 7;
    // Few distinct levels provoke ties.
    SampledFunction01 f = trial % 2 ? random_trig(rng, r) : [&] {
      std::vector<double> v(r);
      for (auto& x : v) x = level(rng);
      return SampledFunction01(std::move(v));
    }();
    for (std::size_t n = 1; 2 * n <= r - 1; ++n) {
      const auto got = un_membership(f, n);
      const auto oracle = membership_oracle(f, n);
      ASSERT_EQ(got.member, oracle.has_value()) << trial << " n=" << n;
      if (got.member) {
        // The reported witness must itself satisfy the definition.
        EXPECT_GT(un_gap(f, n, *got.witness_index), 0.0);
        const bool top_qualifies = un_gap(f, n, f.first_argmax()) > 0.0;
        EXPECT_EQ(*got.witness_index, top_qualifies ? f.first_argmax() : *oracle);
      }
    }
  }
}

TEST(Un, OpennessUnderSmallPerturbations) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto f = random_trig(rng, 401);
    for (std::size_t n : {2u, 3u, 5u, 8u}) {
      const auto m = un_membership(f, n);
      if (!m.member) continue;
      const double radius = 0.5 * m.gap;
      std::vector<double> g(f.values());
      for (auto& x : g) x += 0.999 * radius * u(rng);
      const SampledFunction01 gf(std::move(g));
      EXPECT_GT(un_gap(gf, n, *m.witness_index), 0.0);
      EXPECT_TRUE(un_membership(gf, n).member);
      ++checked;
    }
  }
  EXPECT_GT(checked, 40);
}

// A larger n has the larger far set, so a witness for n stays one for every
// smaller n whose far set at the witness is non-empty.
TEST(Un, WitnessesPersistForSmallerN) {
  std::mt19937_64 rng(33);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto f = random_trig(rng, 301);
    for (std::size_t n : {4u, 9u, 25u, 150u}) {
      const auto m = un_membership(f, n);
      if (!m.member) continue;
      for (std::size_t k = 1; k <= n; ++k) {
        const double gap = un_gap(f, k, *m.witness_index);
        if (std::isinf(gap)) continue;
        EXPECT_GT(gap, 0.0) << trial << " n=" << n << " k=" << k;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Un, EmptyFarSetIsNotAWitness) {
  // At n = 1 only the endpoints have a far point, each other.
  const std::vector<double> v{0.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0,
                              5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 1.0};
  const SampledFunction01 f(v);
  EXPECT_TRUE(std::isinf(un_gap(f, 1, 8)));
  const auto m = un_membership(f, 1);
  ASSERT_TRUE(m.member);
  EXPECT_EQ(*m.witness_index, 16u);
}

TEST(Bump, ZeroFunction) {
  const SampledFunction01 h(std::vector<double>(1001, 0.0));
  const auto k = bump_into_un(h, 0.1, 4);
  EXPECT_EQ(k[0], 0.1);
  EXPECT_EQ(k.first_argmax(), 0u);
  EXPECT_LE(sup_distance(h, k), 0.1);
  const auto m = un_membership(k, 4);
  ASSERT_TRUE(m.member);
  EXPECT_EQ(*m.witness, 0.0);
}

TEST(Bump, TiedQuartic) {
  const auto h = SampledFunction01::from_function(quartic, 1001);
  const auto k = bump_into_un(h, 1e-3, 4);
  EXPECT_EQ(k.first_argmax(), 250u);
  EXPECT_LE(sup_distance(h, k), 1e-3);
  EXPECT_TRUE(un_membership(k, 4).member);
}

TEST(Bump, KeepsExistingMembers) {
  const auto h = SampledFunction01::from_function(sin_pi, 1001);
  ASSERT_TRUE(un_membership(h, 6).member);
  const auto k = bump_into_un(h, 0.05, 6);
  EXPECT_TRUE(un_membership(k, 6).member);
  EXPECT_LE(sup_distance(h, k), 0.05);
}

TEST(Bump, SupDistanceNeverExceedsEpsilon) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> e(-12.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto base = random_trig(rng, 513);
    // Large offsets make h + eps round above eps unless corrected.
    const double shift = trial % 3 == 0 ? 1e8 : 0.0;
    std::vector<double> v(base.values());
    for (auto& x : v) x += shift;
    const SampledFunction01 h(std::move(v));
    const double eps = std::pow(10.0, e(rng));
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 20;
    const auto k = bump_into_un(h, eps, n);
    EXPECT_LE(sup_distance(h, k), eps) << trial;
    if (shift == 0.0) EXPECT_TRUE(un_membership(k, n).member) << trial;
  }
}

TEST(Bump, RejectsBadEpsilon) {
  const SampledFunction01 h(std::vector<double>(33, 0.0));
  EXPECT_THROW(bump_into_un(h, 0.0, 2), MalformedInput);
  EXPECT_THROW(bump_into_un(h, -1.0, 2), MalformedInput);
  EXPECT_THROW(bump_into_un(h, std::numeric_limits<double>::infinity(), 2), MalformedInput);
}

TEST(Consistency, SineAgrees) {
  const auto rep = intersection_consistency(SampledFunction01::from_function(sin_pi, 1001), 8);
  EXPECT_EQ(rep.verdict, ConsistencyVerdict::agree);
  EXPECT_TRUE(rep.member_of_all);
  ASSERT_EQ(rep.table.size(), 7u);
  EXPECT_EQ(rep.table.front().n, 2u);
  EXPECT_EQ(rep.table.back().n, 8u);
  EXPECT_TRUE(std::holds_alternative<UniqueMaxCertificate>(rep.outcome));
}

TEST(Consistency, TiedQuarticAgrees) {
  const auto rep = intersection_consistency(SampledFunction01::from_function(quartic, 1001), 8);
  EXPECT_EQ(rep.verdict, ConsistencyVerdict::agree);
  EXPECT_FALSE(rep.member_of_all);
  EXPECT_FALSE(rep.table[2].membership.member);  // n = 4
  EXPECT_TRUE(std::holds_alternative<NonUniqueWitness>(rep.outcome));
}

TEST(Consistency, CloseMaximaNeedLargerN) {
  const auto f = SampledFunction01::from_function(
      [](double t) { return -std::pow(t - 0.475, 2) * std::pow(t - 0.525, 2); }, 1001);
  const auto rep = intersection_consistency(f, 8);
  EXPECT_TRUE(rep.member_of_all);
  ASSERT_TRUE(std::holds_alternative<NonUniqueWitness>(rep.outcome));
  EXPECT_NEAR(std::get<NonUniqueWitness>(rep.outcome).separation, 0.05, 1e-12);
  EXPECT_EQ(rep.verdict, ConsistencyVerdict::n_max_too_small);
  EXPECT_EQ(to_string(rep.verdict), "n_max too small");
}

TEST(Consistency, ImpossibleExclusionIsInconclusive) {
  const auto rep = intersection_consistency(SampledFunction01::from_function(sin_pi, 201), 4, 5.0);
  EXPECT_EQ(rep.verdict, ConsistencyVerdict::inconclusive);
  EXPECT_FALSE(rep.diagnostics.empty());
}
