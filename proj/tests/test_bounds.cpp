#include <doctest.h>

#include <cmath>

#include "rrc/bounds.hpp"

using namespace rrc;

namespace {

// The frozen reference instance; expected values were computed by an
// independent arithmetic evaluation of the closed-form expressions and are
// pinned here as regression constants.
BoundInputs frozen_instance() {
  BoundInputs b;
  b.n = 100;
  b.p = 12;
  b.q = 8;
  b.m = 800;
  b.r_star = 2;
  b.norm_x = std::sqrt(1200.0);
  b.norm_mb = 5.0;
  b.margin_c = 1.0;
  b.bayes_risk = 0.0;
  b.epsilon = 0.05;
  b.varsigma = 0.5;
  return b;
}

constexpr double kTheorem1Frozen = 3.7295689212936187;
constexpr double kProposition1Frozen = 3.2335543843841354;
constexpr double kTheorem2FullFrozen = 4.158418606959819;
constexpr double kTheorem2MissingFrozen = 5.835511644477767;

}  // namespace

TEST_CASE("frozen regression values") {
  const BoundInputs b = frozen_instance();
  CHECK(theorem1_bound(b) ==
        doctest::Approx(kTheorem1Frozen).epsilon(1e-12));
  CHECK(corollary1_bound(b) ==
        doctest::Approx(kTheorem1Frozen).epsilon(1e-12));
  CHECK(proposition1_bound(b) ==
        doctest::Approx(kProposition1Frozen).epsilon(1e-12));
  CHECK(theorem2_bound(b) ==
        doctest::Approx(kTheorem2FullFrozen).epsilon(1e-12));

  BoundInputs missing = b;
  missing.m = 560;
  CHECK(theorem2_bound(missing) ==
        doctest::Approx(kTheorem2MissingFrozen).epsilon(1e-12));
}

TEST_CASE("the corollary is the noiseless specialization") {
  BoundInputs b = frozen_instance();
  b.margin_c = 2.5;
  b.bayes_risk = 0.12;
  BoundInputs specialized = b;
  specialized.margin_c = 1.0;
  specialized.bayes_risk = 0.0;
  CHECK(corollary1_bound(b) == theorem1_bound(specialized));
  CHECK(corollary1_bound(b) > 0.0);
}

TEST_CASE("rank zero stays finite for every bound") {
  BoundInputs b = frozen_instance();
  b.r_star = 0;
  for (double value : {theorem1_bound(b), corollary1_bound(b),
                       proposition1_bound(b), theorem2_bound(b)}) {
    CHECK(std::isfinite(value));
    CHECK(value > 0.0);
  }
  // with r* = 0 and zero optimal risk only the dimension and slack terms stay
  const double expected =
      1.5 * 20.0 / 1600.0 +
      (6.0 + 9.0 * 0.5 + 6.0 * 0.5) / (4.0 * 800.0 * 0.5) * std::log(20.0);
  CHECK(theorem1_bound(b) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("monotonicity sweeps") {
  const BoundInputs base = frozen_instance();

  SUBCASE("larger samples shrink the bounds") {
    double prev_t1 = theorem1_bound(base);
    double prev_p1 = proposition1_bound(base);
    for (int step = 1; step <= 10; ++step) {
      BoundInputs b = base;
      b.n = base.n * (1 + step);
      b.m = b.n * b.q;
      const double t1 = theorem1_bound(b);
      const double p1 = proposition1_bound(b);
      CHECK(t1 < prev_t1);
      CHECK(p1 < prev_p1);
      prev_t1 = t1;
      prev_p1 = p1;
    }
  }

  SUBCASE("rank, margin constant, norm and slack grow the bounds") {
    double prev = theorem1_bound(base);
    for (Index r = 3; r <= 8; ++r) {
      BoundInputs b = base;
      b.r_star = r;
      const double value = theorem1_bound(b);
      CHECK(value > prev);
      prev = value;
    }

    BoundInputs c = base;
    c.margin_c = 2.0;
    CHECK(theorem1_bound(c) > theorem1_bound(base));

    BoundInputs nm = base;
    nm.norm_mb = 9.0;
    CHECK(theorem1_bound(nm) > theorem1_bound(base));
    CHECK(proposition1_bound(nm) > proposition1_bound(base));

    BoundInputs eps = base;
    eps.epsilon = 0.01;
    CHECK(theorem1_bound(eps) > theorem1_bound(base));
  }

  SUBCASE("halving the observed count raises the missing-data bound") {
    BoundInputs half = base;
    half.m = 400;
    CHECK(theorem2_bound(half) > theorem2_bound(base));
  }

  SUBCASE("intercept floor") {
    BoundInputs b = base;
    b.bayes_risk = 0.3;
    CHECK(theorem1_bound(b) >= 2.5 * 0.3);
    CHECK(proposition1_bound(b) >= 2.0 * 0.3);
  }
}

TEST_CASE("fast and slow rates separate across sample sizes") {
  auto decay_exponent = [](double (*bound)(const BoundInputs&)) {
    BoundInputs small = frozen_instance();
    small.n = 10000;
    small.m = small.n * small.q;
    BoundInputs large = small;
    large.n = 1000000;
    large.m = large.n * large.q;
    return std::log(bound(small) / bound(large)) /
           std::log(double(large.n) / double(small.n));
  };
  const double fast = decay_exponent(&theorem1_bound);
  const double slow = decay_exponent(&proposition1_bound);
  CHECK(fast == doctest::Approx(1.0).epsilon(0.2));
  CHECK(slow == doctest::Approx(0.5).epsilon(0.2));
  CHECK(fast > slow + 0.3);
}

TEST_CASE("varsigma minimization stays inside the bracket and improves") {
  const BoundInputs base = frozen_instance();
  const auto opt = minimize_over_varsigma(
      [](const BoundInputs& b) { return theorem1_bound(b); }, base);
  CHECK(opt.varsigma > 0.01);
  CHECK(opt.varsigma < 0.99);
  for (double vs : {0.1, 0.3, 0.5, 0.9}) {
    BoundInputs b = base;
    b.varsigma = vs;
    CHECK(opt.value <= theorem1_bound(b) + 1e-12);
  }
}

TEST_CASE("input validation") {
  BoundInputs b = frozen_instance();
  b.margin_c = 0.5;
  CHECK_THROWS_AS(theorem1_bound(b), invalid_input);

  b = frozen_instance();
  b.r_star = 9;  // exceeds min(p, q)
  CHECK_THROWS_AS(theorem1_bound(b), invalid_input);

  b = frozen_instance();
  b.epsilon = 1.0;
  CHECK_THROWS_AS(proposition1_bound(b), invalid_input);

  b = frozen_instance();
  b.m = 900;  // exceeds n q
  CHECK_THROWS_AS(theorem2_bound(b), invalid_input);
}
