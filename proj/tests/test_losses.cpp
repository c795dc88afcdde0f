#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rrc/losses.hpp"
#include "rrc/rng.hpp"

using namespace rrc;
using test_oracles::central_difference;
using test_oracles::rel_error_inf;

namespace {

Matrixd scalar_matrix(double v) {
  Matrixd m(1, 1);
  m << v;
  return m;
}

ResponseMatrix scalar_response(int y) {
  LabelMatrix labels(1, 1);
  labels(0, 0) = std::int8_t(y);
  return make_full_response(labels);
}

// Random instance with all hinge margins at least `kink_gap` away from 1.
struct Instance {
  Matrixd design, coeffs;
  ResponseMatrix response;
};

Instance random_instance(Index n, Index p, Index q, std::mt19937_64& rng,
                         double kink_gap = 0.0) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (true) {
    Instance inst;
    inst.design = gaussian_matrix(n, p, rng);
    inst.coeffs = gaussian_matrix(p, q, rng);
    LabelMatrix labels(n, q);
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < q; ++k)
        labels(i, k) = unif(rng) < 0.5 ? std::int8_t(1) : std::int8_t(-1);
    inst.response = make_full_response(labels);
    if (kink_gap <= 0.0) return inst;
    const Matrixd scores = inst.design * inst.coeffs;
    bool clear = true;
    for (Index i = 0; i < n && clear; ++i)
      for (Index k = 0; k < q && clear; ++k)
        if (std::abs(double(labels(i, k)) * scores(i, k) - 1.0) < kink_gap)
          clear = false;
    if (clear) return inst;
  }
}

}  // namespace

TEST_CASE("zero-one risk on scalar and row cases") {
  Matrixd x = scalar_matrix(1.0);
  CHECK(zero_one_risk(scalar_matrix(2.0), x, scalar_response(+1)) == 0.0);
  CHECK(zero_one_risk(scalar_matrix(2.0), x, scalar_response(-1)) == 1.0);

  Matrixd coeffs(1, 2);
  coeffs << 0.5, -1.0;
  LabelMatrix labels(1, 2);
  labels << 1, 1;
  CHECK(zero_one_risk(coeffs, x, make_full_response(labels)) == 0.5);

  // a zero score counts as correctly classified (strict inequality)
  CHECK(zero_one_risk(scalar_matrix(0.0), x, scalar_response(+1)) == 0.0);
}

TEST_CASE("hinge risk values") {
  Matrixd x = scalar_matrix(1.0);
  CHECK(hinge_risk(scalar_matrix(2.0), x, scalar_response(+1)) == 0.0);

  Matrixd coeffs(1, 2);
  coeffs << 0.5, -1.0;
  LabelMatrix labels(1, 2);
  labels << 1, 1;
  CHECK(hinge_risk(coeffs, x, make_full_response(labels)) ==
        doctest::Approx(1.25).epsilon(1e-15));

  auto rng = make_rng(11);
  auto inst = random_instance(6, 3, 2, rng);
  CHECK(hinge_risk(Matrixd::Zero(3, 2).eval(), inst.design, inst.response) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("hinge subgradient: closed cases and finite differences") {
  Matrixd x = scalar_matrix(1.0);
  CHECK(hinge_subgradient(scalar_matrix(2.0), x, scalar_response(+1))(0, 0) ==
        0.0);
  CHECK(hinge_subgradient(scalar_matrix(0.0), x, scalar_response(+1))(0, 0) ==
        -1.0);

  auto rng = make_rng(202);
  for (int rep = 0; rep < 5; ++rep) {
    auto inst = random_instance(4, 3, 2, rng, 1e-3);
    const Matrixd grad =
        hinge_subgradient(inst.coeffs, inst.design, inst.response);
    const Matrixd fd = central_difference(
        [&](const Matrixd& m) { return hinge_risk(m, inst.design, inst.response); },
        inst.coeffs, 1e-6);
    CHECK(rel_error_inf(grad, fd) <= 1e-6);
  }
}

TEST_CASE("logistic risk: stable evaluation") {
  Matrixd x = scalar_matrix(1.0);
  auto rng = make_rng(5);
  auto inst = random_instance(5, 2, 3, rng);
  CHECK(logistic_risk(Matrixd::Zero(2, 3).eval(), inst.design, inst.response) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));

  const double far = logistic_risk(scalar_matrix(100.0), x, scalar_response(+1));
  CHECK(std::isfinite(far));
  CHECK(far == doctest::Approx(std::exp(-100.0)).epsilon(1e-12));

  CHECK(logistic_risk(scalar_matrix(1.0), x, scalar_response(-1)) ==
        doctest::Approx(std::log(1.0 + std::exp(1.0))).epsilon(1e-14));

  // no overflow far into either tail
  CHECK(std::isfinite(
      logistic_risk(scalar_matrix(-745.0), x, scalar_response(+1))));
}

TEST_CASE("logistic gradient: closed cases and finite differences") {
  Matrixd x = scalar_matrix(1.0);
  CHECK(logistic_gradient(scalar_matrix(0.0), x, scalar_response(+1))(0, 0) ==
        doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(std::abs(logistic_gradient(scalar_matrix(500.0), x,
                                   scalar_response(+1))(0, 0)) < 1e-100);

  auto rng = make_rng(303);
  for (int rep = 0; rep < 5; ++rep) {
    auto inst = random_instance(4, 3, 2, rng);
    const Matrixd grad =
        logistic_gradient(inst.coeffs, inst.design, inst.response);
    const Matrixd fd = central_difference(
        [&](const Matrixd& m) {
          return logistic_risk(m, inst.design, inst.response);
        },
        inst.coeffs, 1e-5);
    CHECK(rel_error_inf(grad, fd) <= 1e-8);
  }
}

TEST_CASE("predict signs with the +1 tie-break") {
  Matrixd design(3, 1);
  design << 3.2, -0.001, 0.0;
  const LabelMatrix out = predict(scalar_matrix(1.0), design);
  CHECK(out(0, 0) == 1);
  CHECK(out(1, 0) == -1);
  CHECK(out(2, 0) == 1);
}

TEST_CASE("predict is invariant under positive scaling of M") {
  auto rng = make_rng(99);
  const Matrixd design = gaussian_matrix(10, 4, rng);
  const Matrixd coeffs = gaussian_matrix(4, 3, rng);
  const LabelMatrix base = predict(coeffs, design);
  for (double scale : {1e-6, 0.5, 3.0, 1e7})
    CHECK(predict((scale * coeffs).eval(), design) == base);
}

TEST_CASE("hinge dominates the zero-one risk") {
  auto rng = make_rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    auto inst = random_instance(6, 3, 4, rng);
    BoolArray flags(6, 4);
    for (Index i = 0; i < 6; ++i)
      for (Index k = 0; k < 4; ++k) flags(i, k) = unif(rng) < 0.7;
    if (!flags.any()) flags(0, 0) = true;
    ResponseMatrix masked(inst.response.labels, ObservationMask(flags));
    CHECK(zero_one_risk(inst.coeffs, inst.design, masked) <=
          hinge_risk(inst.coeffs, inst.design, masked));
  }
}

TEST_CASE("full mask reproduces the unmasked formulas") {
  auto rng = make_rng(41);
  auto inst = random_instance(7, 3, 5, rng);
  const Matrixd scores = inst.design * inst.coeffs;

  double hinge_direct = 0, logit_direct = 0, zo_direct = 0;
  for (Index i = 0; i < 7; ++i)
    for (Index k = 0; k < 5; ++k) {
      const double margin = double(inst.response.labels(i, k)) * scores(i, k);
      hinge_direct += std::max(1.0 - margin, 0.0);
      logit_direct += std::log1p(std::exp(-std::max(margin, -700.0)));
      zo_direct += margin < 0 ? 1.0 : 0.0;
    }
  const double total = 7.0 * 5.0;
  CHECK(hinge_risk(inst.coeffs, inst.design, inst.response) ==
        doctest::Approx(hinge_direct / total).epsilon(1e-12));
  CHECK(logistic_risk(inst.coeffs, inst.design, inst.response) ==
        doctest::Approx(logit_direct / total).epsilon(1e-12));
  CHECK(zero_one_risk(inst.coeffs, inst.design, inst.response) ==
        doctest::Approx(zo_direct / total).epsilon(1e-12));
}

TEST_CASE("risks are invariant under simultaneous row permutation") {
  auto rng = make_rng(53);
  auto inst = random_instance(8, 3, 2, rng);
  std::vector<Index> perm{3, 1, 7, 0, 5, 2, 6, 4};

  Matrixd design_p(8, 3);
  LabelMatrix labels_p(8, 2);
  for (Index i = 0; i < 8; ++i) {
    design_p.row(i) = inst.design.row(perm[std::size_t(i)]);
    labels_p.row(i) = inst.response.labels.row(perm[std::size_t(i)]);
  }
  ResponseMatrix response_p = make_full_response(labels_p);

  CHECK(hinge_risk(inst.coeffs, design_p, response_p) ==
        doctest::Approx(hinge_risk(inst.coeffs, inst.design, inst.response))
            .epsilon(1e-12));
  CHECK(logistic_risk(inst.coeffs, design_p, response_p) ==
        doctest::Approx(logistic_risk(inst.coeffs, inst.design, inst.response))
            .epsilon(1e-12));
}

TEST_CASE("error contracts") {
  auto rng = make_rng(1);
  auto inst = random_instance(4, 3, 2, rng);

  Matrixd bad_coeffs = gaussian_matrix(5, 2, rng);
  CHECK_THROWS_AS(hinge_risk(bad_coeffs, inst.design, inst.response),
                  dimension_error);

  ResponseMatrix empty(inst.response.labels, ObservationMask::none(4, 2));
  CHECK_THROWS_AS(hinge_risk(inst.coeffs, inst.design, empty), invalid_input);
  CHECK_THROWS_AS(zero_one_risk(inst.coeffs, inst.design, empty),
                  invalid_input);

  LabelMatrix bad_labels(4, 2);
  bad_labels.setConstant(2);
  CHECK_THROWS_AS(make_full_response(bad_labels), invalid_input);
}
