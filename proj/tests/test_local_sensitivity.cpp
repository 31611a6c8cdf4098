#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "llmroi/errors.hpp"
#include "llmroi/local_sensitivity.hpp"
#include "llmroi/sobol.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace llmroi;
using testing::Draw;

namespace {

constexpr double kTolerance = 1e-6;
constexpr double kStep = 1e-4;
constexpr int kPoints = 100;

std::vector<double> analytic_gradient(LocalModel model, Target target,
                                      const std::vector<double>& x, double scale) {
  switch (model) {
    case LocalModel::Single:
      return gradient_single(ParameterVector::single(x[0], x[1], x[2], x[3], x[4]), target,
                             scale);
    case LocalModel::BinaryCanonical:
    case LocalModel::BinaryPaperCompat:
      return gradient_binary(
          ParameterVector::binary(x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]), target,
          model == LocalModel::BinaryCanonical ? BinaryVariant::Canonical
                                               : BinaryVariant::PaperCompat,
          scale);
  }
  return {};
}

std::vector<double> draw_point(LocalModel model, Draw& draw, double price_scale) {
  const auto ranges =
      model == LocalModel::Single ? commercial_operation_ranges() : binary_classification_ranges();
  std::vector<double> x;
  for (const auto& r : ranges) {
    const double factor = r.name == "C" ? price_scale : 1.0;
    x.push_back(draw(r.min * factor, r.max * factor));
  }
  return x;
}

ParameterVector as_vector(LocalModel model, const std::vector<double>& x) {
  return model == LocalModel::Single
             ? ParameterVector::single(x[0], x[1], x[2], x[3], x[4])
             : ParameterVector::binary(x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
}

constexpr LocalModel kModels[] = {LocalModel::Single, LocalModel::BinaryCanonical,
                                  LocalModel::BinaryPaperCompat};
constexpr Target kTargets[] = {Target::Earnings, Target::Roi};

}  // namespace

TEST_CASE("analytic gradients match finite differences of independent model code") {
  // Prices drawn per million tokens, then the same prices per token.
  for (const auto& [scale, price_scale] : {std::pair{models::kPerMillion, 1.0},
                                          std::pair{models::kPerToken, 1e-6}}) {
    for (auto model : kModels) {
      for (auto target : kTargets) {
        CAPTURE(to_string(model));
        CAPTURE(to_string(target));
        CAPTURE(scale);
        Draw draw(17);
        double worst = 0.0;
        for (int k = 0; k < kPoints; ++k) {
          const auto x = draw_point(model, draw, price_scale);
          const auto a = analytic_gradient(model, target, x, scale);
          const auto fd = oracles::fd_gradient(model, target, x, scale, kStep);
          worst = std::max(worst, max_relative_deviation(a, fd));
        }
        CHECK(worst <= kTolerance);
      }
    }
  }
}

TEST_CASE("analytic Hessians match the finite-difference Jacobian of the gradient") {
  for (auto model : kModels) {
    for (auto target : kTargets) {
      CAPTURE(to_string(model));
      CAPTURE(to_string(target));
      Draw draw(29);
      double worst_gradient = 0.0;
      double worst_hessian = 0.0;
      for (int k = 0; k < kPoints; ++k) {
        const auto x = draw_point(model, draw, 1.0);
        const auto report = local_report(as_vector(model, x), model, target, models::kPerMillion);
        worst_gradient = std::max(worst_gradient, report.gradient_deviation);
        worst_hessian = std::max(worst_hessian, report.hessian_deviation);
      }
      CHECK(worst_gradient <= kTolerance);
      CHECK(worst_hessian <= kTolerance);
    }
  }
}

TEST_CASE("Hessians are symmetric") {
  Draw draw(3);
  for (auto model : kModels) {
    for (auto target : kTargets) {
      const auto x = draw_point(model, draw, 1.0);
      const auto h = local_report(as_vector(model, x), model, target, models::kPerMillion).hessian;
      for (std::size_t i = 0; i < h.rows(); ++i) {
        for (std::size_t j = 0; j < i; ++j) CHECK(h(i, j) == h(j, i));
      }
    }
  }
}

TEST_CASE("earnings Hessian sparsity") {
  using namespace models;
  SUBCASE("single: only (G,P), (L,P) and (C,T) couple") {
    const auto p = ParameterVector::single(10, 1, 10, 0.95, 1000);
    const auto h = hessian_single(p, Target::Earnings, kPerMillion);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        const bool coupled = (i == single::G && j == single::P) ||
                             (i == single::P && j == single::G) ||
                             (i == single::L && j == single::P) ||
                             (i == single::P && j == single::L) ||
                             (i == single::C && j == single::T) || (i == single::T && j == single::C);
        CAPTURE(i);
        CAPTURE(j);
        CHECK((h(i, j) != 0.0) == coupled);
      }
    }
    CHECK(h(single::G, single::P) == 1.0);
    CHECK(h(single::L, single::P) == 1.0);
    CHECK(h(single::C, single::T) == doctest::Approx(-1e-6));
    CHECK(local_report(p, LocalModel::Single, Target::Earnings, kPerMillion).hessian_zero_count ==
          19);
  }
  SUBCASE("binary zero counts") {
    const auto p = ParameterVector::binary(10, 2, 5, 5, 0.05, 0.05, 0.2, 1000);
    CHECK(local_report(p, LocalModel::BinaryCanonical, Target::Earnings, kPerMillion)
              .hessian_zero_count == 56);
    CHECK(local_report(p, LocalModel::BinaryPaperCompat, Target::Earnings, kPerMillion)
              .hessian_zero_count == 44);
  }
}

TEST_CASE("earnings gradient of the single model in closed form") {
  const auto g = gradient_single(ParameterVector::single(10, 1, 10, 0.95, 1000), Target::Earnings,
                                 models::kPerMillion);
  REQUIRE(g.size() == 5);
  CHECK(g[0] == doctest::Approx(0.95));
  CHECK(g[1] == doctest::Approx(-0.05));
  CHECK(g[2] == doctest::Approx(-1000e-6));
  CHECK(g[3] == doctest::Approx(11.0));
  CHECK(g[4] == doctest::Approx(-10e-6));
}

TEST_CASE("RoI derivatives are singular at zero cost") {
  const auto p = ParameterVector::single(10, 1, 0, 0.95, 1000);
  CHECK_THROWS_AS(gradient_single(p, Target::Roi), DomainError);
  CHECK_THROWS_AS(hessian_single(p, Target::Roi), DomainError);
  CHECK_NOTHROW(gradient_single(p, Target::Earnings));
  try {
    gradient_single(p, Target::Roi);
  } catch (const DomainError& e) {
    CHECK(e.code() == error_code::kSingular);
  }
}

TEST_CASE("parameter vector validation") {
  CHECK_THROWS_AS(ParameterVector({"G", "G"}, {1, 2}), ValidationError);
  CHECK_THROWS_AS(ParameterVector({"G"}, {1, 2}), ValidationError);
  CHECK_THROWS_AS(ParameterVector({"G"}, {NAN}), ValidationError);
  CHECK_THROWS_AS(gradient_single(ParameterVector({"G", "L", "C", "T", "P"}, {1, 1, 1, 1, 0.5}),
                                  Target::Earnings),
                  ValidationError);
  CHECK_THROWS_AS(gradient_binary(ParameterVector::binary(10, 1, 1, 1, 0.5, 0.4, 0.3, 100),
                                  Target::Earnings, BinaryVariant::Canonical),
                  ValidationError);
  const auto p = ParameterVector::single(1, 2, 3, 0.4, 5);
  CHECK(p.at("P") == 0.4);
  CHECK(p.index_of("T") == 4);
  CHECK_THROWS_AS(p.at("Q"), ValidationError);
}

TEST_CASE("finite differences of a known function") {
  const ScalarFunction f = [](std::span<const double> x) { return std::sin(x[0]) * x[1] * x[1]; };
  const std::vector<double> x{0.3, 2.0};
  const auto g = finite_difference_gradient(f, x, 1e-4);
  CHECK(g[0] == doctest::Approx(std::cos(0.3) * 4.0).epsilon(1e-10));
  CHECK(g[1] == doctest::Approx(std::sin(0.3) * 4.0).epsilon(1e-10));
  CHECK_THROWS_AS(finite_difference_gradient(f, x, 0.0), ValidationError);
}

TEST_CASE("max relative deviation") {
  const std::vector<double> a{1.0, 0.0, 1e-20};
  const std::vector<double> b{1.0 + 1e-9, 0.0, -1e-20};
  CHECK(max_relative_deviation(a, b) == doctest::Approx(1e-9).epsilon(1e-3));
  const std::vector<double> c{2.0};
  const std::vector<double> d{1.0};
  CHECK(max_relative_deviation(c, d) == doctest::Approx(0.5));
}

TEST_CASE("model and target names") {
  CHECK(parse_local_model("binary-paper-compat") == LocalModel::BinaryPaperCompat);
  CHECK(parse_target("roi") == Target::Roi);
  CHECK_THROWS_AS(parse_local_model("ternary"), ValidationError);
  CHECK_THROWS_AS(parse_target("profit"), ValidationError);
  CHECK(std::string(to_string(LocalModel::BinaryCanonical)) == "binary-canonical");
}
