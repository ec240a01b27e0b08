#include <cmath>

#include "doctest.h"
#include "epodyn/evalsuite.hpp"
#include "test_util.hpp"

using namespace epodyn;
using namespace testutil;

TEST_CASE("error_metrics on identical inputs is all zero") {
  Rng rng(1);
  Matrix obs(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 4; ++t) obs(i, t) = rng.uniform();
  const auto rep = error_metrics(obs, obs, {{"a", {0, 1}}, {"b", {2, 3}}});
  CHECK(rep.sum_residuals == 0.0);
  CHECK(rep.mae == 0.0);
  CHECK(rep.mape_percent == 0.0);
  CHECK(rep.rmse("a") == 0.0);
  CHECK(rep.rmse("b") == 0.0);
  CHECK(rep.entries == 12);
}

TEST_CASE("error_metrics hand example") {
  Matrix obs(2, 1), pred(2, 1);
  obs << 1, 1;
  pred << 0.9, 1.1;
  const auto rep = error_metrics(pred, obs, {{"all", {0}}});
  CHECK(rep.mae == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(rep.mape_percent == doctest::Approx(10.0).epsilon(1e-13));
  CHECK(rep.rmse("all") == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(std::abs(rep.sum_residuals) <= 1e-15);
  CHECK(rep.mape_excluded == 0);
}

TEST_CASE("zero observations are left out of MAPE") {
  Matrix obs(1, 3), pred(1, 3);
  obs << 0.0, 2.0, 4.0;
  pred << 0.5, 1.0, 5.0;
  const auto rep = error_metrics(pred, obs, {{"g", {0, 1, 2}}});
  CHECK(rep.mape_excluded == 1);
  CHECK(rep.mape_percent == doctest::Approx(100.0 * (0.5 + 0.25) / 2.0));
  CHECK(rep.mae == doctest::Approx((0.5 + 1.0 + 1.0) / 3.0));
  CHECK(rep.sum_residuals == doctest::Approx(-0.5 + 1.0 - 1.0));
}

TEST_CASE("metric identities on random inputs") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix obs(4, 5), pred(4, 5);
    for (int i = 0; i < 4; ++i)
      for (int t = 0; t < 5; ++t) {
        obs(i, t) = rng.uniform(0.1, 1.0);
        pred(i, t) = rng.uniform(0.0, 1.0);
      }
    const auto rep = error_metrics(pred, obs, {{"all", {0, 1, 2, 3, 4}}});
    const Matrix res = obs - pred;
    CHECK(std::abs(rep.sum_residuals - res.sum()) <= 1e-12);
    CHECK(std::abs(rep.mae - res.cwiseAbs().mean()) <= 1e-12);
    CHECK(std::abs(rep.rmse("all") - std::sqrt(res.squaredNorm() / 20.0)) <= 1e-12);
    CHECK(rep.mae <= rep.rmse("all") + 1e-15);
    CHECK(std::abs(rep.mape_percent - 100.0 * (res.cwiseAbs().array() / obs.array()).mean()) <= 1e-10);
  }
}

TEST_CASE("error_metrics guards") {
  const Matrix a = Matrix::Zero(2, 3);
  CHECK_THROWS_AS(error_metrics(a, Matrix::Zero(3, 3), {{"g", {0}}}), DimensionError);
  CHECK_THROWS_AS(error_metrics(a, a, {}), ValidationError);
  CHECK_THROWS_AS(error_metrics(a, a, {{"g", {}}}), ValidationError);
  CHECK_THROWS_AS(error_metrics(a, a, {{"g", {3}}}), ValidationError);
  CHECK_THROWS_AS(error_metrics(a, a, {{"g", {0}}, {"h", {0, 1}}}), ValidationError);
  const auto rep = error_metrics(a, a, {{"g", {0}}});
  CHECK_THROWS_AS(rep.rmse("missing"), ValidationError);
}

TEST_CASE("predict holds a constant panel") {
  Rng rng(3);
  const auto p = random_feasible_params(3, rng);
  const auto panel = make_panel(Matrix::Constant(3, 8, 0.4));
  const auto tr = predict(p, panel, {0, 5}, 2);
  CHECK(tr.expressed.cols() == 3);
  CHECK((tr.expressed.array() - 0.4).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("predict with W = I and Phi = I freezes the last observation") {
  Matrix A(3, 3);
  A << 0, 0.5, 0.5, 1, 0, 0, 0.3, 0.7, 0;
  const auto p = EpoParameters::from_decomposition(Vector::Ones(3), A, Vector::Ones(3));
  Rng rng(4);
  Matrix values(3, 6);
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 6; ++t) values(i, t) = rng.uniform();
  const auto panel = make_panel(values);
  const auto tr = predict(p, panel, {0, 3}, 2);
  for (int h = 0; h <= 2; ++h) CHECK(tr.expressed.col(h) == values.col(3));
}

TEST_CASE("predict rejects infeasible parameters") {
  Rng rng(5);
  auto p = random_feasible_params(2, rng);
  p.W(0, 0) = 2.0;
  CHECK_THROWS_AS(predict(p, make_panel(Matrix::Constant(2, 5, 0.5)), {0, 3}, 1), ValidationError);
}

TEST_CASE("closed loop: fit on 1-10, forecast 11-12") {
  Rng rng(6);
  const auto truth = candid_params(4, rng);
  const Vector x0 = random_state(4, rng);
  const auto tr = epo_simulate(truth, x0, x0, 11);
  const auto panel = make_panel(tr.expressed);
  const FitResult r = fit({panel, {0, 9}, {}, std::nullopt});
  const auto forecast = predict(r.params, panel, {0, 9}, 2);
  CHECK(rmse(forecast.expressed.rightCols(2), tr.expressed.rightCols(2)) <= 1e-3);

  const auto rep = evaluate_fit(r.params, panel, {0, 9}, 2);
  CHECK(rep.rmse("fit") <= 1e-3);
  CHECK(rep.rmse("h1") <= 1e-3);
  CHECK(rep.rmse("h2") <= 1e-3);
  CHECK(rep.entries == 4 * 11);
  REQUIRE(rep.rmse_by_group.size() == 3);
  CHECK(rep.rmse_by_group[0].first == "fit");
  CHECK(rep.rmse_by_group[2].first == "h2");
}

TEST_CASE("evaluate_fit guards the horizon") {
  Rng rng(7);
  const auto p = random_feasible_params(2, rng);
  const auto panel = make_panel(Matrix::Constant(2, 6, 0.5));
  CHECK_NOTHROW(evaluate_fit(p, panel, {0, 3}, 2));
  CHECK_THROWS_AS(evaluate_fit(p, panel, {0, 4}, 2), ValidationError);
}

TEST_CASE("window experiment") {
  FitOptions opt;
  opt.multistart_count = 2;
  const auto flat = make_panel(Matrix::Constant(3, 12, 0.6));
  const auto rows = window_experiment(flat, {3, 6, 11}, opt);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.forecast_rmse.size() == 12 - row.fit_length);
    for (const auto& [col, value] : row.forecast_rmse) CHECK(value <= 1e-12);
    CHECK(row.report.mae <= 1e-12);
  }
  CHECK(rows[0].forecast_rmse.front().first == 3);
  CHECK_THROWS_AS(window_experiment(flat, {12}, opt), ValidationError);
  CHECK_THROWS_AS(window_experiment(flat, {13}, opt), ValidationError);
  CHECK_THROWS_AS(window_experiment(flat, {2}, opt), ValidationError);
}

TEST_CASE("report JSON keeps group order") {
  Matrix obs = Matrix::Constant(1, 3, 1.0);
  const auto rep = error_metrics(obs, obs, {{"z", {2}}, {"a", {0, 1}}});
  const auto doc = to_json(rep);
  CHECK(doc["rmse_by_group"][0]["group"] == "z");
  CHECK(doc["rmse_by_group"][1]["group"] == "a");
}
