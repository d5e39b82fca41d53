#include <numbers>

#include "doctest.h"
#include "support.hpp"

using namespace qiblab;
using namespace qiblab::testing;

TEST_CASE("Taylor truncation of the logarithm") {
  for (int K : {1, 5, 30}) CHECK(taylor_log_eval(taylor_log_coeffs(K), 1.0) == 0.0);
  CHECK(std::abs(taylor_log_eval(taylor_log_coeffs(30), 0.5) - std::log(0.5)) < 1e-3);
  CHECK(taylor_order_bound(2.0, 1e-3) == 12);
  const auto c = taylor_log_coeffs(12);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = 0.5 + 0.5 * i / 1000.0;
    worst = std::max(worst, std::abs(taylor_log_eval(c, x) - std::log(x)));
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("arcsin power coefficients") {
  const auto b1 = arcsin_power_coeffs(1, 7);
  CHECK(b1[0] == 0.0);
  CHECK(b1[1] == doctest::Approx(0.636619772367581343).epsilon(1e-15));
  CHECK(b1[3] == doctest::Approx(0.106103295394596891).epsilon(1e-15));
  CHECK(b1[5] == doctest::Approx(0.0477464829275686007).epsilon(1e-15));
  CHECK(b1[7] == doctest::Approx(0.0284205255521241671).epsilon(1e-15));
  const auto b2 = arcsin_power_coeffs(2, 7);
  CHECK(b2[2] == doctest::Approx(0.405284734569351086).epsilon(1e-15));
  CHECK(b2[4] == doctest::Approx(0.135094911523117029).epsilon(1e-15));
  CHECK(b2[6] == doctest::Approx(0.0720506194789957486).epsilon(1e-15));
  const auto b3 = arcsin_power_coeffs(3, 20);
  const auto b1l = arcsin_power_coeffs(1, 20), b2l = arcsin_power_coeffs(2, 20);
  for (int l = 0; l <= 20; ++l) {
    double self = 0.0, conv = 0.0;
    for (int i = 0; i <= l; ++i) self += b1l[i] * b1l[l - i], conv += b1l[i] * b2l[l - i];
    CHECK(b2l[l] == doctest::Approx(self).epsilon(1e-14));
    CHECK(b3[l] == doctest::Approx(conv).epsilon(1e-14));
  }
}

TEST_CASE("Fourier log series against frozen values") {
  const FourierLogSeries f = fourier_log_coeffs(6, 15, 3);
  CHECK(f.max_frequency() == 6);
  const cplx a = f.eval(0.3), b = f.eval(0.7);
  CHECK(a.real() == doctest::Approx(-1.16449435400548569).epsilon(1e-13));
  CHECK(b.real() == doctest::Approx(-0.359300634022432064).epsilon(1e-13));
  CHECK(std::abs(a.imag()) < 1e-13);
  CHECK(std::abs(b.imag()) < 1e-13);
  // hermitian pairing c_{-j} = conj(c_j)
  for (int j = 1; j <= 6; ++j) CHECK(std::abs(f.coefficient(-j) - std::conj(f.coefficient(j))) < 1e-15);
}

TEST_CASE("series coefficient norms") {
  const ApproximationPlan plan(30, 285, 48, 0.25, 1e-2);
  CHECK(plan.taylor_one_norm() == doctest::Approx(harmonic_number(30)).epsilon(1e-14));
  CHECK(harmonic_number(30) == doctest::Approx(3.994987130920391).epsilon(1e-14));
  CHECK(plan.series().one_norm() <= harmonic_number(30) + 1e-9);
}

TEST_CASE("series derivatives and divided differences") {
  const ApproximationPlan plan(30, 285, 48, 0.25, 1e-2);
  const FourierLogSeries& f = plan.series();
  for (double l : {0.3, 0.55, 0.9}) {
    const double h = 1e-6;
    const cplx fd = (f.eval(l + h) - f.eval(l - h)) / (2 * h);
    CHECK(std::abs(f.derivative(l) - fd) < 1e-6);
    CHECK(std::abs(f.divided_difference(l, l) - f.derivative(l)) < 1e-12);
    CHECK(std::abs(f.divided_difference(l, l + 1e-7) - f.derivative(l + 5e-8)) < 1e-8);
    CHECK(std::abs(f.divided_difference(l, 0.8) - (f.eval(l) - f.eval(0.8)) / (l - 0.8)) < 1e-10);
  }
}

TEST_CASE("planner") {
  const PlanBounds p = plan_parameters(1e-2, 0.25, 1.0);
  CHECK(p.K == 30);
  CHECK(p.L == 285);
  CHECK(p.M == 48);
  CHECK(p.samples == 58067479076LL);
  CHECK(p.lambert_argument == doctest::Approx(-1.960717741511628e-07).epsilon(1e-10));
  const PlanBounds q = plan_parameters(1e-3, 0.1);
  CHECK(q.K == 112);
  CHECK(q.L == 2578);
  CHECK(q.M == 164);
  CHECK(q.samples == 119312894123833LL);
  const PlanBounds r = plan_parameters(1e-3, 0.2);
  CHECK((r.K == 50 && r.L == 542 && r.M == 72 && r.samples == 16571291217310LL));
  const PlanBounds s = plan_parameters(1e-2, 0.1, 2.0);
  CHECK((s.K == 96 && s.L == 2408 && s.M == 152 && s.samples == 3865763315616LL));
  for (const PlanBounds& b : {p, q, r, s})
    CHECK(derivative_error_bound(b.K, b.L, b.M, b.lambda_min, b.deriv_norm) <= b.epsilon);
  CHECK_THROWS_AS(plan_parameters(0.0, 0.25), ValidationError);
  CHECK_THROWS_AS(plan_parameters(1e-2, 1.5), ValidationError);
}

TEST_CASE("scalar series accuracy on a grid") {
  const ApproximationPlan plan = ApproximationPlan::from_bounds(plan_parameters(1e-3, 0.2));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double l = 0.2 + 0.6 * i / 99.0;
    worst = std::max(worst, std::abs(plan.series().eval(l) - std::log(l)));
  }
  CHECK(worst <= 1e-3);
  CHECK(std::abs(plan.series().eval(1.0)) <= 1e-3);
  CHECK(value_error_bound(plan.K(), plan.L(), plan.M(), 0.2) <= 1e-3);
}

TEST_CASE("operator logarithm") {
  const ApproximationPlan plan = ApproximationPlan::from_bounds(plan_parameters(1e-3, 0.1));
  const Matrix lm = approx_log_operator(DensityMatrix::maximally_mixed(4), plan).matrix();
  CHECK(max_abs(lm + std::log(4.0) * Matrix::Identity(4, 4)) <= 1e-3);

  Rng rng(41);
  for (int t = 0; t < 5; ++t) {
    std::uniform_real_distribution<double> u(0.1, 0.4);
    std::vector<double> sp(4);
    double s = 0;
    for (double& x : sp) s += (x = u(rng));
    for (double& x : sp) x /= s;
    bool ok = true;
    for (double x : sp) ok = ok && x >= 0.1;
    if (!ok) continue;
    const DensityMatrix sigma = random_density_with_spectrum(sp, rng);
    const Matrix exact = apply_matrix_function(sigma.as_operator(), [](double x) { return std::log(x); }).matrix();
    CHECK(operator_norm_hermitian(approx_log_operator(sigma, plan).matrix() - exact) <= 1e-3);
  }

  // kernel stays at zero
  const DensityMatrix singular = random_density_with_spectrum({0.5, 0.3, 0.2, 0.0}, rng);
  const Spectrum ks = singular.spectrum();
  const Matrix lk = approx_log_operator(singular, plan).matrix();
  CHECK((lk * ks.vectors.col(0)).norm() < 1e-10);

  CHECK_THROWS_AS(approx_log_operator(random_density_with_spectrum({0.95, 0.05}, rng), plan), WindowError);
}

TEST_CASE("Lambert W on the lower branch") {
  CHECK(lambert_w_minus1(-1.0 / std::numbers::e) == doctest::Approx(-1.0).epsilon(1e-7));
  const double w = lambert_w_minus1(-0.1);
  CHECK(std::abs(w * std::exp(w) + 0.1) < 1e-12);
  CHECK(w == doctest::Approx(-3.577152063957297).epsilon(1e-13));
  const double w6 = lambert_w_minus1(-1e-6);
  CHECK(w6 == doctest::Approx(-16.62650890137247).epsilon(1e-13));
  CHECK((w6 > -17 && w6 < -12));
  CHECK_THROWS(lambert_w_minus1(0.1));
}

TEST_CASE("Chebyshev inverse") {
  const ChebyshevInversePlan plan(10.0, 1e-3);
  CHECK(plan.b() == 922);
  CHECK(plan.j0() == 119);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = 0.1 + 0.9 * i / 999.0;
    worst = std::max(worst, std::abs(chebyshev_inverse(x, plan) - 1.0 / x));
  }
  CHECK(worst <= 2e-3);
  CHECK(plan.coefficient_one_norm() <= plan.one_norm_bound());
  // odd function
  CHECK(chebyshev_inverse(-0.3, plan) == doctest::Approx(-chebyshev_inverse(0.3, plan)));

  const ChebyshevInverseResult r = chebyshev_inverse(HermitianOperator(diag({0.5, 0.25, 0.05})), plan);
  CHECK(r.out_of_window == 1);
  CHECK(std::abs(r.op.matrix()(0, 0) - 2.0) <= 2e-3);
  CHECK(std::abs(r.op.matrix()(1, 1) - 4.0) <= 2e-3);
}
