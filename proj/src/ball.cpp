// Closed-form Meissner data of the ball under the applied field z.
#include <algorithm>
#include <cmath>
#include <functional>

#include "glmeissner/error.hpp"
#include "glmeissner/london.hpp"

namespace glmeissner {

namespace {

// g1(r)/r^2 with g1 = cosh r - sinh r / r = sum_k 2k r^{2k} / (2k+1)!.
double g1_over_r2(double r) {
  if (r < 0.5) {
    const double r2 = r * r;
    double term = 1.0, sum = 0.0, fact = 6.0;  // (2k+1)! for k = 1
    for (int k = 1; k <= 12; ++k) {
      sum += 2.0 * k * term / fact;
      term *= r2;
      fact *= (2.0 * k + 2) * (2.0 * k + 3);
    }
    return sum;
  }
  return (std::cosh(r) - std::sinh(r) / r) / (r * r);
}

// g2(r)/r^2 with g2 = cosh r - ((1+r^2)/r) sinh r = -sum_m 4m^2 r^{2m} / (2m+1)!.
double g2_over_r2(double r) {
  if (r < 0.5) {
    const double r2 = r * r;
    double term = 1.0, sum = 0.0, fact = 6.0;
    for (int m = 1; m <= 12; ++m) {
      sum -= 4.0 * m * m * term / fact;
      term *= r2;
      fact *= (2.0 * m + 2) * (2.0 * m + 3);
    }
    return sum;
  }
  return (std::cosh(r) - (1.0 + r * r) / r * std::sinh(r)) / (r * r);
}

double ball_c(double R) {
  return 3.0 / (2.0 * R * std::sinh(R)) * (std::cosh(R) - (1.0 + R * R) / R * std::sinh(R));
}

// Adaptive Simpson with Richardson correction.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace

Vec3 ball_b0_formula(double R, const Vec3& p) {
  const double r2 = p.squaredNorm();
  const double sR = std::sinh(R);
  const double r = std::sqrt(r2);
  const double a = -3.0 * R / sR * g1_over_r2(r);
  const double b = -1.5 * R / sR * g2_over_r2(r);
  const double c = ball_c(R);
  if (r2 == 0.0) return Vec3(0.0, 0.0, a - c);
  // a cos(phi) r_hat + b sin(phi) phi_hat, written in Cartesian form.
  const double xz = p[0] * p[2] / r2, yz = p[1] * p[2] / r2;
  const double zz = p[2] * p[2] / r2, rho2 = (p[0] * p[0] + p[1] * p[1]) / r2;
  return Vec3((a + b) * xz, (a + b) * yz, a * zz - b * rho2 - c);
}

Vec3 analytic_ball_B0(double R, const Vec3& p) {
  if (!(R > 0)) throw Error(ErrorCode::kNonPositiveRadius, "R must be positive");
  if (p.norm() > R * (1.0 + 1e-12)) throw Error(ErrorCode::kOutsideBall, "point outside the ball");
  return ball_b0_formula(R, p);
}

Vec3 ball_curl_b0(double R, const Vec3& p) {
  // curl B0 = (f(r) / r^2) (-y, x, 0), f = (3R / (2 sinh R)) g1.
  const double s = 1.5 * R / std::sinh(R) * g1_over_r2(p.norm());
  return Vec3(-s * p[1], s * p[0], 0.0);
}

double curl_b0_y_component(double R, double r, double phi) {
  if (!(R > 0)) throw Error(ErrorCode::kNonPositiveRadius, "R must be positive");
  // f(r) sin(phi) / r = (3R / (2 sinh R)) (g1 / r^2) r sin(phi).
  return 1.5 * R / std::sinh(R) * g1_over_r2(r) * r * std::sin(phi);
}

double ball_norm_star_exact(double R) {
  if (!(R > 0)) throw Error(ErrorCode::kNonPositiveRadius, "R must be positive");
  // 1 - (1/sinh R) int_0^R sinh(r)/r dr = (1/sinh R) int_0^R (cosh r - sinh(r)/r) dr,
  // since int_0^R cosh = sinh R. The right form has a positive integrand, so
  // no digits are lost to cancellation for small R.
  const double sR = std::sinh(R);
  auto f = [&](double r) { return r * r * g1_over_r2(r) / sR; };
  const double rough = R / 6.0 * (f(0.0) + 4.0 * f(0.5 * R) + f(R));
  const double tol = 1e-13 * std::max(std::abs(rough), 1e-300);
  return 1.5 * adaptive_simpson(f, 0.0, R, tol);
}

double hc1_leading(double eps, double norm_star) {
  if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::kInvalidEpsilon, "eps must lie in (0,1)");
  if (!(norm_star > 0)) throw Error(ErrorCode::kNonPositiveNormStar, "norm_star must be positive");
  return std::abs(std::log(eps)) / (2.0 * norm_star);
}

double ball_kappa(double R) { return -ball_c(R); }

double ball_J0_exact(double R) {
  // 1/2 int_B B0_z dV; the angular integrals are elementary and
  // int_0^R r sinh r dr = R cosh R - sinh R.
  const double sR = std::sinh(R), cR = std::cosh(R);
  const double radial = 3.0 * R / sR * (R * cR - sR);
  return -(2.0 * M_PI / 3.0) * (radial + ball_c(R) * R * R * R);
}

}  // namespace glmeissner
