#include "hlap/numerics.hpp"
#include "hlap/error.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hlap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::BadInput: return "BadInput";
  case ErrorCode::NonMonotone: return "NonMonotone";
  case ErrorCode::NonzeroOrigin: return "NonzeroOrigin";
  case ErrorCode::OutOfRange: return "OutOfRange";
  case ErrorCode::InversionFailure: return "InversionFailure";
  case ErrorCode::Unbounded: return "Unbounded";
  case ErrorCode::TableTooCoarse: return "TableTooCoarse";
  case ErrorCode::NotConvexDini: return "NotConvexDini";
  case ErrorCode::ContainmentViolated: return "ContainmentViolated";
  case ErrorCode::GapTooSmall: return "GapTooSmall";
  case ErrorCode::BadRadii: return "BadRadii";
  case ErrorCode::GridTooSmall: return "GridTooSmall";
  case ErrorCode::NonConvergence: return "NonConvergence";
  case ErrorCode::LineSearchStall: return "LineSearchStall";
  case ErrorCode::VanishingGradient: return "VanishingGradient";
  case ErrorCode::StagnationPoint: return "StagnationPoint";
  case ErrorCode::DegenerateGradient: return "DegenerateGradient";
  case ErrorCode::NotIntegrable: return "NotIntegrable";
  case ErrorCode::InversionOverflow: return "InversionOverflow";
  case ErrorCode::TargetUnreachable: return "TargetUnreachable";
  case ErrorCode::PreconditionFail: return "PreconditionFail";
  case ErrorCode::NotNormalized: return "NotNormalized";
  case ErrorCode::ConfigParse: return "ConfigParse";
  case ErrorCode::MissingArtifact: return "MissingArtifact";
  }
  return "Unknown";
}

namespace numerics {

namespace {
double integrate_piece(const std::function<double(double)>& f, double a, double b,
                       double abs_tol, int depth) {
  double error = 0.0;
  // max_depth 0: a single 15-point rule; its error is reported on [-1, 1]
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &error);
  error *= 0.5 * std::abs(b - a);
  if (error > std::max(abs_tol, 1e-15 * std::abs(value)) && depth < 50) {
    const double mid = 0.5 * (a + b);
    if (mid > a && mid < b)
      return integrate_piece(f, a, mid, 0.5 * abs_tol, depth + 1) +
             integrate_piece(f, mid, b, 0.5 * abs_tol, depth + 1);
  }
  return value;
}
} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (b == a) return 0.0;
  if (b < a) return -integrate(f, b, a, abs_tol);
  return integrate_piece(f, a, b, abs_tol, 0);
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, int max_iter) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i)
    out[i] = std::exp(n == 1 ? a : a + (b - a) * i / (n - 1));
  if (n > 1) {
    out.front() = lo;
    out.back() = hi;
  }
  return out;
}

std::vector<double> lin_space(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.begin() + values.size() / 2;
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

namespace {
std::size_t bracket(const std::vector<double>& x, double at) {
  auto it = std::upper_bound(x.begin(), x.end(), at);
  std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(k, x.size() - 2);
}
} // namespace

double interp_linear(const std::vector<double>& x, const std::vector<double>& y, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const std::size_t k = bracket(x, at);
  const double s = (at - x[k]) / (x[k + 1] - x[k]);
  return y[k] + s * (y[k + 1] - y[k]);
}

double interp_hermite(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& dy, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const std::size_t k = bracket(x, at);
  const double d = x[k + 1] - x[k];
  const double s = (at - x[k]) / d;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y[k] + (s3 - 2 * s2 + s) * d * dy[k] +
         (-2 * s3 + 3 * s2) * y[k + 1] + (s3 - s2) * d * dy[k + 1];
}

} // namespace numerics
} // namespace hlap
