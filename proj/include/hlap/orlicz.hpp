#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hlap/grid.hpp"

namespace hlap {

enum class OrliczKind { Power, Custom };

struct OrliczValues {
  double F;
  double h;
  double g;
  double Fstar;
  double R;
};

/// The structural function F(t) = \int_0^t h together with its companions
/// h = F', g = h^{-1}, the Legendre transform F* = \int g and R = F''/F'.
///
/// Power(p) has closed forms for everything. Custom functions are given by a
/// flow law h (callback or monotone table) and evaluated numerically: F and
/// F* by adaptive quadrature, g by bracketing bisection, F'' by central
/// differences unless a derivative is supplied.
class OrliczFunction {
public:
  static OrliczFunction power(double p, double t_max = 1e6);
  static OrliczFunction custom(std::function<double(double)> h, double t_max,
                               std::string law = "custom",
                               std::function<double(double)> dh = {});
  /// Monotone cubic (PCHIP) interpolation of sampled (t, h) pairs; t must
  /// start at 0.
  static OrliczFunction from_table(std::vector<double> t, std::vector<double> h);
  /// h(t) = t / sqrt(1 + t^2), the minimal-surface flow law.
  static OrliczFunction minimal_surface(double t_max = 1e3);
  /// h(t) = e^t - 1.
  static OrliczFunction exponential(double t_max = 30.0);

  static OrliczFunction from_record(const nlohmann::json& record);
  nlohmann::json to_record() const;

  OrliczKind kind() const { return kind_; }
  double p() const { return p_; }
  double t_max() const { return t_max_; }
  const std::string& law() const { return law_; }

  double h(double t) const;
  /// F''(t) = h'(t).
  double dh(double t) const;
  double F(double t) const;
  double g(double s) const;
  double Fstar(double s) const;
  double R(double t) const;
  /// Upper end of the range of h (domain of g and F*).
  double h_max() const { return h_max_; }

  /// Range-checked evaluation of all companions at one point.
  OrliczValues eval(double t) const;

  /// The conjugate function F*, as an OrliczFunction on [0, h_max].
  OrliczFunction dual() const;

  /// h(1) = 1, the normalisation under which the Orlicz Hoelder inequality
  /// holds with constant one.
  bool normalized() const;

private:
  OrliczFunction() = default;
  void validate();

  OrliczKind kind_ = OrliczKind::Power;
  double p_ = 2.0;
  double t_max_ = 0.0;
  double h_max_ = 0.0;
  std::string law_;
  std::shared_ptr<const std::function<double(double)>> h_fn_;
  std::shared_ptr<const std::function<double(double)>> dh_fn_;
  std::vector<double> table_t_, table_h_;
};

/// F(a) + F*(b) - ab, non-negative with equality iff b = h(a).
double young_gap(const OrliczFunction& of, double a, double b);

enum class ConditionId { Physical, Coercivity, Delta2, TechnicalR, Holder };
std::string to_string(ConditionId id);

struct ConditionReport {
  ConditionId condition_id;
  bool pass = true;
  std::vector<std::pair<double, double>> witnesses;
  std::map<std::string, double> constants;
  std::string note;

  nlohmann::json to_json() const;
};

struct Interval {
  double lo;
  double hi;
};

/// Physical, coercivity and Delta_2 reports. Failures are reported, never
/// thrown. `delta2_t0` is the threshold above which Delta_2 is sampled.
std::vector<ConditionReport> check_conditions(const OrliczFunction& of, double p_guess,
                                              Interval range, double delta2_t0 = 1.0);

/// Monotone increasing bounded weight c(s) with its bounds on the sampled range.
struct WeightSample {
  std::function<double(double)> c;
  double lower;
  double upper;
  std::string label;
};

/// Certifies \int_t^T R(c(s)s) ds >= alpha \int_t^T R(beta s) ds over the
/// supplied weights and a lattice of (t, T) pairs. The candidate (1, C)
/// is tried first, then alpha in {2^-k}, beta in {c 2^{k/2}} up to 4C.
ConditionReport check_condition_R(const OrliczFunction& of, const std::vector<WeightSample>& c_samples,
                                  Interval s_range);

/// Orlicz norm min{M : \int F(|u|/M) <= F(1)} by bisection over interior cells.
double orlicz_norm(const ScalarField& field, const OrliczFunction& of);

} // namespace hlap
