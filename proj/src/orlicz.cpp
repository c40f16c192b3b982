#include "hlap/orlicz.hpp"
#include "hlap/error.hpp"
#include "hlap/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

// pchip.hpp calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

namespace hlap {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

OrliczFunction OrliczFunction::power(double p, double t_max) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorCode::BadInput, "Power requires p > 1");
  if (!(t_max > 0.0)) throw Error(ErrorCode::BadInput, "t_max must be positive");
  OrliczFunction of;
  of.kind_ = OrliczKind::Power;
  of.p_ = p;
  of.t_max_ = t_max;
  of.law_ = "power";
  of.h_max_ = std::pow(t_max, p - 1.0);
  return of;
}

OrliczFunction OrliczFunction::custom(std::function<double(double)> h, double t_max, std::string law,
                                      std::function<double(double)> dh) {
  if (!h) throw Error(ErrorCode::BadInput, "custom flow law needs a callable");
  if (!(t_max > 0.0)) throw Error(ErrorCode::BadInput, "t_max must be positive");
  OrliczFunction of;
  of.kind_ = OrliczKind::Custom;
  of.p_ = std::numeric_limits<double>::quiet_NaN();
  of.t_max_ = t_max;
  of.law_ = std::move(law);
  of.h_fn_ = std::make_shared<const std::function<double(double)>>(std::move(h));
  if (dh) of.dh_fn_ = std::make_shared<const std::function<double(double)>>(std::move(dh));
  of.validate();
  return of;
}

OrliczFunction OrliczFunction::from_table(std::vector<double> t, std::vector<double> h) {
  if (t.size() < 4 || t.size() != h.size())
    throw Error(ErrorCode::BadInput, "flow-law table needs at least 4 (t, h) pairs");
  if (t.front() != 0.0) throw Error(ErrorCode::BadInput, "flow-law table must start at t = 0");
  if (std::abs(h.front()) > 1e-12) throw Error(ErrorCode::NonzeroOrigin, "table h(0) != 0");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw Error(ErrorCode::BadInput, "table abscissae must increase");
    if (!(h[i] > h[i - 1]))
      throw Error(ErrorCode::NonMonotone, "table h decreases at t = " + format_double(t[i]));
  }
  auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
      std::vector<double>(t), std::vector<double>(h));
  const double t_max = t.back();
  OrliczFunction of = custom([spline](double x) { return (*spline)(x); }, t_max, "table",
                             [spline](double x) { return spline->prime(x); });
  of.table_t_ = std::move(t);
  of.table_h_ = std::move(h);
  return of;
}

OrliczFunction OrliczFunction::minimal_surface(double t_max) {
  return custom([](double t) { return t / std::sqrt(1.0 + t * t); }, t_max, "minimal_surface",
                [](double t) { return std::pow(1.0 + t * t, -1.5); });
}

OrliczFunction OrliczFunction::exponential(double t_max) {
  return custom([](double t) { return std::expm1(t); }, t_max, "exponential",
                [](double t) { return std::exp(t); });
}

void OrliczFunction::validate() {
  const auto& hf = *h_fn_;
  const double h0 = hf(0.0);
  if (!(std::abs(h0) <= 1e-12)) throw Error(ErrorCode::NonzeroOrigin, "h(0) = " + format_double(h0));
  double prev = h0, prev_t = 0.0;
  for (double t : numerics::log_space(t_max_ * 1e-9, t_max_, 2000)) {
    const double v = hf(t);
    if (!std::isfinite(v) || !(v > prev))
      throw Error(ErrorCode::NonMonotone,
                  "h not strictly increasing on [" + format_double(prev_t) + ", " + format_double(t) + "]");
    prev = v;
    prev_t = t;
  }
  h_max_ = prev;
}

OrliczFunction OrliczFunction::from_record(const nlohmann::json& rec) {
  try {
    const std::string kind = rec.at("kind").get<std::string>();
    if (kind == "power") return power(rec.at("p").get<double>(), rec.value("t_max", 1e6));
    if (kind == "custom") {
      const std::string law = rec.at("law").get<std::string>();
      if (law == "minimal_surface") return minimal_surface(rec.value("t_max", 1e3));
      if (law == "exponential") return exponential(rec.value("t_max", 30.0));
      if (law == "table") {
        std::vector<double> t, h;
        for (const auto& row : rec.at("table")) {
          t.push_back(row.at(0).get<double>());
          h.push_back(row.at(1).get<double>());
        }
        return from_table(std::move(t), std::move(h));
      }
      throw Error(ErrorCode::ConfigParse, "unknown flow law '" + law + "'");
    }
    throw Error(ErrorCode::ConfigParse, "unknown function kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigParse, std::string("function record: ") + e.what());
  }
}

nlohmann::json OrliczFunction::to_record() const {
  if (kind_ == OrliczKind::Power) return {{"kind", "power"}, {"p", p_}, {"t_max", t_max_}};
  nlohmann::json rec = {{"kind", "custom"}, {"law", law_}, {"t_max", t_max_}};
  if (!table_t_.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < table_t_.size(); ++i) rows.push_back({table_t_[i], table_h_[i]});
    rec["table"] = rows;
  }
  return rec;
}

double OrliczFunction::h(double t) const {
  if (kind_ == OrliczKind::Power) return std::pow(t, p_ - 1.0);
  return (*h_fn_)(t);
}

double OrliczFunction::dh(double t) const {
  if (kind_ == OrliczKind::Power) return (p_ - 1.0) * std::pow(t, p_ - 2.0);
  if (dh_fn_) return (*dh_fn_)(t);
  const double step = 1e-5 * std::max(t, 1e-6);
  if (t - step < 0.0 || t + step > t_max_) {
    const double s = (t + 2 * step > t_max_) ? -step : step;
    return (-3.0 * h(t) + 4.0 * h(t + s) - h(t + 2 * s)) / (2 * s);
  }
  return (h(t + step) - h(t - step)) / (2 * step);
}

double OrliczFunction::F(double t) const {
  if (kind_ == OrliczKind::Power) return std::pow(t, p_) / p_;
  return numerics::integrate([this](double x) { return h(x); }, 0.0, t, 1e-10);
}

double OrliczFunction::g(double s) const {
  if (s < 0.0) throw Error(ErrorCode::OutOfRange, "g(s) needs s >= 0");
  if (kind_ == OrliczKind::Power) return std::pow(s, 1.0 / (p_ - 1.0));
  if (s == 0.0) return 0.0;
  if (s > h_max_ * (1.0 + 1e-12))
    throw Error(ErrorCode::InversionFailure,
                "no bracket for g(" + format_double(s) + ") below t_max = " + format_double(t_max_));
  double hi = std::min(1.0, t_max_);
  while (h(hi) < s) {
    if (hi >= t_max_) return t_max_;
    hi = std::min(2.0 * hi, t_max_);
  }
  return numerics::bisect_root([this, s](double t) { return h(t) - s; }, 0.0, hi);
}

double OrliczFunction::Fstar(double s) const {
  if (kind_ == OrliczKind::Power) {
    const double q = p_ / (p_ - 1.0);
    return std::pow(s, q) / q;
  }
  if (s > h_max_ * (1.0 + 1e-12))
    throw Error(ErrorCode::InversionFailure, "F*(" + format_double(s) + ") beyond range of h");
  return numerics::integrate([this](double x) { return g(x); }, 0.0, s, 1e-10);
}

double OrliczFunction::R(double t) const {
  if (kind_ == OrliczKind::Power) return (p_ - 1.0) / t;
  return dh(t) / h(t);
}

OrliczValues OrliczFunction::eval(double t) const {
  if (!(t >= 0.0) || t > t_max_)
    throw Error(ErrorCode::OutOfRange, "t = " + format_double(t) + " outside [0, t_max]");
  return {F(t), h(t), g(t), Fstar(t), R(t)};
}

OrliczFunction OrliczFunction::dual() const {
  if (kind_ == OrliczKind::Power) return power(p_ / (p_ - 1.0), h_max_);
  auto self = std::make_shared<const OrliczFunction>(*this);
  return custom([self](double s) { return self->g(s); }, h_max_, law_ + "*",
                [self](double s) { return 1.0 / self->dh(self->g(s)); });
}

bool OrliczFunction::normalized() const { return t_max_ >= 1.0 && std::abs(h(1.0) - 1.0) <= 1e-9; }

double young_gap(const OrliczFunction& of, double a, double b) {
  if (!(a >= 0.0) || a > of.t_max()) throw Error(ErrorCode::OutOfRange, "a outside [0, t_max]");
  if (!(b >= 0.0) || b > of.h_max()) throw Error(ErrorCode::OutOfRange, "b outside [0, h_max]");
  return of.F(a) + of.Fstar(b) - a * b;
}

std::string to_string(ConditionId id) {
  switch (id) {
  case ConditionId::Physical: return "Physical";
  case ConditionId::Coercivity: return "Coercivity";
  case ConditionId::Delta2: return "Delta2";
  case ConditionId::TechnicalR: return "TechnicalR";
  case ConditionId::Holder: return "Holder";
  }
  return "Unknown";
}

nlohmann::json ConditionReport::to_json() const {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& [x, y] : witnesses) w.push_back({x, y});
  return {{"condition", to_string(condition_id)},
          {"pass", pass},
          {"witnesses", w},
          {"constants", constants},
          {"note", note}};
}

namespace {

// Log-log slope of y over a fraction of the samples at one end.
double end_slope(const std::vector<double>& t, const std::vector<double>& y, bool high_end) {
  const std::size_t n = t.size();
  const std::size_t k = std::max<std::size_t>(2, n / 5);
  const std::size_t a = high_end ? n - k : 0;
  const std::size_t b = high_end ? n - 1 : k - 1;
  return (std::log(y[b]) - std::log(y[a])) / (std::log(t[b]) - std::log(t[a]));
}

constexpr double kTrendTol = 0.05;

ConditionReport physical_report(const OrliczFunction& of) {
  ConditionReport r;
  r.condition_id = ConditionId::Physical;
  const double h0 = of.h(0.0);
  r.constants["h0"] = h0;
  if (std::abs(h0) > 1e-12) {
    r.pass = false;
    r.witnesses.emplace_back(0.0, h0);
  }
  double prev = h0, prev_t = 0.0;
  for (double t : numerics::log_space(of.t_max() * 1e-9, of.t_max(), 400)) {
    const double v = of.h(t);
    if (!(v > prev)) {
      r.pass = false;
      r.witnesses.emplace_back(prev_t, t);
    }
    prev = v;
    prev_t = t;
  }
  r.note = "h(0) = 0 and h strictly increasing on sampled [0, t_max]";
  return r;
}

ConditionReport coercivity_report(const OrliczFunction& of, double p_guess, Interval range) {
  ConditionReport r;
  r.condition_id = ConditionId::Coercivity;
  const auto t = numerics::log_space(range.lo, range.hi, 200);
  std::vector<double> ratio(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) ratio[i] = of.h(t[i]) / std::pow(t[i], p_guess - 1.0);
  const auto [mn, mx] = std::minmax_element(ratio.begin(), ratio.end());
  const double slope_lo = end_slope(t, ratio, false);
  const double slope_hi = end_slope(t, ratio, true);
  r.constants = {{"c", *mn}, {"C", *mx}, {"p", p_guess}, {"slope_low", slope_lo}, {"slope_high", slope_hi}};
  if (!(*mn > 0.0) || !std::isfinite(*mx)) {
    r.pass = false;
    r.witnesses.emplace_back(t[mn - ratio.begin()], *mn);
  }
  if (std::abs(slope_lo) > kTrendTol) {
    r.pass = false;
    r.witnesses.emplace_back(t.front(), ratio.front());
  }
  if (std::abs(slope_hi) > kTrendTol) {
    r.pass = false;
    r.witnesses.emplace_back(t.back(), ratio.back());
  }
  r.note = "h(t)/t^(p-1) sampled on a log grid; bounded ratio without trend at either end";
  return r;
}

ConditionReport delta2_report(const OrliczFunction& of, Interval range, double t0) {
  ConditionReport r;
  r.condition_id = ConditionId::Delta2;
  r.constants["t0"] = t0;
  auto sup_ratio = [&](const std::function<double(double)>& fn, double lo, double hi,
                       const char* name) -> double {
    const auto t = numerics::log_space(lo, hi, 60);
    std::vector<double> ratio(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) ratio[i] = fn(2.0 * t[i]) / fn(t[i]);
    const double sup = *std::max_element(ratio.begin(), ratio.end());
    const double trend = end_slope(t, ratio, true);
    r.constants[std::string("trend_") + name] = trend;
    if (!std::isfinite(sup) || trend > kTrendTol) {
      r.pass = false;
      r.witnesses.emplace_back(t.back(), ratio.back());
    }
    return sup;
  };

  const double lo = std::max(t0, range.lo);
  double c0 = 0.0;
  if (lo < range.hi) {
    const double c0F = sup_ratio([&](double x) { return of.F(x); }, lo, range.hi, "F");
    r.constants["C0_F"] = c0F;
    c0 = c0F;
  } else {
    r.pass = false;
    r.witnesses.emplace_back(lo, range.hi);
  }
  const double hi_star = std::min(range.hi, of.h_max() / 2.0);
  if (lo < hi_star) {
    const double c0S = sup_ratio([&](double x) { return of.Fstar(x); }, lo, hi_star, "Fstar");
    r.constants["C0_Fstar"] = c0S;
    c0 = std::max(c0, c0S);
  } else {
    r.pass = false;
    r.witnesses.emplace_back(of.h_max(), 0.0);
    r.note = "F* only finite on [0, h_max]: h is bounded; ";
  }
  r.constants["C0"] = c0;
  r.note += "sup F(2t)/F(t) and F*(2t)/F*(t) for t > t0 without growth at the top end";
  return r;
}

} // namespace

std::vector<ConditionReport> check_conditions(const OrliczFunction& of, double p_guess, Interval range,
                                              double delta2_t0) {
  if (!(range.lo > 0.0) || !(range.hi > range.lo) || range.hi > of.t_max() / 2.0)
    throw Error(ErrorCode::OutOfRange, "check range must lie in (0, t_max/2]");
  return {physical_report(of), coercivity_report(of, p_guess, range), delta2_report(of, range, delta2_t0)};
}

ConditionReport check_condition_R(const OrliczFunction& of, const std::vector<WeightSample>& c_samples,
                                  Interval s_range) {
  if (c_samples.empty()) throw Error(ErrorCode::BadInput, "no weight samples");
  if (!(s_range.lo > 0.0) || !(s_range.hi > s_range.lo))
    throw Error(ErrorCode::BadInput, "s range must be a positive interval");

  double c_lo = kInf, c_hi = 0.0;
  for (const auto& w : c_samples) {
    if (!(w.lower > 0.0) || !(w.upper >= w.lower) || !std::isfinite(w.upper))
      throw Error(ErrorCode::BadInput, "weight bounds must satisfy 0 < c <= C < inf");
    double prev = -kInf;
    for (double s : numerics::lin_space(s_range.lo, s_range.hi, 64)) {
      const double v = w.c(s);
      if (v < w.lower * (1 - 1e-12) || v > w.upper * (1 + 1e-12) || v < prev - 1e-12 * std::abs(prev))
        throw Error(ErrorCode::BadInput, "weight '" + w.label + "' not monotone within its bounds");
      prev = v;
    }
    c_lo = std::min(c_lo, w.lower);
    c_hi = std::max(c_hi, w.upper);
  }

  const auto lattice = numerics::log_space(s_range.lo, s_range.hi, 12);
  struct Pair {
    double t, T;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < lattice.size(); ++i)
    for (std::size_t j = i + 1; j < lattice.size(); ++j) pairs.push_back({lattice[i], lattice[j]});

  // lhs[sample][pair] = \int_t^T R(c(s) s) ds
  std::vector<std::vector<double>> lhs(c_samples.size(), std::vector<double>(pairs.size()));
  for (std::size_t k = 0; k < c_samples.size(); ++k) {
    const auto& c = c_samples[k].c;
    for (std::size_t q = 0; q < pairs.size(); ++q)
      lhs[k][q] = numerics::integrate([&](double s) { return of.R(c(s) * s); }, pairs[q].t, pairs[q].T,
                                      1e-11);
  }

  std::vector<std::pair<double, double>> candidates{{1.0, c_hi}};
  for (int ka = 0; ka <= 8; ++ka)
    for (int kb = 0;; ++kb) {
      const double beta = c_lo * std::pow(2.0, 0.5 * kb);
      if (beta > 4.0 * c_hi * (1 + 1e-12)) break;
      candidates.emplace_back(std::ldexp(1.0, -ka), beta);
    }

  ConditionReport r;
  r.condition_id = ConditionId::TechnicalR;
  r.constants = {{"c", c_lo}, {"C", c_hi}};
  r.note = "certified only over the supplied weight samples";
  std::vector<std::pair<double, double>> first_violation;
  for (const auto& [alpha, beta] : candidates) {
    if (beta * s_range.hi > of.t_max()) continue;
    bool ok = true;
    for (std::size_t q = 0; q < pairs.size() && ok; ++q) {
      // \int_t^T R(beta s) ds = log(F'(beta T) / F'(beta t)) / beta
      const double rhs = alpha * std::log(of.h(beta * pairs[q].T) / of.h(beta * pairs[q].t)) / beta;
      for (std::size_t k = 0; k < c_samples.size(); ++k) {
        if (lhs[k][q] < rhs - 1e-9 * std::abs(rhs) - 1e-12) {
          ok = false;
          if (first_violation.empty()) {
            first_violation.emplace_back(static_cast<double>(k), 0.0);
            first_violation.emplace_back(pairs[q].t, pairs[q].T);
          }
          break;
        }
      }
    }
    if (ok) {
      r.pass = true;
      r.constants["alpha"] = alpha;
      r.constants["beta"] = beta;
      return r;
    }
  }
  r.pass = false;
  r.witnesses = first_violation;
  r.note = "SearchExhausted: no lattice (alpha, beta) works; witnesses = (sample index, 0), (t, T). " + r.note;
  return r;
}

double orlicz_norm(const ScalarField& field, const OrliczFunction& of) {
  const auto& cells = field.mesh().interior_cells();
  if (cells.empty()) throw Error(ErrorCode::BadInput, "empty mask");
  double umax = 0.0;
  for (int idx : cells) umax = std::max(umax, std::abs(field[idx]));
  if (umax == 0.0) return 0.0;

  const double target = of.F(1.0);
  const double area = field.mesh().cell_area();
  auto modular = [&](double M) {
    if (umax / M > of.t_max()) return kInf;
    double sum = 0.0;
    for (int idx : cells) sum += of.F(std::abs(field[idx]) / M);
    return sum * area;
  };

  double lo = umax, hi = umax;
  const double lo_limit = umax / of.t_max();
  while (modular(lo) <= target && lo > lo_limit) lo = std::max(lo / 2.0, lo_limit);
  int doublings = 0;
  while (modular(hi) > target) {
    hi *= 2.0;
    if (++doublings > 200) throw Error(ErrorCode::Unbounded, "modular exceeds F(1) for all M");
  }
  if (modular(lo) <= target) return lo;
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (modular(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

} // namespace hlap
