#include "hlap/barrier.hpp"
#include "hlap/error.hpp"
#include "hlap/numerics.hpp"
#include "hlap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace hlap {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double ZetaProfile::operator()(double w) const { return value_ ? value_(w) : 0.0; }

double ZetaProfile::cumulative(double w) const {
  if (!primitive_) return 0.0;
  return primitive_(std::clamp(w, 0.0, 1.0));
}

nlohmann::json ZetaProfile::to_json() const {
  static const char* names[] = {"FromModulus", "FromField", "Zero"};
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < w_.size(); ++i) samples.push_back({w_[i], zeta_[i]});
  return {{"source", names[static_cast<int>(source_)]}, {"l1_mass", l1_mass_}, {"params", params_},
          {"samples", samples}};
}

ZetaProfile zeta_from_modulus(const DiniModulus& eps, double c, double C, double C_D) {
  if (!(c > 0.0) || !(C >= c) || !(C_D > 0.0))
    throw Error(ErrorCode::BadInput, "zeta_from_modulus needs 0 < c <= C and C_D > 0");
  const double t1 = eps.t_cap();
  const double dini = dini_integral(eps, t1);  // throws NotIntegrable
  // D(x) = \int_0^x eps(s)/s ds, evaluated in log variables
  auto D = [eps, t1, dini](double x) {
    if (x <= 0.0) return 0.0;
    const auto in_log = [&eps](double y) { return eps(std::exp(y)); };
    return dini - numerics::integrate(in_log, std::log(x), std::log(t1), 1e-13);
  };
  const double k = C_D / std::pow(c, 4);
  const double half = k * D(0.5 * C);

  ZetaProfile z;
  z.source_ = ZetaSource::FromModulus;
  z.l1_mass_ = 2.0 * half;
  z.value_ = [eps, c, C, C_D](double w) {
    const double m = std::min(w, 1.0 - w);
    if (!(m > 0.0)) return kInf;
    return C_D / (c * c * c) * eps(C * m) / (c * m);
  };
  z.primitive_ = [D, k, half, C](double w) {
    if (w <= 0.5) return k * D(C * w);
    return 2.0 * half - k * D(C * (1.0 - w));
  };
  for (int j = 40; j >= 1; --j) z.w_.push_back(std::ldexp(0.5, -j));
  for (double w : numerics::lin_space(0.5 / 64, 0.5, 64)) z.w_.push_back(w);
  z.w_.erase(std::unique(z.w_.begin(), z.w_.end()), z.w_.end());
  for (std::size_t i = z.w_.size(); i-- > 0;)
    if (z.w_[i] < 0.5) z.w_.push_back(1.0 - z.w_[i]);
  std::sort(z.w_.begin(), z.w_.end());
  for (double w : z.w_) {
    z.zeta_.push_back(z.value_(w));
    z.cum_.push_back(z.primitive_(w));
  }
  z.params_ = {{"modulus", eps.to_record()}, {"c", c}, {"C", C}, {"C_D", C_D}};
  return z;
}

ZetaProfile zeta_from_field(const ScalarField& w, const LevelDiagnostics& diag, int bins) {
  if (bins < 4) throw Error(ErrorCode::BadInput, "zeta_from_field needs at least 4 bins");
  const Mesh& mesh = w.mesh();
  std::vector<double> raw(bins, 0.0);
  std::vector<int> count(bins, 0);
  for (int idx : mesh.interior_cells()) {
    if (!diag.valid[idx] || !mesh.is_core(idx, 2)) continue;
    const int b = std::clamp(static_cast<int>(std::floor(w[idx] * bins)), 0, bins - 1);
    const double g = diag.grad_norm[idx];
    raw[b] = std::max(raw[b], std::abs(diag.inf_lap[idx]) / std::pow(g, 5));
    ++count[b];
  }
  int first = -1, last = -1;
  for (int b = 0; b < bins; ++b)
    if (count[b]) {
      if (first < 0) first = b;
      last = b;
    }
  if (first < 0) throw Error(ErrorCode::VanishingGradient, "no cell with usable gradient for zeta");

  ZetaProfile z;
  z.source_ = ZetaSource::FromField;
  for (int b = first; b <= last; ++b) {
    double env = raw[b];
    if (b > first) env = std::max(env, raw[b - 1]);
    if (b < last) env = std::max(env, raw[b + 1]);
    z.w_.push_back((b + 0.5) / bins);
    z.zeta_.push_back(env);
  }
  // primitive: constant pieces at both ends, trapezoids in between
  z.cum_.assign(z.w_.size(), 0.0);
  z.cum_[0] = z.zeta_[0] * z.w_[0];
  for (std::size_t i = 1; i < z.w_.size(); ++i)
    z.cum_[i] = z.cum_[i - 1] + 0.5 * (z.zeta_[i] + z.zeta_[i - 1]) * (z.w_[i] - z.w_[i - 1]);
  z.l1_mass_ = z.cum_.back() + z.zeta_.back() * (1.0 - z.w_.back());

  auto wt = z.w_, zt = z.zeta_, ct = z.cum_;
  z.value_ = [wt, zt](double x) { return numerics::interp_linear(wt, zt, x); };
  z.primitive_ = [wt, zt, ct](double x) {
    if (x <= wt.front()) return zt.front() * x;
    if (x >= wt.back()) return ct.back() + zt.back() * (x - wt.back());
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(wt.begin(), wt.end(), x) - wt.begin()) - 1;
    const double s = x - wt[k];
    const double slope = (zt[k + 1] - zt[k]) / (wt[k + 1] - wt[k]);
    return ct[k] + zt[k] * s + 0.5 * slope * s * s;
  };
  z.params_ = {{"bins", bins}, {"resolved_bins", last - first + 1}};
  return z;
}

ZetaProfile zeta_zero() {
  ZetaProfile z;
  z.source_ = ZetaSource::Zero;
  z.w_ = {0.0, 1.0};
  z.zeta_ = {0.0, 0.0};
  z.cum_ = {0.0, 0.0};
  return z;
}

// ---------------------------------------------------------------------------

double BarrierProfile::f_at(double x) const { return numerics::interp_hermite(w, f, f_prime, x); }

double BarrierProfile::f_prime_at(double x) const {
  if (x <= w.front()) return f_prime.front();
  if (x >= w.back()) return f_prime.back();
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(w.begin(), w.end(), x) - w.begin()) - 1;
  if (std::isfinite(f_second[k]) && std::isfinite(f_second[k + 1])) {
    const std::vector<double> xs{w[k], w[k + 1]}, ys{f_prime[k], f_prime[k + 1]}, ds{f_second[k], f_second[k + 1]};
    return numerics::interp_hermite(xs, ys, ds, x);
  }
  const double s = (x - w[k]) / (w[k + 1] - w[k]);
  return (1 - s) * f_prime[k] + s * f_prime[k + 1];
}

double BarrierProfile::f_second_at(double x) const { return numerics::interp_linear(w, f_second, x); }

ScalarField BarrierProfile::compose(const ScalarField& w_field) const {
  return w_field.map([this](double x) { return f_at(std::clamp(x, 0.0, 1.0)); });
}

nlohmann::json BarrierProfile::header() const {
  return {{"m", m}, {"alpha", alpha}, {"beta", beta}, {"f1", f1}, {"f_prime_0", f_prime.front()},
          {"f_prime_1", f_prime.back()}, {"nodes", w.size()}};
}

namespace {

std::vector<double> barrier_nodes(const ZetaProfile& zeta) {
  std::vector<double> nodes = numerics::lin_space(0.0, 1.0, 2049);
  for (int k = 2; k <= 80; ++k) {
    const double t = std::pow(2.0, -0.5 * k);
    nodes.push_back(t);
    nodes.push_back(1.0 - t);
  }
  for (double x : zeta.w_table())
    if (x > 0.0 && x < 1.0) nodes.push_back(x);
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> out;
  for (double x : nodes)
    if (out.empty() || x - out.back() > 1e-15) out.push_back(x);
  return out;
}

} // namespace

BarrierProfile build_barrier(const OrliczFunction& of, const ZetaProfile& zeta, double m, double alpha,
                             double beta) {
  if (!(m > 0.0) || !(alpha > 0.0) || !(beta > 0.0))
    throw Error(ErrorCode::BadInput, "build_barrier needs m, alpha, beta > 0");
  if (!(beta * m <= of.t_max()))
    throw Error(ErrorCode::InversionOverflow, "beta m beyond t_max of the structural function");
  BarrierProfile p;
  p.m = m;
  p.alpha = alpha;
  p.beta = beta;
  p.w = barrier_nodes(zeta);
  const std::size_t n = p.w.size();
  p.f_prime.resize(n);
  p.f_second.resize(n);
  p.f.assign(n, 0.0);
  const double A = of.h(beta * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = p.w[i];
    const double X = A * std::exp(beta / alpha * zeta.cumulative(x));
    if (!std::isfinite(X) || X > of.h_max())
      throw Error(ErrorCode::InversionOverflow,
                  "g argument " + format_double(X) + " beyond h_max at w = " + format_double(x));
    p.f_prime[i] = (i == 0 ? m : of.g(X) / beta);
    const double z = zeta(x);
    p.f_second[i] = z == 0.0 ? 0.0 : z / (alpha * of.R(beta * p.f_prime[i]));
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double d = p.w[i] - p.w[i - 1];
    double piece = 0.5 * d * (p.f_prime[i - 1] + p.f_prime[i]);
    if (std::isfinite(p.f_second[i - 1]) && std::isfinite(p.f_second[i]))
      piece += d * d / 12.0 * (p.f_second[i - 1] - p.f_second[i]);
    p.f[i] = p.f[i - 1] + piece;
  }
  p.f1 = p.f.back();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.f_prime[i] > 0.0) || !std::isfinite(p.f_prime[i]))
      throw Error(ErrorCode::InversionOverflow, "f' not positive and finite at w = " + format_double(p.w[i]));
    if (i && p.f_prime[i] < p.f_prime[i - 1] * (1 - 1e-10))
      throw Error(ErrorCode::NonMonotone, "f' decreases at w = " + format_double(p.w[i]));
  }
  return p;
}

BarrierProfile tune_m(const OrliczFunction& of, const ZetaProfile& zeta, double alpha, double beta,
                      double target, TargetSide side) {
  if (!(target > 0.0)) throw Error(ErrorCode::BadInput, "target must be positive");
  auto build = [&](double m) {
    try {
      return build_barrier(of, zeta, m, alpha, beta);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InversionOverflow || e.code() == ErrorCode::InversionFailure)
        throw Error(ErrorCode::TargetUnreachable, std::string("f(1) = target overflows: ") + e.what());
      throw;
    }
  };
  // f' >= m gives f(1) >= m, so m = target brackets from above
  BarrierProfile above = build(target);
  if (above.f1 == target) return above;
  double hi = target, lo = 0.5 * target;
  BarrierProfile below = build(lo);
  for (int k = 0; below.f1 > target; ++k) {
    if (k > 200) throw Error(ErrorCode::TargetUnreachable, "no lower bracket for m");
    hi = lo;
    above = std::move(below);
    lo *= 0.5;
    below = build(lo);
  }
  for (int it = 0; it < 200 && above.f1 - below.f1 > 1e-7 * target; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    BarrierProfile p = build(mid);
    if (p.f1 == target) return p;
    if (p.f1 < target) {
      lo = mid;
      below = std::move(p);
    } else {
      hi = mid;
      above = std::move(p);
    }
  }
  BarrierProfile& pick = side == TargetSide::Below ? below : above;
  if (std::abs(pick.f1 - target) <= 1e-6 * target) return pick;
  throw Error(ErrorCode::TargetUnreachable, "bisection on m did not reach the target");
}

void write_barrier_csv(const std::filesystem::path& path, const BarrierProfile& p) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadInput, "cannot open " + path.string());
  out << "# m=" << format_double(p.m) << " alpha=" << format_double(p.alpha) << " beta=" << format_double(p.beta)
      << " f1=" << format_double(p.f1) << "\n";
  out << "w,f\n";
  for (std::size_t i = 0; i < p.w.size(); ++i) out << format_double(p.w[i]) << ',' << format_double(p.f[i]) << '\n';
}

// ---------------------------------------------------------------------------

nlohmann::json CheckSummary::to_json() const {
  return {{"name", name},         {"pass", pass},       {"worst_margin", worst_margin},
          {"tolerance", tolerance}, {"checked", checked}, {"violations", violations},
          {"violating_cells", violating_cells}, {"worst_margin_excluded", worst_margin_excluded}};
}

nlohmann::json SubsolutionReport::to_json() const {
  return {{"pass", pass},
          {"excluded_cells", excluded_cells},
          {"flux_scale", flux_scale},
          {"checks", {residual.to_json(), anhavf.to_json(), zeta.to_json()}}};
}

SubsolutionReport verify_subsolution(const ScalarField& w, const LevelDiagnostics& diag,
                                     const BarrierProfile& profile, const ZetaProfile& zeta,
                                     const OrliczFunction& of) {
  const Mesh& mesh = w.mesh();
  const ScalarField v = profile.compose(w);
  const ScalarField r = operator_residual(v, of);

  SubsolutionReport rep;
  rep.flux_scale = numerics::median(flux_magnitudes(v, of));
  rep.residual.name = "residual";
  rep.anhavf.name = "anhavf";
  rep.zeta.name = "zeta";

  struct Row {
    int idx;
    bool checked;
    double m1, m2, m3, rhs2, rhs3;
  };
  std::vector<Row> rows;
  std::vector<double> rhs2_checked, rhs3_checked;
  for (int idx : mesh.interior_cells()) {
    const bool checked = diag.valid[idx] && mesh.is_core(idx, 2);
    const double x = std::clamp(w[idx], 0.0, 1.0);
    const double g = diag.grad_norm[idx];
    double lhs = 0.0, rhs2 = 0.0;
    if (diag.valid[idx]) {
      lhs = profile.f_second_at(x) * of.R(profile.f_prime_at(x) * g);
      rhs2 = diag.inf_lap[idx] / std::pow(g, 5);
    }
    const double rhs3 = zeta(x);
    rows.push_back({idx, checked, r[idx], lhs - rhs2, lhs - rhs3, rhs2, rhs3});
    if (checked) {
      rhs2_checked.push_back(std::abs(rhs2));
      rhs3_checked.push_back(std::abs(rhs3));
    } else {
      ++rep.excluded_cells;
    }
  }
  rep.residual.tolerance = 1e-3 * rep.flux_scale;
  rep.anhavf.tolerance = rhs2_checked.empty() ? 0.0 : 1e-3 * numerics::median(rhs2_checked);
  rep.zeta.tolerance = rhs3_checked.empty() ? 0.0 : 1e-3 * numerics::median(rhs3_checked);

  CheckSummary* checks[3] = {&rep.residual, &rep.anhavf, &rep.zeta};
  for (CheckSummary* c : checks) {
    c->worst_margin = kInf;
    c->worst_margin_excluded = kInf;
  }
  for (const Row& row : rows) {
    const double margins[3] = {row.m1, row.m2, row.m3};
    for (int k = 0; k < 3; ++k) {
      CheckSummary& c = *checks[k];
      if (!row.checked) {
        c.worst_margin_excluded = std::min(c.worst_margin_excluded, margins[k]);
        continue;
      }
      ++c.checked;
      c.worst_margin = std::min(c.worst_margin, margins[k]);
      if (!(margins[k] >= -c.tolerance)) {
        ++c.violations;
        if (c.violating_cells.size() < 20) c.violating_cells.push_back(row.idx);
      }
    }
  }
  for (CheckSummary* c : checks) {
    c->pass = c->violations == 0;
    if (!c->checked) c->worst_margin = 0.0;
    if (c->worst_margin_excluded == kInf) c->worst_margin_excluded = 0.0;
  }
  rep.pass = rep.residual.pass && rep.anhavf.pass && rep.zeta.pass;
  return rep;
}

ScalarField expanded_operator(const ScalarField& w, const LevelDiagnostics& diag, const BarrierProfile& profile,
                              const OrliczFunction& of) {
  std::vector<double> out(w.values().size(), 0.0);
  for (int idx : w.mesh().interior_cells()) {
    if (!diag.valid[idx]) continue;
    const double x = std::clamp(w[idx], 0.0, 1.0);
    const double g = diag.grad_norm[idx];
    const double fp = profile.f_prime_at(x), fpp = profile.f_second_at(x);
    const double t = fp * g;
    const double d2 = of.dh(t), H = of.h(t) / t;
    out[idx] = d2 * fpp * g * g + H * fp * diag.laplacian[idx] + (d2 - H) * fp * diag.inf_lap[idx] / (g * g);
  }
  return ScalarField(w.mesh_ptr(), std::move(out));
}

} // namespace hlap
