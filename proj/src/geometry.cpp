#include "hlap/geometry.hpp"
#include "hlap/error.hpp"
#include "hlap/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

namespace hlap {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---------------------------------------------------------------------------
// DiniModulus

DiniModulus DiniModulus::power(double a, double t_cap) {
  if (!(a > 0.0 && a <= 1.0)) throw Error(ErrorCode::BadInput, "power modulus needs 0 < a <= 1");
  if (!(t_cap > 0.0)) throw Error(ErrorCode::BadInput, "t_cap must be positive");
  DiniModulus m;
  m.kind_ = ModulusKind::Power;
  m.param_ = a;
  m.t_cap_ = t_cap;
  return m;
}

DiniModulus DiniModulus::log_power(double q, double t_cap) {
  if (!(q > 0.0)) throw Error(ErrorCode::BadInput, "log-power modulus needs q > 0");
  if (!(t_cap > 0.0 && t_cap < 1.0)) throw Error(ErrorCode::BadInput, "log-power modulus needs t_cap in (0, 1)");
  DiniModulus m;
  m.kind_ = ModulusKind::LogPower;
  m.param_ = q;
  m.t_cap_ = t_cap;
  return m;
}

DiniModulus DiniModulus::table(std::vector<double> t, std::vector<double> eps) {
  if (t.size() < 2 || t.size() != eps.size()) throw Error(ErrorCode::BadInput, "modulus table needs >= 2 samples");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(eps[i] > 0.0)) throw Error(ErrorCode::BadInput, "modulus table must be positive");
    if (i && (!(t[i] > t[i - 1]) || eps[i] < eps[i - 1]))
      throw Error(ErrorCode::NonMonotone, "modulus table must increase");
  }
  DiniModulus m;
  m.kind_ = ModulusKind::Table;
  m.t_cap_ = t.back();
  m.table_t_ = std::move(t);
  m.table_eps_ = std::move(eps);
  return m;
}

DiniModulus DiniModulus::from_record(const nlohmann::json& rec) {
  try {
    const std::string kind = rec.at("kind").get<std::string>();
    if (kind == "power") return power(rec.at("a").get<double>(), rec.value("t_cap", 1.0));
    if (kind == "log_power") return log_power(rec.at("q").get<double>(), rec.value("t_cap", 0.5));
    if (kind == "table") {
      std::vector<double> t, e;
      for (const auto& row : rec.at("table")) {
        t.push_back(row.at(0).get<double>());
        e.push_back(row.at(1).get<double>());
      }
      return table(std::move(t), std::move(e));
    }
    throw Error(ErrorCode::ConfigParse, "unknown modulus kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigParse, std::string("modulus record: ") + e.what());
  }
}

nlohmann::json DiniModulus::to_record() const {
  switch (kind_) {
  case ModulusKind::Power: return {{"kind", "power"}, {"a", param_}, {"t_cap", t_cap_}};
  case ModulusKind::LogPower: return {{"kind", "log_power"}, {"q", param_}, {"t_cap", t_cap_}};
  case ModulusKind::Table: {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < table_t_.size(); ++i) rows.push_back({table_t_[i], table_eps_[i]});
    return {{"kind", "table"}, {"table", rows}};
  }
  }
  return {};
}

double DiniModulus::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  switch (kind_) {
  case ModulusKind::Power: return std::pow(t, param_);
  case ModulusKind::LogPower:
    if (t >= 1.0) throw Error(ErrorCode::OutOfRange, "log-power modulus defined only for t < 1");
    return std::pow(std::log(1.0 / t), -param_);
  case ModulusKind::Table: {
    if (t >= table_t_.back()) return table_eps_.back();
    if (t <= table_t_.front()) {
      // power-law extrapolation through the first two samples
      const double slope = std::log(table_eps_[1] / table_eps_[0]) / std::log(table_t_[1] / table_t_[0]);
      return table_eps_[0] * std::pow(t / table_t_[0], slope);
    }
    std::vector<double> lt(table_t_.size()), le(table_t_.size());
    for (std::size_t i = 0; i < lt.size(); ++i) {
      lt[i] = std::log(table_t_[i]);
      le[i] = std::log(table_eps_[i]);
    }
    return std::exp(numerics::interp_linear(lt, le, std::log(t)));
  }
  }
  return 0.0;
}

nlohmann::json DiniReport::to_json() const {
  return {{"integral", integral},   {"converges", converges},   {"convex_dini", convex_dini},
          {"levels", levels},       {"tail_ratio", tail_ratio}, {"tail_exponent", tail_exponent}};
}

DiniReport dini_report(const DiniModulus& eps, double t1) {
  if (!(t1 > 0.0) || t1 > eps.t_cap() * (1 + 1e-12))
    throw Error(ErrorCode::OutOfRange, "t1 must lie in (0, t_cap]");
  constexpr int kMaxLevels = 1000;
  if (eps.kind() == ModulusKind::Table && eps.table_min() > std::ldexp(t1, -20))
    throw Error(ErrorCode::TableTooCoarse, "modulus table must reach below t1 * 2^-20");

  DiniReport rep;
  // Piece k covers [t1 2^{-k-1}, t1 2^{-k}]; in x = log t the integrand is eps(e^x).
  std::vector<double> pieces;
  double sum = 0.0;
  const double x1 = std::log(t1);
  const double ln2 = std::log(2.0);
  bool negligible = false;
  for (int k = 0; k < kMaxLevels; ++k) {
    const double b = x1 - k * ln2, a = b - ln2;
    const double piece = numerics::integrate([&](double x) { return eps(std::exp(x)); }, a, b, 1e-15);
    pieces.push_back(piece);
    sum += piece;
    if (piece <= 1e-17 * sum) {
      negligible = true;
      break;
    }
  }
  rep.levels = static_cast<int>(pieces.size());
  if (negligible) {
    rep.converges = true;
    rep.integral = sum;
  } else {
    const int K = rep.levels - 1, J = K - 100;
    rep.tail_ratio = std::pow(pieces[K] / pieces[J], 1.0 / (K - J));
    // Pieces decaying like k^-q: exponent from the last hundred levels.
    rep.tail_exponent = std::log(pieces[J] / pieces[K]) / std::log((K + 1.0) / (J + 1.0));
    if (rep.tail_ratio < 0.98) {
      rep.converges = true;
      rep.integral = sum + pieces[K] * rep.tail_ratio / (1.0 - rep.tail_ratio);
    } else if (rep.tail_exponent > 1.05) {
      rep.converges = true;
      rep.integral = sum + pieces[K] * (K + 1.0) / (rep.tail_exponent - 1.0);
    } else {
      rep.converges = false;
      rep.integral = std::numeric_limits<double>::infinity();
    }
  }

  // t eps(t) convex: divided differences non-decreasing on a log grid.
  const auto ts = numerics::log_space(t1 * 1e-8, t1, 240);
  rep.convex_dini = rep.converges;
  double prev_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double s = (ts[i + 1] * eps(ts[i + 1]) - ts[i] * eps(ts[i])) / (ts[i + 1] - ts[i]);
    if (s < prev_slope - 1e-9 * std::abs(prev_slope)) rep.convex_dini = false;
    prev_slope = s;
  }
  return rep;
}

double dini_integral(const DiniModulus& eps, double t1) {
  const DiniReport rep = dini_report(eps, t1);
  if (!rep.converges) throw Error(ErrorCode::NotIntegrable, "modulus fails the Dini test");
  return rep.integral;
}

// ---------------------------------------------------------------------------
// ConvexPolygon

ConvexPolygon::ConvexPolygon(std::vector<Point> vertices, Point center)
    : vertices_(std::move(vertices)), center_(center) {
  if (vertices_.size() < 3) throw Error(ErrorCode::BadInput, "polygon needs >= 3 vertices");
  std::sort(vertices_.begin(), vertices_.end(), [&](Point a, Point b) {
    return std::atan2(a.y - center_.y, a.x - center_.x) < std::atan2(b.y - center_.y, b.x - center_.x);
  });
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point e1 = vertices_[(i + 1) % n] - vertices_[i];
    const Point e2 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    if (cross(e1, e2) < -1e-12 * norm(e1) * norm(e2))
      throw Error(ErrorCode::BadInput, "polygon is not convex at vertex " + std::to_string(i) + " (" + format_double(vertices_[(i + 1) % n].x) + ", " + format_double(vertices_[(i + 1) % n].y) + ") cross " + format_double(cross(e1, e2) / (norm(e1) * norm(e2))));
  }
  angles_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    angles_[i] = std::atan2(vertices_[i].y - center_.y, vertices_[i].x - center_.x);
}

std::size_t ConvexPolygon::sector(Point p) const {
  const double a = std::atan2(p.y - center_.y, p.x - center_.x);
  auto it = std::upper_bound(angles_.begin(), angles_.end(), a);
  if (it == angles_.begin()) return angles_.size() - 1;
  return static_cast<std::size_t>(it - angles_.begin()) - 1;
}

bool ConvexPolygon::contains(Point p) const {
  const std::size_t k = sector(p);
  const Point a = vertices_[k], b = vertices_[(k + 1) % vertices_.size()];
  return cross(b - a, p - a) > 0.0;
}

double ConvexPolygon::signed_distance(Point p) const {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = vertices_[i], b = vertices_[(i + 1) % n];
    const Point ab = b - a;
    const double s = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
    best = std::min(best, norm(p - (a + s * ab)));
  }
  return contains(p) ? -best : best;
}

ConvexPolygon ConvexPolygon::reflected() const {
  std::vector<Point> v;
  v.reserve(vertices_.size());
  for (Point p : vertices_) v.push_back({-p.x, -p.y});
  return ConvexPolygon(std::move(v), {-center_.x, -center_.y});
}

// ---------------------------------------------------------------------------
// ConvexDomain

ConvexDomain ConvexDomain::disk(Point center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::BadRadii, "disk radius must be positive");
  ConvexDomain d;
  d.kind_ = DomainKind::Disk;
  d.center_ = center;
  d.radius_ = radius;
  return d;
}

ConvexDomain ConvexDomain::polygon(std::vector<Point> vertices) {
  Point c{0, 0};
  for (Point p : vertices) c = c + p;
  c = (1.0 / vertices.size()) * c;
  ConvexDomain d;
  d.kind_ = DomainKind::Polygon;
  d.poly_ = std::make_shared<const ConvexPolygon>(vertices, c);
  d.center_ = c;
  nlohmann::json vs = nlohmann::json::array();
  for (Point p : d.poly_->vertices()) vs.push_back({p.x, p.y});
  d.params_ = {{"vertices", vs}};
  return d;
}

bool ConvexDomain::contains(Point p) const {
  if (kind_ == DomainKind::Disk) return norm(p - center_) < radius_;
  return poly_->contains(p);
}

double ConvexDomain::signed_distance(Point p) const {
  if (kind_ == DomainKind::Disk) return norm(p - center_) - radius_;
  return poly_->signed_distance(p);
}

ConvexDomain ConvexDomain::reflected() const {
  ConvexDomain d = *this;
  d.center_ = {-center_.x, -center_.y};
  if (poly_) {
    d.poly_ = std::make_shared<const ConvexPolygon>(poly_->reflected());
    d.params_["reflected"] = !params_.value("reflected", false);
  }
  return d;
}

BoundingBox ConvexDomain::bbox() const {
  if (kind_ == DomainKind::Disk)
    return {center_.x - radius_, center_.x + radius_, center_.y - radius_, center_.y + radius_};
  BoundingBox b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Point p : poly_->vertices()) {
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  return b;
}

std::vector<Point> ConvexDomain::boundary_samples(int n) const {
  if (kind_ == DomainKind::Disk) {
    std::vector<Point> out(n);
    for (int k = 0; k < n; ++k) {
      const double a = 2 * kPi * k / n;
      out[k] = {center_.x + radius_ * std::cos(a), center_.y + radius_ * std::sin(a)};
    }
    return out;
  }
  return poly_->vertices();
}

nlohmann::json ConvexDomain::descriptor() const {
  switch (kind_) {
  case DomainKind::Disk: return {{"kind", "disk"}, {"center", {center_.x, center_.y}}, {"radius", radius_}};
  case DomainKind::DiniCap: {
    nlohmann::json j = params_;
    j["kind"] = "dini_cap";
    return j;
  }
  case DomainKind::Polygon: {
    nlohmann::json j = params_;
    j["kind"] = "polygon";
    return j;
  }
  }
  return {};
}

namespace {

double angle_about(Point c, Point p) { return std::atan2(p.y - c.y, p.x - c.x); }

// Smallest signed angle from a to b.
double angle_diff(double a, double b) { return std::remainder(b - a, 2 * kPi); }

// Rolls a circle of radius rho into the corner where the cap curve y = psi(x)
// meets the boundary circle |p - c| = r near `junction`, replacing the
// vertices in between by the arc.
void fillet_junction(std::vector<Point>& v, Point c, double r, Point junction, double rho,
                     const std::function<double(double)>& psi) {
  auto curve_distance = [&](Point q, double& x_best) {
    const double lo = q.x - 3 * rho, hi = q.x + 3 * rho;
    auto d2 = [&](double x) { return (x - q.x) * (x - q.x) + (psi(x) - q.y) * (psi(x) - q.y); };
    // coarse scan then golden-section refinement
    constexpr int kScan = 64;
    int best = 0;
    for (int k = 1; k <= kScan; ++k)
      if (d2(lo + (hi - lo) * k / kScan) < d2(lo + (hi - lo) * best / kScan)) best = k;
    double a = lo + (hi - lo) * std::max(best - 1, 0) / kScan, b = lo + (hi - lo) * std::min(best + 1, kScan) / kScan;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
      const double m1 = b - gr * (b - a), m2 = a + gr * (b - a);
      (d2(m1) < d2(m2) ? b : a) = (d2(m1) < d2(m2) ? m2 : m1);
    }
    x_best = 0.5 * (a + b);
    return std::sqrt(d2(x_best));
  };
  const double phi_j = angle_about(c, junction);
  auto centre = [&](double phi) { return c + (r - rho) * Point{std::cos(phi), std::sin(phi)}; };
  double xb = 0.0;
  auto excess = [&](double phi) {
    const Point q = centre(phi);
    const double d = curve_distance(q, xb);
    return q.y > psi(q.x) ? d - rho : -d - rho;
  };
  // move away from the curve side of the junction
  const double probe = rho / r;
  const double sigma = excess(phi_j + probe) > excess(phi_j - probe) ? 1.0 : -1.0;
  double t_hi = probe;
  while (excess(phi_j + sigma * t_hi) < 0.0) {
    t_hi *= 2.0;
    if (t_hi > 1.0) return;
  }
  double t_lo = 0.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    (excess(phi_j + sigma * mid) < 0.0 ? t_lo : t_hi) = mid;
  }
  const double phi = phi_j + sigma * t_hi;
  const Point C = centre(phi);
  curve_distance(C, xb);
  const Point T1 = c + r * Point{std::cos(phi), std::sin(phi)};
  const Point T2{xb, psi(xb)};

  const double a1 = angle_about(c, T1), a2 = angle_about(c, T2);
  const double span = angle_diff(a1, a2);
  std::vector<Point> out;
  out.reserve(v.size() + 16);
  for (Point p : v) {
    const double t = angle_diff(a1, angle_about(c, p));
    if (span > 0 ? (t > -1e-12 && t < span + 1e-12) : (t < 1e-12 && t > span - 1e-12)) continue;
    out.push_back(p);
  }
  const double b1 = angle_about(C, T1);
  const double sweep = angle_diff(b1, angle_about(C, T2));
  constexpr int kArc = 16;
  for (int k = 0; k <= kArc; ++k) {
    const double t = b1 + sweep * k / kArc;
    out.push_back({C.x + rho * std::cos(t), C.y + rho * std::sin(t)});
  }
  v = std::move(out);
}

} // namespace

ConvexDomain build_dini_cap(double r_D, const DiniModulus& eps, double fillet_radius) {
  if (!(r_D > 0.0)) throw Error(ErrorCode::BadInput, "r_D must be positive");
  const double t1 = std::min(r_D, eps.t_cap());
  const DiniReport rep = dini_report(eps, t1);
  if (!rep.convex_dini) throw Error(ErrorCode::NotConvexDini, "modulus is not convex-Dini");

  const Point c{0.0, r_D};
  auto psi = [&](double x) { return 2.0 * std::abs(x) * eps(std::abs(x)); };
  auto in_cap = [&](Point p) { return norm(p - c) < r_D && p.y > psi(p.x); };

  constexpr int kRays = 2048;
  std::vector<Point> verts;
  std::vector<bool> on_circle;
  verts.reserve(kRays);
  for (int k = 0; k < kRays; ++k) {
    const double ang = -0.5 * kPi + 2 * kPi * k / kRays;
    const Point d{std::cos(ang), std::sin(ang)};
    if (k == 0) {
      verts.push_back({0.0, 0.0});
      on_circle.push_back(false);
      continue;
    }
    double lo = 0.0, hi = r_D;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (in_cap(c + mid * d) ? lo : hi) = mid;
    }
    const Point p = c + lo * d;
    verts.push_back(p);
    on_circle.push_back(std::abs(norm(p - c) - r_D) < 1e-9 * r_D);
  }

  // the contact point belongs to whichever piece surrounds it
  on_circle[0] = on_circle[1];

  if (fillet_radius > 0.0) {
    std::vector<Point> junctions;
    for (int k = 0; k < kRays; ++k)
      if (on_circle[k] != on_circle[(k + 1) % kRays]) junctions.push_back(verts[k]);
    for (Point j : junctions) {
      // tangential contact (e.g. eps(t) = t at the origin) leaves no corner
      const double dx = 1e-6 * r_D;
      const Point curve_dir{1.0, (psi(j.x + dx) - psi(j.x - dx)) / (2 * dx)};
      const Point radial = j - c;
      const double sin_angle = std::abs(dot(curve_dir, radial)) / (norm(curve_dir) * norm(radial));
      if (sin_angle < 1e-3) continue;
      fillet_junction(verts, c, r_D, j, fillet_radius, psi);
    }
  }

  ConvexDomain K;
  K.kind_ = DomainKind::DiniCap;
  K.center_ = c;
  K.radius_ = r_D;
  K.poly_ = std::make_shared<const ConvexPolygon>(std::move(verts), c);
  K.params_ = {{"r_D", r_D}, {"modulus", eps.to_record()}, {"fillet", fillet_radius}, {"reflected", false}};

  const double depth = -K.signed_distance(c);
  if (!(depth > 0.75 * r_D))
    throw Error(ErrorCode::ContainmentViolated,
                "B_{3r/4}((0, r)) not inside K: dist = " + format_double(depth));
  return K;
}

Raster rasterize(const ConvexDomain& dom, const Grid& grid) {
  const BoundingBox b = dom.bbox();
  const double tol = 1e-9 * grid.h;
  if (b.xmin < grid.x0 - tol || b.xmax > grid.x1() + tol || b.ymin < grid.y0 - tol || b.ymax > grid.y1() + tol)
    throw Error(ErrorCode::GridTooSmall, "domain extends beyond the grid");
  Raster r;
  r.inside.resize(grid.size());
  r.sdf.resize(grid.size());
  for (int idx = 0; idx < static_cast<int>(grid.size()); ++idx) {
    const Point p = grid.center(idx);
    r.sdf[idx] = dom.signed_distance(p);
    r.inside[idx] = dom.contains(p) ? 1 : 0;
  }
  return r;
}

bool midpoint_convex(const Grid& grid, const std::vector<std::uint8_t>& member, int pairs, std::uint64_t seed) {
  std::vector<int> cells;
  for (int idx = 0; idx < static_cast<int>(member.size()); ++idx)
    if (member[idx]) cells.push_back(idx);
  if (cells.size() < 2) return true;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  for (int k = 0; k < pairs; ++k) {
    const int a = cells[pick(rng)], b = cells[pick(rng)];
    const double mi = 0.5 * (grid.col(a) + grid.col(b));
    const double mj = 0.5 * (grid.row(a) + grid.row(b));
    bool found = false;
    for (int j = static_cast<int>(std::floor(mj)) - 1; j <= static_cast<int>(std::ceil(mj)) + 1 && !found; ++j)
      for (int i = static_cast<int>(std::floor(mi)) - 1; i <= static_cast<int>(std::ceil(mi)) + 1 && !found; ++i)
        if (i >= 0 && j >= 0 && i < grid.nx && j < grid.ny && member[grid.index(i, j)]) found = true;
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// ConvexRing

ConvexRing::ConvexRing(ConvexDomain inner, ConvexDomain outer, const Grid& grid)
    : inner_(std::move(inner)), outer_(std::move(outer)) {
  const BoundingBox b = outer_.bbox();
  const double tol = 1e-9 * grid.h;
  if (b.xmin < grid.x0 - tol || b.xmax > grid.x1() + tol || b.ymin < grid.y0 - tol || b.ymax > grid.y1() + tol)
    throw Error(ErrorCode::GridTooSmall, "outer domain extends beyond the grid");

  gap_ = std::numeric_limits<double>::infinity();
  for (Point s : inner_.boundary_samples()) gap_ = std::min(gap_, -outer_.signed_distance(s));
  if (!(gap_ > 0.0)) throw Error(ErrorCode::GapTooSmall, "inner domain not inside outer domain");
  if (gap_ < 2.0 * grid.h)
    throw Error(ErrorCode::GapTooSmall,
                "gap " + format_double(gap_) + " below two cells (h = " + format_double(grid.h) + ")");

  const std::size_t n = grid.size();
  std::vector<std::uint8_t> in1(n), in2(n);
  for (int idx = 0; idx < static_cast<int>(n); ++idx) {
    const Point p = grid.center(idx);
    in1[idx] = inner_.contains(p);
    in2[idx] = outer_.contains(p);
  }
  std::vector<CellType> types(n, CellType::Outside);
  for (int j = 1; j + 1 < grid.ny; ++j)
    for (int i = 1; i + 1 < grid.nx; ++i) {
      const int idx = grid.index(i, j);
      if (in2[idx] && !in1[idx]) types[idx] = CellType::Interior;
    }
  const int offs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int idx = grid.index(i, j);
      if (types[idx] == CellType::Interior) continue;
      for (const auto& o : offs) {
        const int ii = i + o[0], jj = j + o[1];
        if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny) continue;
        if (types[grid.index(ii, jj)] == CellType::Interior) {
          types[idx] = in1[idx] ? CellType::InnerBoundary : CellType::OuterBoundary;
          break;
        }
      }
    }

  constexpr double kMinTheta = 1e-4;
  std::vector<std::array<double, 4>> theta(n, {1.0, 1.0, 1.0, 1.0});
  for (int idx = 0; idx < static_cast<int>(n); ++idx) {
    if (types[idx] != CellType::Interior) continue;
    const int i = grid.col(idx), j = grid.row(idx);
    const Point p0 = grid.center(idx);
    for (int d = 0; d < 4; ++d) {
      const int nb = grid.index(i + offs[d][0], j + offs[d][1]);
      if (types[nb] == CellType::Interior) continue;
      const Point p1 = grid.center(nb);
      // inside(s) is true on the ring side of the crossing
      const bool inner_ghost = types[nb] == CellType::InnerBoundary;
      auto in_ring = [&](double s) {
        const Point q = p0 + s * (p1 - p0);
        return inner_ghost ? !inner_.contains(q) : outer_.contains(q);
      };
      if (in_ring(1.0)) continue;
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (in_ring(mid) ? lo : hi) = mid;
      }
      theta[idx][d] = std::max(0.5 * (lo + hi), kMinTheta);
    }
  }
  mesh_ = std::make_shared<const Mesh>(grid, std::move(types), std::move(theta));
}

nlohmann::json ConvexRing::descriptor() const {
  return {{"inner", inner_.descriptor()}, {"outer", outer_.descriptor()}, {"grid", grid().to_json()}, {"gap", gap_}};
}

RingPair make_rings(const ConvexDomain& K, double r_D, const Grid& grid) {
  ConvexRing inner_ring(ConvexDomain::disk({0.0, r_D}, 0.5 * r_D), K, grid);
  ConvexRing outer_ring(K.reflected(), ConvexDomain::disk({0.0, -r_D}, 3.0 * r_D), grid);
  return {std::move(inner_ring), std::move(outer_ring)};
}

ConvexRing make_annulus(double R1, double R2, const Grid& grid) {
  if (!(R1 > 0.0) || !(R2 > R1)) throw Error(ErrorCode::BadRadii, "annulus needs 0 < R1 < R2");
  return ConvexRing(ConvexDomain::disk({0, 0}, R1), ConvexDomain::disk({0, 0}, R2), grid);
}

} // namespace hlap
