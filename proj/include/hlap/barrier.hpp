#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlap/diagnostics.hpp"
#include "hlap/geometry.hpp"
#include "hlap/grid.hpp"
#include "hlap/orlicz.hpp"

namespace hlap {

enum class ZetaSource { FromModulus, FromField, Zero };

/// Integrable majorant zeta(w) of |grad w|^-5 Delta_inf w on (0, 1), with its
/// primitive Z(w) = \int_0^w zeta.
class ZetaProfile {
public:
  ZetaSource source() const { return source_; }
  double operator()(double w) const;
  double cumulative(double w) const;
  double l1_mass() const { return l1_mass_; }
  /// Tabulated (w, zeta) pairs; for FromField these are the bin centres.
  const std::vector<double>& w_table() const { return w_; }
  const std::vector<double>& zeta_table() const { return zeta_; }
  nlohmann::json to_json() const;

  friend ZetaProfile zeta_from_modulus(const DiniModulus&, double, double, double);
  friend ZetaProfile zeta_from_field(const ScalarField&, const LevelDiagnostics&, int);
  friend ZetaProfile zeta_zero();

private:
  ZetaSource source_ = ZetaSource::Zero;
  std::vector<double> w_, zeta_, cum_;
  double l1_mass_ = 0.0;
  std::function<double(double)> value_, primitive_;
  nlohmann::json params_;
};

/// zeta(w) = c^-3 C_D eps(C m) / (c m), m = min(w, 1 - w). Throws
/// NotIntegrable when eps fails the Dini test.
ZetaProfile zeta_from_modulus(const DiniModulus& eps, double c, double C, double C_D);

/// Binned envelope of |grad w|^-5 |Delta_inf w| over cells at least two
/// cells from the boundary: each bin takes the largest value of itself and
/// its two neighbours, values are linear between bin centres and constant
/// beyond the last resolved bins.
ZetaProfile zeta_from_field(const ScalarField& w, const LevelDiagnostics& diag, int bins = 64);

ZetaProfile zeta_zero();

/// f'(w) = beta^-1 g(F'(beta m) exp((beta/alpha) Z(w))), tabulated on [0, 1]
/// together with f = \int f' and f'' = zeta / (alpha R(beta f')).
struct BarrierProfile {
  double m = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double f1 = 0.0;
  std::vector<double> w, f, f_prime, f_second;

  double f_at(double x) const;
  double f_prime_at(double x) const;
  double f_second_at(double x) const;
  /// f(w) at interior and ghost cells.
  ScalarField compose(const ScalarField& w_field) const;
  nlohmann::json header() const;
};

BarrierProfile build_barrier(const OrliczFunction& of, const ZetaProfile& zeta, double m, double alpha,
                             double beta);

enum class TargetSide { Below, Above };

/// Bisection on m until f(1) is within 1e-7 target of the target, on the
/// requested side of it (a sub-solution must not exceed its boundary data).
BarrierProfile tune_m(const OrliczFunction& of, const ZetaProfile& zeta, double alpha, double beta,
                      double target, TargetSide side = TargetSide::Below);

/// (w, f) table with a commented parameter header.
void write_barrier_csv(const std::filesystem::path& path, const BarrierProfile& profile);

struct CheckSummary {
  std::string name;
  bool pass = true;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  int checked = 0;
  int violations = 0;
  std::vector<int> violating_cells;  ///< first few, grid indices
  /// Worst margin over the boundary-adjacent cells left out of the verdict.
  double worst_margin_excluded = 0.0;

  nlohmann::json to_json() const;
};

struct SubsolutionReport {
  CheckSummary residual;  ///< (i) Delta_H f(w) >= -tol
  CheckSummary anhavf;    ///< (ii) f'' R(f' |grad w|) >= |grad w|^-5 Delta_inf w
  CheckSummary zeta;      ///< (iii) f'' R(f' |grad w|) >= zeta(w)
  bool pass = true;
  int excluded_cells = 0;
  double flux_scale = 0.0;

  nlohmann::json to_json() const;
};

/// Pointwise sub-solution checks on interior cells at least two cells from
/// the boundary. Tolerances: 1e-3 of the median flux F'(|grad f(w)|) for
/// (i), 1e-3 of the median right-hand side for (ii) and (iii).
SubsolutionReport verify_subsolution(const ScalarField& w, const LevelDiagnostics& diag,
                                     const BarrierProfile& profile, const ZetaProfile& zeta,
                                     const OrliczFunction& of);

/// F''(t) f'' |grad w|^2 + H(t) f' Delta w + (F''(t) - H(t)) f' Delta_inf w / |grad w|^2,
/// t = f'|grad w|: the chain-rule expansion of Delta_H f(w) from the level
/// diagnostics.
ScalarField expanded_operator(const ScalarField& w, const LevelDiagnostics& diag, const BarrierProfile& profile,
                              const OrliczFunction& of);

} // namespace hlap
