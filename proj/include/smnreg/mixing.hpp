#pragma once

#include "smnreg/rng.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Mixing densities for scale-mixture-of-normals errors.
//
// A mixing density h is the density of the positive latent scale u.  The
// error density of the regression model is the average of N(0, I_d/u) over
// u ~ h, so h determines the tail behavior of the errors (Gamma(nu/2,nu/2)
// mixing gives multivariate Student-t errors with nu degrees of freedom).
//
// The behavior of h near u = 0 controls the heaviest error tails and drives
// the geometric-ergodicity classification in the ergodicity module.

namespace smnreg {

struct DivergentIntegral : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Classification of a mixing density near the origin:
//  * zero near the origin:       h(u) = 0 on (0, delta) for some delta > 0
//  * polynomial with power c:    h(u)/u^c has a finite positive limit, c > -1
//  * faster than polynomial:     h(u)/u^c eventually increasing for every c
struct OriginBehavior {
  enum class Kind { ZeroNearOrigin, PolynomialAtOrigin, FasterThanPolynomial };

  Kind kind = Kind::PolynomialAtOrigin;
  double delta = 0.0;  // ZeroNearOrigin only
  double c = 0.0;      // PolynomialAtOrigin only

  static OriginBehavior zero_near_origin(double delta);
  static OriginBehavior polynomial(double c);
  static OriginBehavior faster_than_polynomial();
};

std::string to_string(const OriginBehavior& origin);

// Tri-state outcome for checks that may be inconclusive on black-box input.
enum class CheckOutcome { Yes, No, Unknown };

std::string to_string(CheckOutcome outcome);

// A mixing density bound to the regression dimension d.
//
// Families:
//  * GammaNuHalf: Gamma(nu/2, nu/2); polynomial at the origin with power
//    nu/2 - 1; all moment integrals in closed form.
//  * DegenerateOne: point mass at u = 1 (test family; collapses the model
//    to ordinary multivariate normal errors and makes the sampler an exact
//    conjugate-posterior sampler).
//  * UserDefined: black-box density evaluator plus a declared origin tag.
//    The evaluator may be omitted, in which case only tag-based analysis is
//    available.  Optional hooks: a sampler for h itself (used as rejection
//    proposal when drawing from the tilted family at s > 0) and a direct
//    sampler for psi(.;s) (required at s = 0, where no bounded rejection
//    envelope exists).
class MixingDensity {
 public:
  enum class Family { GammaNuHalf, DegenerateOne, UserDefined };

  using DensityFn = std::function<double(double)>;
  using SamplerFn = std::function<double(rng::Stream&)>;
  using PsiSamplerFn = std::function<double(rng::Stream&, double)>;

  static MixingDensity gamma_nu_half(double nu, int dim);
  static MixingDensity degenerate_one(int dim);
  static MixingDensity user_defined(DensityFn pdf, OriginBehavior origin, int dim,
                                    SamplerFn h_sampler = nullptr,
                                    PsiSamplerFn psi_sampler = nullptr);

  Family family() const { return family_; }
  int dim() const { return dim_; }
  double nu() const;  // GammaNuHalf only

  bool has_pdf() const { return static_cast<bool>(pdf_); }
  double pdf(double u) const;

  // Origin tag.  DegenerateOne reports zero-near-origin with delta = 1
  // (the point mass at 1 puts no mass near 0).
  OriginBehavior origin() const { return origin_; }

  bool has_h_sampler() const;
  bool has_psi_sampler() const { return static_cast<bool>(psi_sampler_); }
  double sample_h(rng::Stream& stream) const;
  double sample_psi_hook(rng::Stream& stream, double s) const;

  std::string name() const { return name_; }

 private:
  MixingDensity() = default;

  Family family_ = Family::GammaNuHalf;
  int dim_ = 1;
  double nu_ = 0.0;
  DensityFn pdf_;
  SamplerFn h_sampler_;
  PsiSamplerFn psi_sampler_;
  OriginBehavior origin_;
  std::string name_;
};

// The tilted latent family psi(u;s) = c(s) u^{d/2} exp(-s u / 2) h(u) with
// normalizer c(s) = 1 / integral_0^inf u^{d/2} exp(-s u / 2) h(u) du.
// c(s) is nondecreasing in s.
struct PsiDensity {
  MixingDensity mixing;
  double s = 0.0;
  double normalizer = 0.0;  // c(s)
};

// integral_0^inf u^{k/2} exp(-s u / 2) h(u) du.
// Closed form for the Gamma family, adaptive quadrature otherwise
// (relative error target 1e-8).  Throws DivergentIntegral when the
// integral provably diverges; throws std::runtime_error when tail
// integrability of a black-box density cannot be established.
double moment_integral(const MixingDensity& mixing, int k, double s);

// Same integral, forced through quadrature (requires a density evaluator).
// Kept as an independent numeric route for cross-checking closed forms.
double moment_integral_numeric(const MixingDensity& mixing, int k, double s);

// integral_1^inf u^{d/2} h(u) du < infinity?  Analytic for the known
// families; a log-log tail-slope probe over u in [1e2, 1e6] for black-box
// densities, answering Unknown when the probe is inconclusive.
CheckOutcome check_condition_m(const MixingDensity& mixing);

PsiDensity make_psi(const MixingDensity& mixing, double s);

// One draw from psi(.;s).  Gamma mixing: exact conjugate draw from
// Gamma((nu+d)/2, (s+nu)/2).  Degenerate: returns 1.  User-defined: the
// user's direct psi sampler when provided; otherwise, for s > 0, rejection
// against proposal h with envelope sup_u u^{d/2} e^{-su/2} = (d/s)^{d/2} e^{-d/2}.
double draw_latent(const MixingDensity& mixing, double s, rng::Stream& stream);

double sample_psi(const PsiDensity& psi, rng::Stream& stream);

// Residuals of the affine bound on the moment-integral ratio
// R(s) = I_{d-2}(s) / I_d(s):  residual(s) = R(s) - lambda * s.
// max_residual is the grid estimate of the smallest admissible intercept L
// such that R(s) <= lambda s + L on the grid.
struct RatioBoundReport {
  double lambda = 0.0;
  std::vector<double> s_grid;
  std::vector<double> residuals;
  double max_residual = 0.0;
};

RatioBoundReport ratio_bound_check(const MixingDensity& mixing, double lambda,
                                   const std::vector<double>& s_grid);

// The dimension-reduction transform g -> g* with g*(u) proportional to
// u^{(d-1)/2} g(u), rebound to dimension 1.  Satisfies
//   I^{g*}_{-1}(s) / I^{g*}_{1}(s) = I^{g}_{d-2}(s) / I^{g}_{d}(s).
// Origin tags map: polynomial c -> (2c+d-1)/2; zero and faster-than-
// polynomial tags are preserved.
MixingDensity star_transform(const MixingDensity& mixing);

// Numeric consistency probe of a declared polynomial origin tag: evaluates
// h(u)/u^c at u in {1e-2, 1e-4, 1e-6} and reports whether the ratios
// stabilize to a finite positive value.  A sanity check, not a proof.
struct OriginProbeReport {
  bool applicable = false;
  double declared_c = 0.0;
  std::vector<double> u;
  std::vector<double> ratios;
  bool consistent = false;
  double limit_estimate = 0.0;
  std::string note;
};

OriginProbeReport classify_origin_numeric(const MixingDensity& mixing);

}  // namespace smnreg
