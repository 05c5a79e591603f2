#include "smnreg/mixing.hpp"

#include "smnreg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace smnreg {

namespace {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

double gamma_log_pdf(double nu, double u) {
  const double half_nu = 0.5 * nu;
  return half_nu * std::log(half_nu) - std::lgamma(half_nu) +
         (half_nu - 1.0) * std::log(u) - half_nu * u;
}

// Log of I_k(s) for Gamma(nu/2, nu/2) mixing:
//   I_k(s) = Gamma((nu+k)/2) (nu/2)^{nu/2} / (Gamma(nu/2) ((s+nu)/2)^{(nu+k)/2})
double gamma_log_moment(double nu, int k, double s) {
  const double half_nu = 0.5 * nu;
  const double half_nuk = 0.5 * (nu + k);
  return std::lgamma(half_nuk) - std::lgamma(half_nu) +
         half_nu * std::log(half_nu) - half_nuk * std::log(0.5 * (s + nu));
}

struct TailProbe {
  CheckOutcome moment_finite = CheckOutcome::Unknown;
  std::string note;
};

// Probe whether integral_1^inf u^{k/2} h(u) du converges for a black-box h:
// log-log slope fit over u in [1e2, 1e6].  A stable slope alpha means
// h ~ u^alpha, so the moment is finite iff k/2 + alpha < -1.  When the fit
// is poor but every local slope already decays faster than the critical
// power, the moment is finite; otherwise the probe is inconclusive.
TailProbe probe_tail_moment(const MixingDensity::DensityFn& pdf, double k) {
  constexpr int kPoints = 25;
  std::vector<double> log_u(kPoints), h(kPoints);
  for (int j = 0; j < kPoints; ++j) {
    const double e = 2.0 + 4.0 * j / (kPoints - 1);
    const double u = std::pow(10.0, e);
    log_u[j] = std::log(u);
    h[j] = pdf(u);
    if (!(h[j] >= 0.0) || !std::isfinite(h[j]))
      throw std::runtime_error("mixing density evaluator returned an invalid value at u = " +
                               format_double(u));
  }

  int first_zero = kPoints;
  for (int j = 0; j < kPoints; ++j) {
    if (h[j] == 0.0) {
      first_zero = j;
      break;
    }
  }
  if (first_zero < kPoints) {
    for (int j = first_zero; j < kPoints; ++j)
      if (h[j] != 0.0)
        return {CheckOutcome::Unknown, "density vanishes and reappears along the probe grid"};
    return {CheckOutcome::Yes, "density vanishes beyond the probe grid"};
  }

  std::vector<double> log_h(kPoints);
  for (int j = 0; j < kPoints; ++j) log_h[j] = std::log(h[j]);

  double mean_t = 0.0, mean_y = 0.0;
  for (int j = 0; j < kPoints; ++j) {
    mean_t += log_u[j];
    mean_y += log_h[j];
  }
  mean_t /= kPoints;
  mean_y /= kPoints;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (int j = 0; j < kPoints; ++j) {
    stt += (log_u[j] - mean_t) * (log_u[j] - mean_t);
    sty += (log_u[j] - mean_t) * (log_h[j] - mean_y);
    syy += (log_h[j] - mean_y) * (log_h[j] - mean_y);
  }
  const double slope = sty / stt;
  const double r2 = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;

  if (syy == 0.0) {
    // Flat tail: h constant over the probe range, moment diverges for k >= -2.
    return {k / 2.0 < -1.0 ? CheckOutcome::Yes : CheckOutcome::No,
            "flat tail over the probe grid"};
  }
  if (r2 >= 0.9999) {
    const bool finite = k / 2.0 + slope < -1.0 - 1e-9;
    return {finite ? CheckOutcome::Yes : CheckOutcome::No,
            "power-law tail, slope " + format_double(slope)};
  }

  bool all_fast = true;
  for (int j = 0; j + 1 < kPoints; ++j) {
    const double local = (log_h[j + 1] - log_h[j]) / (log_u[j + 1] - log_u[j]);
    if (!(local < -(k / 2.0 + 1.0))) {
      all_fast = false;
      break;
    }
  }
  if (all_fast)
    return {CheckOutcome::Yes, "tail decays faster than the critical power everywhere on the probe grid"};
  return {CheckOutcome::Unknown, "tail behavior not resolved by the probe grid"};
}

}  // namespace

OriginBehavior OriginBehavior::zero_near_origin(double delta) {
  if (!(delta > 0.0))
    throw std::invalid_argument("zero-near-origin tag requires delta > 0");
  OriginBehavior o;
  o.kind = Kind::ZeroNearOrigin;
  o.delta = delta;
  return o;
}

OriginBehavior OriginBehavior::polynomial(double c) {
  if (!(c > -1.0))
    throw std::invalid_argument("polynomial origin tag requires c > -1");
  OriginBehavior o;
  o.kind = Kind::PolynomialAtOrigin;
  o.c = c;
  return o;
}

OriginBehavior OriginBehavior::faster_than_polynomial() {
  OriginBehavior o;
  o.kind = Kind::FasterThanPolynomial;
  return o;
}

std::string to_string(const OriginBehavior& origin) {
  switch (origin.kind) {
    case OriginBehavior::Kind::ZeroNearOrigin:
      return "zero near origin (delta = " + format_double(origin.delta) + ")";
    case OriginBehavior::Kind::PolynomialAtOrigin:
      return "polynomial at origin (c = " + format_double(origin.c) + ")";
    case OriginBehavior::Kind::FasterThanPolynomial:
      return "faster than polynomial at origin";
  }
  return "?";
}

std::string to_string(CheckOutcome outcome) {
  switch (outcome) {
    case CheckOutcome::Yes:
      return "yes";
    case CheckOutcome::No:
      return "no";
    case CheckOutcome::Unknown:
      return "unknown";
  }
  return "?";
}

MixingDensity MixingDensity::gamma_nu_half(double nu, int dim) {
  if (!(nu > 0.0)) throw std::invalid_argument("gamma mixing requires nu > 0");
  if (dim < 1) throw std::invalid_argument("mixing dimension must be >= 1");
  MixingDensity m;
  m.family_ = Family::GammaNuHalf;
  m.dim_ = dim;
  m.nu_ = nu;
  m.pdf_ = [nu](double u) { return u > 0.0 ? std::exp(gamma_log_pdf(nu, u)) : 0.0; };
  m.h_sampler_ = [nu](rng::Stream& stream) { return stream.gamma(0.5 * nu, 0.5 * nu); };
  m.origin_ = OriginBehavior::polynomial(0.5 * nu - 1.0);
  m.name_ = "gamma(" + format_double(nu) + ")";
  return m;
}

MixingDensity MixingDensity::degenerate_one(int dim) {
  if (dim < 1) throw std::invalid_argument("mixing dimension must be >= 1");
  MixingDensity m;
  m.family_ = Family::DegenerateOne;
  m.dim_ = dim;
  m.h_sampler_ = [](rng::Stream&) { return 1.0; };
  m.origin_ = OriginBehavior::zero_near_origin(1.0);
  m.name_ = "degenerate";
  return m;
}

MixingDensity MixingDensity::user_defined(DensityFn pdf, OriginBehavior origin, int dim,
                                          SamplerFn h_sampler, PsiSamplerFn psi_sampler) {
  if (dim < 1) throw std::invalid_argument("mixing dimension must be >= 1");
  MixingDensity m;
  m.family_ = Family::UserDefined;
  m.dim_ = dim;
  m.pdf_ = std::move(pdf);
  m.h_sampler_ = std::move(h_sampler);
  m.psi_sampler_ = std::move(psi_sampler);
  m.origin_ = origin;
  m.name_ = "user";
  return m;
}

double MixingDensity::nu() const {
  if (family_ != Family::GammaNuHalf)
    throw std::logic_error("nu() is only defined for gamma mixing");
  return nu_;
}

double MixingDensity::pdf(double u) const {
  if (!pdf_) throw std::runtime_error("mixing density has no evaluator");
  const double v = pdf_(u);
  if (!(v >= 0.0) || !std::isfinite(v))
    throw std::runtime_error("mixing density evaluator returned an invalid value at u = " +
                             format_double(u));
  return v;
}

bool MixingDensity::has_h_sampler() const { return static_cast<bool>(h_sampler_); }

double MixingDensity::sample_h(rng::Stream& stream) const {
  if (!h_sampler_) throw std::runtime_error("mixing density has no sampler");
  const double u = h_sampler_(stream);
  if (!(u > 0.0) || !std::isfinite(u))
    throw std::runtime_error("mixing sampler returned a non-positive value");
  return u;
}

double MixingDensity::sample_psi_hook(rng::Stream& stream, double s) const {
  const double u = psi_sampler_(stream, s);
  if (!(u > 0.0) || !std::isfinite(u))
    throw std::runtime_error("user psi sampler returned a non-positive value");
  return u;
}

double moment_integral_numeric(const MixingDensity& mixing, int k, double s) {
  if (!mixing.has_pdf())
    throw std::runtime_error("numeric moment integral requires a density evaluator");
  // Substitute u = v/(1+s): the exponential tilt then decays on an O(1)
  // scale regardless of s, which keeps the double-exponential rule from
  // stalling on the boundary layer at u ~ 1/s.
  const double half_k = 0.5 * k;
  const double scale = 1.0 + s;
  return integrate_positive_axis([&, half_k, s, scale](double v) {
    const double u = v / scale;
    return std::pow(u, half_k) * std::exp(-0.5 * s * u) * mixing.pdf(u) / scale;
  });
}

double moment_integral(const MixingDensity& mixing, int k, double s) {
  if (!(s >= 0.0) || !std::isfinite(s))
    throw std::invalid_argument("moment integral requires s >= 0");

  switch (mixing.family()) {
    case MixingDensity::Family::GammaNuHalf: {
      const double nu = mixing.nu();
      if (nu + k <= 0.0)
        throw DivergentIntegral("moment integral diverges at the origin for gamma mixing: nu + k = " +
                                format_double(nu + k) + " <= 0");
      return std::exp(gamma_log_moment(nu, k, s));
    }
    case MixingDensity::Family::DegenerateOne:
      // Point mass at u = 1.
      return std::exp(-0.5 * s);
    case MixingDensity::Family::UserDefined: {
      const OriginBehavior origin = mixing.origin();
      if (origin.kind == OriginBehavior::Kind::PolynomialAtOrigin &&
          !(origin.c + 0.5 * k > -1.0))
        throw DivergentIntegral("moment integral diverges at the origin: c + k/2 = " +
                                format_double(origin.c + 0.5 * k) + " <= -1");
      if (s == 0.0 && k > 0) {
        const TailProbe probe = probe_tail_moment(
            [&mixing](double u) { return mixing.pdf(u); }, static_cast<double>(k));
        if (probe.moment_finite == CheckOutcome::No)
          throw DivergentIntegral("moment integral diverges in the tail (" + probe.note + ")");
        if (probe.moment_finite == CheckOutcome::Unknown)
          throw std::runtime_error("tail integrability of the moment integral could not be established (" +
                                   probe.note + ")");
      }
      return moment_integral_numeric(mixing, k, s);
    }
  }
  throw std::logic_error("unreachable mixing family");
}

CheckOutcome check_condition_m(const MixingDensity& mixing) {
  switch (mixing.family()) {
    case MixingDensity::Family::GammaNuHalf:
      return CheckOutcome::Yes;  // all positive moments finite
    case MixingDensity::Family::DegenerateOne:
      return CheckOutcome::Yes;  // bounded support
    case MixingDensity::Family::UserDefined: {
      if (!mixing.has_pdf()) return CheckOutcome::Unknown;
      return probe_tail_moment([&mixing](double u) { return mixing.pdf(u); },
                               static_cast<double>(mixing.dim()))
          .moment_finite;
    }
  }
  throw std::logic_error("unreachable mixing family");
}

PsiDensity make_psi(const MixingDensity& mixing, double s) {
  if (!(s >= 0.0) || !std::isfinite(s))
    throw std::invalid_argument("psi density requires s >= 0");
  const double denom = moment_integral(mixing, mixing.dim(), s);
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw std::runtime_error("psi normalizer is not finite and positive");
  return PsiDensity{mixing, s, 1.0 / denom};
}

double draw_latent(const MixingDensity& mixing, double s, rng::Stream& stream) {
  if (!(s >= 0.0) || !std::isfinite(s))
    throw std::invalid_argument("psi draw requires s >= 0");
  const int d = mixing.dim();

  switch (mixing.family()) {
    case MixingDensity::Family::GammaNuHalf: {
      const double nu = mixing.nu();
      return stream.gamma(0.5 * (nu + d), 0.5 * (s + nu));
    }
    case MixingDensity::Family::DegenerateOne:
      return 1.0;
    case MixingDensity::Family::UserDefined: {
      if (mixing.has_psi_sampler()) return mixing.sample_psi_hook(stream, s);
      if (s == 0.0)
        throw std::runtime_error(
            "drawing from psi at s = 0 for a user mixing requires a user-supplied psi sampler "
            "(the rejection envelope is unbounded at s = 0)");
      if (!mixing.has_h_sampler())
        throw std::runtime_error("user mixing has neither a psi sampler nor an h sampler");
      // Rejection against proposal h: accept u with probability
      // u^{d/2} e^{-su/2} / sup_u u^{d/2} e^{-su/2}, the sup attained at u = d/s.
      const double log_bound = 0.5 * d * (std::log(static_cast<double>(d)) - std::log(s)) - 0.5 * d;
      constexpr long kMaxTries = 1000000;
      for (long t = 0; t < kMaxTries; ++t) {
        const double u = mixing.sample_h(stream);
        const double log_accept = 0.5 * d * std::log(u) - 0.5 * s * u - log_bound;
        if (std::log(stream.uniform()) < log_accept) return u;
      }
      throw std::runtime_error("rejection sampler for psi exhausted its trial budget at s = " +
                               format_double(s));
    }
  }
  throw std::logic_error("unreachable mixing family");
}

double sample_psi(const PsiDensity& psi, rng::Stream& stream) {
  return draw_latent(psi.mixing, psi.s, stream);
}

RatioBoundReport ratio_bound_check(const MixingDensity& mixing, double lambda,
                                   const std::vector<double>& s_grid) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("ratio bound check requires lambda >= 0");
  if (s_grid.empty()) throw std::invalid_argument("ratio bound check requires a nonempty grid");

  RatioBoundReport report;
  report.lambda = lambda;
  report.s_grid = s_grid;
  report.residuals.reserve(s_grid.size());
  double max_residual = -std::numeric_limits<double>::infinity();
  const int d = mixing.dim();
  for (double s : s_grid) {
    double num, den;
    try {
      num = moment_integral(mixing, d - 2, s);
      den = moment_integral(mixing, d, s);
    } catch (const DivergentIntegral& e) {
      throw DivergentIntegral("ratio bound check failed at grid point s = " + format_double(s) +
                              ": " + e.what());
    }
    const double residual = num / den - lambda * s;
    report.residuals.push_back(residual);
    max_residual = std::max(max_residual, residual);
  }
  report.max_residual = max_residual;
  return report;
}

MixingDensity star_transform(const MixingDensity& mixing) {
  const int d = mixing.dim();
  if (d == 1) return mixing;

  switch (mixing.family()) {
    case MixingDensity::Family::GammaNuHalf: {
      // u^{(d-1)/2} times the Gamma(nu/2, nu/2) kernel is, after
      // normalization, a Gamma((nu+d-1)/2, nu/2) density.
      const double nu = mixing.nu();
      const double shape = 0.5 * (nu + d - 1);
      const double rate = 0.5 * nu;
      auto pdf = [shape, rate](double u) {
        if (!(u > 0.0)) return 0.0;
        return std::exp(shape * std::log(rate) - std::lgamma(shape) +
                        (shape - 1.0) * std::log(u) - rate * u);
      };
      auto sampler = [shape, rate](rng::Stream& stream) { return stream.gamma(shape, rate); };
      return MixingDensity::user_defined(pdf, OriginBehavior::polynomial(0.5 * (nu + d - 3)), 1,
                                         sampler);
    }
    case MixingDensity::Family::DegenerateOne:
      return MixingDensity::degenerate_one(1);
    case MixingDensity::Family::UserDefined: {
      if (!mixing.has_pdf())
        throw std::runtime_error("star transform requires a density evaluator");
      const double z = moment_integral(mixing, d - 1, 0.0);
      if (!(z > 0.0) || !std::isfinite(z))
        throw DivergentIntegral("star transform normalizer is not finite and positive");
      const double half = 0.5 * (d - 1);
      auto base = mixing;  // keep the evaluator alive in the closure
      auto pdf = [base, half, z](double u) {
        if (!(u > 0.0)) return 0.0;
        return std::pow(u, half) * base.pdf(u) / z;
      };
      const OriginBehavior o = mixing.origin();
      OriginBehavior star_origin;
      switch (o.kind) {
        case OriginBehavior::Kind::ZeroNearOrigin:
          star_origin = OriginBehavior::zero_near_origin(o.delta);
          break;
        case OriginBehavior::Kind::PolynomialAtOrigin:
          star_origin = OriginBehavior::polynomial(0.5 * (2.0 * o.c + d - 1));
          break;
        case OriginBehavior::Kind::FasterThanPolynomial:
          star_origin = OriginBehavior::faster_than_polynomial();
          break;
      }
      return MixingDensity::user_defined(pdf, star_origin, 1);
    }
  }
  throw std::logic_error("unreachable mixing family");
}

OriginProbeReport classify_origin_numeric(const MixingDensity& mixing) {
  OriginProbeReport report;
  report.u = {1e-2, 1e-4, 1e-6};

  if (mixing.family() == MixingDensity::Family::DegenerateOne) {
    report.note = "not applicable: point mass has no density near the origin";
    return report;
  }
  if (!mixing.has_pdf()) {
    report.note = "not applicable: no density evaluator";
    return report;
  }
  const OriginBehavior origin = mixing.origin();
  if (origin.kind != OriginBehavior::Kind::PolynomialAtOrigin) {
    report.note = "not applicable: declared origin tag is not polynomial";
    return report;
  }

  report.applicable = true;
  report.declared_c = origin.c;
  report.ratios.reserve(report.u.size());
  for (double u : report.u) {
    const double ratio = mixing.pdf(u) / std::pow(u, origin.c);
    if (!std::isfinite(ratio))
      throw std::runtime_error("origin probe: evaluator failed near zero (u = " +
                               format_double(u) + ")");
    report.ratios.push_back(ratio);
  }

  const double r1 = report.ratios[0], r2 = report.ratios[1], r3 = report.ratios[2];
  report.limit_estimate = r3;
  if (r1 > 0.0 && r2 > 0.0 && r3 > 0.0 && std::abs(r3 / r2 - 1.0) <= 0.05 &&
      std::abs(r2 / r1 - 1.0) <= 0.5) {
    report.consistent = true;
    report.note = "ratios stabilize near " + format_double(r3);
  } else if (r3 < 0.1 * r1) {
    report.consistent = false;
    report.note = "ratios decay toward zero: declared power is too small";
  } else if (r1 > 0.0 && r3 > 10.0 * r1) {
    report.consistent = false;
    report.note = "ratios grow without stabilizing: declared power is too large";
  } else {
    report.consistent = false;
    report.note = "ratios do not stabilize";
  }
  return report;
}

}  // namespace smnreg
