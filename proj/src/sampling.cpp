#include "cyclordf/sampling.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <regex>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cyclordf/errors.hpp"

namespace cyclordf {

namespace {

using WideFloat = boost::multiprecision::cpp_bin_float_50;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t parse_int(const std::string& s, std::int64_t fallback) {
  if (s.empty()) return fallback;
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("cannot parse integer '" + s + "'");
  }
  return out;
}

void check_unit_interval(double v, const std::string& text) {
  if (!(v >= 0.0 && v < 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1), got " + text);
  }
}

}  // namespace

Epsilon Epsilon::from_double(double v) {
  check_unit_interval(v, std::to_string(v));
  Epsilon e;
  e.kind = Kind::Float;
  e.value = v;
  return e;
}

Epsilon Epsilon::rational(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw ConfigError("epsilon denominator must be positive");
  const std::int64_t g = std::gcd(num, den);
  Epsilon e;
  e.kind = Kind::Rational;
  e.num = num / (g == 0 ? 1 : g);
  e.den = den / (g == 0 ? 1 : g);
  e.value = static_cast<double>(e.num) / static_cast<double>(e.den);
  check_unit_interval(e.value, e.to_string());
  return e;
}

Epsilon Epsilon::pi_rational(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw ConfigError("epsilon denominator must be positive");
  const std::int64_t g = std::gcd(num, den);
  Epsilon e;
  e.kind = Kind::PiRational;
  e.num = num / (g == 0 ? 1 : g);
  e.den = den / (g == 0 ? 1 : g);
  e.value = static_cast<double>(static_cast<long double>(e.num) * std::numbers::pi_v<long double> /
                                static_cast<long double>(e.den));
  check_unit_interval(e.value, e.to_string());
  return e;
}

Epsilon Epsilon::parse(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (c != ' ') text.push_back(c);
  }
  static const std::regex pi_re(R"(^(\d*)\*?pi(?:/(\d+))?$)");
  static const std::regex rat_re(R"(^(\d+)/(\d+)$)");
  std::smatch m;
  if (std::regex_match(text, m, pi_re)) {
    return pi_rational(parse_int(m[1].str(), 1), parse_int(m[2].str(), 1));
  }
  if (std::regex_match(text, m, rat_re)) {
    return rational(parse_int(m[1].str(), 0), parse_int(m[2].str(), 1));
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("cannot parse epsilon '" + raw + "'");
  }
  return from_double(v);
}

std::string Epsilon::to_string() const {
  switch (kind) {
    case Kind::Rational:
      return std::to_string(num) + "/" + std::to_string(den);
    case Kind::PiRational:
      return (num == 1 ? std::string() : std::to_string(num)) + "pi" +
             (den == 1 ? std::string() : "/" + std::to_string(den));
    case Kind::Float:
      break;
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_pi_expression(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (c != ' ') text.push_back(c);
  }
  static const std::regex pi_re(R"(^(\d*)\*?pi(?:/(\d+))?$)");
  std::smatch m;
  if (std::regex_match(text, m, pi_re)) {
    const auto num = parse_int(m[1].str(), 1);
    const auto den = parse_int(m[2].str(), 1);
    if (den <= 0) throw ConfigError("zero denominator in '" + raw + "'");
    return static_cast<double>(static_cast<long double>(num) * std::numbers::pi_v<long double> /
                               static_cast<long double>(den));
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("cannot parse number '" + raw + "'");
  }
  return v;
}

std::int64_t floor_n_eps(const Epsilon& eps, std::int64_t n) {
  if (n < 1) throw DomainError("n must be a positive integer");
  switch (eps.kind) {
    case Epsilon::Kind::Rational:
      return floor_div(n * eps.num, eps.den);
    case Epsilon::Kind::PiRational: {
      const long double pi_ld = std::numbers::pi_v<long double>;
      const auto lo = static_cast<std::int64_t>(
          std::floor(static_cast<long double>(n) * eps.num * pi_ld / eps.den));
      const WideFloat wide = WideFloat(n) * eps.num *
                             boost::math::constants::pi<WideFloat>() / WideFloat(eps.den);
      const auto hi = static_cast<std::int64_t>(boost::multiprecision::floor(wide));
      if (lo != hi) {
        throw PrecisionError("floor(n*eps) disagrees across precisions for n=" +
                             std::to_string(n) + ", eps=" + eps.to_string());
      }
      return hi;
    }
    case Epsilon::Kind::Float: {
      const auto lo = static_cast<std::int64_t>(
          std::floor(static_cast<long double>(n) * static_cast<long double>(eps.value)));
      const auto hi = static_cast<std::int64_t>(
          boost::multiprecision::floor(WideFloat(n) * WideFloat(eps.value)));
      if (lo != hi) {
        throw PrecisionError("floor(n*eps) disagrees across precisions for n=" +
                             std::to_string(n));
      }
      return hi;
    }
  }
  return 0;
}

RationalApprox rational_approx(const Epsilon& eps, int p, std::int64_t n, double period) {
  if (n < 1) throw DomainError("rational_approx: n must be >= 1");
  if (p < 1) throw DomainError("rational_approx: p must be >= 1");
  RationalApprox r;
  r.n = n;
  r.floor_n_eps = floor_n_eps(eps, n);
  r.eps_n = static_cast<double>(r.floor_n_eps) / static_cast<double>(n);
  r.p_n = static_cast<std::int64_t>(p) * n + r.floor_n_eps;
  // T_c / (p + k/n) = T_c n / p_n, with n/p_n in lowest terms
  const std::int64_t g = std::gcd(n, r.p_n);
  r.sample_interval = period * static_cast<double>(n / g) / static_cast<double>(r.p_n / g);
  return r;
}

double async_sample_interval(const Epsilon& eps, int p, double period) {
  if (eps.kind == Epsilon::Kind::Rational) {
    // den and p*den + num are coprime when num/den is reduced
    return period * static_cast<double>(eps.den) /
           static_cast<double>(static_cast<std::int64_t>(p) * eps.den + eps.num);
  }
  return period / (p + eps.value);
}

int tau_c(const Autocorrelation& model, int p) {
  const double ratio = (p + 1) * model.max_lag() / model.period();
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-12 * std::max(1.0, ratio)) {
    return std::max(1, static_cast<int>(nearest));
  }
  return std::max(1, static_cast<int>(std::ceil(ratio)));
}

ResolvedPlan resolve(const SamplingPlan& plan, const Autocorrelation& model) {
  if (plan.p < 1) throw ConfigError("p must be a positive integer");
  if (!(plan.phase_s >= 0.0) || !std::isfinite(plan.phase_s)) {
    throw ConfigError("sampling phase must be finite and non-negative");
  }
  ResolvedPlan r;
  r.p = plan.p;
  r.phase_s = plan.phase_s;
  r.tau_c = tau_c(model, plan.p);
  if (plan.n) {
    const auto a = rational_approx(plan.epsilon, plan.p, *plan.n, model.period());
    r.synchronous = true;
    r.n = a.n;
    r.floor_n_eps = a.floor_n_eps;
    r.eps_eff = a.eps_n;
    r.p_n = a.p_n;
    r.sample_interval = a.sample_interval;
  } else {
    r.synchronous = false;
    r.eps_eff = plan.epsilon.value;
    r.sample_interval = async_sample_interval(plan.epsilon, plan.p, model.period());
  }
  return r;
}

double dt_autocorr(const Autocorrelation& model, const ResolvedPlan& plan, std::int64_t i,
                   std::int64_t delta) {
  if (plan.synchronous && plan.p_n > 0) {
    i %= plan.p_n;
    if (i < 0) i += plan.p_n;
  }
  const double ts = plan.sample_interval;
  return model(static_cast<double>(i) * ts + plan.phase_s, static_cast<double>(delta) * ts);
}

Eigen::MatrixXd block_covariance(const Autocorrelation& model, const ResolvedPlan& plan,
                                 int l) {
  if (l < 1) throw DomainError("block length must be positive");
  Eigen::MatrixXd c(l, l);
  for (int u = 0; u < l; ++u) {
    for (int v = 0; v < l; ++v) c(u, v) = dt_autocorr(model, plan, u, v - u);
  }
  return c;
}

Eigen::MatrixXd block_covariance(const Autocorrelation& model, double sample_interval,
                                 double phase_s, int l) {
  if (l < 1) throw DomainError("block length must be positive");
  Eigen::MatrixXd c(l, l);
  for (int u = 0; u < l; ++u) {
    for (int v = 0; v < l; ++v) {
      c(u, v) = model(u * sample_interval + phase_s, (v - u) * sample_interval);
    }
  }
  return c;
}

}  // namespace cyclordf
