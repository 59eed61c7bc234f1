#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace waydirector::stats {

class StatsError : public std::invalid_argument {
 public:
  enum class Kind { invalid_input, degenerate, unreachable };
  StatsError(Kind kind, const std::string& message) : std::invalid_argument(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Questionnaire scoring

struct ScaleDefinition {
  std::string name;
  int item_count = 1;
  int likert_max = 5;
  std::set<int> reverse_items;  // 1-based
};

inline void check_scale(const ScaleDefinition& def) {
  if (def.item_count < 1) throw StatsError(StatsError::Kind::invalid_input, def.name + ": item_count must be positive");
  if (def.likert_max < 2) throw StatsError(StatsError::Kind::invalid_input, def.name + ": likert_max must be at least 2");
  for (int i : def.reverse_items) {
    if (i < 1 || i > def.item_count) {
      throw StatsError(StatsError::Kind::invalid_input,
                       def.name + ": reverse item " + std::to_string(i) + " is outside 1.." +
                           std::to_string(def.item_count));
    }
  }
}

inline void check_responses(const std::vector<int>& responses, const ScaleDefinition& def) {
  check_scale(def);
  if (static_cast<int>(responses.size()) != def.item_count) {
    throw StatsError(StatsError::Kind::invalid_input, def.name + ": expected " + std::to_string(def.item_count) +
                                                          " responses, got " + std::to_string(responses.size()));
  }
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (responses[i] < 1 || responses[i] > def.likert_max) {
      throw StatsError(StatsError::Kind::invalid_input, def.name + ": item " + std::to_string(i + 1) + " = " +
                                                            std::to_string(responses[i]) + " outside 1.." +
                                                            std::to_string(def.likert_max));
    }
  }
}

// Item values after reverse coding.
inline std::vector<int> coded_items(const std::vector<int>& responses, const ScaleDefinition& def) {
  check_responses(responses, def);
  std::vector<int> out = responses;
  for (int i : def.reverse_items) out[i - 1] = def.likert_max + 1 - out[i - 1];
  return out;
}

// Mean item score. The sum is formed in integers so a k-item score is exactly sum/k.
inline double score_scale(const std::vector<int>& responses, const ScaleDefinition& def) {
  auto items = coded_items(responses, def);
  long sum = std::accumulate(items.begin(), items.end(), 0L);
  return static_cast<double>(sum) / def.item_count;
}

// ---------------------------------------------------------------------------
// Descriptives

struct Descriptives {
  std::size_t n = 0;
  double median = 0, mean = 0, sd = 0, min = 0, max = 0;
};

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw StatsError(StatsError::Kind::invalid_input, "mean of an empty sample");
  double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  // One correction pass absorbs most of the summation error.
  double r = 0.0;
  for (double x : xs) r += x - m;
  return m + r / static_cast<double>(xs.size());
}

// Sample variance, n - 1 denominator, two-pass.
inline double variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw StatsError(StatsError::Kind::invalid_input, "variance needs at least two values");
  const double m = mean(xs);
  double ss = 0.0, comp = 0.0;
  for (double x : xs) {
    ss += (x - m) * (x - m);
    comp += x - m;
  }
  const double n = static_cast<double>(xs.size());
  return (ss - comp * comp / n) / (n - 1.0);
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw StatsError(StatsError::Kind::invalid_input, "median of an empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

inline Descriptives descriptives(const std::vector<double>& xs) {
  if (xs.size() < 2) {
    throw StatsError(StatsError::Kind::invalid_input,
                     "descriptives need at least two values (the sample sd is undefined for n = " +
                         std::to_string(xs.size()) + ")");
  }
  Descriptives d;
  d.n = xs.size();
  d.mean = mean(xs);
  d.sd = std::sqrt(variance(xs));
  d.median = median(xs);
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  d.min = *lo;
  d.max = *hi;
  return d;
}

// ---------------------------------------------------------------------------
// Cronbach's alpha over a participants x items matrix.

inline double cronbach_alpha(const std::vector<std::vector<double>>& rows) {
  using K = StatsError::Kind;
  if (rows.size() < 2) throw StatsError(K::invalid_input, "alpha needs at least two participants");
  const std::size_t k = rows.front().size();
  if (k < 2) throw StatsError(K::invalid_input, "alpha needs at least two items");
  for (const auto& r : rows) {
    if (r.size() != k) throw StatsError(K::invalid_input, "alpha: rows have different item counts");
  }
  double item_var = 0.0;
  std::vector<double> column(rows.size()), totals(rows.size(), 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = rows[i][j];
      totals[i] += rows[i][j];
    }
    item_var += variance(column);
  }
  const double total_var = variance(totals);
  if (!(total_var > 1e-12 * std::max(1.0, item_var))) {
    throw StatsError(K::degenerate, "alpha is undefined: total scores have zero variance");
  }
  const double kd = static_cast<double>(k);
  return kd / (kd - 1.0) * (1.0 - item_var / total_var);
}

// ---------------------------------------------------------------------------
// Distributions

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace detail {

// Continued fraction for the incomplete beta function, modified Lentz.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int max_iter = 10000;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw StatsError(StatsError::Kind::unreachable, "incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw StatsError(StatsError::Kind::invalid_input, "incomplete_beta: a and b must be positive");
  if (!(x >= 0 && x <= 1)) throw StatsError(StatsError::Kind::invalid_input, "incomplete_beta: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// P(|T| >= |t|) for Student's t with `df` degrees of freedom (df may be fractional).
inline double t_two_tailed(double t, double df) {
  if (!(df > 0)) throw StatsError(StatsError::Kind::invalid_input, "t distribution needs df > 0");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

inline double t_cdf(double t, double df) {
  const double tail = 0.5 * t_two_tailed(t, df);
  return t >= 0 ? 1.0 - tail : tail;
}

// Upper quantile: the t with P(T <= t) = p.
inline double t_quantile(double p, double df) {
  if (!(p > 0 && p < 1)) throw StatsError(StatsError::Kind::invalid_input, "t_quantile: p outside (0, 1)");
  if (p < 0.5) return -t_quantile(1.0 - p, df);
  if (p == 0.5) return 0.0;
  const double upper = 1.0 - p;  // target of P(T > t), kept apart from p to avoid cancellation
  double lo = 0.0, hi = 1.0;
  while (0.5 * t_two_tailed(hi, df) > upper) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw StatsError(StatsError::Kind::unreachable, "t_quantile: no finite quantile");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * t_two_tailed(mid, df) > upper) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Noncentral t CDF, Lenth's algorithm AS 243 with the Abramowitz & Stegun 26.7.10
// normal approximation for very large df or noncentrality.
inline double noncentral_t_cdf(double t, double df, double ncp) {
  if (!(df > 0)) throw StatsError(StatsError::Kind::invalid_input, "noncentral t needs df > 0");
  constexpr int max_iter = 5000;
  constexpr double err_max = 1e-13;
  bool negdel = false;
  double tt = t, del = ncp;
  if (t < 0) {
    negdel = true;
    tt = -t;
    del = -ncp;
  }
  if (df > 4e5 || del * del > 2.0 * std::numbers::ln2 * 1021.0) {
    const double s = 1.0 / (4.0 * df);
    const double z = (tt * (1.0 - s) - del) / std::sqrt(1.0 + tt * tt * 2.0 * s);
    const double lower = normal_cdf(z);
    return negdel ? 1.0 - lower : lower;
  }
  double tnc = 0.0;
  const double x = tt * tt / (tt * tt + df);
  if (x > 0) {
    const double lambda = del * del;
    double p = 0.5 * std::exp(-0.5 * lambda);
    double q = std::sqrt(2.0 / std::numbers::pi) * p * del;
    double s = 0.5 - p;
    if (s < 1e-7) s = -0.5 * std::expm1(-0.5 * lambda);
    double a = 0.5;
    const double b = 0.5 * df;
    const double rxb = std::pow(1.0 - x, b);
    const double albeta = std::lgamma(0.5) + std::lgamma(b) - std::lgamma(0.5 + b);
    double xodd = incomplete_beta(a, b, x);
    double godd = 2.0 * rxb * std::exp(a * std::log(x) - albeta);
    tnc = b * x;
    double xeven = tnc < std::numeric_limits<double>::epsilon() ? tnc : 1.0 - rxb;
    double geven = tnc * rxb;
    tnc = p * xodd + q * xeven;
    for (int it = 1; it <= max_iter; ++it) {
      a += 1.0;
      xodd -= godd;
      xeven -= geven;
      godd *= x * (a + b - 1.0) / a;
      geven *= x * (a + b - 0.5) / (a + 0.5);
      p *= lambda / (2.0 * it);
      q *= lambda / (2.0 * it + 1.0);
      tnc += p * xodd + q * xeven;
      s -= p;
      if (s < -1e-10 || (s <= 0 && it > 1)) break;
      if (std::abs(2.0 * s * (xodd - godd)) < err_max) break;
    }
  }
  tnc += normal_cdf(-del);
  tnc = std::min(tnc, 1.0);
  return negdel ? 1.0 - tnc : tnc;
}

// ---------------------------------------------------------------------------
// Pearson correlation

struct PearsonResult {
  double r = 0;
  double t_stat = 0;
  int df = 0;
  double p_two_tailed = 1;
};

namespace detail {

inline PearsonResult pearson_from_r(double r, int n) {
  PearsonResult out;
  out.r = r;
  out.df = n - 2;
  if (std::abs(r) == 1.0) {
    out.t_stat = std::copysign(std::numeric_limits<double>::infinity(), r);
    out.p_two_tailed = 0.0;
    return out;
  }
  out.t_stat = r * std::sqrt(static_cast<double>(out.df)) / std::sqrt(1.0 - r * r);
  // I_{1 - r^2}(df/2, 1/2) is the two-tailed p without forming the t statistic.
  out.p_two_tailed = incomplete_beta(out.df / 2.0, 0.5, 1.0 - r * r);
  return out;
}

}  // namespace detail

inline double p_from_r(double r, int n) {
  if (!(std::abs(r) <= 1.0)) throw StatsError(StatsError::Kind::invalid_input, "p_from_r: |r| > 1");
  if (n < 3) throw StatsError(StatsError::Kind::invalid_input, "p_from_r: n must be at least 3");
  return detail::pearson_from_r(r, n).p_two_tailed;
}

inline PearsonResult pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
  using K = StatsError::Kind;
  if (xs.size() != ys.size()) throw StatsError(K::invalid_input, "pearson_r: samples differ in length");
  if (xs.size() < 3) throw StatsError(K::invalid_input, "pearson_r: need at least three pairs");
  const double mx = mean(xs), my = mean(ys);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double scale_x = std::max(1.0, mx * mx), scale_y = std::max(1.0, my * my);
  if (sxx <= 1e-24 * scale_x * static_cast<double>(xs.size()) ||
      syy <= 1e-24 * scale_y * static_cast<double>(ys.size())) {
    throw StatsError(K::degenerate, "pearson_r: a sample has zero variance");
  }
  double r = sxy / std::sqrt(sxx * syy);
  // Exact linear relations come out a few ulps short of 1.
  if (std::abs(r) > 1.0 - 8 * std::numeric_limits<double>::epsilon()) r = std::copysign(1.0, r);
  return detail::pearson_from_r(r, static_cast<int>(xs.size()));
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank test

enum class WilcoxonMethod { exact, normal_approximation };

inline std::string_view to_string(WilcoxonMethod m) {
  return m == WilcoxonMethod::exact ? "exact" : "normal_approximation";
}

struct WilcoxonResult {
  std::size_t n_total = 0;
  std::size_t n_effective = 0;
  double w_plus = 0;
  double w_minus = 0;
  double z = 0;
  bool continuity_correction = true;
  std::optional<double> p_exact;
  double p_approx = 1;
  WilcoxonMethod method = WilcoxonMethod::exact;  // which of the two `p` reports
  double p = 1;
};

struct WilcoxonOptions {
  bool continuity_correction = true;
  std::size_t exact_limit = 20;  // largest n_effective for enumeration
  double tolerance = 1e-9;       // relative; differences this close are equal (or zero)
};

namespace detail {

inline bool nearly_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// Ranks of |d| for the nonzero differences, mid-ranked over ties.
struct SignedRanks {
  std::vector<double> ranks;
  std::vector<int> signs;
  std::vector<std::size_t> tie_sizes;
};

inline SignedRanks signed_ranks(const std::vector<double>& diffs, double tolerance) {
  std::vector<std::pair<double, int>> nonzero;
  for (double d : diffs) {
    if (!std::isfinite(d)) throw StatsError(StatsError::Kind::invalid_input, "wilcoxon: non-finite difference");
    if (detail::nearly_equal(d, 0.0, tolerance)) continue;
    nonzero.emplace_back(std::abs(d), d > 0 ? 1 : -1);
  }
  std::sort(nonzero.begin(), nonzero.end());
  SignedRanks out;
  std::size_t i = 0;
  while (i < nonzero.size()) {
    std::size_t j = i + 1;
    while (j < nonzero.size() && detail::nearly_equal(nonzero[j].first, nonzero[j - 1].first, tolerance)) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      out.ranks.push_back(mid);
      out.signs.push_back(nonzero[k].second);
    }
    out.tie_sizes.push_back(j - i);
    i = j;
  }
  return out;
}

// Two-tailed exact p: the share of the 2^n sign assignments whose W+ lies at least as
// far from its mean as the observed one. Mid-ranks are half-integers, so the sums are
// tracked in doubled ranks.
inline double wilcoxon_exact_p(const std::vector<double>& ranks, double w_plus) {
  std::vector<long> doubled;
  long total = 0;
  for (double r : ranks) {
    doubled.push_back(std::lround(2.0 * r));
    total += doubled.back();
  }
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  long reach = 0;
  for (long r : doubled) {
    for (long s = reach; s >= 0; --s) {
      if (ways[static_cast<std::size_t>(s)] != 0.0) ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
    }
    reach += r;
  }
  const long observed = std::abs(2 * std::lround(2.0 * w_plus) - total);
  double hits = 0.0;
  for (long s = 0; s <= total; ++s) {
    if (std::abs(2 * s - total) >= observed) hits += ways[static_cast<std::size_t>(s)];
  }
  return std::min(1.0, hits / std::ldexp(1.0, static_cast<int>(ranks.size())));
}

// Differences are a - b; z is computed from W+, so it is negative when b tends to be larger.
inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                           const WilcoxonOptions& opt = {}) {
  using K = StatsError::Kind;
  if (a.size() != b.size()) throw StatsError(K::invalid_input, "wilcoxon: samples differ in length");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) diffs.push_back(a[i] - b[i]);
  auto sr = signed_ranks(diffs, opt.tolerance);
  if (sr.ranks.empty()) throw StatsError(K::degenerate, "wilcoxon: every difference is zero");

  WilcoxonResult res;
  res.n_total = a.size();
  res.n_effective = sr.ranks.size();
  res.continuity_correction = opt.continuity_correction;
  for (std::size_t i = 0; i < sr.ranks.size(); ++i) (sr.signs[i] > 0 ? res.w_plus : res.w_minus) += sr.ranks[i];

  const double n = static_cast<double>(res.n_effective);
  const double mu = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  for (std::size_t t : sr.tie_sizes) {
    const double td = static_cast<double>(t);
    var -= (td * td * td - td) / 48.0;
  }
  double dev = res.w_plus - mu;
  if (opt.continuity_correction) dev = std::copysign(std::max(0.0, std::abs(dev) - 0.5), dev);
  res.z = var > 0 ? dev / std::sqrt(var) : 0.0;
  res.p_approx = std::min(1.0, 2.0 * normal_cdf(-std::abs(res.z)));

  if (res.n_effective <= opt.exact_limit) {
    res.p_exact = wilcoxon_exact_p(sr.ranks, res.w_plus);
    res.method = WilcoxonMethod::exact;
    res.p = *res.p_exact;
  } else {
    res.method = WilcoxonMethod::normal_approximation;
    res.p = res.p_approx;
  }
  return res;
}

// ---------------------------------------------------------------------------
// A priori power for the paired design

enum class AreMethod { normal_parent, min_are, laplace, paired_t };

inline std::string_view to_string(AreMethod m) {
  switch (m) {
    case AreMethod::normal_parent: return "normal_parent";
    case AreMethod::min_are: return "min_are";
    case AreMethod::laplace: return "laplace";
    case AreMethod::paired_t: return "paired_t";
  }
  return "?";
}

inline std::optional<AreMethod> parse_are_method(std::string_view s) {
  for (auto m : {AreMethod::normal_parent, AreMethod::min_are, AreMethod::laplace, AreMethod::paired_t}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

// Asymptotic relative efficiency of the signed-rank test against the t test.
inline double are_of(AreMethod m) {
  switch (m) {
    case AreMethod::normal_parent: return 3.0 / std::numbers::pi;
    case AreMethod::min_are: return 0.864;
    case AreMethod::laplace: return 1.5;
    case AreMethod::paired_t: return 1.0;
  }
  return 1.0;
}

// Power of the paired t test with `n` pairs (fractional n allowed for ARE-scaled sizes).
inline double paired_t_power(double dz, double n, double alpha, int tails) {
  const double df = n - 1.0;
  if (!(df > 0)) throw StatsError(StatsError::Kind::invalid_input, "paired_t_power: need n > 1");
  const double ncp = dz * std::sqrt(n);
  if (tails == 2) {
    const double crit = t_quantile(1.0 - alpha / 2.0, df);
    return (1.0 - noncentral_t_cdf(crit, df, ncp)) + noncentral_t_cdf(-crit, df, ncp);
  }
  const double crit = t_quantile(1.0 - alpha, df);
  return 1.0 - noncentral_t_cdf(crit, df, ncp);
}

struct PowerResult {
  double effect_size_dz = 0;
  double alpha = 0;
  double target_power = 0;
  int tails = 2;
  AreMethod are_method = AreMethod::normal_parent;
  double are = 1;
  long parametric_n = 0;  // smallest paired-t sample reaching the target
  long required_n = 0;    // parametric_n inflated by 1 / ARE, rounded up
  double actual_power = 0;  // paired-t power at the effective size required_n * ARE
};

// The paired-t sample size is found first, then divided by the ARE and rounded up.
// The achieved power is the t-test power at the effective size N * ARE.
inline PowerResult power_analysis(double dz, double alpha, double target_power, int tails,
                                  AreMethod method = AreMethod::normal_parent) {
  using K = StatsError::Kind;
  if (!(dz > 0)) throw StatsError(K::invalid_input, "power_analysis: effect size must be positive");
  if (!(alpha > 0 && alpha < 1)) throw StatsError(K::invalid_input, "power_analysis: alpha outside (0, 1)");
  if (!(target_power > 0 && target_power < 1)) throw StatsError(K::invalid_input, "power_analysis: power outside (0, 1)");
  if (tails != 1 && tails != 2) throw StatsError(K::invalid_input, "power_analysis: tails must be 1 or 2");
  constexpr long limit = 1'000'000;

  PowerResult res{dz, alpha, target_power, tails, method, are_of(method), 0, 0, 0};
  auto power_at = [&](long n) { return paired_t_power(dz, static_cast<double>(n), alpha, tails); };
  if (power_at(limit) < target_power) {
    throw StatsError(K::unreachable, "power_analysis: target power not reached with N <= 1000000");
  }
  long lo = 1, hi = 2;  // power_at(lo) < target <= power_at(hi), lo = 1 standing for "no test"
  while (power_at(hi) < target_power) {
    lo = hi;
    hi = std::min(limit, hi * 2);
  }
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    if (power_at(mid) >= target_power) hi = mid;
    else lo = mid;
  }
  res.parametric_n = hi;
  res.required_n = static_cast<long>(std::ceil(static_cast<double>(hi) / res.are - 1e-9));
  res.actual_power = paired_t_power(dz, static_cast<double>(res.required_n) * res.are, alpha, tails);
  return res;
}

}  // namespace waydirector::stats
