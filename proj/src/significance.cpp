#include "irdecide/significance.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "irdecide/error.hpp"

namespace irdecide::stats {

namespace {

constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 100000;

// Modified Lentz evaluation of the continued fraction for I_x(a, b); used
// where it converges fast, x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) return h;
  }
  return h;
}

// I_x(a, b) with 1 - x supplied separately so callers can avoid the
// cancellation in computing it.
double incomplete_beta(double a, double b, double x, double one_minus_x) {
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log(one_minus_x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::string format_p(double p) {
  std::ostringstream os;
  os.precision(4);
  os << p;
  return os.str();
}

}  // namespace

std::string_view symbol(Outcome outcome) {
  switch (outcome) {
    case Outcome::kWin: return "✓";
    case Outcome::kTie: return "≈";
    case Outcome::kLoss: return "✗";
  }
  return "?";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kWin: return "win";
    case Outcome::kTie: return "tie";
    case Outcome::kLoss: return "loss";
  }
  return "?";
}

Outcome parse_outcome(std::string_view text) {
  if (text == "win") return Outcome::kWin;
  if (text == "tie") return Outcome::kTie;
  if (text == "loss") return Outcome::kLoss;
  throw InputError("unknown outcome `" + std::string(text) + "`");
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw InputError("incomplete beta requires a, b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InputError("incomplete beta requires x in [0, 1]");
  }
  return incomplete_beta(a, b, x, 1.0 - x);
}

double student_t_two_tailed_p(double t, double dof) {
  if (!(dof > 0.0)) throw InputError("degrees of freedom must be positive");
  if (std::isnan(t)) throw InputError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double x = dof / (dof + t2);
  const double y = t2 / (dof + t2);
  double p = incomplete_beta(dof / 2.0, 0.5, x, y);
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

TestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InputError("paired t-test needs samples of equal length");
  }
  const std::size_t n = a.size();
  if (n < 2) {
    throw InputError("paired t-test needs at least 2 pairs, got " +
                     std::to_string(n));
  }
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = b[i] - a[i];
  const double md = mean_of(d);
  double ss = 0.0;
  for (double x : d) ss += (x - md) * (x - md);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TestResult r;
  // Equal differences can leave a rounding-level residual in sd; compare
  // against the scale of the differences themselves.
  double scale = 0.0;
  for (double x : d) scale = std::max(scale, std::fabs(x));
  if (scale == 0.0) {
    r.t = 0.0;
    r.p = 1.0;
    return r;
  }
  if (sd <= scale * 1e-14) {
    r.degenerate_variance = true;
    r.t = md > 0 ? std::numeric_limits<double>::infinity()
                 : -std::numeric_limits<double>::infinity();
    if (md == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
      r.degenerate_variance = false;
      return r;
    }
    r.p = 0.0;
    return r;
  }
  r.t = md * std::sqrt(static_cast<double>(n)) / sd;
  r.p = student_t_two_tailed_p(r.t, static_cast<double>(n - 1));
  return r;
}

ComparisonResult compare(const metrics::ScoreMap& a, const metrics::ScoreMap& b,
                         const std::set<QueryId>* slice,
                         const PairedTest& test) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [query, va] : a) {
    if (slice && !slice->contains(query)) continue;
    auto it = b.find(query);
    if (it == b.end()) continue;
    xs.push_back(va);
    ys.push_back(it->second);
  }
  if (xs.size() < 2) {
    throw EmptySetError("comparison needs at least 2 paired queries, got " +
                        std::to_string(xs.size()));
  }
  ComparisonResult c;
  c.n = xs.size();
  c.mean_a = mean_of(xs);
  c.mean_b = mean_of(ys);
  c.practical_delta = c.mean_b - c.mean_a;
  TestResult r = test(xs, ys);
  c.t_statistic = r.t;
  c.p_value = r.p;
  c.degenerate_variance = r.degenerate_variance;
  return c;
}

OutcomeLabel classify(const ComparisonResult& c, double alpha,
                      double practical_margin) {
  OutcomeLabel label;
  const bool significant = c.p_value < alpha;
  std::string stats = "p=" + format_p(c.p_value) + " delta=" +
                      format_p(c.practical_delta) + " n=" +
                      std::to_string(c.n);
  if (c.degenerate_variance) stats += " (degenerate variance)";
  if (significant && c.practical_delta >= practical_margin &&
      c.practical_delta > 0.0) {
    label.outcome = Outcome::kWin;
    label.evidence = "significant gain, " + stats;
  } else if (significant && c.practical_delta <= -practical_margin &&
             c.practical_delta < 0.0) {
    label.outcome = Outcome::kLoss;
    label.evidence = "significant loss, " + stats;
  } else if (significant) {
    label.outcome = Outcome::kTie;
    label.evidence = "significant but below practical margin " +
                     format_p(practical_margin) + ", " + stats;
  } else {
    label.outcome = Outcome::kTie;
    label.evidence = "not significant, " + stats;
  }
  return label;
}

RobustnessResult robustness_check(const metrics::ScoreMap& a,
                                  const metrics::ScoreMap& b,
                                  const std::set<QueryId>& slice, double alpha,
                                  std::size_t min_slice_size,
                                  double practical_margin,
                                  const PairedTest& test) {
  RobustnessResult result;
  for (const QueryId& q : slice) {
    if (a.contains(q) && b.contains(q)) ++result.slice_size;
  }
  if (result.slice_size == 0) {
    throw EmptySetError("slice has no queries scored for both systems");
  }
  if (result.slice_size >= 2) {
    result.comparison = compare(a, b, &slice, test);
  }
  if (result.slice_size < min_slice_size) {
    result.label.outcome = Outcome::kTie;
    result.label.insufficient_data = true;
    result.label.evidence = "insufficient data: " +
                            std::to_string(result.slice_size) +
                            " queries, minimum " +
                            std::to_string(min_slice_size);
    return result;
  }
  result.label = classify(*result.comparison, alpha, practical_margin);
  return result;
}

}  // namespace irdecide::stats
