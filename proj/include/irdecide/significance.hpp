#pragma once

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "irdecide/metrics.hpp"

namespace irdecide::stats {

enum class Outcome { kWin, kTie, kLoss };

/// ✓, ≈ or ✗.
std::string_view symbol(Outcome outcome);
std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

struct OutcomeLabel {
  Outcome outcome = Outcome::kTie;
  std::string evidence;
  bool insufficient_data = false;

  bool operator==(const OutcomeLabel&) const = default;
};

struct TestResult {
  double t = 0.0;
  double p = 1.0;
  // All paired differences equal and nonzero: t is infinite, p is 0.
  bool degenerate_variance = false;

  bool operator==(const TestResult&) const = default;
};

/// Two-sample test over paired observations; the slot for the test T of the
/// significance operator.
using PairedTest =
    std::function<TestResult(std::span<const double>, std::span<const double>)>;

/// Two-tailed paired t-test on d = b - a with n - 1 degrees of freedom.
/// Throws InputError when the spans differ in length or n < 2.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);
/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_tailed_p(double t, double dof);

struct ComparisonResult {
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::size_t n = 0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double practical_delta = 0.0;  // mean_b - mean_a
  bool degenerate_variance = false;

  bool operator==(const ComparisonResult&) const = default;
};

/// Compares b against a over the queries both score, optionally restricted
/// to `slice`. Throws EmptySetError when fewer than two paired queries
/// remain.
ComparisonResult compare(const metrics::ScoreMap& a, const metrics::ScoreMap& b,
                         const std::set<QueryId>* slice = nullptr,
                         const PairedTest& test = paired_t_test);

/// Win iff p < alpha and delta >= margin; Loss iff p < alpha and
/// delta <= -margin; otherwise Tie.
OutcomeLabel classify(const ComparisonResult& comparison, double alpha,
                      double practical_margin);

struct RobustnessResult {
  std::optional<ComparisonResult> comparison;  // unset when n < 2
  OutcomeLabel label;
  std::size_t slice_size = 0;  // paired queries inside the slice

  bool operator==(const RobustnessResult&) const = default;
};

/// Guardrail form of the comparison over a query slice. Slices with fewer
/// than `min_slice_size` paired queries are a Tie flagged as insufficient
/// data. Throws EmptySetError when the slice has no paired queries.
RobustnessResult robustness_check(const metrics::ScoreMap& a,
                                  const metrics::ScoreMap& b,
                                  const std::set<QueryId>& slice, double alpha,
                                  std::size_t min_slice_size,
                                  double practical_margin = 0.0,
                                  const PairedTest& test = paired_t_test);

}  // namespace irdecide::stats
