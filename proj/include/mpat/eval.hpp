// Copyright 2026 The MPAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpat/attacks.hpp"
#include "mpat/model.hpp"
#include "mpat/textcore.hpp"

namespace mpat {

/// correct / total. Throws on an empty dataset.
double accuracy(const Classifier& model, const Dataset& data);

/// successes / attempted. Throws when no attack was attempted.
double attack_success_rate(const std::vector<AttackOutcome>& outcomes);

/// Regularized incomplete beta I_x(a, b), by continued fraction.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student t statistic with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

struct TTestResult {
  double t = 0;
  double df = 0;
  double p = 1;
};

enum class TTestKind { Welch, Student };

/// Unequal-variance test with Welch-Satterthwaite degrees of freedom.
TTestResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b);
/// Pooled-variance test.
TTestResult student_ttest(const std::vector<double>& a, const std::vector<double>& b);
TTestResult ttest(const std::vector<double>& a, const std::vector<double>& b, TTestKind kind);
TTestKind parse_ttest_kind(const std::string& name);

struct EvalCounts {
  long total = 0;
  long correct = 0;
  long attacked = 0;
  long succeeded = 0;

  bool operator==(const EvalCounts&) const = default;
};

struct EvalReport {
  double acc_clean = 0;
  double acc_test = 0;
  double acc_adv = 0;
  double asr = 0;
  EvalCounts counts;
  std::string config_fingerprint;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  static EvalReport from_json(const std::string& text);
  bool operator==(const EvalReport&) const = default;
};

/// Counts come from the clean set and the outcomes of attacks on it.
/// acc_adv = (correct - succeeded) / total. asr is 0 when nothing was attacked.
EvalReport build_report(const Classifier& model, const Dataset& clean, const Dataset& test,
                        const std::vector<AttackOutcome>& outcomes, const std::string& config_text,
                        std::uint64_t seed);

}  // namespace mpat
