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

#include "mpat/eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "mpat/util.hpp"

namespace mpat {

double accuracy(const Classifier& model, const Dataset& data) {
  if (data.examples.empty()) throw std::invalid_argument("accuracy: empty dataset");
  long correct = 0;
  for (const auto& ex : data.examples) correct += model.predict(ex.segments) == ex.label;
  return static_cast<double>(correct) / static_cast<double>(data.examples.size());
}

double attack_success_rate(const std::vector<AttackOutcome>& outcomes) {
  long attacked = 0, succeeded = 0;
  for (const auto& o : outcomes) {
    if (!o.attempted) continue;
    ++attacked;
    succeeded += o.success;
  }
  if (attacked == 0) throw std::invalid_argument("attack_success_rate: no attacked examples");
  return static_cast<double>(succeeded) / static_cast<double>(attacked);
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

struct Moments {
  double mean = 0;
  double var = 0;
  double n = 0;
};

Moments moments(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("t-test: each sample needs at least two values");
  Moments m;
  m.n = static_cast<double>(xs.size());
  for (double x : xs) m.mean += x;
  m.mean /= m.n;
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= m.n - 1;
  return m;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (!(x >= 0 && x <= 1)) throw std::invalid_argument("incomplete_beta: x must lie in [0, 1]");
  if (x == 0 || x == 1) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * beta_fraction(a, b, x) / a;
  return 1 - front * beta_fraction(b, a, 1 - x) / b;
}

double t_two_sided_p(double t, double df) {
  if (!(df > 0)) throw std::invalid_argument("t_two_sided_p: df must be positive");
  if (std::isinf(t)) return 0;
  return incomplete_beta(df / 2, 0.5, df / (df + t * t));
}

TTestResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  auto ma = moments(a), mb = moments(b);
  if (ma.var == 0 && mb.var == 0) throw std::invalid_argument("welch_ttest: both samples have zero variance");
  const double qa = ma.var / ma.n, qb = mb.var / mb.n;
  TTestResult r;
  r.t = (ma.mean - mb.mean) / std::sqrt(qa + qb);
  r.df = (qa + qb) * (qa + qb) / (qa * qa / (ma.n - 1) + qb * qb / (mb.n - 1));
  r.p = t_two_sided_p(r.t, r.df);
  return r;
}

TTestResult student_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  auto ma = moments(a), mb = moments(b);
  if (ma.var == 0 && mb.var == 0) throw std::invalid_argument("student_ttest: both samples have zero variance");
  TTestResult r;
  r.df = ma.n + mb.n - 2;
  const double pooled = ((ma.n - 1) * ma.var + (mb.n - 1) * mb.var) / r.df;
  r.t = (ma.mean - mb.mean) / std::sqrt(pooled * (1 / ma.n + 1 / mb.n));
  r.p = t_two_sided_p(r.t, r.df);
  return r;
}

TTestResult ttest(const std::vector<double>& a, const std::vector<double>& b, TTestKind kind) {
  return kind == TTestKind::Welch ? welch_ttest(a, b) : student_ttest(a, b);
}

TTestKind parse_ttest_kind(const std::string& name) {
  if (name == "welch") return TTestKind::Welch;
  if (name == "student") return TTestKind::Student;
  throw std::invalid_argument("unknown t-test kind '" + name + "' (expected welch or student)");
}

void EvalReport::validate() const {
  for (double r : {acc_clean, acc_test, acc_adv, asr})
    if (!(r >= 0 && r <= 1)) throw std::runtime_error("eval report: ratio outside [0, 1]");
  if (!(counts.succeeded <= counts.attacked && counts.attacked <= counts.total && counts.correct <= counts.total))
    throw std::runtime_error("eval report: inconsistent counts");
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["acc_clean"] = acc_clean;
  j["acc_test"] = acc_test;
  j["acc_adv"] = acc_adv;
  j["asr"] = asr;
  j["counts"] = {{"total", counts.total},
                 {"correct", counts.correct},
                 {"attacked", counts.attacked},
                 {"succeeded", counts.succeeded}};
  j["config_fingerprint"] = config_fingerprint;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  EvalReport r;
  try {
    r.acc_clean = j.at("acc_clean").get<double>();
    r.acc_test = j.at("acc_test").get<double>();
    r.acc_adv = j.at("acc_adv").get<double>();
    r.asr = j.at("asr").get<double>();
    const auto& c = j.at("counts");
    r.counts.total = c.at("total").get<long>();
    r.counts.correct = c.at("correct").get<long>();
    r.counts.attacked = c.at("attacked").get<long>();
    r.counts.succeeded = c.at("succeeded").get<long>();
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("eval report: ") + e.what());
  }
  r.validate();
  return r;
}

EvalReport build_report(const Classifier& model, const Dataset& clean, const Dataset& test,
                        const std::vector<AttackOutcome>& outcomes, const std::string& config_text,
                        std::uint64_t seed) {
  EvalReport r;
  r.counts.total = static_cast<long>(clean.examples.size());
  for (const auto& ex : clean.examples) r.counts.correct += model.predict(ex.segments) == ex.label;
  for (const auto& o : outcomes) {
    if (!o.attempted) continue;
    ++r.counts.attacked;
    r.counts.succeeded += o.success;
  }
  const auto ratio = [](long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; };
  r.acc_clean = ratio(r.counts.correct, r.counts.total);
  r.acc_test = test.examples.empty() ? 0.0 : accuracy(model, test);
  r.acc_adv = ratio(r.counts.correct - r.counts.succeeded, r.counts.total);
  r.asr = ratio(r.counts.succeeded, r.counts.attacked);
  r.config_fingerprint = hex64(fnv1a64(config_text));
  r.seed = seed;
  r.validate();
  return r;
}

}  // namespace mpat
