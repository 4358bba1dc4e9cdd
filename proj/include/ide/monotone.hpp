#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ide/common.hpp"
#include "ide/weighted_space.hpp"

namespace ide {

// Maximal monotone relation A on R^dim, given through its resolvent
// J_lambda = (I + lambda A)^{-1}. The resolvent must be a pure function.
struct MonotoneRelation {
  std::string name;
  int dim = 0;
  std::function<Vec(double lambda, const Vec& y)> resolvent;
  bool zero_in = true;  // (0, 0) in A

  static MonotoneRelation zero(int dim);
  // A x = a x, a >= 0.
  static MonotoneRelation linear(int dim, double a);
  // Subdifferential of the indicator of the box [lo, hi]^dim; resolvent = clamp.
  static MonotoneRelation box(int dim, double lo, double hi);
};

// x with (x, (y - x)/lambda) in A. Throws EvaluationError on bad output.
Vec resolve(const MonotoneRelation& a, double lambda, const Vec& y);

struct MonotoneCheck {
  bool pass = true;
  double worst_violation = 0.0;  // most negative normalized pairing
  int samples = 0;
};

// Firm nonexpansiveness on `samples` seeded random pairs:
// <J y1 - J y2, (y1 - J y1) - (y2 - J y2)> >= -tol |y1 - y2|^2.
MonotoneCheck check_monotone(const MonotoneRelation& a, int samples = 1000,
                             std::uint64_t seed = 12345, double tol = 1e-10);

// Applies the resolvent at every grid point (the extension A_nu).
WeightedSignal extend_pointwise(const MonotoneRelation& a, const WeightedSignal& u,
                                double lambda, Exec exec = Exec::parallel);

// Named registry for scenario/problem files: key + numeric parameters.
// Built in: "zero" {}, "linear" {a}, "box" {lo, hi}, "heaviside_inverse" {} (= box on [0, 1]).
using RelationFactory = std::function<MonotoneRelation(int dim, const std::map<std::string, double>&)>;
void register_relation(const std::string& key, RelationFactory factory);
MonotoneRelation make_relation(const std::string& key, int dim,
                               const std::map<std::string, double>& params = {});

}  // namespace ide
