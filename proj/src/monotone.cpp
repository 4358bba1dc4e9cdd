#include "ide/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>

namespace ide {

MonotoneRelation MonotoneRelation::zero(int dim) {
  return {"zero", dim, [](double, const Vec& y) { return y; }, true};
}

MonotoneRelation MonotoneRelation::linear(int dim, double a) {
  if (!(a >= 0.0)) throw PreconditionError("linear relation needs a >= 0");
  return {"linear", dim, [a](double lambda, const Vec& y) { return Vec(y / (1.0 + lambda * a)); }, true};
}

MonotoneRelation MonotoneRelation::box(int dim, double lo, double hi) {
  if (!(lo <= hi)) throw PreconditionError("box relation needs lo <= hi");
  return {"box", dim, [lo, hi](double, const Vec& y) { return Vec(y.cwiseMax(lo).cwiseMin(hi)); },
          lo <= 0.0 && 0.0 <= hi};
}

Vec resolve(const MonotoneRelation& a, double lambda, const Vec& y) {
  if (!(lambda > 0.0)) throw PreconditionError("resolvent parameter must be positive");
  if (y.size() != a.dim) throw DimensionMismatch("resolvent input has the wrong dimension");
  Vec x;
  try {
    x = a.resolvent(lambda, y);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError("resolvent of '" + a.name + "' failed: " + e.what());
  }
  if (x.size() != a.dim || !x.allFinite()) throw EvaluationError("resolvent of '" + a.name + "' returned a bad value");
  return x;
}

MonotoneCheck check_monotone(const MonotoneRelation& a, int samples, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_real_distribution<double> loglam(-3.0, 2.0);
  MonotoneCheck r;
  r.samples = samples;
  for (int s = 0; s < samples; ++s) {
    Vec y1(a.dim), y2(a.dim);
    for (int i = 0; i < a.dim; ++i) {
      y1(i) = val(rng);
      y2(i) = val(rng);
    }
    double lambda = std::pow(10.0, loglam(rng));
    Vec x1 = resolve(a, lambda, y1), x2 = resolve(a, lambda, y2);
    double dy = (y1 - y2).squaredNorm();
    if (dy == 0.0) continue;
    double pairing = (x1 - x2).dot((y1 - x1) - (y2 - x2)) / dy;
    r.worst_violation = std::min(r.worst_violation, pairing);
  }
  r.pass = r.worst_violation >= -tol;
  return r;
}

WeightedSignal extend_pointwise(const MonotoneRelation& a, const WeightedSignal& u, double lambda, Exec exec) {
  if (u.dim() != a.dim) throw DimensionMismatch("relation and signal dimensions differ");
  WeightedSignal out(u.grid(), u.dim(), u.nu());
  const int n = u.size();
  std::vector<char> failed(n, 0);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (int j = 0; j < n; ++j) {
    try {
      out.values().row(j) = resolve(a, lambda, u.at(j)).transpose();
    } catch (const std::exception&) {
      failed[j] = 1;
    }
  }
  int bad = static_cast<int>(std::count(failed.begin(), failed.end(), 1));
  if (bad > 0) {
    int first = static_cast<int>(std::find(failed.begin(), failed.end(), 1) - failed.begin());
    throw EvaluationError("resolvent failed at " + std::to_string(bad) + " grid points (first t = " +
                          std::to_string(u.grid().t(first)) + ")");
  }
  return out;
}

namespace {

double param(const std::map<std::string, double>& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw ConfigError("relation parameter '" + key + "' missing");
  return it->second;
}

std::mutex& relation_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, RelationFactory>& relations() {
  static std::map<std::string, RelationFactory> r = {
      {"zero", [](int dim, const std::map<std::string, double>&) { return MonotoneRelation::zero(dim); }},
      {"linear",
       [](int dim, const std::map<std::string, double>& p) { return MonotoneRelation::linear(dim, param(p, "a")); }},
      {"box",
       [](int dim, const std::map<std::string, double>& p) {
         return MonotoneRelation::box(dim, param(p, "lo"), param(p, "hi"));
       }},
      {"heaviside_inverse",
       [](int dim, const std::map<std::string, double>&) {
         auto rel = MonotoneRelation::box(dim, 0.0, 1.0);
         rel.name = "heaviside_inverse";
         return rel;
       }},
  };
  return r;
}

}  // namespace

void register_relation(const std::string& key, RelationFactory factory) {
  std::lock_guard<std::mutex> lock(relation_mutex());
  relations()[key] = std::move(factory);
}

MonotoneRelation make_relation(const std::string& key, int dim, const std::map<std::string, double>& params) {
  RelationFactory f;
  {
    std::lock_guard<std::mutex> lock(relation_mutex());
    auto it = relations().find(key);
    if (it == relations().end()) throw ConfigError("unknown relation '" + key + "'");
    f = it->second;
  }
  return f(dim, params);
}

}  // namespace ide
