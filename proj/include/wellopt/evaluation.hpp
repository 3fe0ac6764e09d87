#pragma once

#include <limits>
#include <string>
#include <vector>

namespace wellopt {

/// Rejected: refused before simulation (geometry); never consumes budget.
/// Failed: simulated but the solver broke down; consumes budget.
enum class EvalStatus { Ok, Rejected, Failed };

const char* to_string(EvalStatus status);

struct Evaluation {
  EvalStatus status = EvalStatus::Rejected;
  double npv = std::numeric_limits<double>::quiet_NaN();
  double h = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
  std::string reason;

  bool valid() const { return status == EvalStatus::Ok; }

  static Evaluation ok(double npv, double h, double feasibility_tolerance) {
    return {EvalStatus::Ok, npv, h, h <= feasibility_tolerance, {}};
  }
  static Evaluation rejected(std::string why) {
    Evaluation e;
    e.status = EvalStatus::Rejected;
    e.reason = std::move(why);
    return e;
  }
  static Evaluation failed(std::string why) {
    Evaluation e;
    e.status = EvalStatus::Failed;
    e.reason = std::move(why);
    return e;
  }
};

struct EvaluationRecord {
  std::vector<double> x;  // normalized decision vector
  Evaluation eval;
  long index = -1;        // dispatch order, unique per engine
  long simulations = 0;   // fresh simulations consumed when this record was produced
  bool cached = false;
  std::string stage;
};

/// Constrained ranking: feasible beats infeasible, smaller h wins between infeasible points,
/// larger npv between feasible ones. Ties are not "better", so callers keep the earlier record.
bool better(const Evaluation& a, const Evaluation& b);

}  // namespace wellopt
