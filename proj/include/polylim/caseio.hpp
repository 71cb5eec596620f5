#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "polylim/geometry.hpp"

namespace polylim {

enum class BusKind { Slack, Pv, Pq };

struct Bus {
  int id = 0;  // external bus number
  BusKind kind = BusKind::Pq;
  double pd = 0.0, qd = 0.0;      // load, per-unit on base_mva
  double gs = 0.0, bs = 0.0;      // shunt admittance, per-unit (unused by the flow model)
  double vmin = 0.0, vmax = 0.0;  // voltage magnitude bounds, per-unit
};

struct Branch {
  int from = 0, to = 0;           // external bus ids
  double r = 0.0, x = 0.0;        // series impedance, per-unit
  double b_charge = 0.0;          // total charging susceptance (unused by the flow model)
  double rate_mva = 0.0;          // thermal limit in MVA; 0 means unlimited
  double tap = 0.0, shift = 0.0;  // transformer ratio and phase shift (unused)
  bool in_service = true;
};

struct Gen {
  int bus = 0;
  double pmin = 0.0, pmax = 0.0;  // per-unit
  double qmin = 0.0, qmax = 0.0;  // per-unit
  bool in_service = true;
};

/// Polynomial generation cost c2 x^2 + c1 x + c0, x in MW.
struct CostFn {
  double c2 = 0.0;  // $/MW^2 h
  double c1 = 0.0;  // $/MWh
  double c0 = 0.0;  // $/h
};

struct CaseData {
  std::string name;
  double base_mva = 0.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Gen> gens;
  std::vector<CostFn> costs;  // aligned to gens
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Parse a MATPOWER-style case file: numeric tables between '[' and '];',
/// '%' comments, rows separated by ';' or newlines. Out-of-service branches
/// and generators are dropped. MW/MVAr columns are converted to per-unit.
CaseData parse_case(const std::string& text);

CaseData load_case(const std::string& path);

/// Re-emit CaseData as a case file; parse(emit(cd)) reproduces cd.
std::string emit_case(const CaseData& cd);

/// Canonical JSON dump for debugging.
std::string case_to_json(const CaseData& cd);

/// One CircleLimit (in MVA) per in-service branch with a nonzero rating,
/// in branch order; CircleLimit::index is the branch position in cd.branches.
std::vector<CircleLimit> branch_limits(const CaseData& cd);

/// Position of an external bus id in cd.buses; throws if absent.
int bus_pos(const CaseData& cd, int bus_id);

}  // namespace polylim
