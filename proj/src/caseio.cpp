#include "polylim/caseio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace polylim {

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct TableRow {
  int line = 0;
  std::vector<double> cols;
};

// Case text with comments stripped, plus the source line of every character.
struct Source {
  std::string text;
  std::vector<int> line_of;

  explicit Source(const std::string& raw) {
    text.reserve(raw.size());
    line_of.reserve(raw.size());
    int line = 1;
    bool in_comment = false;
    for (char c : raw) {
      if (c == '\n') {
        in_comment = false;
        text.push_back(c);
        line_of.push_back(line);
        ++line;
        continue;
      }
      if (c == '%') in_comment = true;
      if (!in_comment) {
        text.push_back(c);
        line_of.push_back(line);
      }
    }
  }

  int line_at(std::size_t pos) const {
    if (line_of.empty()) return 1;
    return line_of[std::min(pos, line_of.size() - 1)];
  }

  // Position just past "<name> =" for a whole-word occurrence of name.
  std::size_t find_assignment(const std::string& name) const {
    std::size_t pos = 0;
    while ((pos = text.find(name, pos)) != std::string::npos) {
      const bool left_ok = pos == 0 || !ident_char(text[pos - 1]);
      std::size_t after = pos + name.size();
      const bool right_ok = after >= text.size() || !ident_char(text[after]);
      if (left_ok && right_ok) {
        while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) {
          ++after;
        }
        if (after < text.size() && text[after] == '=') return after + 1;
      }
      pos += name.size();
    }
    return std::string::npos;
  }
};

std::vector<TableRow> parse_table(const Source& src, const std::string& name, bool required) {
  const std::size_t start = src.find_assignment(name);
  if (start == std::string::npos) {
    if (required) throw ParseError(1, "missing required table '" + name + "'");
    return {};
  }
  std::size_t pos = start;
  while (pos < src.text.size() && std::isspace(static_cast<unsigned char>(src.text[pos]))) ++pos;
  if (pos >= src.text.size() || src.text[pos] != '[') {
    throw ParseError(src.line_at(pos), "expected '[' after '" + name + " ='");
  }
  ++pos;

  std::vector<TableRow> rows;
  TableRow current;
  current.line = src.line_at(pos);
  auto flush_row = [&rows, &current]() {
    if (!current.cols.empty()) rows.push_back(current);
    current.cols.clear();
  };
  while (pos < src.text.size()) {
    const char c = src.text[pos];
    if (c == ']') {
      flush_row();
      return rows;
    }
    if (c == ';' || c == '\n') {
      flush_row();
      current.line = src.line_at(pos + 1);
      ++pos;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++pos;
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(src.text.c_str() + pos, &end);
    const std::size_t consumed = end - (src.text.c_str() + pos);
    if (consumed == 0) {
      throw ParseError(src.line_at(pos),
                       "malformed value in table '" + name + "' near '" + src.text[pos] + "'");
    }
    if (current.cols.empty()) current.line = src.line_at(pos);
    current.cols.push_back(v);
    pos += consumed;
  }
  throw ParseError(src.line_at(src.text.size() - 1), "unterminated table '" + name + "'");
}

double parse_base_mva(const Source& src) {
  const std::size_t start = src.find_assignment("baseMVA");
  if (start == std::string::npos) throw ParseError(1, "missing baseMVA");
  char* end = nullptr;
  const double v = std::strtod(src.text.c_str() + start, &end);
  if (end == src.text.c_str() + start) {
    throw ParseError(src.line_at(start), "malformed baseMVA value");
  }
  return v;
}

std::string parse_case_name(const std::string& raw) {
  // "function mpc = <name>" on the first code line, when present.
  std::istringstream is(raw);
  std::string line;
  while (std::getline(is, line)) {
    const auto fn = line.find("function");
    if (fn == std::string::npos) continue;
    const auto eq = line.find('=', fn);
    if (eq == std::string::npos) return {};
    std::size_t b = eq + 1;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    std::size_t e = b;
    while (e < line.size() && ident_char(line[e])) ++e;
    return line.substr(b, e - b);
  }
  return {};
}

void require_cols(const TableRow& row, std::size_t n, const std::string& table) {
  if (row.cols.size() < n) {
    throw ParseError(row.line, "table '" + table + "' row has " +
                                   std::to_string(row.cols.size()) + " columns, need at least " +
                                   std::to_string(n));
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

CaseData parse_case(const std::string& text) {
  const Source src(text);
  CaseData cd;
  cd.name = parse_case_name(text);
  cd.base_mva = parse_base_mva(src);
  if (!(cd.base_mva > 0.0)) {
    throw ParseError(src.line_at(src.find_assignment("baseMVA")), "baseMVA must be positive");
  }
  const double base = cd.base_mva;

  int slack_count = 0;
  for (const TableRow& row : parse_table(src, "bus", true)) {
    require_cols(row, 13, "bus");
    Bus bus;
    bus.id = static_cast<int>(row.cols[0]);
    const int type = static_cast<int>(row.cols[1]);
    switch (type) {
      case 3: bus.kind = BusKind::Slack; ++slack_count; break;
      case 2: bus.kind = BusKind::Pv; break;
      case 1: bus.kind = BusKind::Pq; break;
      default:
        throw ParseError(row.line, "bus " + std::to_string(bus.id) + " has unsupported type " +
                                       std::to_string(type));
    }
    bus.pd = row.cols[2] / base;
    bus.qd = row.cols[3] / base;
    bus.gs = row.cols[4] / base;
    bus.bs = row.cols[5] / base;
    bus.vmax = row.cols[11];
    bus.vmin = row.cols[12];
    if (!(bus.vmin <= bus.vmax)) {
      throw ParseError(row.line, "bus " + std::to_string(bus.id) + " has Vmin > Vmax");
    }
    if (!std::isfinite(bus.pd) || !std::isfinite(bus.qd)) {
      throw ParseError(row.line, "bus " + std::to_string(bus.id) + " has non-finite load");
    }
    cd.buses.push_back(bus);
  }
  if (slack_count != 1) {
    throw ParseError(1, "case must have exactly one slack bus, found " +
                            std::to_string(slack_count));
  }

  std::unordered_map<int, int> bus_index;
  for (std::size_t i = 0; i < cd.buses.size(); ++i) {
    if (!bus_index.emplace(cd.buses[i].id, static_cast<int>(i)).second) {
      throw ParseError(1, "duplicate bus id " + std::to_string(cd.buses[i].id));
    }
  }

  const std::vector<TableRow> gen_rows = parse_table(src, "gen", true);
  std::vector<char> gen_kept;
  for (const TableRow& row : gen_rows) {
    require_cols(row, 10, "gen");
    Gen g;
    g.bus = static_cast<int>(row.cols[0]);
    g.qmax = row.cols[3] / base;
    g.qmin = row.cols[4] / base;
    g.pmax = row.cols[8] / base;
    g.pmin = row.cols[9] / base;
    const bool on = row.cols[7] > 0.0;
    gen_kept.push_back(on ? 1 : 0);
    if (!on) continue;
    if (bus_index.find(g.bus) == bus_index.end()) {
      throw ParseError(row.line, "generator references unknown bus " + std::to_string(g.bus));
    }
    if (!(g.pmin <= g.pmax) || !(g.qmin <= g.qmax)) {
      throw ParseError(row.line, "generator at bus " + std::to_string(g.bus) +
                                     " has inverted output bounds");
    }
    cd.gens.push_back(g);
  }

  for (const TableRow& row : parse_table(src, "branch", true)) {
    require_cols(row, 6, "branch");
    Branch br;
    br.from = static_cast<int>(row.cols[0]);
    br.to = static_cast<int>(row.cols[1]);
    br.r = row.cols[2];
    br.x = row.cols[3];
    br.b_charge = row.cols[4];
    br.rate_mva = row.cols[5];
    br.tap = row.cols.size() > 8 ? row.cols[8] : 0.0;
    br.shift = row.cols.size() > 9 ? row.cols[9] : 0.0;
    const bool on = row.cols.size() > 10 ? row.cols[10] > 0.0 : true;
    if (!on) continue;
    if (bus_index.find(br.from) == bus_index.end() || bus_index.find(br.to) == bus_index.end()) {
      throw ParseError(row.line, "branch references unknown bus " + std::to_string(br.from) +
                                     " or " + std::to_string(br.to));
    }
    if (br.x == 0.0) {
      throw ParseError(row.line, "in-service branch " + std::to_string(br.from) + "-" +
                                     std::to_string(br.to) + " has zero reactance");
    }
    if (br.rate_mva < 0.0) {
      throw ParseError(row.line, "branch " + std::to_string(br.from) + "-" +
                                     std::to_string(br.to) + " has negative rating");
    }
    cd.branches.push_back(br);
  }

  const std::vector<TableRow> cost_rows = parse_table(src, "gencost", true);
  if (cost_rows.size() != gen_rows.size() && cost_rows.size() != 2 * gen_rows.size()) {
    throw ParseError(cost_rows.empty() ? 1 : cost_rows.front().line,
                     "gencost must have one row per generator (or two, the second block is "
                     "ignored); got " +
                         std::to_string(cost_rows.size()) + " rows for " +
                         std::to_string(gen_rows.size()) + " generators");
  }
  for (std::size_t i = 0; i < gen_rows.size(); ++i) {
    if (!gen_kept[i]) continue;
    const TableRow& row = cost_rows[i];
    require_cols(row, 4, "gencost");
    const int model = static_cast<int>(row.cols[0]);
    if (model != 2) {
      throw ParseError(row.line, "only polynomial cost model 2 is supported, got " +
                                     std::to_string(model));
    }
    const int n = static_cast<int>(row.cols[3]);
    if (n < 1 || n > 3) {
      throw ParseError(row.line, "polynomial cost must have 1 to 3 coefficients, got " +
                                     std::to_string(n));
    }
    require_cols(row, 4 + static_cast<std::size_t>(n), "gencost");
    CostFn cost;
    if (n == 3) {
      cost.c2 = row.cols[4];
      cost.c1 = row.cols[5];
      cost.c0 = row.cols[6];
    } else if (n == 2) {
      cost.c1 = row.cols[4];
      cost.c0 = row.cols[5];
    } else {
      cost.c0 = row.cols[4];
    }
    cd.costs.push_back(cost);
  }

  return cd;
}

CaseData load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open case file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str());
}

std::string emit_case(const CaseData& cd) {
  std::ostringstream out;
  const double base = cd.base_mva;
  out << "function mpc = " << (cd.name.empty() ? "case" : cd.name) << "\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << fmt(base) << ";\n";
  out << "mpc.bus = [\n";
  for (const Bus& bus : cd.buses) {
    const int type = bus.kind == BusKind::Slack ? 3 : bus.kind == BusKind::Pv ? 2 : 1;
    out << "\t" << bus.id << "\t" << type << "\t" << fmt(bus.pd * base) << "\t"
        << fmt(bus.qd * base) << "\t" << fmt(bus.gs * base) << "\t" << fmt(bus.bs * base)
        << "\t1\t1\t0\t0\t1\t" << fmt(bus.vmax) << "\t" << fmt(bus.vmin) << ";\n";
  }
  out << "];\n";
  out << "mpc.gen = [\n";
  for (const Gen& g : cd.gens) {
    out << "\t" << g.bus << "\t0\t0\t" << fmt(g.qmax * base) << "\t" << fmt(g.qmin * base)
        << "\t1\t" << fmt(base) << "\t1\t" << fmt(g.pmax * base) << "\t" << fmt(g.pmin * base)
        << ";\n";
  }
  out << "];\n";
  out << "mpc.branch = [\n";
  for (const Branch& br : cd.branches) {
    out << "\t" << br.from << "\t" << br.to << "\t" << fmt(br.r) << "\t" << fmt(br.x) << "\t"
        << fmt(br.b_charge) << "\t" << fmt(br.rate_mva) << "\t0\t0\t" << fmt(br.tap) << "\t"
        << fmt(br.shift) << "\t1\t-360\t360;\n";
  }
  out << "];\n";
  out << "mpc.gencost = [\n";
  for (const CostFn& cost : cd.costs) {
    out << "\t2\t0\t0\t3\t" << fmt(cost.c2) << "\t" << fmt(cost.c1) << "\t" << fmt(cost.c0)
        << ";\n";
  }
  out << "];\n";
  return out.str();
}

std::string case_to_json(const CaseData& cd) {
  nlohmann::json j;
  j["name"] = cd.name;
  j["base_mva"] = cd.base_mva;
  j["buses"] = nlohmann::json::array();
  for (const Bus& bus : cd.buses) {
    j["buses"].push_back({{"id", bus.id},
                          {"kind", bus.kind == BusKind::Slack ? "slack"
                                   : bus.kind == BusKind::Pv  ? "pv"
                                                              : "pq"},
                          {"pd", bus.pd},
                          {"qd", bus.qd},
                          {"vmin", bus.vmin},
                          {"vmax", bus.vmax}});
  }
  j["branches"] = nlohmann::json::array();
  for (const Branch& br : cd.branches) {
    j["branches"].push_back({{"from", br.from},
                             {"to", br.to},
                             {"r", br.r},
                             {"x", br.x},
                             {"rate_mva", br.rate_mva}});
  }
  j["gens"] = nlohmann::json::array();
  for (std::size_t i = 0; i < cd.gens.size(); ++i) {
    const Gen& g = cd.gens[i];
    const CostFn& cost = cd.costs[i];
    j["gens"].push_back({{"bus", g.bus},
                         {"pmin", g.pmin},
                         {"pmax", g.pmax},
                         {"qmin", g.qmin},
                         {"qmax", g.qmax},
                         {"cost", {{"c2", cost.c2}, {"c1", cost.c1}, {"c0", cost.c0}}}});
  }
  return j.dump(2);
}

std::vector<CircleLimit> branch_limits(const CaseData& cd) {
  std::vector<CircleLimit> limits;
  for (std::size_t i = 0; i < cd.branches.size(); ++i) {
    const Branch& br = cd.branches[i];
    if (br.in_service && br.rate_mva > 0.0) {
      limits.push_back({br.rate_mva, static_cast<int>(i)});
    }
  }
  return limits;
}

int bus_pos(const CaseData& cd, int bus_id) {
  for (std::size_t i = 0; i < cd.buses.size(); ++i) {
    if (cd.buses[i].id == bus_id) return static_cast<int>(i);
  }
  throw std::out_of_range("unknown bus id " + std::to_string(bus_id));
}

}  // namespace polylim
