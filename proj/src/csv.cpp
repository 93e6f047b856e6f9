#include "rmst/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rmst/errors.hpp"

namespace rmst {

std::vector<std::vector<std::string>> read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open file: " + path);
  std::vector<std::vector<std::string>> table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.push_back("");
    table.push_back(std::move(row));
  }
  return table;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  // Shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

int parse_int(const std::string& s, const std::string& what,
              std::vector<ValidationIssue>* issues, const std::string& id) {
  try {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    issues->push_back({id, "cannot parse " + what + " value '" + s + "'"});
    return -1;
  }
}

double parse_num(const std::string& s, const std::string& what,
                 std::vector<ValidationIssue>* issues, const std::string& id) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    issues->push_back({id, "cannot parse " + what + " value '" + s + "'"});
    return std::nan("");
  }
}

[[noreturn]] void throw_issues(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << "invalid input:";
  for (const auto& is : issues) {
    os << "\n  " << (is.record_id.empty() ? "<dataset>" : is.record_id) << ": "
       << is.message;
  }
  throw validation_error(os.str());
}

}  // namespace

Dataset read_trial_csv(const std::string& path, int k_override) {
  const auto table = read_csv_table(path);
  if (table.empty()) throw validation_error("empty CSV: " + path);
  const auto& header = table[0];
  if (header.size() < 4 || header[0] != "id" || header[1] != "arm" ||
      header[2] != "time" || header[3] != "event") {
    throw validation_error(
        "CSV header must start with id,arm,time,event: " + path);
  }
  std::vector<std::string> cov_names(header.begin() + 4, header.end());

  std::vector<ValidationIssue> issues;
  std::vector<SubjectRecord> records;
  int maxtime = 0;
  for (size_t r = 1; r < table.size(); ++r) {
    const auto& row = table[r];
    if (row.size() != header.size()) {
      issues.push_back({row.empty() ? "" : row[0], "wrong column count"});
      continue;
    }
    SubjectRecord rec;
    rec.id = row[0];
    rec.arm = parse_int(row[1], "arm", &issues, rec.id);
    rec.time = parse_int(row[2], "time", &issues, rec.id);
    rec.event = parse_int(row[3], "event", &issues, rec.id);
    for (size_t c = 4; c < row.size(); ++c) {
      rec.w.push_back(parse_num(row[c], header[c], &issues, rec.id));
    }
    maxtime = std::max(maxtime, rec.time);
    records.push_back(std::move(rec));
  }
  if (!issues.empty()) throw_issues(issues);

  const int k = k_override > 0 ? k_override : maxtime;
  Dataset ds;
  issues = validate_dataset(std::move(records), k, std::move(cov_names), &ds);
  if (!issues.empty()) throw_issues(issues);
  return ds;
}

void write_trial_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write file: " + path);
  out << "id,arm,time,event";
  for (const auto& nm : ds.covariate_names) out << ',' << nm;
  out << '\n';
  for (const auto& rec : ds.records) {
    out << rec.id << ',' << rec.arm << ',' << rec.time << ',' << rec.event;
    for (double v : rec.w) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_long_csv(const Dataset& ds, const std::vector<LongRow>& rows,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write file: " + path);
  out << "id,m,a";
  for (const auto& nm : ds.covariate_names) out << ',' << nm;
  out << ",J,R,I_next,L_next\n";
  for (const auto& row : rows) {
    const auto& rec = ds.records[row.subject];
    out << rec.id << ',' << row.m << ',' << rec.arm;
    for (double v : rec.w) out << ',' << format_double(v);
    out << ',' << int(row.j) << ',' << int(row.r) << ',' << int(row.i_next)
        << ',' << int(row.l_next) << '\n';
  }
}

}  // namespace rmst
