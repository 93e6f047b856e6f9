#include "rmst/long_form.hpp"

#include <sstream>

#include "rmst/errors.hpp"

namespace rmst {

std::vector<int> encode_counting(const SubjectRecord& rec, int k_max) {
  if (rec.time > k_max || rec.time < 0) {
    std::ostringstream os;
    os << "record '" << rec.id << "': time " << rec.time
       << " invalid for K=" << k_max;
    throw validation_error(os.str());
  }
  std::vector<int> seq(2 * k_max, 0);
  if (rec.event == 1) {
    seq[2 * rec.time - 1] = 1;  // L_{time}
  } else if (rec.time < k_max) {
    seq[2 * rec.time] = 1;  // R_{time}
  }
  // Administrative censoring (event == 0, time == K) leaves all entries 0.
  return seq;
}

std::vector<LongRow> expand_long(const Dataset& ds) {
  std::vector<LongRow> rows;
  rows.reserve(static_cast<size_t>(ds.n()) * 4);
  for (int i = 0; i < ds.n(); ++i) {
    const auto& rec = ds.records[i];
    // Last retained row: m = time-1 for events, min(time, K-1) for censoring.
    const int m_last = rec.event == 1 ? rec.time - 1
                                      : std::min(rec.time, ds.k_max - 1);
    for (int m = 0; m <= m_last; ++m) {
      LongRow row;
      row.subject = i;
      row.m = m;
      row.j = censor_risk(rec, m) ? 1 : 0;
      row.r = censor_at(rec, m, ds.k_max) ? 1 : 0;
      row.i_next = event_risk(rec, m + 1) ? 1 : 0;
      row.l_next = event_at(rec, m + 1) ? 1 : 0;
      rows.push_back(row);
    }
  }
  return rows;
}

Dataset reconstruct_short(const std::vector<LongRow>& rows,
                          const Dataset& ds) {
  Dataset out = ds;
  std::vector<char> found(ds.n(), 0);
  std::vector<int> ev(ds.n(), 0), tt(ds.n(), ds.k_max);
  for (const auto& row : rows) {
    found[row.subject] = 1;
    if (row.l_next) {
      ev[row.subject] = 1;
      tt[row.subject] = row.m + 1;
    } else if (row.r) {
      ev[row.subject] = 0;
      tt[row.subject] = row.m;
    }
  }
  for (int i = 0; i < ds.n(); ++i) {
    if (!found[i]) {
      throw validation_error("reconstruct_short: subject missing from rows");
    }
    out.records[i].event = ev[i];
    out.records[i].time = tt[i];
  }
  return out;
}

}  // namespace rmst
