#pragma once

#include <vector>

#include "rmst/data.hpp"

namespace rmst {

// One (participant, time) cell of the person-period expansion. The row at
// time m carries the censoring-risk pair (J_m, R_m) and the event-risk pair
// for the next time point (I_{m+1}, L_{m+1}).
struct LongRow {
  int subject = 0;  // index into Dataset::records
  int m = 0;        // 0..K-1
  unsigned char j = 0;
  unsigned char r = 0;
  unsigned char i_next = 0;
  unsigned char l_next = 0;
};

// Counting-process encoding (R_0, L_1, R_1, ..., R_{K-1}, L_K) as one
// interleaved sequence of length 2K: R_t at position 2t, L_t at 2t-1.
std::vector<int> encode_counting(const SubjectRecord& rec, int k_max);

inline int counting_r(const std::vector<int>& seq, int t) { return seq[2 * t]; }
inline int counting_l(const std::vector<int>& seq, int t) {
  return seq[2 * t - 1];
}

// Person-period expansion. Rows after a subject's terminal transition
// (J_m = 0 and I_{m+1} = 0) are omitted; within a subject rows are ordered
// by m, and subjects keep dataset order.
std::vector<LongRow> expand_long(const Dataset& ds);

// Inverse of expand_long on valid datasets: rebuilds (event, time) for each
// subject from its rows. Subjects absent from `rows` are not allowed.
Dataset reconstruct_short(const std::vector<LongRow>& rows, const Dataset& ds);

// Risk/transition indicators straight from the short form.
// I_m = 1{at event risk at m}, valid for m >= 1.
inline bool event_risk(const SubjectRecord& rec, int m) {
  return rec.time >= m;
}
// L_m = 1{event observed at m}.
inline bool event_at(const SubjectRecord& rec, int m) {
  return rec.event == 1 && rec.time == m;
}
// J_m = 1{at censoring risk at m}, valid for m >= 0.
inline bool censor_risk(const SubjectRecord& rec, int m) {
  return rec.time > m || (rec.time == m && rec.event == 0);
}
// R_m = 1{censored at m}; administrative censoring at K is not an R event.
inline bool censor_at(const SubjectRecord& rec, int m, int k_max) {
  return rec.event == 0 && rec.time == m && m < k_max;
}

}  // namespace rmst
