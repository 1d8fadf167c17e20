#pragma once

#include <string>
#include <vector>

#include "spdgyro/kgmodel.hpp"

namespace spdgyro {

// (n-1, n-3, ..., -n+3, -n+1): the reference direction the norm/angle view
// is measured against. Sums to zero.
std::vector<double> barycenter(int n);

// One row of the representation-analysis export: the VVD between the
// transformed head and the tail, reduced to its l2 norm and its angle (in
// radians, [0, pi]) against the barycenter direction.
struct VvdRecord {
  int relation = 0;
  std::string label;  // train | negative | valid | relation_marker
  int head = -1;
  int tail = -1;
  double vvd_norm = 0.0;
  double vvd_angle = 0.0;
};

// Angle between v and the barycenter of matching length; 0 when either side
// has zero norm.
double barycenter_angle(const std::vector<double>& v);

VvdRecord vvd_record(const KgModel& model, const Triple& triple, const std::string& label);

// CSV with header `relation,label,head,tail,vvd_norm,vvd_angle`. Rows: one
// per train triple, `negatives_per_positive` sampled tail corruptions per
// train triple, one per valid triple, then one `relation_marker` row per
// relation holding the norm/angle of vvd(I, R_r) (head/tail set to -1).
// Deterministic for a fixed seed.
void export_analysis(const KgModel& model, const KgDataset& ds, int negatives_per_positive,
                     const std::string& out_path, uint64_t seed);

}  // namespace spdgyro
