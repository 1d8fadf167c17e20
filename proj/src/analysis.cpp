#include "spdgyro/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace spdgyro {

std::vector<double> barycenter(int n) {
  std::vector<double> b(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) b[static_cast<size_t>(i)] = static_cast<double>(n - 1 - 2 * i);
  return b;
}

double barycenter_angle(const std::vector<double>& v) {
  const std::vector<double> b = barycenter(static_cast<int>(v.size()));
  double vv = 0.0, bb = 0.0, vb = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    vv += v[i] * v[i];
    bb += b[i] * b[i];
    vb += v[i] * b[i];
  }
  if (vv == 0.0 || bb == 0.0) return 0.0;
  const double c = std::clamp(vb / (std::sqrt(vv) * std::sqrt(bb)), -1.0, 1.0);
  return std::acos(c);
}

VvdRecord vvd_record(const KgModel& model, const Triple& triple, const std::string& label) {
  const VvdVector v =
      vvd(transformed_head(model, triple.head, triple.rel), embed_entity(model, triple.tail));
  VvdRecord rec;
  rec.relation = triple.rel;
  rec.label = label;
  rec.head = triple.head;
  rec.tail = triple.tail;
  rec.vvd_norm = vvd_norm(v, Metric::Riemannian);
  rec.vvd_angle = barycenter_angle(v.values());
  return rec;
}

namespace {

void write_row(std::ofstream& f, const VvdRecord& r) {
  char buf[64];
  f << r.relation << ',' << r.label << ',' << r.head << ',' << r.tail << ',';
  std::snprintf(buf, sizeof(buf), "%.17g", r.vvd_norm);
  f << buf << ',';
  std::snprintf(buf, sizeof(buf), "%.17g", r.vvd_angle);
  f << buf << '\n';
}

}  // namespace

void export_analysis(const KgModel& model, const KgDataset& ds, int negatives_per_positive,
                     const std::string& out_path, uint64_t seed) {
  std::ofstream f(out_path, std::ios::trunc);
  if (!f) throw IoError("cannot open analysis output file: " + out_path);
  f << "relation,label,head,tail,vvd_norm,vvd_angle\n";

  for (const Triple& t : ds.train) write_row(f, vvd_record(model, t, "train"));

  Rng rng(seed);
  for (const Triple& t : ds.train) {
    for (int k = 0; k < negatives_per_positive; ++k) {
      const Triple neg{t.head, t.rel,
                       static_cast<int>(rng.uniform_int(static_cast<uint64_t>(model.entities)))};
      write_row(f, vvd_record(model, neg, "negative"));
    }
  }

  for (const Triple& t : ds.valid) write_row(f, vvd_record(model, t, "valid"));

  const SpdPoint id = SpdPoint::identity(model.n);
  for (int r = 0; r < model.relations; ++r) {
    const VvdVector v = vvd(id, embed_rel_add(model, r));
    VvdRecord rec;
    rec.relation = r;
    rec.label = "relation_marker";
    rec.vvd_norm = vvd_norm(v, Metric::Riemannian);
    rec.vvd_angle = barycenter_angle(v.values());
    write_row(f, rec);
  }

  if (!f) throw IoError("analysis write failed: " + out_path);
}

}  // namespace spdgyro
