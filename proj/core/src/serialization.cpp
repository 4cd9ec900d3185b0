#include "selfseg/serialization.hpp"

#include <cstdio>

#include "json.hpp"

namespace selfseg {
namespace {

using ojson = nlohmann::ordered_json;

template <typename Fn>
auto parse_with(std::string_view json, const char* what, Fn&& fn) {
  try {
    return fn(nlohmann::json::parse(json));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

ojson assignment_json(const ClusterAssignment& a) {
  return ojson{{"height", a.height},
               {"width", a.width},
               {"k_effective", a.k_effective},
               {"run_meta",
                {{"resolution_tag", a.run_meta.resolution_tag},
                 {"k_initial", a.run_meta.k_initial},
                 {"seed", a.run_meta.seed}}},
               {"labels", a.labels}};
}

ClusterAssignment assignment_of(const nlohmann::json& j) {
  ClusterAssignment a;
  a.height = j.at("height").get<int>();
  a.width = j.at("width").get<int>();
  a.k_effective = j.at("k_effective").get<int>();
  const auto& meta = j.at("run_meta");
  a.run_meta.resolution_tag = meta.at("resolution_tag").get<std::string>();
  a.run_meta.k_initial = meta.at("k_initial").get<int>();
  a.run_meta.seed = meta.at("seed").get<std::uint64_t>();
  a.labels = j.at("labels").get<std::vector<int>>();
  a.validate();
  return a;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_json(const ClusterAssignment& a) { return assignment_json(a).dump(); }

ClusterAssignment assignment_from_json(std::string_view json) {
  return parse_with(json, "cluster assignment json", assignment_of);
}

std::string to_json(const std::vector<ClusterAssignment>& runs) {
  ojson arr = ojson::array();
  for (const auto& a : runs) arr.push_back(assignment_json(a));
  return ojson{{"assignments", arr}}.dump();
}

std::vector<ClusterAssignment> assignments_from_json(std::string_view json) {
  return parse_with(json, "assignments json", [](const nlohmann::json& j) {
    std::vector<ClusterAssignment> out;
    for (const auto& a : j.at("assignments")) out.push_back(assignment_of(a));
    return out;
  });
}

std::string to_json(const ClusterProbabilityField& f) {
  return ojson{{"height", f.height}, {"width", f.width}, {"n_labels", f.n_labels}, {"probs", f.probs}}.dump();
}

ClusterProbabilityField field_from_json(std::string_view json) {
  return parse_with(json, "probability field json", [](const nlohmann::json& j) {
    ClusterProbabilityField f;
    f.height = j.at("height").get<int>();
    f.width = j.at("width").get<int>();
    f.n_labels = j.at("n_labels").get<int>();
    f.probs = j.at("probs").get<std::vector<double>>();
    f.validate(1e-6);
    return f;
  });
}

std::string to_json(const DenoisedGrid& g) {
  const auto& p = g.provenance;
  return ojson{{"height", g.height},
               {"width", g.width},
               {"labels", g.labels},
               {"provenance",
                {{"crf",
                  {{"smoothness_weight", p.crf.smoothness_weight},
                   {"smoothness_theta", p.crf.smoothness_theta},
                   {"n_iters", p.crf.n_iters},
                   {"unary_floor", p.crf.unary_floor}}},
                 {"majority_iters_used", p.majority_iters_used},
                 {"majority_max_iters", p.majority_max_iters},
                 {"majority_converged", p.majority_converged}}}}
      .dump();
}

DenoisedGrid denoised_from_json(std::string_view json) {
  return parse_with(json, "denoised grid json", [](const nlohmann::json& j) {
    DenoisedGrid g;
    g.height = j.at("height").get<int>();
    g.width = j.at("width").get<int>();
    g.labels = j.at("labels").get<std::vector<int>>();
    if (g.height <= 0 || g.width <= 0 || g.labels.size() != static_cast<std::size_t>(g.height) * g.width)
      throw ValidationError("denoised grid json: label count does not match size");
    const auto& p = j.at("provenance");
    const auto& crf = p.at("crf");
    g.provenance.crf.smoothness_weight = crf.at("smoothness_weight").get<double>();
    g.provenance.crf.smoothness_theta = crf.at("smoothness_theta").get<double>();
    g.provenance.crf.n_iters = crf.at("n_iters").get<int>();
    g.provenance.crf.unary_floor = crf.at("unary_floor").get<double>();
    g.provenance.majority_iters_used = p.at("majority_iters_used").get<int>();
    g.provenance.majority_max_iters = p.at("majority_max_iters").get<int>();
    g.provenance.majority_converged = p.at("majority_converged").get<bool>();
    return g;
  });
}

std::string to_json(const CaptionBatch& batch) {
  ojson records = ojson::array();
  for (const auto& r : batch.records)
    records.push_back({{"cluster_id", r.cluster_id}, {"cycle", r.cycle}, {"seed", r.seed}, {"text", r.text}});
  ojson failures = ojson::array();
  for (const auto& f : batch.failures)
    failures.push_back({{"cluster_id", f.cluster_id}, {"cycle", f.cycle}, {"seed", f.seed}, {"message", f.message}});
  return ojson{{"records", records}, {"failures", failures}}.dump();
}

CaptionBatch captions_from_json(std::string_view json) {
  return parse_with(json, "captions json", [](const nlohmann::json& j) {
    CaptionBatch b;
    for (const auto& r : j.at("records"))
      b.records.push_back({r.at("cluster_id").get<int>(), r.at("cycle").get<int>(), r.at("text").get<std::string>(),
                           r.at("seed").get<std::uint64_t>()});
    for (const auto& f : j.value("failures", nlohmann::json::array()))
      b.failures.push_back({f.at("cluster_id").get<int>(), f.at("cycle").get<int>(), f.at("seed").get<std::uint64_t>(),
                            f.at("message").get<std::string>()});
    return b;
  });
}

std::string to_json(const NounSet& nouns) {
  ojson counts = ojson::object();
  for (const auto& n : nouns.nouns) counts[n] = nouns.source_counts.at(n);
  return ojson{{"nouns", nouns.nouns}, {"source_counts", counts}}.dump();
}

NounSet nouns_from_json(std::string_view json) {
  return parse_with(json, "nouns json", [](const nlohmann::json& j) {
    NounSet s;
    s.nouns = j.at("nouns").get<std::vector<std::string>>();
    for (const auto& n : s.nouns) s.source_counts[n] = j.at("source_counts").at(n).get<int>();
    if (s.source_counts.size() != s.nouns.size()) throw ValidationError("nouns json: duplicate noun");
    return s;
  });
}

std::string to_json(const MappingDict& m) {
  ojson map = ojson::object();
  for (const auto& [k, v] : m.map) map[k] = v;
  ojson skipped = ojson::array();
  for (const auto& s : m.skipped_resolved) skipped.push_back(s);
  return ojson{{"map", map}, {"skipped_resolved", skipped}}.dump();
}

MappingDict mapping_from_json(std::string_view json) {
  return parse_with(json, "mapping json", [](const nlohmann::json& j) {
    MappingDict m;
    for (const auto& [k, v] : j.at("map").items()) m.map[k] = v.get<std::string>();
    for (const auto& s : j.at("skipped_resolved")) m.skipped_resolved.insert(s.get<std::string>());
    return m;
  });
}

std::string to_json(const IouReport& r) {
  ojson per_class = ojson::object();
  for (const auto& [name, iou] : r.per_class) {
    const auto& t = r.counts.at(name);
    per_class[name] = {{"iou", iou}, {"intersection", t.intersection}, {"union", t.union_}};
  }
  return ojson{{"miou", r.miou}, {"per_class", per_class}}.dump();
}

std::string to_json(const CmIouReport& r) {
  ojson segs = ojson::array();
  for (const auto& m : r.per_segment_best)
    segs.push_back({{"gt_segment", m.gt_segment}, {"pred_segment", m.pred_segment}, {"iou", m.iou}});
  return ojson{{"cmiou", r.cmiou}, {"n_gt_segments", r.n_gt_segments}, {"per_segment_best", segs}}.dump();
}

std::string to_csv_rows(const std::string& image_id, const IouReport& report) {
  std::string out;
  for (const auto& [name, iou] : report.per_class) out += image_id + ",class," + name + "," + format_double(iou) + "\n";
  return out;
}

std::string to_csv_rows(const std::string& image_id, const CmIouReport& report) {
  std::string out;
  for (const auto& m : report.per_segment_best)
    out += image_id + ",segment," + std::to_string(m.gt_segment) + "," + format_double(m.iou) + "\n";
  return out;
}

}  // namespace selfseg
