#include "selfseg/eval_metrics.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "selfseg/errors.hpp"

namespace selfseg {
namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

void check_same_shape(const LabelMask& a, const LabelMask& b) {
  if (a.height != b.height || a.width != b.width)
    throw ValidationError("metrics: masks differ in size (" + std::to_string(a.height) + "x" + std::to_string(a.width) +
                          " vs " + std::to_string(b.height) + "x" + std::to_string(b.width) + ")");
}

IouReport finish(std::map<std::string, PixelTally> counts) {
  IouReport r;
  double sum = 0.0;
  for (auto it = counts.begin(); it != counts.end();) {
    if (it->second.union_ == 0) {
      it = counts.erase(it);
      continue;
    }
    const double iou = static_cast<double>(it->second.intersection) / static_cast<double>(it->second.union_);
    r.per_class[it->first] = iou;
    sum += iou;
    ++it;
  }
  r.counts = std::move(counts);
  r.miou = r.per_class.empty() ? 0.0 : sum / static_cast<double>(r.per_class.size());
  return r;
}

}  // namespace

std::vector<int> connected_components(const LabelMask& mask, Connectivity conn, int* n_components) {
  const int h = mask.height;
  const int w = mask.width;
  const int n = h * w;
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto unite = [&](int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const int i = r * w + c;
      const int l = mask.labels[static_cast<std::size_t>(i)];
      if (l == mask.ignore_index) continue;
      auto link = [&](int rr, int cc) {
        if (rr < 0 || cc < 0 || cc >= w) return;
        const int j = rr * w + cc;
        if (mask.labels[static_cast<std::size_t>(j)] == l) unite(i, j);
      };
      link(r, c - 1);
      link(r - 1, c);
      if (conn == Connectivity::Eight) {
        link(r - 1, c - 1);
        link(r - 1, c + 1);
      }
    }
  std::vector<int> out(static_cast<std::size_t>(n), -1);
  std::unordered_map<int, int> ids;
  for (int i = 0; i < n; ++i) {
    if (mask.labels[static_cast<std::size_t>(i)] == mask.ignore_index) continue;
    const int root = find_root(parent, i);
    auto [it, inserted] = ids.emplace(root, static_cast<int>(ids.size()));
    out[static_cast<std::size_t>(i)] = it->second;
  }
  if (n_components) *n_components = static_cast<int>(ids.size());
  return out;
}

CmIouReport cmiou(const LabelMask& gt, const LabelMask& pred, Connectivity conn) {
  check_same_shape(gt, pred);
  int n_gt = 0;
  int n_pred = 0;
  const auto gt_cc = connected_components(gt, conn, &n_gt);
  const auto pred_cc = connected_components(pred, conn, &n_pred);

  std::vector<long long> gt_area(static_cast<std::size_t>(n_gt), 0), pred_area(static_cast<std::size_t>(n_pred), 0);
  std::unordered_map<long long, long long> inter;
  for (std::size_t i = 0; i < gt_cc.size(); ++i) {
    const int g = gt_cc[i];
    if (g < 0) continue;
    ++gt_area[static_cast<std::size_t>(g)];
    const int p = pred_cc[i];
    if (p < 0) continue;
    ++pred_area[static_cast<std::size_t>(p)];
    ++inter[static_cast<long long>(g) * n_pred + p];
  }

  CmIouReport report;
  report.n_gt_segments = n_gt;
  report.per_segment_best.resize(static_cast<std::size_t>(n_gt));
  for (int g = 0; g < n_gt; ++g) report.per_segment_best[static_cast<std::size_t>(g)] = {g, -1, 0.0};
  for (const auto& [key, in] : inter) {
    const int g = static_cast<int>(key / n_pred);
    const int p = static_cast<int>(key % n_pred);
    const double iou = static_cast<double>(in) /
                       static_cast<double>(gt_area[static_cast<std::size_t>(g)] + pred_area[static_cast<std::size_t>(p)] - in);
    auto& best = report.per_segment_best[static_cast<std::size_t>(g)];
    if (iou > best.iou || (iou == best.iou && best.pred_segment >= 0 && p < best.pred_segment) || best.pred_segment < 0) {
      best.pred_segment = p;
      best.iou = iou;
    }
  }
  double sum = 0.0;
  for (const auto& m : report.per_segment_best) sum += m.iou;
  report.cmiou = n_gt > 0 ? sum / n_gt : 0.0;
  return report;
}

IouReport miou(const LabelMask& gt, const LabelMask& pred, const std::vector<std::string>& class_set) {
  check_same_shape(gt, pred);
  std::unordered_map<std::string, int> class_index;
  for (std::size_t i = 0; i < class_set.size(); ++i) class_index.emplace(class_set[i], static_cast<int>(i));
  auto translate = [&](const LabelMask& m, const char* which) {
    std::unordered_map<int, int> t;
    for (const auto& [idx, name] : m.vocabulary) {
      auto it = class_index.find(name);
      if (it == class_index.end())
        throw ValidationError(std::string("miou: ") + which + " class '" + name + "' is not in the evaluation vocabulary");
      t.emplace(idx, it->second);
    }
    return t;
  };
  const auto gt_t = translate(gt, "ground-truth");
  const auto pred_t = translate(pred, "predicted");

  const std::size_t k = class_set.size();
  std::vector<long long> inter(k, 0), gt_count(k, 0), pred_count(k, 0);
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const int g = gt.labels[i];
    if (g == gt.ignore_index) continue;
    const int gc = gt_t.at(g);
    ++gt_count[static_cast<std::size_t>(gc)];
    const int p = pred.labels[i];
    if (p == pred.ignore_index) continue;
    auto it = pred_t.find(p);
    if (it == pred_t.end()) throw ValidationError("miou: predicted label " + std::to_string(p) + " has no name");
    ++pred_count[static_cast<std::size_t>(it->second)];
    if (it->second == gc) ++inter[static_cast<std::size_t>(gc)];
  }
  std::map<std::string, PixelTally> counts;
  for (std::size_t c = 0; c < k; ++c) {
    const long long un = gt_count[c] + pred_count[c] - inter[c];
    if (un > 0) counts[class_set[c]] = {inter[c], un};
  }
  return finish(std::move(counts));
}

void DatasetAccumulator::add(const IouReport& report) {
  for (const auto& [name, t] : report.counts) {
    auto& acc = tallies_[name];
    acc.intersection += t.intersection;
    acc.union_ += t.union_;
  }
}

void DatasetAccumulator::add(const CmIouReport& report) {
  for (const auto& m : report.per_segment_best) best_iou_sum_ += m.iou;
  n_segments_ += report.n_gt_segments;
}

IouReport DatasetAccumulator::miou() const { return finish(tallies_); }

double DatasetAccumulator::cmiou() const { return n_segments_ > 0 ? best_iou_sum_ / n_segments_ : 0.0; }

}  // namespace selfseg
