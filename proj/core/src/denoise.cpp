#include "selfseg/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "selfseg/errors.hpp"

namespace selfseg {

void CrfParams::validate() const {
  if (!(smoothness_weight >= 0.0) || !std::isfinite(smoothness_weight))
    throw ValidationError("crf: smoothness_weight must be finite and >= 0");
  if (!(smoothness_theta > 0.0) || !std::isfinite(smoothness_theta))
    throw ValidationError("crf: smoothness_theta must be positive");
  if (n_iters < 1) throw ValidationError("crf: n_iters must be positive");
  if (!(unary_floor > 0.0 && unary_floor < 1.0)) throw ValidationError("crf: unary_floor must be in (0, 1)");
}

std::vector<int> DenoisedGrid::label_set() const {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

std::vector<double> crf_kernel(double theta, int* radius) {
  const int r = static_cast<int>(std::ceil(3.0 * theta));
  const int side = 2 * r + 1;
  std::vector<double> k(static_cast<std::size_t>(side) * side);
  for (int dr = -r; dr <= r; ++dr)
    for (int dc = -r; dc <= r; ++dc) {
      const double d2 = static_cast<double>(dr * dr + dc * dc);
      k[static_cast<std::size_t>(dr + r) * side + static_cast<std::size_t>(dc + r)] =
          (dr == 0 && dc == 0) ? 0.0 : std::exp(-d2 / (2.0 * theta * theta));
    }
  if (radius) *radius = r;
  return k;
}

ClusterProbabilityField crf_refine(const ClusterProbabilityField& field, const CrfParams& params) {
  params.validate();
  field.validate(1e-6);
  if (params.smoothness_weight == 0.0) return field;

  const int h = field.height;
  const int w = field.width;
  const int L = field.n_labels;
  int radius = 0;
  const std::vector<double> kernel = crf_kernel(params.smoothness_theta, &radius);
  const int side = 2 * radius + 1;

  std::vector<double> log_unary(field.probs.size());
  for (std::size_t i = 0; i < field.probs.size(); ++i)
    log_unary[i] = std::log(std::max(field.probs[i], params.unary_floor));

  ClusterProbabilityField q = field;
  std::vector<double> next(q.probs.size());
  std::vector<double> logits(static_cast<std::size_t>(L));
  for (int it = 0; it < params.n_iters; ++it) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t p = static_cast<std::size_t>(r) * w + c;
        std::fill(logits.begin(), logits.end(), 0.0);
        for (int dr = -radius; dr <= radius; ++dr) {
          const int rr = r + dr;
          if (rr < 0 || rr >= h) continue;
          for (int dc = -radius; dc <= radius; ++dc) {
            const int cc = c + dc;
            if (cc < 0 || cc >= w) continue;
            const double kw = kernel[static_cast<std::size_t>(dr + radius) * side + static_cast<std::size_t>(dc + radius)];
            if (kw == 0.0) continue;
            const double* qn = q.patch(rr * w + cc);
            for (int l = 0; l < L; ++l) logits[static_cast<std::size_t>(l)] += kw * qn[l];
          }
        }
        double mx = -std::numeric_limits<double>::infinity();
        for (int l = 0; l < L; ++l) {
          logits[static_cast<std::size_t>(l)] = log_unary[p * L + l] + params.smoothness_weight * logits[static_cast<std::size_t>(l)];
          mx = std::max(mx, logits[static_cast<std::size_t>(l)]);
        }
        double z = 0.0;
        for (int l = 0; l < L; ++l) {
          const double e = std::exp(logits[static_cast<std::size_t>(l)] - mx);
          next[p * L + l] = e;
          z += e;
        }
        for (int l = 0; l < L; ++l) next[p * L + l] /= z;
      }
    }
    q.probs.swap(next);
  }
  return q;
}

LabelGrid harden(const ClusterProbabilityField& field) {
  LabelGrid out{field.height, field.width, std::vector<int>(static_cast<std::size_t>(field.patch_count()))};
  for (int i = 0; i < field.patch_count(); ++i) {
    const double* p = field.patch(i);
    int best = 0;
    for (int l = 1; l < field.n_labels; ++l)
      if (p[l] > p[best]) best = l;
    out.labels[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

MajorityResult majority_filter(const LabelGrid& labels, int max_iters) {
  if (labels.height <= 0 || labels.width <= 0 ||
      labels.labels.size() != static_cast<std::size_t>(labels.height) * labels.width)
    throw ValidationError("majority filter: malformed label grid");
  if (max_iters < 1) throw ValidationError("majority filter: max_iters must be positive");
  for (int l : labels.labels)
    if (l < 0) throw ValidationError("majority filter: negative label");

  const int h = labels.height;
  const int w = labels.width;
  const int n_labels = *std::max_element(labels.labels.begin(), labels.labels.end()) + 1;
  MajorityResult res{labels, 0, false};
  LabelGrid next = labels;
  std::vector<int> votes(static_cast<std::size_t>(n_labels));
  while (res.passes < max_iters) {
    bool changed = false;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        std::fill(votes.begin(), votes.end(), 0);
        for (int rr = std::max(0, r - 1); rr <= std::min(h - 1, r + 1); ++rr)
          for (int cc = std::max(0, c - 1); cc <= std::min(w - 1, c + 1); ++cc)
            ++votes[static_cast<std::size_t>(res.grid.at(rr, cc))];
        const int mode = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        const std::size_t idx = static_cast<std::size_t>(r) * w + c;
        next.labels[idx] = mode;
        changed = changed || mode != res.grid.labels[idx];
      }
    }
    ++res.passes;
    res.grid.labels.swap(next.labels);
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  return res;
}

DenoisedGrid denoise(const ClusterProbabilityField& field, const CrfParams& params, int majority_max_iters) {
  const ClusterProbabilityField refined = crf_refine(field, params);
  MajorityResult filtered = majority_filter(harden(refined), majority_max_iters);
  DenoisedGrid out;
  out.height = filtered.grid.height;
  out.width = filtered.grid.width;
  out.labels = std::move(filtered.grid.labels);
  out.provenance = DenoiseProvenance{params, filtered.passes, majority_max_iters, filtered.converged};
  return out;
}

}  // namespace selfseg
