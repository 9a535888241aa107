#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "geofuse/errors.hpp"
#include "geofuse/grid.hpp"

namespace geofuse {

struct ClassScore {
  double iou = 0.0;
  double dice = 0.0;
  bool absent = false;  // class in neither pred nor truth; scores set to 1 by convention
};

/// Confusion-matrix segmentation metrics. Nodata pixels in either grid are
/// excluded. A class absent from both prediction and truth scores
/// IoU = Dice = 1 and is flagged so callers can choose whether to average it.
struct SegmentationResult {
  std::vector<ClassScore> per_class;
  double overall_accuracy = 0.0;
  int n_classes = 0;
  std::vector<long long> confusion;  // row = truth, col = pred

  double mean_iou(bool include_absent = true) const {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : per_class) {
      if (!include_absent && c.absent) continue;
      sum += c.iou;
      ++n;
    }
    return n ? sum / n : 0.0;
  }
};

inline SegmentationResult segmentation_metrics(const Grid& pred, const Grid& truth, int n_classes) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw shape_error("segmentation_metrics: prediction and truth differ in shape");
  if (n_classes <= 0) throw parameter_error("segmentation_metrics: class count must be positive");

  SegmentationResult res;
  res.n_classes = n_classes;
  res.confusion.assign(static_cast<size_t>(n_classes) * n_classes, 0);
  long long valid = 0, correct = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    double pv = pred.data[i], tv = truth.data[i];
    if (pred.is_nodata(pv) || truth.is_nodata(tv)) continue;
    int p = static_cast<int>(pv), t = static_cast<int>(tv);
    if (p < 0 || p >= n_classes || t < 0 || t >= n_classes)
      throw data_error("segmentation_metrics: class id out of range at pixel " + std::to_string(i));
    ++res.confusion[static_cast<size_t>(t) * n_classes + p];
    ++valid;
    if (p == t) ++correct;
  }
  res.overall_accuracy = valid ? static_cast<double>(correct) / static_cast<double>(valid) : 0.0;

  res.per_class.resize(static_cast<size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    long long tp = res.confusion[static_cast<size_t>(c) * n_classes + c];
    long long fn = 0, fp = 0;
    for (int j = 0; j < n_classes; ++j) {
      if (j == c) continue;
      fn += res.confusion[static_cast<size_t>(c) * n_classes + j];
      fp += res.confusion[static_cast<size_t>(j) * n_classes + c];
    }
    ClassScore& score = res.per_class[static_cast<size_t>(c)];
    if (tp + fp + fn == 0) {
      score.absent = true;
      score.iou = 1.0;
      score.dice = 1.0;
    } else {
      score.iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      score.dice = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    }
  }
  return res;
}

/// Coefficient of determination, 1 - SS_res / SS_tot with SS_tot about the
/// truth mean.
inline double r_squared(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size()) throw shape_error("r_squared: length mismatch");
  if (truth.size() < 2) throw parameter_error("r_squared: need at least 2 samples");
  double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) throw degenerate_error("r_squared: truth is constant");
  return 1.0 - ss_res / ss_tot;
}

struct LabelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double average_precision = 0.0;
  long long positives = 0;
  bool excluded = false;  // no positives in truth: out of the macro means
};

struct MultiLabelResult {
  std::vector<LabelScore> per_label;
  double macro_f1 = 0.0;
  double macro_average_precision = 0.0;
  int n_labels = 0;
};

/// Multi-label scores: per-label F1 from thresholded scores (score >=
/// threshold predicts positive) and AP as the area under the precision-recall
/// step function, ranking by descending score with index as the tiebreak.
/// Labels without positives are flagged and excluded from both macro means.
inline MultiLabelResult multilabel_metrics(const std::vector<std::vector<double>>& scores,
                                           const std::vector<std::vector<int>>& truth,
                                           double threshold = 0.5) {
  size_t n = scores.size();
  if (truth.size() != n) throw shape_error("multilabel_metrics: row count mismatch");
  if (n == 0) throw parameter_error("multilabel_metrics: empty input");
  size_t labels = scores[0].size();
  for (size_t i = 0; i < n; ++i)
    if (scores[i].size() != labels || truth[i].size() != labels)
      throw shape_error("multilabel_metrics: ragged row " + std::to_string(i));

  MultiLabelResult res;
  res.n_labels = static_cast<int>(labels);
  res.per_label.resize(labels);
  double f1_sum = 0.0, ap_sum = 0.0;
  int included = 0;

  for (size_t l = 0; l < labels; ++l) {
    LabelScore& ls = res.per_label[l];
    long long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < n; ++i) {
      bool pos = truth[i][l] != 0;
      bool hit = scores[i][l] >= threshold;
      if (pos) ++ls.positives;
      if (hit && pos) ++tp;
      else if (hit) ++fp;
      else if (pos) ++fn;
    }
    ls.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    ls.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    ls.f1 = (2 * tp + fp + fn) ? 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn) : 0.0;

    if (ls.positives == 0) {
      ls.excluded = true;
      continue;
    }

    // AP: walk the ranked list, averaging precision at each positive.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (scores[a][l] != scores[b][l]) return scores[a][l] > scores[b][l];
      return a < b;
    });
    long long seen_pos = 0;
    double ap = 0.0;
    for (size_t rank = 0; rank < n; ++rank) {
      if (truth[order[rank]][l] != 0) {
        ++seen_pos;
        ap += static_cast<double>(seen_pos) / static_cast<double>(rank + 1);
      }
    }
    ls.average_precision = ap / static_cast<double>(ls.positives);

    f1_sum += ls.f1;
    ap_sum += ls.average_precision;
    ++included;
  }
  res.macro_f1 = included ? f1_sum / included : 0.0;
  res.macro_average_precision = included ? ap_sum / included : 0.0;
  return res;
}

// --- report emission -------------------------------------------------------

namespace detail {

inline std::string fmt_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

/// One-level key=value report (the text side of the metric interfaces).
inline std::string segmentation_report(const SegmentationResult& r) {
  std::string out;
  out += "overall_accuracy=" + detail::fmt_metric(r.overall_accuracy) + "\n";
  out += "mean_iou=" + detail::fmt_metric(r.mean_iou()) + "\n";
  for (size_t c = 0; c < r.per_class.size(); ++c) {
    out += "iou_" + std::to_string(c) + "=" + detail::fmt_metric(r.per_class[c].iou) + "\n";
    out += "dice_" + std::to_string(c) + "=" + detail::fmt_metric(r.per_class[c].dice) + "\n";
    if (r.per_class[c].absent) out += "absent_" + std::to_string(c) + "=1\n";
  }
  return out;
}

inline std::string segmentation_csv(const SegmentationResult& r) {
  std::string out = "class,iou,dice,absent\n";
  for (size_t c = 0; c < r.per_class.size(); ++c)
    out += std::to_string(c) + "," + detail::fmt_metric(r.per_class[c].iou) + "," +
           detail::fmt_metric(r.per_class[c].dice) + "," + (r.per_class[c].absent ? "1" : "0") + "\n";
  return out;
}

inline std::string multilabel_report(const MultiLabelResult& r) {
  std::string out;
  out += "macro_f1=" + detail::fmt_metric(r.macro_f1) + "\n";
  out += "macro_average_precision=" + detail::fmt_metric(r.macro_average_precision) + "\n";
  for (size_t l = 0; l < r.per_label.size(); ++l) {
    const LabelScore& ls = r.per_label[l];
    out += "f1_" + std::to_string(l) + "=" + detail::fmt_metric(ls.f1) + "\n";
    out += "ap_" + std::to_string(l) + "=" + detail::fmt_metric(ls.average_precision) + "\n";
    if (ls.excluded) out += "excluded_" + std::to_string(l) + "=1\n";
  }
  return out;
}

inline std::string multilabel_csv(const MultiLabelResult& r) {
  std::string out = "label,precision,recall,f1,average_precision,excluded\n";
  for (size_t l = 0; l < r.per_label.size(); ++l) {
    const LabelScore& ls = r.per_label[l];
    out += std::to_string(l) + "," + detail::fmt_metric(ls.precision) + "," +
           detail::fmt_metric(ls.recall) + "," + detail::fmt_metric(ls.f1) + "," +
           detail::fmt_metric(ls.average_precision) + "," + (ls.excluded ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace geofuse
