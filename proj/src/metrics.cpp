#include "dvit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dvit/errors.hpp"

namespace dvit {

ConfusionMatrix ConfusionMatrix::tally(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size())
    throw ContractError("confusion matrix: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(labels.size()) + " labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred_pos = predictions[i] == Label::Drowsy;
    const bool true_pos = labels[i] == Label::Drowsy;
    if (pred_pos && true_pos) ++cm.tp;
    else if (pred_pos) ++cm.fp;
    else if (true_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double binary_cross_entropy(std::span<const std::array<double, 2>> probabilities, std::span<const Label> labels) {
  if (probabilities.size() != labels.size())
    throw ContractError("binary_cross_entropy: " + std::to_string(probabilities.size()) + " probability pairs for " +
                        std::to_string(labels.size()) + " labels");
  if (labels.empty()) throw ContractError("binary_cross_entropy: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& p = probabilities[i];
    if (!(p[0] >= 0.0 && p[1] >= 0.0) || std::abs(p[0] + p[1] - 1.0) > 1e-6)
      throw ContractError("binary_cross_entropy: probability pair " + std::to_string(i) + " does not sum to 1");
    const double q = std::clamp(p[static_cast<std::size_t>(labels[i])], kProbabilityClip, 1.0 - kProbabilityClip);
    total -= std::log(q);
  }
  return total / static_cast<double>(labels.size());
}

Label predict_label(const std::array<double, 2>& probabilities) {
  return probabilities[1] > probabilities[0] ? Label::Vigilant : Label::Drowsy;
}

namespace {

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.support = tp + fn;
  if (tp + fp == 0) m.precision_undefined = true;
  else m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn == 0) m.recall_undefined = true;
  else m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1_undefined = m.precision + m.recall == 0.0;
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

}  // namespace

MetricsReport evaluate_metrics(std::span<const Label> predictions, std::span<const Label> labels,
                               std::span<const std::array<double, 2>> probabilities) {
  if (labels.empty()) throw ContractError("evaluate_metrics: empty input");
  MetricsReport r;
  r.confusion = ConfusionMatrix::tally(predictions, labels);
  const auto& cm = r.confusion;
  r.per_class[0] = class_metrics(cm.tp, cm.fp, cm.fn);
  r.per_class[1] = class_metrics(cm.tn, cm.fn, cm.fp);

  const double n = static_cast<double>(labels.size());
  r.macro.precision = (r.per_class[0].precision + r.per_class[1].precision) / 2.0;
  r.macro.recall = (r.per_class[0].recall + r.per_class[1].recall) / 2.0;
  r.macro.f1 = (r.per_class[0].f1 + r.per_class[1].f1) / 2.0;
  r.macro.support = labels.size();
  const double w0 = static_cast<double>(r.per_class[0].support) / n;
  const double w1 = static_cast<double>(r.per_class[1].support) / n;
  r.weighted.precision = w0 * r.per_class[0].precision + w1 * r.per_class[1].precision;
  r.weighted.recall = w0 * r.per_class[0].recall + w1 * r.per_class[1].recall;
  r.weighted.f1 = w0 * r.per_class[0].f1 + w1 * r.per_class[1].f1;
  r.weighted.support = labels.size();

  // Hamming loss is the counted mismatch fraction; accuracy is its complement
  // so the identity holds bit-for-bit.
  r.hamming_loss = static_cast<double>(cm.fp + cm.fn) / n;
  r.accuracy = 1.0 - r.hamming_loss;
  if (!probabilities.empty()) r.cross_entropy = binary_cross_entropy(probabilities, labels);
  return r;
}

KeyValues MetricsReport::to_key_values() const {
  KeyValues kv;
  kv["samples"] = std::to_string(confusion.total());
  kv["tp"] = std::to_string(confusion.tp);
  kv["fp"] = std::to_string(confusion.fp);
  kv["fn"] = std::to_string(confusion.fn);
  kv["tn"] = std::to_string(confusion.tn);
  kv["accuracy"] = format_fixed(accuracy);
  kv["hamming_loss"] = format_fixed(hamming_loss);
  kv["cross_entropy"] = cross_entropy ? format_fixed(*cross_entropy) : "-";
  const auto put = [&](const std::string& prefix, const ClassMetrics& m) {
    kv[prefix + ".precision"] = format_fixed(m.precision);
    kv[prefix + ".recall"] = format_fixed(m.recall);
    kv[prefix + ".f1"] = format_fixed(m.f1);
    kv[prefix + ".support"] = std::to_string(m.support);
    if (m.precision_undefined || m.recall_undefined || m.f1_undefined) kv[prefix + ".undefined"] = "1";
  };
  for (Label l : kLabels) put(std::string(to_string(l)), of(l));
  put("macro", macro);
  put("weighted", weighted);
  return kv;
}

std::string MetricsReport::to_text() const {
  std::ostringstream out;
  out << "class       precision  recall  f1-score  support\n";
  const auto row = [&](std::string name, const ClassMetrics& m) {
    name.resize(12, ' ');
    out << name << format_fixed(m.precision) << "     " << format_fixed(m.recall) << "  " << format_fixed(m.f1)
        << "    " << m.support << '\n';
  };
  for (Label l : kLabels) row(std::string(to_string(l)), of(l));
  row("macro", macro);
  row("weighted", weighted);
  out << "accuracy     " << format_fixed(accuracy) << '\n';
  out << "hamming      " << format_fixed(hamming_loss) << '\n';
  out << "cross-entropy " << (cross_entropy ? format_fixed(*cross_entropy) : std::string("-")) << '\n';
  return out.str();
}

std::optional<double> class_f_score(std::span<const Label> predictions, std::span<const Label> labels, Label cls) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] == cls, t = labels[i] == cls;
    if (p && t) ++tp;
    else if (p) ++fp;
    else if (t) ++fn;
  }
  if (tp + fp + fn == 0) return std::nullopt;
  const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return f1_score(precision, recall);
}

std::string format_cell(const std::optional<double>& v) { return v ? format_fixed(*v) : std::string("-"); }

const ScenarioCell* ScenarioTable::find(Scenario s, TimeOfDay t) const {
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (rows[r] == s && columns[c] == t) return &cells[r][c];
  return nullptr;
}

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

ScenarioTable scenario_breakdown(std::span<const Label> predictions, std::span<const Sample> samples) {
  if (predictions.size() != samples.size())
    throw ContractError("scenario_breakdown: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(samples.size()) + " samples");
  ScenarioTable table;
  table.rows = {Scenario::BareFace, Scenario::Spectacles, Scenario::Sunglasses};
  table.columns = {TimeOfDay::Day, TimeOfDay::Evening, TimeOfDay::Night};
  for (Scenario extra : {Scenario::Other, Scenario::Unknown})
    for (const Sample& s : samples)
      if (s.scenario == extra) {
        table.rows.push_back(extra);
        break;
      }
  for (const Sample& s : samples)
    if (s.time == TimeOfDay::Unknown) {
      table.columns.push_back(TimeOfDay::Unknown);
      break;
    }

  table.cells.assign(table.rows.size(), std::vector<ScenarioCell>(table.columns.size()));
  std::vector<std::vector<double>> row_acc(table.rows.size()), col_acc(table.columns.size());
  std::vector<double> all_acc;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      std::vector<Label> pred, truth;
      for (std::size_t i = 0; i < samples.size(); ++i)
        if (samples[i].scenario == table.rows[r] && samples[i].time == table.columns[c]) {
          pred.push_back(predictions[i]);
          truth.push_back(samples[i].label);
        }
      ScenarioCell& cell = table.cells[r][c];
      cell.samples = truth.size();
      if (truth.empty()) continue;
      cell.f_drowsy = class_f_score(pred, truth, Label::Drowsy);
      cell.f_vigilant = class_f_score(pred, truth, Label::Vigilant);
      std::vector<double> defined;
      if (cell.f_drowsy) defined.push_back(*cell.f_drowsy);
      if (cell.f_vigilant) defined.push_back(*cell.f_vigilant);
      cell.accuracy = mean_of(defined);
      row_acc[r].push_back(*cell.accuracy);
      col_acc[c].push_back(*cell.accuracy);
      all_acc.push_back(*cell.accuracy);
    }
  }
  for (const auto& v : row_acc) table.row_average.push_back(mean_of(v));
  for (const auto& v : col_acc) table.column_average.push_back(mean_of(v));
  table.overall = mean_of(all_acc);
  return table;
}

std::string ScenarioTable::to_csv() const {
  std::string out = "scenario,time,samples,f_drowsy,f_vigilant,accuracy\n";
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const ScenarioCell& cell = cells[r][c];
      out += std::string(to_string(rows[r])) + ',' + std::string(to_string(columns[c])) + ',' +
             std::to_string(cell.samples) + ',' + format_cell(cell.f_drowsy) + ',' + format_cell(cell.f_vigilant) +
             ',' + format_cell(cell.accuracy) + '\n';
    }
  for (std::size_t r = 0; r < rows.size(); ++r)
    out += std::string(to_string(rows[r])) + ",all,-,-,-," + format_cell(row_average[r]) + '\n';
  for (std::size_t c = 0; c < columns.size(); ++c)
    out += "all," + std::string(to_string(columns[c])) + ",-,-,-," + format_cell(column_average[c]) + '\n';
  out += "all,all,-,-,-," + format_cell(overall) + '\n';
  return out;
}

std::string ScenarioTable::to_text() const {
  const auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::string out = pad("", 12);
  for (TimeOfDay t : columns) out += pad(std::string(to_string(t)), 10);
  out += "average\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += pad(std::string(to_string(rows[r])), 12);
    for (std::size_t c = 0; c < columns.size(); ++c) out += pad(format_cell(cells[r][c].accuracy), 10);
    out += format_cell(row_average[r]) + '\n';
  }
  out += pad("average", 12);
  for (std::size_t c = 0; c < columns.size(); ++c) out += pad(format_cell(column_average[c]), 10);
  out += format_cell(overall) + '\n';
  return out;
}

}  // namespace dvit
