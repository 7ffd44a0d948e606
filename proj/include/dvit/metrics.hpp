#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvit/dataset.hpp"
#include "dvit/keyvalue.hpp"

namespace dvit {

inline constexpr double kProbabilityClip = 1e-7;

/// Counts with drowsy as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  static ConfusionMatrix tally(std::span<const Label> predictions, std::span<const Label> labels);
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  // Set when the denominator was zero and the value was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct MetricsReport {
  ConfusionMatrix confusion;
  std::array<ClassMetrics, 2> per_class;  // indexed by Label
  ClassMetrics macro;
  ClassMetrics weighted;
  double accuracy = 0.0;
  double hamming_loss = 0.0;
  std::optional<double> cross_entropy;

  const ClassMetrics& of(Label label) const { return per_class[static_cast<std::size_t>(label)]; }
  /// Flat key/value report, 4 decimal places.
  KeyValues to_key_values() const;
  std::string to_text() const;
};

/// Harmonic mean; 0 when p + r == 0.
double f1_score(double precision, double recall);

/// Mean of -log p(true class) with probabilities clipped to
/// [kProbabilityClip, 1 - kProbabilityClip].
double binary_cross_entropy(std::span<const std::array<double, 2>> probabilities, std::span<const Label> labels);

/// `probabilities` is optional; when given it must align with `labels` and
/// fills the cross-entropy field.
MetricsReport evaluate_metrics(std::span<const Label> predictions, std::span<const Label> labels,
                               std::span<const std::array<double, 2>> probabilities = {});

/// Argmax with ties going to drowsy.
Label predict_label(const std::array<double, 2>& probabilities);

struct ScenarioCell {
  std::size_t samples = 0;
  std::optional<double> f_drowsy;
  std::optional<double> f_vigilant;
  /// Mean of the defined per-class F-scores.
  std::optional<double> accuracy;
};

/// Scenario x time grid. Rows bare_face, spectacles, sunglasses and columns
/// day, evening, night are always present; other/unknown appear only when
/// populated.
struct ScenarioTable {
  std::vector<Scenario> rows;
  std::vector<TimeOfDay> columns;
  std::vector<std::vector<ScenarioCell>> cells;  // [row][column]
  std::vector<std::optional<double>> row_average;
  std::vector<std::optional<double>> column_average;
  std::optional<double> overall;

  const ScenarioCell* find(Scenario s, TimeOfDay t) const;
  /// Long form: scenario,time,samples,f_drowsy,f_vigilant,accuracy, then
  /// row, column and overall averages with `all` in the pooled position.
  std::string to_csv() const;
  std::string to_text() const;
};

/// F-score of one class inside a group; empty when the class never occurs
/// as truth or prediction.
std::optional<double> class_f_score(std::span<const Label> predictions, std::span<const Label> labels, Label cls);

ScenarioTable scenario_breakdown(std::span<const Label> predictions, std::span<const Sample> samples);

/// Fixed 4-decimal rendering, "-" when empty.
std::string format_cell(const std::optional<double>& v);

}  // namespace dvit
