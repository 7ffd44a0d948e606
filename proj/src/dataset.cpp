#include "dvit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "dvit/errors.hpp"
#include "dvit/keyvalue.hpp"
#include "dvit/png_io.hpp"

namespace fs = std::filesystem;

namespace dvit {

std::string_view to_string(Label label) { return label == Label::Drowsy ? "drowsy" : "vigilant"; }

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::BareFace: return "bare_face";
    case Scenario::Spectacles: return "spectacles";
    case Scenario::Sunglasses: return "sunglasses";
    case Scenario::Other: return "other";
    case Scenario::Unknown: break;
  }
  return "unknown";
}

std::string_view to_string(TimeOfDay time) {
  switch (time) {
    case TimeOfDay::Day: return "day";
    case TimeOfDay::Evening: return "evening";
    case TimeOfDay::Night: return "night";
    case TimeOfDay::Unknown: break;
  }
  return "unknown";
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "drowsy") return Label::Drowsy;
  if (s == "vigilant") return Label::Vigilant;
  return std::nullopt;
}

std::optional<Scenario> parse_scenario(std::string_view s) {
  for (Scenario v : {Scenario::BareFace, Scenario::Spectacles, Scenario::Sunglasses, Scenario::Other,
                     Scenario::Unknown})
    if (s == to_string(v)) return v;
  if (s.empty()) return Scenario::Unknown;
  return std::nullopt;
}

std::optional<TimeOfDay> parse_time(std::string_view s) {
  for (TimeOfDay v : {TimeOfDay::Day, TimeOfDay::Evening, TimeOfDay::Night, TimeOfDay::Unknown})
    if (s == to_string(v)) return v;
  if (s.empty()) return TimeOfDay::Unknown;
  return std::nullopt;
}

std::string DatasetManifest::to_csv() const {
  std::string out = "path,label,subject,scenario,time\n";
  for (const Sample& s : samples) {
    out += s.path.lexically_relative(root).generic_string();
    out += ',';
    out += to_string(s.label);
    out += ',' + s.subject + ',';
    out += to_string(s.scenario);
    out += ',';
    out += to_string(s.time);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<fs::path> list_files(const fs::path& dir, bool png_only) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (png_only) {
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext != ".png") continue;
    }
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

struct MetaRow {
  std::string subject;
  Scenario scenario;
  TimeOfDay time;
};

std::map<std::string, MetaRow> read_meta(const fs::path& path) {
  std::map<std::string, MetaRow> rows;
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (line_no == 1) {
      if (fields != std::vector<std::string>{"path", "subject", "scenario", "time"})
        throw ParseError(1, "meta.csv header must be 'path,subject,scenario,time'");
      continue;
    }
    if (fields.size() != 4) throw ParseError(line_no, "meta.csv: expected 4 fields");
    const auto scenario = parse_scenario(fields[2]);
    if (!scenario) throw ParseError(line_no, "meta.csv: unknown scenario '" + fields[2] + "'");
    const auto time = parse_time(fields[3]);
    if (!time) throw ParseError(line_no, "meta.csv: unknown time '" + fields[3] + "'");
    rows[fs::path(fields[0]).lexically_normal().generic_string()] =
        MetaRow{fields[1].empty() ? "unknown" : fields[1], *scenario, *time};
  }
  return rows;
}

}  // namespace

DatasetManifest ingest_directory(const fs::path& root) {
  if (!fs::is_directory(root)) throw IngestionError("dataset root " + root.string() + " is not a directory");
  DatasetManifest manifest;
  manifest.root = root;

  std::map<std::string, MetaRow> meta;
  if (fs::exists(root / "meta.csv")) meta = read_meta(root / "meta.csv");

  std::vector<ImageFrame> frames;
  std::vector<std::string> failures;
  for (Label label : kLabels) {
    const fs::path dir = root / std::string(to_string(label));
    if (!fs::is_directory(dir))
      throw IngestionError("class directory '" + std::string(to_string(label)) + "/' is missing under " +
                           root.string());
    const auto files = list_files(dir, true);
    if (files.empty())
      throw IngestionError("class directory '" + std::string(to_string(label)) + "/' contains no PNG images");
    for (const fs::path& file : files) {
      Sample s;
      s.path = file;
      s.label = label;
      if (auto it = meta.find(file.lexically_relative(root).generic_string()); it != meta.end()) {
        s.subject = it->second.subject;
        s.scenario = it->second.scenario;
        s.time = it->second.time;
      }
      try {
        const ImageFrame raw = read_png(file);
        const std::vector<double> zero(raw.channels(), 0.0), one(raw.channels(), 1.0);
        frames.push_back(normalize_frame(raw, zero, one));
      } catch (const Error&) {
        failures.push_back(file.string());
        continue;
      }
      manifest.samples.push_back(std::move(s));
      ++manifest.class_counts[static_cast<std::size_t>(label)];
    }
  }
  if (!failures.empty()) {
    std::string msg = "cannot decode " + std::to_string(failures.size()) + " image(s):";
    for (const auto& f : failures) msg += " " + f;
    throw IngestionError(msg);
  }
  const std::size_t channels = frames.front().channels();
  for (ImageFrame& f : frames)
    if (f.channels() != channels) f = convert_channels(f, channels);
  manifest.stats = compute_channel_stats(frames);
  return manifest;
}

std::vector<std::size_t> stride_indices(std::size_t count, std::size_t stride, std::size_t phase) {
  if (stride == 0) throw ContractError("sample_frames: stride must be >= 1");
  if (phase >= stride) throw ContractError("sample_frames: phase must lie in [0, stride)");
  std::vector<std::size_t> out;
  for (std::size_t i = phase; i < count; i += stride) out.push_back(i);
  return out;
}

std::vector<fs::path> sample_frames(const fs::path& frame_dir, std::size_t stride, std::uint64_t seed) {
  if (stride == 0) throw ContractError("sample_frames: stride must be >= 1");
  if (!fs::is_directory(frame_dir)) throw IngestionError("frame directory " + frame_dir.string() + " not found");
  const auto files = list_files(frame_dir, false);
  if (files.empty()) throw IngestionError("frame directory " + frame_dir.string() + " is empty");
  SeededGenerator rng(seed);
  const std::size_t phase = static_cast<std::size_t>(rng.uniform_int(stride));
  std::vector<fs::path> out;
  for (std::size_t i : stride_indices(files.size(), stride, phase)) out.push_back(files[i]);
  return out;
}

std::string SplitSpec::name() const {
  return std::to_string(static_cast<long>(std::lround(train_fraction * 100))) + "-" +
         std::to_string(static_cast<long>(std::lround(validation_fraction * 100)));
}

SplitSpec SplitSpec::preset(std::string_view name, std::uint64_t seed) {
  const auto dash = name.find('-');
  if (dash == std::string_view::npos) throw ContractError("split preset must look like '80-20'");
  const long long t = parse_int(name.substr(0, dash), "split preset");
  const long long v = parse_int(name.substr(dash + 1), "split preset");
  if (t <= 0 || v <= 0 || t + v > 100) throw ContractError("split preset percentages must be positive, sum <= 100");
  SplitSpec s;
  s.train_fraction = static_cast<double>(t) / 100.0;
  s.validation_fraction = static_cast<double>(v) / 100.0;
  s.seed = seed;
  return s;
}

void shuffle_indices(std::vector<std::size_t>& indices, SeededGenerator& rng) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(indices[i - 1], indices[j]);
  }
}

SplitResult make_splits(std::span<const Sample> samples, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0) || !(spec.validation_fraction > 0.0) ||
      spec.train_fraction + spec.validation_fraction > 1.0 + 1e-12)
    throw ContractError("make_splits: fractions must be positive and sum to at most 1");
  if (samples.empty()) throw ContractError("make_splits: no samples");
  SeededGenerator rng(spec.seed);
  SplitResult out;
  const auto take = [&](std::vector<std::size_t> pool, const std::string& what) {
    shuffle_indices(pool, rng);
    const double n = static_cast<double>(pool.size());
    const std::size_t n_train = static_cast<std::size_t>(std::lround(spec.train_fraction * n));
    std::size_t n_val = static_cast<std::size_t>(std::lround(spec.validation_fraction * n));
    n_val = std::min(n_val, pool.size() - std::min(n_train, pool.size()));
    if (n_train == 0 || n_val == 0)
      throw ContractError("make_splits: " + what + " has " + std::to_string(pool.size()) +
                          " samples, too few for a " + spec.name() + " split");
    out.train.insert(out.train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.validation.insert(out.validation.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train),
                          pool.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  };

  if (spec.subject_disjoint) {
    std::map<std::string, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < samples.size(); ++i) by_subject[samples[i].subject].push_back(i);
    std::vector<std::size_t> order(by_subject.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_indices(order, rng);
    std::vector<const std::vector<std::size_t>*> groups;
    for (const auto& [subject, idx] : by_subject) groups.push_back(&idx);
    const double n = static_cast<double>(samples.size());
    const double train_target = spec.train_fraction * n;
    const double val_target = spec.validation_fraction * n;
    for (std::size_t g : order) {
      const auto& idx = *groups[g];
      if (static_cast<double>(out.train.size()) < train_target)
        out.train.insert(out.train.end(), idx.begin(), idx.end());
      else if (static_cast<double>(out.validation.size()) < val_target)
        out.validation.insert(out.validation.end(), idx.begin(), idx.end());
    }
    if (out.train.empty() || out.validation.empty())
      throw ContractError("make_splits: too few subjects for a subject-disjoint split");
  } else if (spec.stratified) {
    for (Label label : kLabels) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < samples.size(); ++i)
        if (samples[i].label == label) pool.push_back(i);
      take(std::move(pool), "class '" + std::string(to_string(label)) + "'");
    }
  } else {
    std::vector<std::size_t> pool(samples.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    take(std::move(pool), "the dataset");
  }
  shuffle_indices(out.train, rng);
  shuffle_indices(out.validation, rng);
  return out;
}

ImageFrame convert_channels(const ImageFrame& frame, std::size_t channels) {
  if (frame.channels() == channels) return frame;
  ImageFrame out(frame.height(), frame.width(), channels);
  for (std::size_t y = 0; y < frame.height(); ++y)
    for (std::size_t x = 0; x < frame.width(); ++x) {
      if (frame.channels() == 1) {
        for (std::size_t c = 0; c < channels; ++c) out.at(y, x, c) = frame.at(y, x, 0);
      } else if (channels == 1) {
        double s = 0.0;
        for (std::size_t c = 0; c < frame.channels(); ++c) s += frame.at(y, x, c);
        out.at(y, x, 0) = s / static_cast<double>(frame.channels());
      } else {
        throw ContractError("convert_channels: unsupported conversion");
      }
    }
  return out;
}

Dataset load_frames(std::span<const Sample> samples, const VitConfig& config) {
  Dataset out;
  out.reserve(samples.size());
  const std::vector<double> zero(config.channels(), 0.0), one(config.channels(), 1.0);
  for (const Sample& s : samples) {
    const ImageFrame raw = convert_channels(read_png(s.path), config.channels());
    out.push_back(LabeledFrame{resize_bilinear(normalize_frame(raw, zero, one), config.height(), config.width()),
                               s.label, s});
  }
  return out;
}

Dataset select(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(data.at(i));
  return out;
}

}  // namespace dvit
